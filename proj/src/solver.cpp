#include "njcr/solver.hpp"

#include "njcr/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

namespace njcr {

void SolverConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be > 0");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (max_iter == 0) throw ConfigError("max_iter must be >= 1");
  if (kernel == KernelType::rbf && !(sigma > 0.0)) throw ConfigError("rbf sigma must be > 0");
}

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + " contains non-finite values");
}

// Factorization of the (possibly ablated) A-update system.
Eigen::LLT<Eigen::MatrixXd> factor_system(const Eigen::MatrixXd& gram, const SolverConfig& cfg,
                                          bool use_rho) {
  const Eigen::Index k = gram.rows();
  Eigen::MatrixXd base = 2.0 * gram;
  base.diagonal().array() += cfg.lambda + (use_rho && cfg.nonnegative ? cfg.rho : 0.0);
  Eigen::LLT<Eigen::MatrixXd> llt(base);
  if (llt.info() != Eigen::Success) throw NumericError("A-update system is not positive definite");
  if (use_rho && cfg.sum_to_one) {
    llt.rankUpdate(Eigen::VectorXd::Ones(k), cfg.rho);
    if (llt.info() != Eigen::Success) throw NumericError("rank-one update of the A-update system failed");
  }
  const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
  if (!(diag.minCoeff() > 0.0) || !diag.allFinite()) throw NumericError("A-update system is singular");
  return llt;
}

// Applies M^{-1} for the A-update matrix M. When M is a multiple of the
// identity plus a low-rank term (G = D^T D with K > L), the spectral form
// c^{-1} (I - U diag(w) U^T) is cheaper than two triangular solves.
class SystemInverse {
 public:
  SystemInverse(const Eigen::MatrixXd& gram, const SolverConfig& cfg) : llt_(factor_system(gram, cfg, true)) {
    const Eigen::Index k = gram.rows();
    if (k < 64) return;
    c_ = cfg.lambda + cfg.rho;
    Eigen::MatrixXd z = 2.0 * gram;
    if (cfg.sum_to_one) z.array() += cfg.rho;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(z);
    if (es.info() != Eigen::Success) return;
    const Eigen::VectorXd& s = es.eigenvalues();
    // Eigenvalues of the PSD part at or below this level are roundoff.
    const double floor = 1e-10 * c_;
    Eigen::Index first = 0;
    while (first < k && s(first) <= floor) ++first;
    const Eigen::Index rank = k - first;
    if (rank * 4 > k) return;
    basis_ = es.eigenvectors().rightCols(rank);
    weights_ = s.tail(rank).array() / (c_ + s.tail(rank).array());
    low_rank_ = true;
  }

  void apply(Eigen::Ref<Eigen::MatrixXd> rhs) const {
    if (!low_rank_) {
      llt_.solveInPlace(rhs);
      return;
    }
    Eigen::MatrixXd proj = basis_.transpose() * rhs;
    proj = weights_.asDiagonal() * proj;
    rhs.noalias() -= basis_ * proj;
    rhs *= 1.0 / c_;
  }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  bool low_rank_ = false;
  double c_ = 0.0;
  Eigen::MatrixXd basis_;
  Eigen::VectorXd weights_;
};

SolveResult closed_form(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross, const SolverConfig& cfg) {
  // Without nonnegativity the problem is an equality-constrained (or free)
  // least squares: a = a0 + u (1 - 1^T a0) / (1^T u), u = M^{-1} 1.
  const auto llt = factor_system(gram, cfg, false);
  SolveResult out;
  out.coefficients = llt.solve(2.0 * cross);
  if (cfg.sum_to_one) {
    const Eigen::VectorXd u = llt.solve(Eigen::VectorXd::Ones(gram.rows()));
    const double denom = u.sum();
    if (!(std::abs(denom) > 0.0)) throw NumericError("degenerate sum-to-one system");
    const Eigen::RowVectorXd shortfall = (1.0 - out.coefficients.colwise().sum().array()).matrix() / denom;
    out.coefficients += u * shortfall;
  }
  require_finite(out.coefficients, "coefficients");
  out.report.closed_form = true;
  out.report.converged = true;
  out.report.iterations = 0;
  if (cfg.sum_to_one) {
    out.report.primal_residual = (out.coefficients.colwise().sum().array() - 1.0).matrix().norm();
  }
  return out;
}

}  // namespace

Eigen::MatrixXd admm_system_matrix(const Eigen::MatrixXd& gram, const SolverConfig& cfg) {
  Eigen::MatrixXd m = 2.0 * gram;
  const bool iterative = cfg.nonnegative;
  m.diagonal().array() += cfg.lambda + (iterative ? cfg.rho : 0.0);
  if (iterative && cfg.sum_to_one) m.array() += cfg.rho;
  return m;
}

SolveResult solve_constrained(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross,
                              const SolverConfig& cfg, const AdmmObserver& observer) {
  cfg.validate();
  const Eigen::Index k = gram.rows();
  const Eigen::Index n = cross.cols();
  if (k < 1 || gram.cols() != k) throw ConfigError("Gram matrix must be square and non-empty");
  if (cross.rows() != k) throw ConfigError("cross term row count must match the dictionary size");
  require_finite(gram, "Gram matrix");
  require_finite(cross, "cross term");
  if (!cfg.nonnegative) return closed_form(gram, cross, cfg);

  const SystemInverse inverse(gram, cfg);
  const double rho = cfg.rho;
  const bool sum_to_one = cfg.sum_to_one;

  // omega = (A + Delta)_+ and the updated Delta = (A + Delta)_- have disjoint
  // supports, so the pair is stored as their sum V: omega = V_+, Delta = V_-,
  // and omega - Delta = |V|.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k, n);
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(k, n);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);

  // Columns decouple, so each iteration runs over fixed column blocks. Block
  // partial sums are reduced in block order for thread-count independence.
  constexpr Eigen::Index kBlock = 256;
  const auto blocks = static_cast<std::size_t>((n + kBlock - 1) / kBlock);
  std::vector<double> primal_parts(blocks), dual_parts(blocks);

  SolveResult out;
  auto& rep = out.report;
  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    parallel_for(0, blocks, [&](std::size_t b) {
      const Eigen::Index j0 = static_cast<Eigen::Index>(b) * kBlock;
      const Eigen::Index cols = std::min(kBlock, n - j0);
      // A^{k+1} = M^{-1} (2H + rho (omega - Delta) + rho 1 (1 - eta)^T)
      auto a = A.middleCols(j0, cols);
      a = 2.0 * cross.middleCols(j0, cols) + rho * V.middleCols(j0, cols).cwiseAbs();
      if (sum_to_one) {
        a.rowwise() += (rho * (1.0 - eta.segment(j0, cols).array())).matrix().transpose();
      }
      inverse.apply(a);

      const auto a_arr = a.array();
      auto v = V.middleCols(j0, cols).array();
      const auto v_next = a_arr + v.min(0.0);
      double primal_sq = (a_arr - v_next.max(0.0)).square().sum();
      const double dual_sq = (v_next.max(0.0) - v.max(0.0)).square().sum();
      v = v_next.eval();
      if (sum_to_one) {
        const Eigen::ArrayXd sum_gap = a.colwise().sum().transpose().array() - 1.0;
        eta.segment(j0, cols).array() += sum_gap;
        primal_sq += sum_gap.square().sum();
      }
      primal_parts[b] = primal_sq;
      dual_parts[b] = dual_sq;
    });
    double primal_sq = 0.0;
    double dual_sq = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      primal_sq += primal_parts[b];
      dual_sq += dual_parts[b];
    }
    const double primal = std::sqrt(primal_sq);
    const double dual = rho * std::sqrt(dual_sq);

    rep.iterations = it;
    rep.primal_residual = primal;
    rep.dual_residual = dual;
    if (cfg.record_history) {
      rep.primal_history.push_back(primal);
      rep.dual_history.push_back(dual);
    }
    if (!std::isfinite(primal) || !std::isfinite(dual)) throw NumericError("ADMM iterates diverged");
    if (observer) {
      const Eigen::MatrixXd omega = V.cwiseMax(0.0);
      const Eigen::MatrixXd Delta = V.cwiseMin(0.0);
      observer(AdmmState{A, omega, Delta, eta, it, primal, dual});
    }
    if (primal <= cfg.epsilon && dual <= cfg.epsilon) {
      rep.converged = true;
      break;
    }
  }
  out.coefficients = std::move(A);
  return out;
}

SolveResult solve_njcr(const PixelMatrix& pixels, const Eigen::MatrixXd& dictionary,
                       const SolverConfig& cfg, const AdmmObserver& observer) {
  if (pixels.rows() != dictionary.rows()) throw ConfigError("pixel and dictionary band counts differ");
  const Eigen::MatrixXd gram = dictionary.transpose() * dictionary;
  const Eigen::MatrixXd cross = dictionary.transpose() * pixels;
  return solve_constrained(gram, cross, cfg, observer);
}

SolveResult solve_njcr(const PixelMatrix& pixels, const UnionDictionary& dictionary,
                       const SolverConfig& cfg, const AdmmObserver& observer) {
  return solve_njcr(pixels, dictionary.atoms, cfg, observer);
}

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("rbf sigma must be > 0");
  if (p.rows() != q.rows()) throw ConfigError("kernel arguments have different dimensions");
  const Eigen::VectorXd pn = p.colwise().squaredNorm().transpose();
  const Eigen::VectorXd qn = q.colwise().squaredNorm().transpose();
  Eigen::MatrixXd g(p.cols(), q.cols());
  g.noalias() = -2.0 * p.transpose() * q;
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const auto cols = static_cast<std::size_t>(g.cols());
  parallel_for(0, cols, [&](std::size_t jj) {
    const auto j = static_cast<Eigen::Index>(jj);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double d2 = std::max(pn(i) + qn(j) + g(i, j), 0.0);
      g(i, j) = std::exp(-d2 * inv);
    }
  });
  if (&p == &q) {
    // Exact symmetry and unit diagonal for a Gram matrix of one set.
    g = 0.5 * (g + g.transpose()).eval();
    g.diagonal().setOnes();
  }
  return g;
}

Eigen::MatrixXd kernel_gram(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q, KernelType kernel,
                            double sigma) {
  if (kernel == KernelType::linear) {
    if (p.rows() != q.rows()) throw ConfigError("kernel arguments have different dimensions");
    return p.transpose() * q;
  }
  return rbf_gram(p, q, sigma);
}

KernelCache build_kernel_cache(const PixelMatrix& pixels, const Eigen::MatrixXd& dictionary,
                               KernelType kernel, double sigma) {
  if (pixels.rows() != dictionary.rows()) throw ConfigError("pixel and dictionary band counts differ");
  KernelCache c;
  c.k_dd = kernel_gram(dictionary, dictionary, kernel, sigma);
  c.k_dx = kernel_gram(dictionary, pixels, kernel, sigma);
  if (kernel == KernelType::linear) {
    c.k_diag_x = pixels.colwise().squaredNorm().transpose();
  } else {
    c.k_diag_x = Eigen::VectorXd::Ones(pixels.cols());
  }
  return c;
}

SolveResult solve_knjcr(const KernelCache& cache, const SolverConfig& cfg, const AdmmObserver& observer) {
  return solve_constrained(cache.k_dd, cache.k_dx, cfg, observer);
}

SolveResult solve_knjcr(const PixelMatrix& pixels, const UnionDictionary& dictionary,
                        const SolverConfig& cfg, const AdmmObserver& observer) {
  cfg.validate();
  return solve_knjcr(build_kernel_cache(pixels, dictionary.atoms, cfg.kernel, cfg.sigma), cfg, observer);
}

Eigen::VectorXd cr_closed_form(const Eigen::VectorXd& x, const Eigen::MatrixXd& dictionary, double lambda) {
  if (x.size() != dictionary.rows()) throw ConfigError("pixel and dictionary band counts differ");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  Eigen::MatrixXd m = dictionary.transpose() * dictionary;
  m.diagonal().array() += lambda;
  if (lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dictionary);
    if (qr.rank() < dictionary.cols()) throw NumericError("dictionary is rank deficient and lambda is 0");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NumericError("collaborative representation system is singular");
  return llt.solve(dictionary.transpose() * x);
}

Eigen::VectorXd column_objectives(const PixelMatrix& pixels, const Eigen::MatrixXd& dictionary,
                                  const Eigen::MatrixXd& coefficients, double lambda) {
  const Eigen::MatrixXd residual = pixels - dictionary * coefficients;
  return (residual.colwise().squaredNorm() + 0.5 * lambda * coefficients.colwise().squaredNorm()).transpose();
}

Eigen::VectorXd score_njcr(const PixelMatrix& pixels, const UnionDictionary& dictionary,
                           const Eigen::MatrixXd& coefficients) {
  if (static_cast<std::size_t>(coefficients.rows()) != dictionary.size()) {
    throw ConfigError("coefficient rows must equal the dictionary size");
  }
  if (coefficients.cols() != pixels.cols()) throw ConfigError("coefficient columns must equal the pixel count");
  if (pixels.rows() != dictionary.atoms.rows()) throw ConfigError("pixel and dictionary band counts differ");
  const auto kb = static_cast<Eigen::Index>(dictionary.k_background);
  Eigen::MatrixXd residual = pixels;
  if (kb > 0) residual.noalias() -= dictionary.background() * coefficients.topRows(kb);
  return residual.colwise().norm().transpose();
}

Eigen::VectorXd score_knjcr(const KernelCache& cache, std::size_t k_background,
                            const Eigen::MatrixXd& coefficients) {
  const auto kb = static_cast<Eigen::Index>(k_background);
  if (coefficients.rows() != cache.k_dd.rows()) throw ConfigError("coefficient rows must equal the dictionary size");
  if (coefficients.cols() != cache.k_dx.cols()) throw ConfigError("coefficient columns must equal the pixel count");
  if (kb > cache.k_dd.rows()) throw ConfigError("background size exceeds the dictionary size");
  Eigen::VectorXd sq = cache.k_diag_x;
  if (kb > 0) {
    const auto a_b = coefficients.topRows(kb);
    const Eigen::MatrixXd kbb_a = cache.k_dd.topLeftCorner(kb, kb) * a_b;
    sq -= 2.0 * cache.k_dx.topRows(kb).cwiseProduct(a_b).colwise().sum().transpose();
    sq += a_b.cwiseProduct(kbb_a).colwise().sum().transpose();
  }
  return sq.cwiseMax(0.0).cwiseSqrt();
}

Eigen::VectorXd score_knjcr(const PixelMatrix& pixels, const UnionDictionary& dictionary,
                            const Eigen::MatrixXd& coefficients, KernelType kernel, double sigma) {
  return score_knjcr(build_kernel_cache(pixels, dictionary.atoms, kernel, sigma), dictionary.k_background,
                     coefficients);
}

std::string to_string(KernelType kernel) { return kernel == KernelType::linear ? "linear" : "rbf"; }

KernelType parse_kernel(const std::string& name) {
  if (name == "linear") return KernelType::linear;
  if (name == "rbf") return KernelType::rbf;
  throw ConfigError("unknown kernel '" + name + "' (expected linear or rbf)");
}

}  // namespace njcr
