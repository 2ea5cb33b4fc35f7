#ifndef NJCR_TESTS_ORACLES_HPP
#define NJCR_TESTS_ORACLES_HPP

// Independent reference computations. Nothing here calls into the library
// code under test beyond plain data types.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                                     double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  }
  return m;
}

// --- graphs -------------------------------------------------------------

/// Symmetric dense weights with zero diagonal; entries below `sparsity` are dropped.
inline Eigen::MatrixXd random_weights(std::size_t n, std::uint64_t seed, double sparsity = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double keep = u(rng);
      const double v = 0.05 + u(rng);
      if (keep >= sparsity) w(i, j) = w(j, i) = v;
    }
  }
  return w;
}

inline double cut(const Eigen::MatrixXd& w, const std::vector<bool>& in_a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (in_a[i] && !in_a[j]) s += w(i, j);
    }
  }
  return s;
}

inline double assoc(const Eigen::MatrixXd& w, const std::vector<bool>& in_a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    if (!in_a[i]) continue;
    for (Eigen::Index j = 0; j < w.cols(); ++j) s += w(i, j);
  }
  return s;
}

inline double ncut(const Eigen::MatrixXd& w, const std::vector<bool>& in_a) {
  std::vector<bool> in_b(in_a.size());
  for (std::size_t i = 0; i < in_a.size(); ++i) in_b[i] = !in_a[i];
  const double c = cut(w, in_a);
  const double aa = assoc(w, in_a);
  const double ab = assoc(w, in_b);
  if (aa == 0.0 || ab == 0.0) return std::numeric_limits<double>::infinity();
  return c / aa + c / ab;
}

inline std::vector<bool> mask_bits(std::uint64_t bits, std::size_t n) {
  std::vector<bool> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = (bits >> i) & 1U;
  return m;
}

/// Minimum ncut over every proper bipartition (node 0 fixed in A).
inline double best_ncut(const Eigen::MatrixXd& w) {
  const std::size_t n = static_cast<std::size_t>(w.rows());
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t bits = 1; bits < (std::uint64_t{1} << n) - 1; ++bits) {
    if (!(bits & 1U)) continue;
    best = std::min(best, ncut(w, mask_bits(bits, n)));
  }
  return best;
}

// --- density peaks -------------------------------------------------------

inline Eigen::MatrixXd distances(const Eigen::MatrixXd& p) {
  const Eigen::Index n = p.cols();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index b = 0; b < p.rows(); ++b) s += (p(b, i) - p(b, j)) * (p(b, i) - p(b, j));
      d(i, j) = std::sqrt(s);
    }
  }
  return d;
}

inline Eigen::VectorXd gamma(const Eigen::MatrixXd& d, double dc) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d.rows());
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (i != j) g(i) += std::exp(-(d(i, j) * d(i, j)) / (dc * dc));
    }
  }
  return g;
}

inline Eigen::VectorXd delta(const Eigen::MatrixXd& d, const Eigen::VectorXd& g) {
  const Eigen::Index n = d.rows();
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool denser = g(j) > g(i) || (g(j) == g(i) && j < i);
      if (j != i && denser) {
        any = true;
        best = std::min(best, d(i, j));
      }
    }
    if (!any) {
      best = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) best = std::max(best, d(i, j));
    }
    out(i) = best;
  }
  return out;
}

// --- simplex QP -----------------------------------------------------------

/// Euclidean projection onto {a >= 0, sum a = 1} by the sort-based method.
inline Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

/// min ||x - D a||^2 + (lambda/2)||a||^2 over the simplex by projected gradient
/// with step 1/L, iterated until successive iterates move less than tol.
inline Eigen::VectorXd simplex_qp(const Eigen::MatrixXd& dict, const Eigen::VectorXd& x, double lambda,
                                  double tol = 1e-8, int max_iter = 2'000'000) {
  const Eigen::MatrixXd g = dict.transpose() * dict;
  const Eigen::VectorXd h = dict.transpose() * x;
  const double lip = 2.0 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().maxCoeff() + lambda;
  Eigen::VectorXd a = Eigen::VectorXd::Constant(dict.cols(), 1.0 / static_cast<double>(dict.cols()));
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd grad = 2.0 * (g * a - h) + lambda * a;
    const Eigen::VectorXd next = project_simplex(a - grad / lip);
    const double moved = (next - a).norm();
    a = next;
    if (moved < tol) break;
  }
  return a;
}

inline double objective(const Eigen::MatrixXd& dict, const Eigen::VectorXd& x, const Eigen::VectorXd& a,
                        double lambda) {
  return (x - dict * a).squaredNorm() + 0.5 * lambda * a.squaredNorm();
}

// --- ROC --------------------------------------------------------------------

struct Staircase {
  std::vector<double> tau, pf, pd;
  double auc = 0.0;
};

/// Enumerates every distinct score as a threshold, counting detections with
/// an explicit loop over all pixels per threshold.
inline Staircase roc(const std::vector<double>& s, const std::vector<int>& truth) {
  std::vector<double> u = s;
  std::sort(u.begin(), u.end(), std::greater<>());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  double pos = 0.0, neg = 0.0;
  for (int t : truth) (t ? pos : neg) += 1.0;
  Staircase r;
  r.tau.push_back(std::numeric_limits<double>::infinity());
  r.pf.push_back(0.0);
  r.pd.push_back(0.0);
  for (double tau : u) {
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= tau) (truth[i] ? tp : fp) += 1.0;
    }
    r.tau.push_back(tau);
    r.pd.push_back(tp / pos);
    r.pf.push_back(fp / neg);
  }
  for (std::size_t k = 1; k < r.pf.size(); ++k) r.auc += (r.pf[k] - r.pf[k - 1]) * (r.pd[k] + r.pd[k - 1]) / 2.0;
  return r;
}

/// Probability that a random anomaly outscores a random background pixel,
/// ties counting one half; equals the trapezoid AUC.
inline double auc_pairs(const std::vector<double>& s, const std::vector<int>& truth) {
  double hits = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!truth[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (truth[j]) continue;
      pairs += 1.0;
      if (s[i] > s[j]) hits += 1.0;
      if (s[i] == s[j]) hits += 0.5;
    }
  }
  return hits / pairs;
}

}  // namespace oracle

#endif  // NJCR_TESTS_ORACLES_HPP
