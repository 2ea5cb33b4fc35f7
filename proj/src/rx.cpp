#include "njcr/rx.hpp"

#include "njcr/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace njcr {

BackgroundStats fit_stats(const PixelMatrix& pixels, double ridge_eps) {
  if (pixels.cols() < 2) throw ConfigError("RX statistics need at least two pixels");
  if (!(ridge_eps >= 0.0)) throw ConfigError("ridge_eps must be nonnegative");
  if (!pixels.allFinite()) throw NumericError("pixels contain non-finite values");
  BackgroundStats s;
  const Eigen::Index l = pixels.rows();
  s.mean_ = pixels.rowwise().mean();
  const PixelMatrix centered = pixels.colwise() - s.mean_;
  s.cov_ = centered * centered.transpose() / static_cast<double>(pixels.cols() - 1);
  s.cov_ = 0.5 * (s.cov_ + s.cov_.transpose()).eval();

  constexpr int kMaxEscalations = 40;
  const double trace_scale = s.cov_.trace() / static_cast<double>(l);
  // A trace at rounding level of the data scale counts as vanishing.
  const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, s.mean_.cwiseAbs().maxCoeff());
  double ridge = 0.0;
  if (ridge_eps > 0.0) ridge = trace_scale > rounding * rounding ? ridge_eps * trace_scale : ridge_eps;
  for (int attempt = 0; attempt <= kMaxEscalations; ++attempt) {
    Eigen::MatrixXd regularized = s.cov_;
    regularized.diagonal().array() += ridge;
    s.factor_.compute(regularized);
    bool ok = s.factor_.info() == Eigen::Success;
    if (ok) {
      // LLT can "succeed" on numerically singular input; demand a usable pivot.
      const Eigen::VectorXd diag = s.factor_.matrixL().toDenseMatrix().diagonal();
      const double max_pivot = diag.cwiseAbs().maxCoeff();
      ok = diag.minCoeff() > 1e-12 * std::max(max_pivot, 1e-300) && diag.minCoeff() > 0.0;
    }
    if (ok) {
      s.ridge_ = ridge;
      return s;
    }
    if (ridge_eps == 0.0) throw NumericError("covariance is singular and ridge_eps is 0");
    ridge *= 10.0;
  }
  throw NumericError("covariance factorization failed after ridge escalation");
}

Eigen::VectorXd rx_scores(const PixelMatrix& pixels, const BackgroundStats& stats) {
  if (static_cast<std::size_t>(pixels.rows()) != stats.bands()) {
    throw ConfigError("band count of pixels does not match RX statistics");
  }
  const Eigen::Index n = pixels.cols();
  Eigen::VectorXd scores(n);
  constexpr Eigen::Index kBlock = 1024;
  const auto blocks = static_cast<std::size_t>((n + kBlock - 1) / kBlock);
  parallel_for(0, blocks, [&](std::size_t b) {
    const Eigen::Index lo = static_cast<Eigen::Index>(b) * kBlock;
    const Eigen::Index len = std::min(kBlock, n - lo);
    Eigen::MatrixXd y = pixels.middleCols(lo, len).colwise() - stats.mean();
    stats.factor().matrixL().solveInPlace(y);
    scores.segment(lo, len) = y.colwise().squaredNorm().transpose();
  });
  return scores;
}

ScoreMap rx_scores(const HsiCube& cube, const BackgroundStats& stats) {
  return ScoreMap(cube.width(), cube.height(), rx_scores(flatten(cube), stats));
}

}  // namespace njcr
