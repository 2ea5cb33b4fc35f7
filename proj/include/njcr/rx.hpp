#ifndef NJCR_RX_HPP
#define NJCR_RX_HPP

#include "njcr/core.hpp"

namespace njcr {

/// Global background statistics for the RX detector.
class BackgroundStats {
 public:
  const Eigen::VectorXd& mean() const { return mean_; }
  /// Unregularized sample covariance (1/(N-1) estimator).
  const Eigen::MatrixXd& covariance() const { return cov_; }
  /// Ridge actually added to the diagonal before factorization.
  double ridge() const { return ridge_; }
  std::size_t bands() const { return static_cast<std::size_t>(mean_.size()); }
  /// Cholesky factor of covariance() + ridge() * I.
  const Eigen::LLT<Eigen::MatrixXd>& factor() const { return factor_; }

 private:
  friend BackgroundStats fit_stats(const PixelMatrix& pixels, double ridge_eps);
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  double ridge_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> factor_;
};

/// Mean and covariance of the columns. With ridge_eps > 0 the ridge starts at
/// ridge_eps * trace(C) / L (ridge_eps itself when the trace is at rounding
/// level) and grows tenfold until the Cholesky factorization succeeds;
/// ridge_eps == 0 means no regularization and an error on a singular covariance.
BackgroundStats fit_stats(const PixelMatrix& pixels, double ridge_eps = 1e-6);

/// Squared Mahalanobis distance (x - mu)^T C^{-1} (x - mu) of every column.
Eigen::VectorXd rx_scores(const PixelMatrix& pixels, const BackgroundStats& stats);
ScoreMap rx_scores(const HsiCube& cube, const BackgroundStats& stats);

}  // namespace njcr

#endif  // NJCR_RX_HPP
