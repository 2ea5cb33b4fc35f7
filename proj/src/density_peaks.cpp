#include "njcr/density_peaks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace njcr {

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.cols();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = (points.col(i) - points.col(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

Eigen::VectorXd local_density(const Eigen::MatrixXd& distances, double d_c) {
  if (!(d_c > 0.0)) throw ConfigError("cutoff distance d_c must be positive");
  const Eigen::Index n = distances.rows();
  const double inv = 1.0 / (d_c * d_c);
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) acc += std::exp(-distances(i, j) * distances(i, j) * inv);
    }
    gamma(i) = acc;
  }
  return gamma;
}

Eigen::VectorXd min_higher_density_distance(const Eigen::MatrixXd& distances,
                                            const Eigen::VectorXd& gamma) {
  const Eigen::Index n = distances.rows();
  if (gamma.size() != n) throw ConfigError("gamma length does not match distance matrix");
  if (!gamma.allFinite()) throw NumericError("gamma must be finite");
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    double row_max = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      row_max = std::max(row_max, distances(i, j));
      const bool denser = gamma(j) > gamma(i) || (gamma(j) == gamma(i) && j < i);
      if (denser) best = std::min(best, distances(i, j));
    }
    delta(i) = std::isinf(best) ? row_max : best;
  }
  return delta;
}

double cutoff_distance(const Eigen::MatrixXd& distances, double quantile) {
  if (!(quantile >= 0.0 && quantile <= 1.0)) throw ConfigError("d_c quantile must lie in [0, 1]");
  const Eigen::Index n = distances.rows();
  if (n < 2) return 1.0;
  std::vector<double> off;
  off.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  double max_d = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      off.push_back(distances(i, j));
      max_d = std::max(max_d, distances(i, j));
    }
  }
  std::sort(off.begin(), off.end());
  const double pos = quantile * static_cast<double>(off.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, off.size() - 1);
  const double q = off[lo] + (pos - static_cast<double>(lo)) * (off[hi] - off[lo]);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, max_d);
  return std::max(q, floor);
}

DensityProfile density_profile(const Eigen::MatrixXd& points, double d_c_quantile) {
  const Eigen::MatrixXd d = pairwise_distances(points);
  DensityProfile p;
  p.d_c = cutoff_distance(d, d_c_quantile);
  p.gamma = local_density(d, p.d_c);
  p.delta = min_higher_density_distance(d, p.gamma);
  return p;
}

std::vector<std::size_t> select_representatives(const Eigen::MatrixXd& points, std::size_t m,
                                                double d_c_quantile) {
  const auto n = static_cast<std::size_t>(points.cols());
  if (m < 1 || m > n) throw ConfigError("representative count must lie in [1, point count]");
  const DensityProfile p = density_profile(points, d_c_quantile);
  const Eigen::VectorXd score = p.gamma.cwiseProduct(p.delta);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return score(static_cast<Eigen::Index>(a)) > score(static_cast<Eigen::Index>(b));
  });
  idx.resize(m);
  return idx;
}

}  // namespace njcr
