#ifndef NJCR_DENSITY_PEAKS_HPP
#define NJCR_DENSITY_PEAKS_HPP

#include "njcr/core.hpp"

#include <vector>

namespace njcr {

struct DensityProfile {
  Eigen::VectorXd gamma;  // local density
  Eigen::VectorXd delta;  // distance to the nearest denser point
  double d_c = 0.0;
};

/// Euclidean distances between the columns of `points`.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points);

/// gamma_i = sum_{j != i} exp(-d_ij^2 / d_c^2).
Eigen::VectorXd local_density(const Eigen::MatrixXd& distances, double d_c);

/// delta_i = min d_ij over points j that are denser than i, where j is denser
/// when gamma_j > gamma_i or (gamma_j == gamma_i and j < i). The point with no
/// denser neighbour takes the largest distance in its row.
Eigen::VectorXd min_higher_density_distance(const Eigen::MatrixXd& distances,
                                            const Eigen::VectorXd& gamma);

/// Linearly interpolated quantile of the off-diagonal distances, floored at a
/// small multiple of machine epsilon. Returns 1 for a single point.
double cutoff_distance(const Eigen::MatrixXd& distances, double quantile);

DensityProfile density_profile(const Eigen::MatrixXd& points, double d_c_quantile);

/// Indices of the m largest gamma*delta scores (ties by lower index), in
/// descending score order.
std::vector<std::size_t> select_representatives(const Eigen::MatrixXd& points, std::size_t m,
                                                double d_c_quantile = 0.02);

}  // namespace njcr

#endif  // NJCR_DENSITY_PEAKS_HPP
