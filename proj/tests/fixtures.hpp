#ifndef NJCR_TESTS_FIXTURES_HPP
#define NJCR_TESTS_FIXTURES_HPP

// Random solver instances shared by the unit tests and the acceptance run.

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace fixture {

struct Instance {
  Eigen::MatrixXd dictionary;  // L x K, entries in [0.1, 1]
  Eigen::MatrixXd pixels;      // L x N
};

/// Pixels are random convex mixtures of three atoms plus Gaussian noise, so
/// the simplex-constrained fit is informative but not exact.
inline Instance random_instance(Eigen::Index bands, Eigen::Index atoms, Eigen::Index pixels,
                                std::uint64_t seed, double noise = 0.02) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  std::uniform_int_distribution<Eigen::Index> pick(0, atoms - 1);
  std::normal_distribution<double> g(0.0, noise);
  Instance out;
  out.dictionary.resize(bands, atoms);
  for (Eigen::Index j = 0; j < atoms; ++j) {
    for (Eigen::Index i = 0; i < bands; ++i) out.dictionary(i, j) = u(rng);
  }
  out.pixels.resize(bands, pixels);
  for (Eigen::Index j = 0; j < pixels; ++j) {
    double c[3] = {w(rng), w(rng), w(rng)};
    const double s = c[0] + c[1] + c[2];
    Eigen::VectorXd x = Eigen::VectorXd::Zero(bands);
    for (double ci : c) x += (ci / s) * out.dictionary.col(pick(rng));
    for (Eigen::Index i = 0; i < bands; ++i) x(i) += g(rng);
    out.pixels.col(j) = x;
  }
  return out;
}

}  // namespace fixture

#endif  // NJCR_TESTS_FIXTURES_HPP
