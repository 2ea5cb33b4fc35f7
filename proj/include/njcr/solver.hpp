#ifndef NJCR_SOLVER_HPP
#define NJCR_SOLVER_HPP

// Nonnegative, sum-to-one constrained joint collaborative representation.
//
// For pixels X (L x N) and dictionary D (L x K) the solver minimizes
//
//   ||X - D A||_F^2 + (lambda / 2) ||A||_F^2   s.t.  A^T 1_K = 1_N,  A >= 0
//
// with an ADMM that splits A against a slack copy omega carrying the
// nonnegativity, a scaled multiplier Delta for A = omega and a scaled
// multiplier eta (one entry per pixel) for the column sums. Every iteration
// solves one K x K system whose matrix
//
//   2 G + (lambda + rho) I + rho 1_K 1_K^T,     G = D^T D  (or K_DD)
//
// is factored once. The kernel form replaces D^T D and D^T X by Gram matrices.

#include "njcr/core.hpp"
#include "njcr/dictionary.hpp"

#include <functional>
#include <string>
#include <vector>

namespace njcr {

enum class KernelType { linear, rbf };

struct SolverConfig {
  double lambda = 0.5;
  double rho = 1.0;
  double epsilon = 1e-4;
  std::size_t max_iter = 1000;
  KernelType kernel = KernelType::rbf;  // used by the kernel solver only
  double sigma = 4.0;
  // Ablation switches; both on is the full model.
  bool nonnegative = true;
  bool sum_to_one = true;
  bool record_history = true;

  void validate() const;
};

/// Snapshot handed to an iteration observer after each ADMM step.
struct AdmmState {
  const Eigen::MatrixXd& A;
  const Eigen::MatrixXd& omega;
  const Eigen::MatrixXd& Delta;
  const Eigen::VectorXd& eta;
  std::size_t iter;
  double primal_residual_norm;
  double dual_residual_norm;
};
using AdmmObserver = std::function<void(const AdmmState&)>;

struct ConvergenceReport {
  std::size_t iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::vector<double> primal_history;
  std::vector<double> dual_history;
  bool closed_form = false;  // ablations without nonnegativity solve in one step
};

struct SolveResult {
  Eigen::MatrixXd coefficients;  // K x N
  ConvergenceReport report;
};

/// The factored system matrix 2G + (lambda + rho) I + rho 1 1^T (terms dropped
/// per the ablation switches), exposed for audits.
Eigen::MatrixXd admm_system_matrix(const Eigen::MatrixXd& gram, const SolverConfig& cfg);

/// Runs the constrained representation given G (K x K) and the cross term
/// H (K x N): D^T D / D^T X, or K_DD / K_DX.
SolveResult solve_constrained(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross,
                              const SolverConfig& cfg, const AdmmObserver& observer = {});

SolveResult solve_njcr(const PixelMatrix& pixels, const Eigen::MatrixXd& dictionary,
                       const SolverConfig& cfg, const AdmmObserver& observer = {});
SolveResult solve_njcr(const PixelMatrix& pixels, const UnionDictionary& dictionary,
                       const SolverConfig& cfg, const AdmmObserver& observer = {});

struct KernelCache {
  Eigen::MatrixXd k_dd;      // K x K
  Eigen::MatrixXd k_dx;      // K x N
  Eigen::VectorXd k_diag_x;  // kappa(x_i, x_i)
};

/// kappa(P_i, Q_j) = exp(-||P_i - Q_j||^2 / (2 sigma^2)).
Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q, double sigma);
Eigen::MatrixXd kernel_gram(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q, KernelType kernel,
                            double sigma);
KernelCache build_kernel_cache(const PixelMatrix& pixels, const Eigen::MatrixXd& dictionary,
                               KernelType kernel, double sigma);

SolveResult solve_knjcr(const PixelMatrix& pixels, const UnionDictionary& dictionary,
                        const SolverConfig& cfg, const AdmmObserver& observer = {});
SolveResult solve_knjcr(const KernelCache& cache, const SolverConfig& cfg,
                        const AdmmObserver& observer = {});

/// Unconstrained collaborative representation (D^T D + lambda I)^{-1} D^T x.
Eigen::VectorXd cr_closed_form(const Eigen::VectorXd& x, const Eigen::MatrixXd& dictionary, double lambda);

/// ||x_i - D a_i||^2 + (lambda / 2) ||a_i||^2 for every column.
Eigen::VectorXd column_objectives(const PixelMatrix& pixels, const Eigen::MatrixXd& dictionary,
                                  const Eigen::MatrixXd& coefficients, double lambda);

/// ||x_i - D_B a_i^B||_2 using only the background rows of each column.
Eigen::VectorXd score_njcr(const PixelMatrix& pixels, const UnionDictionary& dictionary,
                           const Eigen::MatrixXd& coefficients);

/// Feature-space residual against the background atoms via the kernel trick:
/// kappa(x,x) - 2 k_Bx^T a_B + a_B^T K_BB a_B, clamped at zero before the root.
Eigen::VectorXd score_knjcr(const KernelCache& cache, std::size_t k_background,
                            const Eigen::MatrixXd& coefficients);
Eigen::VectorXd score_knjcr(const PixelMatrix& pixels, const UnionDictionary& dictionary,
                            const Eigen::MatrixXd& coefficients, KernelType kernel, double sigma);

std::string to_string(KernelType kernel);
KernelType parse_kernel(const std::string& name);

}  // namespace njcr

#endif  // NJCR_SOLVER_HPP
