#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ndgdm/schwarz.hpp"

namespace ndgdm {

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct SolveReport {
  long long iterations = 0;
  std::vector<double> residual_history;  ///< relative preconditioned residual, [0] = 1
  bool converged = false;
  bool diverged = false;
  double ritz_min = 0.0;
  double ritz_max = 0.0;
  double kappa_estimate = 1.0;
  std::vector<double> lanczos_diag;     ///< tridiagonal recovered from the cg coefficients
  std::vector<double> lanczos_offdiag;
  long long fl = 0;   ///< filled by the experiment driver
  double comm = 0.0;
};

struct PcgOptions {
  double tol = 1e-12;
  long long max_iterations = -1;  ///< negative: 10 sqrt(n) + 100
  /// Measure convergence in <z,r>^(1/2) instead of the Euclidean norm of the
  /// preconditioned residual.
  bool natural_norm = false;
  std::function<void(long long, const Eigen::VectorXd&)> on_iterate;
};

/// Preconditioned conjugate gradients, stopping on the relative Euclidean
/// norm of the preconditioned residual. The Lanczos tridiagonal is recovered
/// from the cg coefficients and eigensolved for the extreme Ritz values.
/// Exhausting the budget yields a non-converged report; an indefinite
/// operator raises DefinitenessError.
std::pair<Eigen::VectorXd, SolveReport> pcg_solve(const Eigen::SparseMatrix<double>& matrix,
                                                  const Eigen::VectorXd& rhs,
                                                  const LinearOperator& precond,
                                                  const Eigen::VectorXd& x0,
                                                  const PcgOptions& options = {});

std::pair<Eigen::VectorXd, SolveReport> pcg_solve(const Eigen::SparseMatrix<double>& matrix,
                                                  const Eigen::VectorXd& rhs,
                                                  const LinearOperator& precond,
                                                  const Eigen::VectorXd& x0, double tol,
                                                  long long max_iterations);

/// Stationary Richardson iteration with the Schwarz preconditioner in its
/// configured mode. With `substeps` the two-level modes execute the coarse
/// and local corrections as separate fractional steps; the iterates agree
/// with the single-application form to rounding. Divergence (residual growth
/// by 1e6) is reported, not thrown.
std::pair<Eigen::VectorXd, SolveReport> stationary_solve(const SparseSystem& system,
                                                         const SchwarzPreconditioner& precond,
                                                         const Eigen::VectorXd& x0, double tol,
                                                         long long max_iterations,
                                                         bool substeps = false);

/// Ritz-value condition estimate of the preconditioned operator from a full
/// Lanczos sweep (at most min(n, 200) steps) on random right-hand sides.
double estimate_condition(const Eigen::SparseMatrix<double>& matrix,
                          const LinearOperator& precond, int probes = 1, unsigned seed = 7);

/// Two-column CSV `iteration,r_rel`.
void write_residual_history(const SolveReport& report, const std::string& path);

}  // namespace ndgdm
