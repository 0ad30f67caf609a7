#include "ndgdm/krylov.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace ndgdm {

namespace {

// Extreme eigenvalues of the symmetric tridiagonal assembled from the cg
// coefficients; k leading steps.
std::pair<double, double> ritz_extremes(const std::vector<double>& alphas,
                                        const std::vector<double>& betas, size_t k) {
  if (k == 0) return {1.0, 1.0};
  Eigen::VectorXd diag(k), offdiag(k > 1 ? k - 1 : 0);
  for (size_t j = 0; j < k; ++j) {
    diag(j) = 1.0 / alphas[j];
    if (j > 0) diag(j) += betas[j - 1] / alphas[j - 1];
    if (j + 1 < k) offdiag(j) = std::sqrt(betas[j]) / alphas[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, offdiag, Eigen::EigenvaluesOnly);
  return {solver.eigenvalues().minCoeff(), solver.eigenvalues().maxCoeff()};
}

void finish_ritz(SolveReport& report, const std::vector<double>& alphas,
                 const std::vector<double>& betas) {
  for (size_t j = 0; j < alphas.size(); ++j) {
    report.lanczos_diag.push_back(1.0 / alphas[j] +
                                  (j > 0 ? betas[j - 1] / alphas[j - 1] : 0.0));
    if (j + 1 < alphas.size())
      report.lanczos_offdiag.push_back(std::sqrt(betas[j]) / alphas[j]);
  }
  auto [lo, hi] = ritz_extremes(alphas, betas, alphas.size());
  report.ritz_min = lo;
  report.ritz_max = hi;
  report.kappa_estimate = lo > 0.0 ? hi / lo : 1.0;
}

long long default_budget(Eigen::Index n, long long requested) {
  if (requested >= 0) return requested;
  return static_cast<long long>(10.0 * std::sqrt(static_cast<double>(n))) + 100;
}

}  // namespace

std::pair<Eigen::VectorXd, SolveReport> pcg_solve(const Eigen::SparseMatrix<double>& matrix,
                                                  const Eigen::VectorXd& rhs,
                                                  const LinearOperator& precond,
                                                  const Eigen::VectorXd& x0,
                                                  const PcgOptions& options) {
  if (rhs.size() != matrix.rows() || x0.size() != matrix.rows())
    throw DataError("system dimension mismatch");
  const long long budget = default_budget(matrix.rows(), options.max_iterations);

  SolveReport report;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = rhs - matrix * x;
  Eigen::VectorXd z = precond(r);
  double rz = r.dot(z);
  const double initial = options.natural_norm ? std::sqrt(std::max(rz, 0.0)) : z.norm();
  report.residual_history.push_back(1.0);
  if (initial == 0.0) {
    report.converged = true;
    return {x, report};
  }
  if (rz <= 0.0) throw DefinitenessError("<z,r> nonpositive at iteration 0");

  Eigen::VectorXd p = z;
  std::vector<double> alphas, betas;
  for (long long iter = 1; iter <= budget; ++iter) {
    const Eigen::VectorXd ap = matrix * p;
    const double pap = p.dot(ap);
    if (pap <= 0.0)
      throw DefinitenessError("operator curvature nonpositive at iteration " +
                              std::to_string(iter));
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    z = precond(r);
    const double rz_next = r.dot(z);
    alphas.push_back(alpha);

    const double norm = options.natural_norm ? std::sqrt(std::max(rz_next, 0.0)) : z.norm();
    const double rrel = norm / initial;
    report.residual_history.push_back(rrel);
    report.iterations = iter;
    if (options.on_iterate) options.on_iterate(iter, x);

    if (rrel <= options.tol || rrel <= 1e-15) {
      report.converged = true;
      break;
    }
    if (rz_next <= 0.0) {
      // fully converged in exact arithmetic; anything left is rounding noise
      if (rrel <= 1e-10) {
        report.converged = true;
        break;
      }
      throw DefinitenessError("<z,r> nonpositive at iteration " + std::to_string(iter));
    }
    const double beta = rz_next / rz;
    betas.push_back(beta);
    rz = rz_next;
    p = z + beta * p;
  }
  finish_ritz(report, alphas, betas);
  return {x, report};
}

std::pair<Eigen::VectorXd, SolveReport> pcg_solve(const Eigen::SparseMatrix<double>& matrix,
                                                  const Eigen::VectorXd& rhs,
                                                  const LinearOperator& precond,
                                                  const Eigen::VectorXd& x0, double tol,
                                                  long long max_iterations) {
  PcgOptions options;
  options.tol = tol;
  options.max_iterations = max_iterations;
  return pcg_solve(matrix, rhs, precond, x0, options);
}

std::pair<Eigen::VectorXd, SolveReport> stationary_solve(const SparseSystem& system,
                                                         const SchwarzPreconditioner& precond,
                                                         const Eigen::VectorXd& x0, double tol,
                                                         long long max_iterations,
                                                         bool substeps) {
  const auto& matrix = system.matrix;
  const long long budget = default_budget(matrix.rows(), max_iterations);

  SolveReport report;
  Eigen::VectorXd x = x0;
  auto preconditioned_residual = [&](const Eigen::VectorXd& u) {
    return precond.apply(system.rhs - matrix * u);
  };
  const double initial = preconditioned_residual(x).norm();
  report.residual_history.push_back(1.0);
  if (initial == 0.0) {
    report.converged = true;
    return {x, report};
  }

  for (long long iter = 1; iter <= budget; ++iter) {
    if (!substeps || precond.mode() == SchwarzMode::one_level) {
      x += precond.apply(system.rhs - matrix * x);
    } else if (precond.mode() == SchwarzMode::additive) {
      // both corrections use the residual of the incoming iterate
      const Eigen::VectorXd r = system.rhs - matrix * x;
      const Eigen::VectorXd half = x + precond.apply_coarse(r);
      x = half + precond.apply_locals(r);
    } else {
      x += precond.apply_coarse(system.rhs - matrix * x);
      x += precond.apply_locals(system.rhs - matrix * x);
      x += precond.apply_coarse(system.rhs - matrix * x);
    }
    const double rrel = preconditioned_residual(x).norm() / initial;
    report.residual_history.push_back(rrel);
    report.iterations = iter;
    if (rrel <= tol) {
      report.converged = true;
      break;
    }
    if (rrel >= 1e6) {
      report.diverged = true;
      break;
    }
  }
  return {x, report};
}

double estimate_condition(const Eigen::SparseMatrix<double>& matrix,
                          const LinearOperator& precond, int probes, unsigned seed) {
  const long long sweep = std::min<long long>(matrix.rows(), 200);
  double kappa = 1.0;
  for (int probe = 0; probe < probes; ++probe) {
    std::mt19937 rng(seed + static_cast<unsigned>(probe));
    std::normal_distribution<double> normal;
    Eigen::VectorXd rhs(matrix.rows());
    for (Eigen::Index i = 0; i < rhs.size(); ++i) rhs(i) = normal(rng);
    PcgOptions options;
    options.tol = 0.0;  // run the full sweep
    options.max_iterations = sweep;
    auto [x, report] = pcg_solve(matrix, rhs, precond, Eigen::VectorXd::Zero(matrix.rows()),
                                 options);
    kappa = std::max(kappa, report.kappa_estimate);
  }
  return kappa;
}

void write_residual_history(const SolveReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "iteration,r_rel\n";
  char buf[64];
  for (size_t i = 0; i < report.residual_history.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.12e\n", i, report.residual_history[i]);
    out << buf;
  }
}

}  // namespace ndgdm
