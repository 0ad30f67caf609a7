#pragma once

#include <Eigen/Dense>

#include "ndgdm/coarse.hpp"
#include "ndgdm/schwarz.hpp"
#include "ndgdm/sipg.hpp"

namespace ndgdm::testing {

/// A fully assembled small setup shared by the preconditioner tests.
struct Setup {
  Mesh mesh;
  Partition partition;
  DgSpace space;
  DiffusionField diffusion;
  AssemblyConfig config;
  SparseSystem system;
  CoarseSpace coarse;
};

inline Setup make_setup(const std::string& problem_name, int n, int degree, int n_subdomains,
                        int parts_per_subdomain, double zeta = 1.0,
                        bool respect_materials = false, unsigned seed = 1) {
  Setup s;
  auto problem = build_benchmark_problem(problem_name, zeta);
  s.mesh = build_uniform_square_mesh(n);
  if (problem.assign_materials) problem.assign_materials(s.mesh);
  s.partition = make_partition(s.mesh, n_subdomains, parts_per_subdomain, respect_materials, seed);
  s.space = build_dof_layout(s.mesh, std::vector<int>(s.mesh.n_triangles(), degree),
                             s.partition.subdomain_of);
  s.diffusion = problem.diffusion(s.mesh);
  s.config = problem.config;
  s.system = assemble_system(s.mesh, s.space, s.diffusion, s.config);
  s.coarse = build_coarse_space(s.mesh, s.space, s.partition, s.system.matrix);
  return s;
}

/// Dense selection matrix for an index set.
inline Eigen::MatrixXd selection(const std::vector<int>& indices, int n) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(indices.size(), n);
  for (size_t i = 0; i < indices.size(); ++i) r(static_cast<int>(i), indices[i]) = 1.0;
  return r;
}

/// Dense two-level additive preconditioner assembled from first principles.
inline Eigen::MatrixXd dense_additive_inverse(const Eigen::MatrixXd& a,
                                              const std::vector<std::vector<int>>& sets,
                                              const Eigen::MatrixXd& injection,
                                              bool with_coarse) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(n, n);
  for (const auto& set : sets) {
    const Eigen::MatrixXd r = selection(set, n);
    inv += r.transpose() * (r * a * r.transpose()).inverse() * r;
  }
  if (with_coarse) {
    const Eigen::MatrixXd a0 = injection.transpose() * a * injection;
    inv += injection * a0.inverse() * injection.transpose();
  }
  return inv;
}

/// Dense coarse-level inverse R0^T A0^-1 R0.
inline Eigen::MatrixXd dense_coarse_inverse(const Eigen::MatrixXd& a,
                                            const Eigen::MatrixXd& injection) {
  const Eigen::MatrixXd a0 = injection.transpose() * a * injection;
  return injection * a0.inverse() * injection.transpose();
}

/// Dense hybrid preconditioner: coarse solve, screened local solves, coarse
/// solve.
inline Eigen::MatrixXd dense_hybrid_inverse(const Eigen::MatrixXd& a,
                                            const std::vector<std::vector<int>>& sets,
                                            const Eigen::MatrixXd& injection) {
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXd n0 = dense_coarse_inverse(a, injection);
  const Eigen::MatrixXd nad = dense_additive_inverse(a, sets, injection, false);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  return n0 + (identity - n0 * a) * nad * (identity - a * n0);
}

/// Condition number of the preconditioned operator from the dense
/// generalized symmetric eigenproblem.
inline double dense_preconditioned_condition(const Eigen::MatrixXd& a,
                                             const Eigen::MatrixXd& precond_inverse) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, precond_inverse.inverse());
  const Eigen::VectorXd ev = solver.eigenvalues();
  return ev.maxCoeff() / ev.minCoeff();
}

}  // namespace ndgdm::testing
