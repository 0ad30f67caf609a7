#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <string>

#include "ndgdm/dgspace.hpp"
#include "ndgdm/mesh.hpp"

namespace ndgdm {

/// Piecewise-constant diffusion coefficient with its global bounds.
struct DiffusionField {
  Eigen::VectorXd values;  ///< one positive constant per element
  double min_value = 0.0;
  double max_value = 0.0;

  double contrast() const { return max_value / min_value; }
};

/// Validates positivity and caches the bounds.
DiffusionField make_diffusion(Eigen::VectorXd per_element);

/// Constant value per material id.
DiffusionField make_diffusion(const Mesh& mesh,
                              const std::function<double(int)>& value_of_material);

using ScalarField = std::function<double(const Eigen::Vector2d&)>;

struct AssemblyConfig {
  double penalty_constant = 20.0;  ///< C_W
  ScalarField source;              ///< f; zero when absent
  ScalarField dirichlet;           ///< u_D; zero when absent
  DirichletPredicate is_dirichlet; ///< boundary classifier; all Dirichlet when absent
};

struct SparseSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;

  int n() const { return static_cast<int>(matrix.rows()); }
};

/// Face penalty sigma = C_W K_gamma p_gamma^2 / h_gamma with K_gamma the max
/// of the incident element values and p_gamma the max incident degree.
double face_penalty(const Face& face, const DgSpace& space, const DiffusionField& diffusion,
                    double penalty_constant);

/// Interior-penalty stiffness matrix and right-hand side. Volume terms use
/// rules exact to degree 2p, face terms 2p+1, the source functional 2p+2.
SparseSystem assemble_system(const Mesh& mesh, const DgSpace& space,
                             const DiffusionField& diffusion, const AssemblyConfig& config);

/// Broken energy norm: diffusion-weighted gradients plus penalty-weighted
/// jumps over interior and Dirichlet faces.
double dg_norm(const Mesh& mesh, const DgSpace& space, const DiffusionField& diffusion,
               const AssemblyConfig& config, const Eigen::VectorXd& coeffs);

/// L2 distance between a coefficient field and a callable.
double l2_error(const Mesh& mesh, const DgSpace& space, const Eigen::VectorXd& coeffs,
                const ScalarField& exact);

/// A named experiment setup: diffusion construction, boundary data, and the
/// exact solution when one is known.
struct BenchmarkProblem {
  std::string name;
  AssemblyConfig config;
  std::function<void(Mesh&)> assign_materials;           ///< may be empty
  std::function<DiffusionField(const Mesh&)> diffusion;
  ScalarField exact;                                     ///< empty when unknown
  double default_tol = 1e-12;
};

/// `laplace`: unit diffusion, polynomial source, homogeneous Dirichlet data.
/// `stripes`: three horizontal material bands with diffusion contrast zeta,
/// constant source, Neumann on the bottom and left edges.
BenchmarkProblem build_benchmark_problem(const std::string& name, double zeta = 1.0);

/// L2 projection of a fixed multi-frequency sine sum, used as the initial
/// iterate of the solver benchmarks.
Eigen::VectorXd oscillatory_initial_guess(const DgSpace& space, const Mesh& mesh);

}  // namespace ndgdm
