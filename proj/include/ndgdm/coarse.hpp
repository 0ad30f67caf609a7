#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <vector>

#include "ndgdm/dgspace.hpp"
#include "ndgdm/mesh.hpp"
#include "ndgdm/partition.hpp"

namespace ndgdm {

/// Piecewise-polynomial space on the agglomerated coarse mesh, nested in the
/// fine broken space. The basis per agglomerate consists of monomials
/// centered and scaled by the agglomerate bounding box; the injection
/// carries their exact fine-basis expansions.
struct CoarseSpace {
  std::vector<int> degrees;                  ///< q per agglomerate, min over contained p
  std::vector<Eigen::Vector2d> centers;      ///< bounding-box centers
  std::vector<Eigen::Vector2d> half_widths;
  std::vector<int> offset;                   ///< coarse dof start per agglomerate
  int n0 = 0;                                ///< coarse dimension
  Eigen::SparseMatrix<double> injection;     ///< n_dofs x n0 prolongation matrix
  Eigen::SparseMatrix<double> coarse_matrix; ///< Galerkin product on the coarse space
  double max_diameter = 0.0;                 ///< H, bounding-box diagonals
  double max_aspect = 1.0;                   ///< bounding-box aspect ratio, diagnostic only
};

/// Builds the coarse basis, the injection, and the Galerkin coarse matrix
/// from the fine operator. `orthonormalize` runs a per-agglomerate
/// Gram-Schmidt against the coarse mass matrix for ill-shaped agglomerates.
CoarseSpace build_coarse_space(const Mesh& mesh, const DgSpace& space,
                               const Partition& partition,
                               const Eigen::SparseMatrix<double>& fine_matrix,
                               bool orthonormalize = false);

/// Restriction, the transpose of the injection.
Eigen::VectorXd coarse_restrict(const CoarseSpace& coarse, const Eigen::VectorXd& fine);

/// Prolongation; exact function injection into the fine space.
Eigen::VectorXd coarse_prolong(const CoarseSpace& coarse, const Eigen::VectorXd& coarse_vec);

/// Pointwise value of coarse basis function j; meaningful inside its
/// agglomerate only.
double coarse_basis_value(const CoarseSpace& coarse, int j, const Eigen::Vector2d& x);

}  // namespace ndgdm
