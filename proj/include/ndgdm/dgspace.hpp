#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "ndgdm/mesh.hpp"

namespace ndgdm {

inline int dofs_for_degree(int p) { return (p + 1) * (p + 2) / 2; }

/// L2-orthonormal hierarchical basis of P^p on the reference triangle,
/// obtained by Gram-Schmidt of the graded monomials against the exact
/// monomial mass matrix. Built once per degree and cached; the cache is
/// safe under concurrent lookup.
struct ReferenceBasis {
  int degree = 0;
  int size = 0;
  std::vector<std::array<int, 2>> exponents;  ///< monomial powers, graded order
  Eigen::MatrixXd coeff;  ///< upper-triangular monomial-to-basis map
};

const ReferenceBasis& reference_basis(int degree);

/// Values and reference-coordinate gradients of the orthonormal basis at a
/// point of the closed reference triangle.
std::pair<Eigen::VectorXd, Eigen::Matrix<double, Eigen::Dynamic, 2>> eval_basis(
    int degree, const Eigen::Vector2d& point);

enum class QuadDomain { triangle, segment };

struct QuadratureRule {
  QuadDomain domain = QuadDomain::triangle;
  Eigen::MatrixXd points;   ///< n x 2 (triangle) or n x 1 (segment parameter in [0,1])
  Eigen::VectorXd weights;  ///< sum to the reference measure (1/2 resp. 1)
  int exactness = 0;
};

/// Highest exactness degree served by quadrature().
inline constexpr int kMaxQuadratureExactness = 48;

/// Triangle rules are Gauss-Jacobi collapsed tensor products, segment rules
/// Gauss-Legendre. Throws ConfigError above kMaxQuadratureExactness.
QuadratureRule quadrature(QuadDomain domain, int exactness);

/// Basis values/gradients tabulated at the points of a triangle rule.
struct BasisTable {
  Eigen::MatrixXd values;  ///< n_points x n_dofs
  Eigen::MatrixXd dx;      ///< reference-x derivatives
  Eigen::MatrixXd dy;
};

BasisTable tabulate_basis(int degree, const Eigen::MatrixXd& ref_points);

/// Global dof layout of the broken polynomial space: per-element degrees,
/// contiguous dof blocks per element. When a subdomain map is supplied the
/// blocks are ordered subdomain by subdomain so that each subdomain owns one
/// contiguous index range.
struct DgSpace {
  std::vector<int> degrees;
  std::vector<int> ndofs;   ///< per element
  std::vector<int> offset;  ///< per element, start of its dof block
  std::vector<int> order;   ///< element ids in dof-block order
  int n_dofs = 0;
  int max_degree = 0;
};

DgSpace build_dof_layout(const Mesh& mesh, std::vector<int> degrees);
DgSpace build_dof_layout(const Mesh& mesh, std::vector<int> degrees,
                         const std::vector<int>& subdomain_of);

/// Elementwise L2 projection onto the space. The callable sees the element
/// id and the reference coordinate of each quadrature point.
Eigen::VectorXd project(const DgSpace& space, const Mesh& mesh,
                        const std::function<double(int, const Eigen::Vector2d&)>& f,
                        int exactness);

/// Same, for a function of the physical coordinate.
Eigen::VectorXd project(const DgSpace& space, const Mesh& mesh,
                        const std::function<double(const Eigen::Vector2d&)>& f,
                        int exactness);

/// Value of the coefficient field at a reference point of element k.
double evaluate_element(const DgSpace& space, const Eigen::VectorXd& coeffs, int k,
                        const Eigen::Vector2d& ref);

}  // namespace ndgdm
