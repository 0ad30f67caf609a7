#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "ndgdm/errors.hpp"

namespace ndgdm {

/// Conforming triangular mesh of a polygonal domain.
///
/// Immutable after construction; all queries are safe to call concurrently.
struct Mesh {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;  ///< counterclockwise vertex ids
  std::vector<int> material;                  ///< per-triangle material id
  std::vector<double> h;                      ///< per-triangle diameter h_K

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }

  /// Signed area of triangle k (positive for counterclockwise numbering).
  double area(int k) const;

  Eigen::Vector2d centroid(int k) const;

  /// Jacobian of the affine map from the reference triangle
  /// {(0,0),(1,0),(0,1)} onto triangle k; columns are the edge vectors.
  Eigen::Matrix2d jacobian(int k) const;

  /// Physical point of a reference coordinate inside triangle k.
  Eigen::Vector2d map_point(int k, const Eigen::Vector2d& ref) const;

  /// Reference coordinates of vertex `v` within triangle k.
  Eigen::Vector2d reference_vertex(int k, int v) const;
};

enum class FaceKind { interior, dirichlet, neumann };

/// One mesh edge with the data SIPG needs.
struct Face {
  FaceKind kind = FaceKind::interior;
  int left = -1;
  int right = -1;          ///< -1 on the boundary
  Eigen::Vector2d normal;  ///< unit, oriented left -> right, outward at the boundary
  double length = 0.0;
  double h = 0.0;          ///< max diameter of the incident elements
  std::array<int, 2> ends{-1, -1};  ///< vertex ids
};

/// Classifier for boundary faces, evaluated at the edge midpoint.
/// Returns true for Dirichlet; everything else becomes Neumann.
using DirichletPredicate = std::function<bool(const Eigen::Vector2d&)>;

/// Triangulation of the unit square: an n-by-n grid of cells, each cut by
/// the lower-left to upper-right diagonal. 2 n^2 triangles, material 0.
Mesh build_uniform_square_mesh(int n);

/// Recomputes the per-triangle diameters from the coordinates.
void update_diameters(Mesh& mesh);

/// Enumerates every edge exactly once. Interior faces carry both incident
/// elements with the normal pointing from the lower element id to the
/// higher; boundary edges are classified by `dirichlet` (all Dirichlet when
/// absent). Throws TopologyError if an edge is shared by more than two
/// triangles.
std::vector<Face> build_face_topology(const Mesh& mesh,
                                      const DirichletPredicate& dirichlet = nullptr);

/// Per-element edge neighbors, aligned with the local edges
/// (v0,v1), (v1,v2), (v2,v0); -1 where the edge lies on the boundary.
std::vector<std::array<int, 3>> element_neighbors(const Mesh& mesh);

/// Plain-text mesh file: header `ndgdm <nv> <nt>`, vertex lines `x y` with
/// 17 significant digits, then triangle lines `v0 v1 v2 material`.
void save_mesh(const Mesh& mesh, const std::string& path);

/// Inverse of save_mesh; validates indices and orientation and throws
/// ParseError with the offending line number.
Mesh load_mesh(const std::string& path);

}  // namespace ndgdm
