#include "ndgdm/coarse.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <limits>
#include <map>

namespace ndgdm {

namespace {

std::vector<std::array<int, 2>> monomial_exponents(int degree) {
  std::vector<std::array<int, 2>> exps;
  for (int d = 0; d <= degree; ++d)
    for (int j = 0; j <= d; ++j) exps.push_back({d - j, j});
  return exps;
}

double scaled_monomial(const Eigen::Vector2d& x, const Eigen::Vector2d& center,
                       const Eigen::Vector2d& half_width, const std::array<int, 2>& exp) {
  const double sx = (x.x() - center.x()) / half_width.x();
  const double sy = (x.y() - center.y()) / half_width.y();
  return std::pow(sx, exp[0]) * std::pow(sy, exp[1]);
}

}  // namespace

CoarseSpace build_coarse_space(const Mesh& mesh, const DgSpace& space,
                               const Partition& partition,
                               const Eigen::SparseMatrix<double>& fine_matrix,
                               bool orthonormalize) {
  if (fine_matrix.rows() != space.n_dofs)
    throw ConfigError("fine operator does not match the dof layout");

  CoarseSpace coarse;
  const int na = partition.n_coarse;
  std::vector<std::vector<int>> members(na);
  for (int e = 0; e < mesh.n_triangles(); ++e)
    members[partition.agglomerate_of[e]].push_back(e);

  coarse.degrees.resize(na);
  coarse.centers.resize(na);
  coarse.half_widths.resize(na);
  coarse.offset.resize(na);
  for (int a = 0; a < na; ++a) {
    if (members[a].empty()) throw Error("agglomerate " + std::to_string(a) + " is empty");
    int q = std::numeric_limits<int>::max();
    Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::max());
    Eigen::Vector2d hi = Eigen::Vector2d::Constant(std::numeric_limits<double>::lowest());
    for (int e : members[a]) {
      q = std::min(q, space.degrees[e]);
      for (int v : mesh.triangles[e]) {
        lo = lo.cwiseMin(mesh.vertices[v]);
        hi = hi.cwiseMax(mesh.vertices[v]);
      }
    }
    coarse.degrees[a] = q;
    coarse.centers[a] = 0.5 * (lo + hi);
    coarse.half_widths[a] = 0.5 * (hi - lo);
    if (coarse.half_widths[a].minCoeff() <= 0.0)
      throw Error("agglomerate " + std::to_string(a) + " has a degenerate bounding box");
    coarse.offset[a] = coarse.n0;
    coarse.n0 += dofs_for_degree(q);
    coarse.max_diameter = std::max(coarse.max_diameter, (hi - lo).norm());
    const double aspect = coarse.half_widths[a].maxCoeff() / coarse.half_widths[a].minCoeff();
    coarse.max_aspect = std::max(coarse.max_aspect, aspect);
  }

  // Exact expansion of every coarse monomial in the orthonormal fine basis,
  // element by element; a rule of exactness q+p makes the projection exact.
  std::vector<Eigen::Triplet<double>> triplets;
  std::map<std::pair<int, int>, std::pair<QuadratureRule, BasisTable>> tables;
  for (int a = 0; a < na; ++a) {
    const auto exps = monomial_exponents(coarse.degrees[a]);
    for (int e : members[a]) {
      const int p = space.degrees[e];
      auto key = std::make_pair(p, coarse.degrees[a]);
      auto it = tables.find(key);
      if (it == tables.end()) {
        auto rule = quadrature(QuadDomain::triangle, p + coarse.degrees[a]);
        auto table = tabulate_basis(p, rule.points);
        it = tables.emplace(key, std::make_pair(std::move(rule), std::move(table))).first;
      }
      const auto& [rule, table] = it->second;
      Eigen::MatrixXd mono(rule.weights.size(), exps.size());
      for (int q = 0; q < rule.weights.size(); ++q) {
        const Eigen::Vector2d x = mesh.map_point(e, rule.points.row(q).transpose());
        for (size_t m = 0; m < exps.size(); ++m)
          mono(q, m) = scaled_monomial(x, coarse.centers[a], coarse.half_widths[a], exps[m]);
      }
      const Eigen::MatrixXd coeffs =
          table.values.transpose() * rule.weights.asDiagonal() * mono;
      for (int i = 0; i < coeffs.rows(); ++i)
        for (int j = 0; j < coeffs.cols(); ++j)
          triplets.emplace_back(space.offset[e] + i, coarse.offset[a] + j, coeffs(i, j));
    }
  }
  coarse.injection.resize(space.n_dofs, coarse.n0);
  coarse.injection.setFromTriplets(triplets.begin(), triplets.end());

  if (orthonormalize) {
    // per-agglomerate whitening against the coarse mass matrix; with the
    // orthonormal fine basis the mass matrix is a Jacobian-weighted Gram
    // matrix of the injection columns
    Eigen::VectorXd jac(space.n_dofs);
    for (int e = 0; e < mesh.n_triangles(); ++e)
      jac.segment(space.offset[e], space.ndofs[e]).setConstant(2.0 * mesh.area(e));
    Eigen::MatrixXd dense = coarse.injection;
    for (int a = 0; a < na; ++a) {
      const int n = dofs_for_degree(coarse.degrees[a]);
      auto block = dense.middleCols(coarse.offset[a], n);
      const Eigen::MatrixXd gram = block.transpose() * jac.asDiagonal() * block;
      const Eigen::MatrixXd l = gram.llt().matrixL();
      block = l.triangularView<Eigen::Lower>().solve(block.transpose()).transpose();
    }
    coarse.injection = dense.sparseView(1.0, 1e-300);
  }

  coarse.coarse_matrix = coarse.injection.transpose() * fine_matrix * coarse.injection;
  return coarse;
}

Eigen::VectorXd coarse_restrict(const CoarseSpace& coarse, const Eigen::VectorXd& fine) {
  if (fine.size() != coarse.injection.rows()) throw DataError("fine vector length mismatch");
  return coarse.injection.transpose() * fine;
}

Eigen::VectorXd coarse_prolong(const CoarseSpace& coarse, const Eigen::VectorXd& coarse_vec) {
  if (coarse_vec.size() != coarse.n0) throw DataError("coarse vector length mismatch");
  return coarse.injection * coarse_vec;
}

double coarse_basis_value(const CoarseSpace& coarse, int j, const Eigen::Vector2d& x) {
  int a = static_cast<int>(coarse.offset.size()) - 1;
  while (a > 0 && coarse.offset[a] > j) --a;
  const auto exps = monomial_exponents(coarse.degrees[a]);
  return scaled_monomial(x, coarse.centers[a], coarse.half_widths[a], exps[j - coarse.offset[a]]);
}

}  // namespace ndgdm
