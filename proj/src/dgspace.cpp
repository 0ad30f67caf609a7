#include "ndgdm/dgspace.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>

namespace ndgdm {

namespace {

// Exact value of the reference-triangle moment  a! b! / (a+b+2)!.
double triangle_moment(int a, int b) {
  double v = 1.0;
  for (int k = 1; k <= b; ++k) v *= double(k) / double(a + k);
  return v / (double(a + b + 1) * double(a + b + 2));
}

ReferenceBasis build_reference_basis(int degree) {
  ReferenceBasis basis;
  basis.degree = degree;
  basis.size = dofs_for_degree(degree);
  basis.exponents.reserve(basis.size);
  for (int d = 0; d <= degree; ++d)
    for (int j = 0; j <= d; ++j) basis.exponents.push_back({d - j, j});

  const int n = basis.size;
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      gram(i, j) = triangle_moment(basis.exponents[i][0] + basis.exponents[j][0],
                                   basis.exponents[i][1] + basis.exponents[j][1]);

  // Whitening via Cholesky, refined to a fixed point; the monomial moment
  // matrix is badly conditioned at higher degree and a single pass is not
  // enough for orthonormality at rounding level.
  Eigen::MatrixXd coeff = Eigen::MatrixXd::Identity(n, n);
  for (int pass = 0; pass < 6; ++pass) {
    const Eigen::MatrixXd residual_gram = coeff.transpose() * gram * coeff;
    if ((residual_gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-15) break;
    const Eigen::MatrixXd l = residual_gram.llt().matrixL();
    coeff = l.triangularView<Eigen::Lower>().solve(coeff.transpose()).transpose();
  }
  basis.coeff = coeff;
  return basis;
}

}  // namespace

const ReferenceBasis& reference_basis(int degree) {
  if (degree < 0) throw ConfigError("polynomial degree must be nonnegative");
  static std::mutex mutex;
  static std::map<int, ReferenceBasis> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, build_reference_basis(degree)).first;
  return it->second;
}

std::pair<Eigen::VectorXd, Eigen::Matrix<double, Eigen::Dynamic, 2>> eval_basis(
    int degree, const Eigen::Vector2d& point) {
  const auto& basis = reference_basis(degree);
  const int n = basis.size;
  Eigen::VectorXd mono(n);
  Eigen::MatrixXd dmono(n, 2);
  const double x = point.x(), y = point.y();
  for (int k = 0; k < n; ++k) {
    const int a = basis.exponents[k][0], b = basis.exponents[k][1];
    const double xa = std::pow(x, a), yb = std::pow(y, b);
    mono(k) = xa * yb;
    dmono(k, 0) = a == 0 ? 0.0 : a * std::pow(x, a - 1) * yb;
    dmono(k, 1) = b == 0 ? 0.0 : b * xa * std::pow(y, b - 1);
  }
  Eigen::Matrix<double, Eigen::Dynamic, 2> grad(n, 2);
  grad.col(0) = basis.coeff.transpose() * dmono.col(0);
  grad.col(1) = basis.coeff.transpose() * dmono.col(1);
  return {basis.coeff.transpose() * mono, grad};
}

BasisTable tabulate_basis(int degree, const Eigen::MatrixXd& ref_points) {
  const int nq = static_cast<int>(ref_points.rows());
  const int n = dofs_for_degree(degree);
  BasisTable table;
  table.values.resize(nq, n);
  table.dx.resize(nq, n);
  table.dy.resize(nq, n);
  for (int q = 0; q < nq; ++q) {
    auto [v, g] = eval_basis(degree, ref_points.row(q).transpose());
    table.values.row(q) = v.transpose();
    table.dx.row(q) = g.col(0).transpose();
    table.dy.row(q) = g.col(1).transpose();
  }
  return table;
}

namespace {

// Nodes and weights of an n-point rule from a symmetric tridiagonal Jacobi
// matrix (Golub-Welsch); `mu0` is the zeroth moment of the weight.
void golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& subdiag, double mu0,
                  Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, subdiag, Eigen::ComputeEigenvectors);
  nodes = solver.eigenvalues();
  weights = mu0 * solver.eigenvectors().row(0).transpose().array().square();
}

// Gauss-Legendre on [0,1]; weights sum to 1.
void gauss_legendre_01(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  golub_welsch(diag, sub, 2.0, nodes, weights);
  nodes = (nodes.array() + 1.0) / 2.0;
  weights /= 2.0;
}

// Gauss-Jacobi with weight (1-t) on [0,1]; weights sum to 1/2.
void gauss_jacobi10_01(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  Eigen::VectorXd diag(n), sub(std::max(n - 1, 0));
  diag(0) = -1.0 / 3.0;
  for (int k = 1; k < n; ++k) {
    diag(k) = -1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
    sub(k - 1) = std::sqrt(k * (k + 1.0)) / (2.0 * k + 1.0);
  }
  golub_welsch(diag, sub, 2.0, nodes, weights);
  nodes = (nodes.array() + 1.0) / 2.0;
  weights /= 4.0;
}

}  // namespace

QuadratureRule quadrature(QuadDomain domain, int exactness) {
  if (exactness < 0) throw ConfigError("quadrature exactness must be nonnegative");
  if (exactness > kMaxQuadratureExactness)
    throw ConfigError("quadrature exactness " + std::to_string(exactness) +
                      " exceeds the implemented maximum " +
                      std::to_string(kMaxQuadratureExactness));
  const int n = (exactness + 2) / 2;  // 2n-1 >= exactness

  QuadratureRule rule;
  rule.domain = domain;
  rule.exactness = exactness;
  if (domain == QuadDomain::segment) {
    Eigen::VectorXd nodes, weights;
    gauss_legendre_01(n, nodes, weights);
    rule.points = nodes;
    rule.weights = weights;
    return rule;
  }

  Eigen::VectorXd un, uw, vn, vw;
  gauss_legendre_01(n, un, uw);
  gauss_jacobi10_01(n, vn, vw);
  rule.points.resize(n * n, 2);
  rule.weights.resize(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // collapsed coordinates: (u,v) -> (u(1-v), v), Jacobi rule carries (1-v)
      rule.points(i * n + j, 0) = un(i) * (1.0 - vn(j));
      rule.points(i * n + j, 1) = vn(j);
      rule.weights(i * n + j) = uw(i) * vw(j);
    }
  }
  return rule;
}

namespace {

DgSpace finish_layout(const Mesh& mesh, std::vector<int> degrees, std::vector<int> order) {
  if (static_cast<int>(degrees.size()) != mesh.n_triangles())
    throw ConfigError("one polynomial degree per element required");
  for (int p : degrees)
    if (p < 1) throw ConfigError("polynomial degrees must be at least 1");

  // neighboring degrees may differ by at most a factor of 2
  for (const auto& f : build_face_topology(mesh)) {
    if (f.kind != FaceKind::interior) continue;
    const int lo = std::min(degrees[f.left], degrees[f.right]);
    const int hi = std::max(degrees[f.left], degrees[f.right]);
    if (hi > 2 * lo)
      throw ConfigError("degree ratio " + std::to_string(hi) + "/" + std::to_string(lo) +
                        " across elements " + std::to_string(f.left) + "," +
                        std::to_string(f.right) + " exceeds the bound 2");
  }

  DgSpace space;
  space.degrees = std::move(degrees);
  space.order = std::move(order);
  space.ndofs.resize(mesh.n_triangles());
  space.offset.resize(mesh.n_triangles());
  int running = 0;
  for (int e : space.order) {
    space.ndofs[e] = dofs_for_degree(space.degrees[e]);
    space.offset[e] = running;
    running += space.ndofs[e];
  }
  space.n_dofs = running;
  space.max_degree = *std::max_element(space.degrees.begin(), space.degrees.end());
  return space;
}

}  // namespace

DgSpace build_dof_layout(const Mesh& mesh, std::vector<int> degrees) {
  std::vector<int> order(mesh.n_triangles());
  std::iota(order.begin(), order.end(), 0);
  return finish_layout(mesh, std::move(degrees), std::move(order));
}

DgSpace build_dof_layout(const Mesh& mesh, std::vector<int> degrees,
                         const std::vector<int>& subdomain_of) {
  if (static_cast<int>(subdomain_of.size()) != mesh.n_triangles())
    throw ConfigError("subdomain map size mismatch");
  std::vector<int> order(mesh.n_triangles());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return subdomain_of[a] < subdomain_of[b]; });
  return finish_layout(mesh, std::move(degrees), std::move(order));
}

Eigen::VectorXd project(const DgSpace& space, const Mesh& mesh,
                        const std::function<double(int, const Eigen::Vector2d&)>& f,
                        int exactness) {
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(space.n_dofs);
  std::map<int, std::pair<QuadratureRule, BasisTable>> cache;
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const int p = space.degrees[k];
    auto it = cache.find(p);
    if (it == cache.end()) {
      auto rule = quadrature(QuadDomain::triangle, std::max(exactness, 2 * p));
      auto table = tabulate_basis(p, rule.points);
      it = cache.emplace(p, std::make_pair(std::move(rule), std::move(table))).first;
    }
    const auto& [rule, table] = it->second;
    // orthonormal reference basis: coefficients are plain reference-domain
    // inner products, the Jacobian cancels
    Eigen::VectorXd fvals(rule.weights.size());
    for (int q = 0; q < fvals.size(); ++q)
      fvals(q) = f(k, rule.points.row(q).transpose());
    coeffs.segment(space.offset[k], space.ndofs[k]) =
        table.values.transpose() * rule.weights.cwiseProduct(fvals);
  }
  return coeffs;
}

Eigen::VectorXd project(const DgSpace& space, const Mesh& mesh,
                        const std::function<double(const Eigen::Vector2d&)>& f,
                        int exactness) {
  return project(
      space, mesh,
      [&](int k, const Eigen::Vector2d& ref) { return f(mesh.map_point(k, ref)); }, exactness);
}

double evaluate_element(const DgSpace& space, const Eigen::VectorXd& coeffs, int k,
                        const Eigen::Vector2d& ref) {
  auto [values, grads] = eval_basis(space.degrees[k], ref);
  return values.dot(coeffs.segment(space.offset[k], space.ndofs[k]));
}

}  // namespace ndgdm
