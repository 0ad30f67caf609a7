#include "ndgdm/sipg.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

namespace ndgdm {

DiffusionField make_diffusion(Eigen::VectorXd per_element) {
  if (per_element.size() == 0) throw DataError("diffusion field is empty");
  DiffusionField field;
  field.min_value = per_element.minCoeff();
  field.max_value = per_element.maxCoeff();
  if (field.min_value <= 0.0) throw DataError("diffusion values must be positive");
  field.values = std::move(per_element);
  return field;
}

DiffusionField make_diffusion(const Mesh& mesh,
                              const std::function<double(int)>& value_of_material) {
  Eigen::VectorXd values(mesh.n_triangles());
  for (int k = 0; k < mesh.n_triangles(); ++k) values(k) = value_of_material(mesh.material[k]);
  return make_diffusion(std::move(values));
}

double face_penalty(const Face& face, const DgSpace& space, const DiffusionField& diffusion,
                    double penalty_constant) {
  double k_gamma = diffusion.values(face.left);
  int p_gamma = space.degrees[face.left];
  if (face.kind == FaceKind::interior) {
    k_gamma = std::max(k_gamma, diffusion.values(face.right));
    p_gamma = std::max(p_gamma, space.degrees[face.right]);
  }
  return penalty_constant * k_gamma * p_gamma * p_gamma / face.h;
}

namespace {

struct ElementGeometry {
  double det = 0.0;           // Jacobian determinant, equals twice the area
  Eigen::Matrix2d inv_t;      // inverse transpose of the Jacobian
};

ElementGeometry element_geometry(const Mesh& mesh, int k) {
  ElementGeometry geo;
  const Eigen::Matrix2d j = mesh.jacobian(k);
  geo.det = j.determinant();
  geo.inv_t = j.inverse().transpose();
  return geo;
}

// Per-degree volume rule + tabulated basis, built lazily.
class VolumeTables {
 public:
  explicit VolumeTables(int extra_exactness = 0) : extra_(extra_exactness) {}

  struct Entry {
    QuadratureRule rule;
    BasisTable table;
  };

  const Entry& at(int degree) {
    auto it = cache_.find(degree);
    if (it == cache_.end()) {
      Entry entry;
      entry.rule = quadrature(QuadDomain::triangle, 2 * degree + extra_);
      entry.table = tabulate_basis(degree, entry.rule.points);
      it = cache_.emplace(degree, std::move(entry)).first;
    }
    return it->second;
  }

 private:
  int extra_;
  std::map<int, Entry> cache_;
};

// Trace tables of one element along one face, at the segment-rule points.
struct TraceTable {
  Eigen::MatrixXd values;  // nq x ndofs
  Eigen::MatrixXd flux;    // nq x ndofs, diffusion-weighted normal derivative
};

TraceTable face_traces(const Mesh& mesh, const DgSpace& space, const DiffusionField& diffusion,
                       const Face& face, int element, const Eigen::VectorXd& params) {
  const int p = space.degrees[element];
  const int n = space.ndofs[element];
  const auto geo = element_geometry(mesh, element);
  const Eigen::Vector2d ra = mesh.reference_vertex(element, face.ends[0]);
  const Eigen::Vector2d rb = mesh.reference_vertex(element, face.ends[1]);

  TraceTable trace;
  const int nq = static_cast<int>(params.size());
  trace.values.resize(nq, n);
  trace.flux.resize(nq, n);
  const double kval = diffusion.values(element);
  const Eigen::Vector2d pulled_normal = geo.inv_t.transpose() * face.normal;  // J^{-1} n
  for (int q = 0; q < nq; ++q) {
    const Eigen::Vector2d ref = ra + params(q) * (rb - ra);
    auto [v, g] = eval_basis(p, ref);
    trace.values.row(q) = v.transpose();
    // physical gradient dotted with the face normal, scaled by K
    trace.flux.row(q) = kval * (g * pulled_normal).transpose();
  }
  return trace;
}

}  // namespace

SparseSystem assemble_system(const Mesh& mesh, const DgSpace& space,
                             const DiffusionField& diffusion, const AssemblyConfig& config) {
  if (space.degrees.size() != static_cast<size_t>(mesh.n_triangles()))
    throw ConfigError("space does not match the mesh");
  if (diffusion.values.size() != mesh.n_triangles())
    throw DataError("diffusion field does not match the mesh");
  if (config.penalty_constant <= 0.0) throw ConfigError("penalty constant must be positive");

  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.n_dofs);

  // volume terms and source functional
  VolumeTables stiffness_tables(0), source_tables(2);
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const int p = space.degrees[k];
    const int n = space.ndofs[k];
    const int off = space.offset[k];
    const auto geo = element_geometry(mesh, k);

    const auto& [rule, table] = stiffness_tables.at(p);
    const Eigen::MatrixXd gx = table.dx * geo.inv_t(0, 0) + table.dy * geo.inv_t(0, 1);
    const Eigen::MatrixXd gy = table.dx * geo.inv_t(1, 0) + table.dy * geo.inv_t(1, 1);
    const Eigen::VectorXd w = rule.weights * diffusion.values(k) * geo.det;
    const Eigen::MatrixXd local =
        gx.transpose() * w.asDiagonal() * gx + gy.transpose() * w.asDiagonal() * gy;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) triplets.emplace_back(off + i, off + j, local(i, j));

    if (config.source) {
      const auto& [srule, stable] = source_tables.at(p);
      Eigen::VectorXd fvals(srule.weights.size());
      for (int q = 0; q < fvals.size(); ++q)
        fvals(q) = config.source(mesh.map_point(k, srule.points.row(q).transpose()));
      rhs.segment(off, n) +=
          geo.det * stable.values.transpose() * srule.weights.cwiseProduct(fvals);
    }
  }

  // face terms: penalty and the symmetric flux pair
  std::map<int, QuadratureRule> segment_rules;
  for (const auto& face : build_face_topology(mesh, config.is_dirichlet)) {
    if (face.kind == FaceKind::neumann) continue;
    const bool interior = face.kind == FaceKind::interior;

    int p_gamma = space.degrees[face.left];
    if (interior) p_gamma = std::max(p_gamma, space.degrees[face.right]);
    auto rit = segment_rules.find(p_gamma);
    if (rit == segment_rules.end())
      rit = segment_rules.emplace(p_gamma, quadrature(QuadDomain::segment, 2 * p_gamma + 1))
                .first;
    const auto& rule = rit->second;
    const Eigen::VectorXd params = rule.points.col(0);
    const Eigen::VectorXd w = rule.weights * face.length;
    const double sigma = face_penalty(face, space, diffusion, config.penalty_constant);

    const std::vector<int> sides =
        interior ? std::vector<int>{face.left, face.right} : std::vector<int>{face.left};
    const double average_weight = interior ? 0.5 : 1.0;
    std::vector<TraceTable> traces;
    for (int e : sides) traces.push_back(face_traces(mesh, space, diffusion, face, e, params));

    for (size_t a = 0; a < sides.size(); ++a) {
      const double sign_a = a == 0 ? 1.0 : -1.0;
      for (size_t b = 0; b < sides.size(); ++b) {
        const double sign_b = b == 0 ? 1.0 : -1.0;
        const Eigen::MatrixXd block =
            sign_a * sign_b * sigma *
                (traces[a].values.transpose() * w.asDiagonal() * traces[b].values) -
            sign_a * average_weight *
                (traces[a].values.transpose() * w.asDiagonal() * traces[b].flux) -
            sign_b * average_weight *
                (traces[a].flux.transpose() * w.asDiagonal() * traces[b].values);
        const int ra = space.offset[sides[a]], cb = space.offset[sides[b]];
        for (int i = 0; i < block.rows(); ++i)
          for (int j = 0; j < block.cols(); ++j) triplets.emplace_back(ra + i, cb + j, block(i, j));
      }
    }

    // Dirichlet lifting: move the known boundary trace to the right-hand side
    if (!interior && config.dirichlet) {
      Eigen::VectorXd ud(params.size());
      const Eigen::Vector2d pa = mesh.vertices[face.ends[0]];
      const Eigen::Vector2d pb = mesh.vertices[face.ends[1]];
      for (int q = 0; q < params.size(); ++q) ud(q) = config.dirichlet(pa + params(q) * (pb - pa));
      rhs.segment(space.offset[face.left], space.ndofs[face.left]) +=
          sigma * traces[0].values.transpose() * w.cwiseProduct(ud) -
          traces[0].flux.transpose() * w.cwiseProduct(ud);
    }
  }

  SparseSystem system;
  system.matrix.resize(space.n_dofs, space.n_dofs);
  system.matrix.setFromTriplets(triplets.begin(), triplets.end());
  // the form is symmetric; make the assembled matrix exactly so
  const Eigen::SparseMatrix<double> transposed = system.matrix.transpose();
  system.matrix = 0.5 * (system.matrix + transposed);
  system.rhs = std::move(rhs);
  return system;
}

double dg_norm(const Mesh& mesh, const DgSpace& space, const DiffusionField& diffusion,
               const AssemblyConfig& config, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != space.n_dofs) throw DataError("coefficient vector length mismatch");
  double sq = 0.0;

  VolumeTables tables(0);
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const auto geo = element_geometry(mesh, k);
    const auto& [rule, table] = tables.at(space.degrees[k]);
    const Eigen::VectorXd c = coeffs.segment(space.offset[k], space.ndofs[k]);
    const Eigen::VectorXd du = table.dx * c, dv = table.dy * c;
    for (int q = 0; q < rule.weights.size(); ++q) {
      const Eigen::Vector2d grad = geo.inv_t * Eigen::Vector2d(du(q), dv(q));
      sq += diffusion.values(k) * geo.det * rule.weights(q) * grad.squaredNorm();
    }
  }

  std::map<int, QuadratureRule> segment_rules;
  for (const auto& face : build_face_topology(mesh, config.is_dirichlet)) {
    if (face.kind == FaceKind::neumann) continue;
    const bool interior = face.kind == FaceKind::interior;
    int p_gamma = space.degrees[face.left];
    if (interior) p_gamma = std::max(p_gamma, space.degrees[face.right]);
    auto rit = segment_rules.find(p_gamma);
    if (rit == segment_rules.end())
      rit = segment_rules.emplace(p_gamma, quadrature(QuadDomain::segment, 2 * p_gamma + 1))
                .first;
    const auto& rule = rit->second;
    const Eigen::VectorXd params = rule.points.col(0);
    const double sigma = face_penalty(face, space, diffusion, config.penalty_constant);

    const auto left = face_traces(mesh, space, diffusion, face, face.left, params);
    Eigen::VectorXd jump =
        left.values * coeffs.segment(space.offset[face.left], space.ndofs[face.left]);
    if (interior) {
      const auto right = face_traces(mesh, space, diffusion, face, face.right, params);
      jump -= right.values * coeffs.segment(space.offset[face.right], space.ndofs[face.right]);
    }
    sq += sigma * face.length * rule.weights.dot(jump.cwiseAbs2());
  }
  return std::sqrt(sq);
}

double l2_error(const Mesh& mesh, const DgSpace& space, const Eigen::VectorXd& coeffs,
                const ScalarField& exact) {
  if (coeffs.size() != space.n_dofs) throw DataError("coefficient vector length mismatch");
  double sq = 0.0;
  VolumeTables tables(2);
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const auto geo = element_geometry(mesh, k);
    const auto& [rule, table] = tables.at(space.degrees[k]);
    const Eigen::VectorXd vals =
        table.values * coeffs.segment(space.offset[k], space.ndofs[k]);
    for (int q = 0; q < rule.weights.size(); ++q) {
      const double diff = vals(q) - exact(mesh.map_point(k, rule.points.row(q).transpose()));
      sq += geo.det * rule.weights(q) * diff * diff;
    }
  }
  return std::sqrt(sq);
}

BenchmarkProblem build_benchmark_problem(const std::string& name, double zeta) {
  if (zeta < 1.0) throw ConfigError("contrast must be at least 1");
  BenchmarkProblem problem;
  problem.name = name;
  if (name == "laplace") {
    problem.config.source = [](const Eigen::Vector2d& x) {
      return 2.0 * x.x() * (1.0 - x.x()) + 2.0 * x.y() * (1.0 - x.y());
    };
    problem.config.dirichlet = [](const Eigen::Vector2d&) { return 0.0; };
    problem.diffusion = [](const Mesh& mesh) {
      return make_diffusion(Eigen::VectorXd::Ones(mesh.n_triangles()));
    };
    problem.exact = [](const Eigen::Vector2d& x) {
      return x.x() * (1.0 - x.x()) * x.y() * (1.0 - x.y());
    };
    problem.default_tol = 1e-12;
    return problem;
  }
  if (name == "stripes") {
    problem.assign_materials = [](Mesh& mesh) {
      for (int k = 0; k < mesh.n_triangles(); ++k) {
        const double y = mesh.centroid(k).y();
        mesh.material[k] = (y > 1.0 / 3.0 && y < 2.0 / 3.0) ? 1 : 0;
      }
    };
    problem.diffusion = [zeta](const Mesh& mesh) {
      return make_diffusion(mesh, [zeta](int m) { return m == 1 ? 1.0 / zeta : 1.0; });
    };
    problem.config.source = [](const Eigen::Vector2d&) { return 5.0e4; };
    problem.config.dirichlet = [](const Eigen::Vector2d&) { return 0.0; };
    problem.config.is_dirichlet = [](const Eigen::Vector2d& mid) {
      return !(mid.y() < 1e-12 || mid.x() < 1e-12);  // Neumann on the bottom and left
    };
    problem.default_tol = 1e-10;
    return problem;
  }
  throw ConfigError("unknown benchmark problem '" + name + "'");
}

Eigen::VectorXd oscillatory_initial_guess(const DgSpace& space, const Mesh& mesh) {
  const auto wave = [](const Eigen::Vector2d& x) {
    double s = 0.0;
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j)
        s += std::sin(2.0 * std::numbers::pi * i * x.x()) *
             std::sin(2.0 * std::numbers::pi * j * x.y());
    return s;
  };
  return project(space, mesh, wave, std::max(2 * space.max_degree + 2, 32));
}

}  // namespace ndgdm
