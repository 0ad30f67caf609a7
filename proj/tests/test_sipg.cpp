#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "ndgdm/sipg.hpp"

using namespace ndgdm;

namespace {

AssemblyConfig plain_config() {
  AssemblyConfig config;
  config.dirichlet = [](const Eigen::Vector2d&) { return 0.0; };
  return config;
}

DgSpace uniform_space(const Mesh& mesh, int p) {
  return build_dof_layout(mesh, std::vector<int>(mesh.n_triangles(), p));
}

Eigen::VectorXd direct_solve(const SparseSystem& system) {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(system.matrix);
  REQUIRE(llt.info() == Eigen::Success);
  return llt.solve(system.rhs);
}

// Interior-face jump energy of a coefficient field, assembled independently
// of dg_norm.
double interior_jump_energy(const Mesh& mesh, const DgSpace& space,
                            const Eigen::VectorXd& coeffs) {
  double sq = 0.0;
  const auto rule = quadrature(QuadDomain::segment, 2 * space.max_degree + 1);
  for (const auto& face : build_face_topology(mesh)) {
    if (face.kind != FaceKind::interior) continue;
    for (int q = 0; q < rule.weights.size(); ++q) {
      const double t = rule.points(q, 0);
      auto trace = [&](int element) {
        const Eigen::Vector2d ra = mesh.reference_vertex(element, face.ends[0]);
        const Eigen::Vector2d rb = mesh.reference_vertex(element, face.ends[1]);
        return evaluate_element(space, coeffs, element, ra + t * (rb - ra));
      };
      const double jump = trace(face.left) - trace(face.right);
      sq += face.length * rule.weights(q) * jump * jump;
    }
  }
  return std::sqrt(sq);
}

}  // namespace

TEST_CASE("diffusion fields validate their data") {
  CHECK_THROWS_AS(make_diffusion(Eigen::VectorXd()), DataError);
  Eigen::VectorXd bad(3);
  bad << 1.0, 0.0, 2.0;
  CHECK_THROWS_AS(make_diffusion(bad), DataError);
  Eigen::VectorXd good(3);
  good << 2.0, 0.5, 1.0;
  const DiffusionField field = make_diffusion(good);
  CHECK(field.min_value == 0.5);
  CHECK(field.max_value == 2.0);
  CHECK(field.contrast() == doctest::Approx(4.0));
}

TEST_CASE("smallest Laplace system is symmetric positive definite") {
  const Mesh mesh = build_uniform_square_mesh(1);
  const DgSpace space = uniform_space(mesh, 1);
  const auto diffusion = make_diffusion(Eigen::VectorXd::Ones(2));
  const SparseSystem system = assemble_system(mesh, space, diffusion, plain_config());
  REQUIRE(system.n() == 6);

  const Eigen::MatrixXd a = system.matrix;
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  CHECK(solver.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("assembled matrices are numerically symmetric") {
  const auto problem = build_benchmark_problem("stripes", 100.0);
  Mesh mesh = build_uniform_square_mesh(6);
  problem.assign_materials(mesh);
  const DgSpace space = uniform_space(mesh, 2);
  const SparseSystem system =
      assemble_system(mesh, space, problem.diffusion(mesh), problem.config);
  const Eigen::MatrixXd a = system.matrix;
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * a.cwiseAbs().maxCoeff());
}

TEST_CASE("coercivity holds on small meshes across degrees") {
  for (int n : {2, 3, 4}) {
    for (int p : {1, 2, 3}) {
      const Mesh mesh = build_uniform_square_mesh(n);
      const DgSpace space = uniform_space(mesh, p);
      const auto diffusion = make_diffusion(Eigen::VectorXd::Ones(mesh.n_triangles()));
      const SparseSystem system = assemble_system(mesh, space, diffusion, plain_config());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver{Eigen::MatrixXd(system.matrix)};
      CHECK(solver.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("quartic exact solution is reproduced at degree four") {
  const auto problem = build_benchmark_problem("laplace");
  const Mesh mesh = build_uniform_square_mesh(4);
  const DgSpace space = uniform_space(mesh, 4);
  const auto diffusion = problem.diffusion(mesh);
  const SparseSystem system = assemble_system(mesh, space, diffusion, problem.config);
  const Eigen::VectorXd solution = direct_solve(system);

  const Eigen::VectorXd exact = project(space, mesh, problem.exact, 10);
  AssemblyConfig norm_config = problem.config;
  CHECK(dg_norm(mesh, space, diffusion, norm_config, solution - exact) <= 1e-8);
  CHECK(l2_error(mesh, space, solution, problem.exact) <= 1e-9);
}

TEST_CASE("dg norm of a smooth interpolant reduces to its gradient norm") {
  const Mesh mesh = build_uniform_square_mesh(3);
  const DgSpace space = uniform_space(mesh, 2);
  const auto diffusion = make_diffusion(Eigen::VectorXd::Ones(mesh.n_triangles()));
  const Eigen::VectorXd coeffs =
      project(space, mesh, [](const Eigen::Vector2d& x) { return x.x(); }, 8);

  AssemblyConfig all_neumann;
  all_neumann.is_dirichlet = [](const Eigen::Vector2d&) { return false; };
  CHECK(dg_norm(mesh, space, diffusion, all_neumann, coeffs) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dg_norm(mesh, space, diffusion, all_neumann, Eigen::VectorXd::Zero(space.n_dofs)) == 0.0);
}

TEST_CASE("dg norm of an element indicator is the penalty-face sum") {
  const Mesh mesh = build_uniform_square_mesh(3);
  const DgSpace space = uniform_space(mesh, 2);
  const auto diffusion = make_diffusion(Eigen::VectorXd::Ones(mesh.n_triangles()));
  const AssemblyConfig config = plain_config();

  const int element = 7;
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(space.n_dofs);
  coeffs(space.offset[element]) = 1.0 / std::sqrt(2.0);  // constant one on the element

  double expected_sq = 0.0;
  for (const auto& face : build_face_topology(mesh, config.is_dirichlet)) {
    if (face.left != element && face.right != element) continue;
    expected_sq += face_penalty(face, space, diffusion, config.penalty_constant) * face.length;
  }
  const double norm = dg_norm(mesh, space, diffusion, config, coeffs);
  CHECK(norm * norm == doctest::Approx(expected_sq).epsilon(1e-12));
}

TEST_CASE("l2 error of an in-space function vanishes") {
  const Mesh mesh = build_uniform_square_mesh(2);
  const DgSpace space = uniform_space(mesh, 2);
  auto poly = [](const Eigen::Vector2d& x) { return x.x() * x.y() + 0.5 * x.x() - 1.0; };
  const Eigen::VectorXd coeffs = project(space, mesh, poly, 8);
  CHECK(l2_error(mesh, space, coeffs, poly) <= 1e-12);
  CHECK(l2_error(mesh, space, Eigen::VectorXd::Zero(space.n_dofs),
                 [](const Eigen::Vector2d&) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("observed convergence order matches the degree") {
  const auto problem = build_benchmark_problem("laplace");
  std::vector<double> errors, steps;
  for (int n : {4, 8, 16}) {
    Mesh mesh = build_uniform_square_mesh(n);
    const DgSpace space = uniform_space(mesh, 1);
    const SparseSystem system =
        assemble_system(mesh, space, problem.diffusion(mesh), problem.config);
    errors.push_back(l2_error(mesh, space, direct_solve(system), problem.exact));
    steps.push_back(1.0 / n);
  }
  const double order01 = std::log(errors[0] / errors[1]) / std::log(steps[0] / steps[1]);
  const double order12 = std::log(errors[1] / errors[2]) / std::log(steps[1] / steps[2]);
  CHECK(order01 == doctest::Approx(2.0).epsilon(0.15));
  CHECK(order12 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("globally continuous fields have no interior jumps") {
  const Mesh mesh = build_uniform_square_mesh(3);
  const DgSpace space = uniform_space(mesh, 2);
  auto poly = [](const Eigen::Vector2d& x) { return x.x() * x.y() - 2.0 * x.y() + 0.25; };
  const Eigen::VectorXd coeffs = project(space, mesh, poly, 8);
  CHECK(interior_jump_energy(mesh, space, coeffs) < 1e-12);
}

TEST_CASE("laplace problem carries its exact solution") {
  const auto problem = build_benchmark_problem("laplace");
  REQUIRE(problem.exact);
  CHECK(problem.exact(Eigen::Vector2d(0.5, 0.5)) == doctest::Approx(1.0 / 16));
  CHECK(problem.exact(Eigen::Vector2d(0.0, 0.7)) == 0.0);
  // the source is minus the Laplacian of the exact solution
  const Eigen::Vector2d x(0.3, 0.6);
  const double h = 1e-5;
  double laplacian = -4.0 * problem.exact(x);
  for (const auto& d : {Eigen::Vector2d(h, 0), Eigen::Vector2d(-h, 0), Eigen::Vector2d(0, h),
                        Eigen::Vector2d(0, -h)})
    laplacian += problem.exact(x + d);
  laplacian /= h * h;
  CHECK(problem.config.source(x) == doctest::Approx(-laplacian).epsilon(1e-4));
}

TEST_CASE("stripes problem has the advertised contrast and boundaries") {
  for (double zeta : {100.0, 10000.0}) {
    const auto problem = build_benchmark_problem("stripes", zeta);
    Mesh mesh = build_uniform_square_mesh(6);
    problem.assign_materials(mesh);
    bool saw_band = false;
    for (int k = 0; k < mesh.n_triangles(); ++k) {
      const double y = mesh.centroid(k).y();
      CHECK(mesh.material[k] == ((y > 1.0 / 3 && y < 2.0 / 3) ? 1 : 0));
      saw_band |= mesh.material[k] == 1;
    }
    CHECK(saw_band);
    const DiffusionField diffusion = problem.diffusion(mesh);
    CHECK(diffusion.contrast() == doctest::Approx(zeta).epsilon(1e-15));

    REQUIRE(problem.config.is_dirichlet);
    CHECK_FALSE(problem.config.is_dirichlet(Eigen::Vector2d(0.5, 0.0)));  // bottom
    CHECK_FALSE(problem.config.is_dirichlet(Eigen::Vector2d(0.0, 0.5)));  // left
    CHECK(problem.config.is_dirichlet(Eigen::Vector2d(0.5, 1.0)));        // top
    CHECK(problem.config.is_dirichlet(Eigen::Vector2d(1.0, 0.5)));        // right
  }

  const auto degenerate = build_benchmark_problem("stripes", 1.0);
  Mesh mesh = build_uniform_square_mesh(3);
  degenerate.assign_materials(mesh);
  CHECK(degenerate.diffusion(mesh).contrast() == 1.0);

  CHECK_THROWS_AS(build_benchmark_problem("annulus"), ConfigError);
}

TEST_CASE("oscillatory initial guess excites every element") {
  const Mesh mesh = build_uniform_square_mesh(5);
  const DgSpace space = uniform_space(mesh, 2);
  const Eigen::VectorXd guess = oscillatory_initial_guess(space, mesh);
  CHECK(guess.norm() > 0.0);
  for (int k = 0; k < mesh.n_triangles(); ++k)
    CHECK(guess.segment(space.offset[k], space.ndofs[k]).norm() > 0.0);
}

TEST_CASE("oscillatory guess matches a brute-force quadrature projection") {
  const Mesh mesh = build_uniform_square_mesh(2);
  const DgSpace space = uniform_space(mesh, 1);
  const Eigen::VectorXd guess = oscillatory_initial_guess(space, mesh);

  // independent oracle: assemble element mass matrices and load vectors with
  // a fresh high-order rule and solve element by element
  auto wave = [](const Eigen::Vector2d& x) {
    double s = 0.0;
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j)
        s += std::sin(2 * std::numbers::pi * i * x.x()) * std::sin(2 * std::numbers::pi * j * x.y());
    return s;
  };
  const auto rule = quadrature(QuadDomain::triangle, 30);
  const auto table = tabulate_basis(1, rule.points);
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const double det = mesh.jacobian(k).determinant();
    const Eigen::MatrixXd mass =
        det * table.values.transpose() * rule.weights.asDiagonal() * table.values;
    Eigen::VectorXd load(3);
    load.setZero();
    for (int q = 0; q < rule.weights.size(); ++q)
      load += det * rule.weights(q) * wave(mesh.map_point(k, rule.points.row(q).transpose())) *
              table.values.row(q).transpose();
    const Eigen::VectorXd expected = mass.ldlt().solve(load);
    CHECK((guess.segment(space.offset[k], 3) - expected).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("assembly rejects inconsistent inputs") {
  const Mesh mesh = build_uniform_square_mesh(2);
  const DgSpace space = uniform_space(mesh, 1);
  const auto diffusion = make_diffusion(Eigen::VectorXd::Ones(mesh.n_triangles()));
  AssemblyConfig config = plain_config();
  config.penalty_constant = 0.0;
  CHECK_THROWS_AS(assemble_system(mesh, space, diffusion, config), ConfigError);

  const Mesh other = build_uniform_square_mesh(3);
  CHECK_THROWS_AS(
      assemble_system(other, space, make_diffusion(Eigen::VectorXd::Ones(other.n_triangles())),
                      plain_config()),
      ConfigError);
}
