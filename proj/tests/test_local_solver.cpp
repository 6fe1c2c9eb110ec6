#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "beamnet/analytic_beam.hpp"
#include "beamnet/local_solver.hpp"
#include "beamnet/projection.hpp"

using namespace beamnet;

namespace {

std::mt19937 rng(20240817);

double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Edge random_edge() {
  Edge edge;
  edge.id = 0;
  edge.node_k = 0;
  edge.node_l = 1;
  const Vec3 pk(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
  Vec3 pl;
  do {
    pl = Vec3(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
  } while ((pl - pk).norm() < 0.1);
  edge.length = (pl - pk).norm();
  edge.tangent = (pl - pk).normalized();
  edge.frame = build_frame(pk, pl);
  edge.material = Material{uniform(0.5, 3), uniform(0.5, 3), uniform(0.5, 3),
                           uniform(0.5, 3), uniform(0.5, 3), uniform(0.5, 3)};
  return edge;
}

Vec12 random_hybrid() {
  Vec12 hybrid;
  for (int i = 0; i < 12; ++i) hybrid[i] = uniform(-1, 1);
  return hybrid;
}

/// Relative L2 distance between two local solutions over all four fields.
double relative_l2(const LocalSolution& a, const LocalSolution& b, double h) {
  const QuadratureRule quad = QuadratureRule::gauss_legendre(12);
  double diff = 0.0, norm = 0.0;
  for (size_t q = 0; q < quad.points.size(); ++q) {
    const double x = quad.points[q] * h;
    const double w = quad.weights[q] * h;
    diff += w * ((a.eval_u(x) - b.eval_u(x)).squaredNorm() +
                 (a.eval_r(x) - b.eval_r(x)).squaredNorm() +
                 (a.eval_n(x) - b.eval_n(x)).squaredNorm() +
                 (a.eval_m(x) - b.eval_m(x)).squaredNorm());
    norm += w * (b.eval_u(x).squaredNorm() + b.eval_r(x).squaredNorm() +
                 b.eval_n(x).squaredNorm() + b.eval_m(x).squaredNorm());
  }
  return std::sqrt(diff / std::max(norm, 1e-30));
}

}  // namespace

TEST_CASE("local solution reproduces the hybrid data at the endpoints") {
  const Edge edge = random_edge();
  const auto fact = assemble_local_solver(edge, 4, 1.0);
  const Vec12 hybrid = random_hybrid();
  const LocalSolution sol = local_solve(fact, hybrid);
  // For p >= 3 with zero loads the solution is the exact polynomial one,
  // whose traces interpolate the endpoint data.
  CHECK((sol.eval_u(0.0) - hybrid.segment<3>(0)).norm() < 1e-10);
  CHECK((sol.eval_r(0.0) - hybrid.segment<3>(3)).norm() < 1e-10);
  CHECK((sol.eval_u(edge.length) - hybrid.segment<3>(6)).norm() < 1e-10);
  CHECK((sol.eval_r(edge.length) - hybrid.segment<3>(9)).norm() < 1e-10);
}

TEST_CASE("local solver matches the closed-form solution") {
  for (int draw = 0; draw < 10; ++draw) {
    const Edge edge = random_edge();
    const Vec12 hybrid = random_hybrid();
    const LocalSolution exact = analytic_local_solution(edge, hybrid);
    for (int p : {3, 5}) {
      for (double tau : {1.0 / edge.length, 1.0, edge.length}) {
        const auto fact = assemble_local_solver(edge, p, tau);
        const LocalSolution sol = local_solve(fact, hybrid);
        CHECK(relative_l2(sol, exact, edge.length) < 1e-10);
      }
    }
  }
}

TEST_CASE("rigid motions produce zero internal forces") {
  const Edge edge = random_edge();
  const Vec3 translation(0.4, -1.1, 0.7);
  const Vec3 rotation(0.3, 0.2, -0.5);
  const Vec3 pk = Vec3::Zero();  // arc-length origin of the edge
  Vec12 hybrid;
  hybrid.segment<3>(0) = translation + rotation.cross(pk);
  hybrid.segment<3>(3) = rotation;
  hybrid.segment<3>(6) =
      translation + rotation.cross(pk + edge.length * edge.tangent);
  hybrid.segment<3>(9) = rotation;

  const auto fact = assemble_local_solver(edge, 3, 1.0);
  const LocalSolution sol = local_solve(fact, hybrid);
  for (double x : {0.0, 0.5 * edge.length, edge.length}) {
    CHECK(sol.eval_n(x).norm() < 1e-11);
    CHECK(sol.eval_m(x).norm() < 1e-11);
  }
}

TEST_CASE("local solve is linear in hybrid data and loads") {
  const Edge edge = random_edge();
  const auto fact = assemble_local_solver(edge, 3, 2.0);
  const Vec12 h1 = random_hybrid();
  const Vec12 h2 = random_hybrid();
  EdgeLoads loads;
  loads.force = [](double x) { return Vec3(std::sin(x), x, 1.0); };
  loads.moment = [](double x) { return Vec3(0.0, std::cos(2 * x), x * x); };

  const LocalSolution a = local_solve(fact, h1, loads);
  const LocalSolution b = local_solve(fact, h2);
  const LocalSolution combined = local_solve(fact, h1 + 2.0 * h2, loads);
  CHECK((combined.coeff_u - a.coeff_u - 2.0 * b.coeff_u).norm() < 1e-10);
  CHECK((combined.coeff_n - a.coeff_n - 2.0 * b.coeff_n).norm() < 1e-10);
}

TEST_CASE("solutions are frame covariant") {
  const Edge edge = random_edge();
  const Vec12 hybrid = random_hybrid();

  // Rotate the scene by a fixed rotation and compare.
  const Eigen::AngleAxisd rot(0.83, Vec3(1, 2, -1).normalized());
  const Mat3 q = rot.toRotationMatrix();
  Edge rotated = edge;
  rotated.tangent = q * edge.tangent;
  rotated.frame = q * edge.frame;
  Vec12 rotated_hybrid;
  for (int b = 0; b < 4; ++b) {
    rotated_hybrid.segment<3>(3 * b) = q * hybrid.segment<3>(3 * b);
  }

  const auto fact = assemble_local_solver(edge, 3, 1.0);
  const auto fact_rot = assemble_local_solver(rotated, 3, 1.0);
  const LocalSolution sol = local_solve(fact, hybrid);
  const LocalSolution sol_rot = local_solve(fact_rot, rotated_hybrid);
  for (double x : {0.1, 0.6 * edge.length}) {
    CHECK((sol_rot.eval_u(x) - q * sol.eval_u(x)).norm() < 1e-11);
    CHECK((sol_rot.eval_n(x) - q * sol.eval_n(x)).norm() < 1e-11);
    CHECK((sol_rot.eval_m(x) - q * sol.eval_m(x)).norm() < 1e-11);
  }
}

TEST_CASE("condensed block is symmetric positive semidefinite") {
  const Edge edge = random_edge();
  for (int p : {1, 2, 4}) {
    const auto fact = assemble_local_solver(edge, p, 1.0);
    const Mat12 block = condense(fact).matrix;
    CHECK((block - block.transpose()).norm() < 1e-11 * block.norm());
    Eigen::SelfAdjointEigenSolver<Mat12> eigen(block);
    CHECK(eigen.eigenvalues().minCoeff() > -1e-10 * block.norm());
    // Six rigid modes in the kernel.
    int near_zero = 0;
    for (int i = 0; i < 12; ++i) {
      if (eigen.eigenvalues()[i] < 1e-9 * block.norm()) ++near_zero;
    }
    CHECK(near_zero == 6);
  }
}

TEST_CASE("condensed block matches the analytic flux block") {
  for (int draw = 0; draw < 10; ++draw) {
    const Edge edge = random_edge();
    const Mat12 expected = analytic_flux_block(edge).matrix;
    const auto fact = assemble_local_solver(edge, 3, 1.0);
    const Mat12 block = condense(fact).matrix;
    CHECK((block - expected).norm() < 1e-9 * expected.norm());
  }
}

TEST_CASE("condensed quadratic form equals the elastic energy") {
  for (int draw = 0; draw < 5; ++draw) {
    const Edge edge = random_edge();
    const Vec12 hybrid = random_hybrid();
    const double energy = analytic_energy(edge, hybrid);
    const auto fact = assemble_local_solver(edge, 4, 1.0);
    const double quadratic = hybrid.dot(condense(fact).matrix * hybrid);
    CHECK(quadratic == doctest::Approx(energy).epsilon(1e-8));
  }
}

TEST_CASE("numerical flux traces balance interior equilibrium") {
  // With exact (polynomial) local solutions and hybrid data equal to the
  // endpoint traces, the flux trace reduces to -n nu, -m nu.
  const Edge edge = random_edge();
  const auto fact = assemble_local_solver(edge, 3, 1.7);
  const Vec12 hybrid = random_hybrid();
  const LocalSolution sol = local_solve(fact, hybrid);
  const Vec12 trace = numerical_flux_trace(fact, sol, hybrid);
  CHECK((trace.segment<3>(0) - sol.eval_n(0.0)).norm() < 1e-10);
  CHECK((trace.segment<3>(3) - sol.eval_m(0.0)).norm() < 1e-10);
  CHECK((trace.segment<3>(6) + sol.eval_n(edge.length)).norm() < 1e-10);
  CHECK((trace.segment<3>(9) + sol.eval_m(edge.length)).norm() < 1e-10);
}

TEST_CASE("stabilization rule scales as c h^s") {
  CHECK(StabilizationRule{0, 2.5}.tau(0.25) == doctest::Approx(2.5));
  CHECK(StabilizationRule{1, 1.0}.tau(0.25) == doctest::Approx(0.25));
  CHECK(StabilizationRule{-1, 3.0}.tau(0.25) == doctest::Approx(12.0));
}

TEST_CASE("projection satisfies its defining conditions") {
  const double h = 0.73;
  const double tau = 1.4;
  const auto u = [](double x) { return std::sin(2.1 * x) + 0.3 * x; };
  const auto n = [](double x) { return std::cos(1.7 * x) - x * x; };
  for (int p = 1; p <= 4; ++p) {
    const PolynomialSpace space(p);
    const ProjectedPair proj = hdg_projection(u, n, h, space, tau);

    // Moment conditions against all basis functions of degree <= p-1.
    const QuadratureRule quad = QuadratureRule::gauss_legendre(2 * p + 6);
    VecX mom_u = VecX::Zero(p + 1), mom_n = VecX::Zero(p + 1);
    for (size_t q = 0; q < quad.points.size(); ++q) {
      const VecX v = space.basis.eval(quad.points[q]);
      mom_u += quad.weights[q] * u(quad.points[q] * h) * v;
      mom_n += quad.weights[q] * n(quad.points[q] * h) * v;
    }
    for (int i = 0; i < p; ++i) {
      CHECK(std::abs(proj.primal[i] - mom_u[i]) < 1e-11);
      CHECK(std::abs(proj.dual[i] - mom_n[i]) < 1e-11);
    }

    // Endpoint flux conditions.
    const double p1_at_0 = proj.primal.dot(space.value_at_zero);
    const double p2_at_0 = proj.dual.dot(space.value_at_zero);
    const double p1_at_h = proj.primal.dot(space.value_at_one);
    const double p2_at_h = proj.dual.dot(space.value_at_one);
    CHECK(std::abs((-p2_at_0 + tau * p1_at_0) - (-n(0.0) + tau * u(0.0))) < 1e-11);
    CHECK(std::abs((p2_at_h + tau * p1_at_h) - (n(h) + tau * u(h))) < 1e-11);
  }
}

TEST_CASE("projection is the identity on the polynomial space") {
  const int p = 3;
  const PolynomialSpace space(p);
  const double h = 0.9;
  VecX coeff_u = VecX::Zero(p + 1), coeff_n = VecX::Zero(p + 1);
  coeff_u << 0.3, -1.2, 0.8, 0.1;
  coeff_n << 1.1, 0.4, -0.6, 0.9;
  const auto u = [&](double x) {
    return coeff_u.dot(space.basis.eval(x / h));
  };
  const auto n = [&](double x) {
    return coeff_n.dot(space.basis.eval(x / h));
  };
  const ProjectedPair proj = hdg_projection(u, n, h, space, 2.2);
  CHECK((proj.primal - coeff_u).norm() < 1e-11);
  CHECK((proj.dual - coeff_n).norm() < 1e-11);
}

TEST_CASE("projection error decays at the expected rate") {
  const auto u = [](double x) { return std::sin(3.0 * x); };
  const auto n = [](double x) { return std::cos(2.0 * x); };
  for (int p = 1; p <= 3; ++p) {
    const PolynomialSpace space(p);
    double prev = 0.0;
    double rate_sum = 0.0;
    int rate_count = 0;
    for (int level = 0; level < 6; ++level) {
      const double h = 0.5 / (1 << level);
      const ProjectedPair proj = hdg_projection(u, n, h, space, 1.0);
      const QuadratureRule quad = QuadratureRule::gauss_legendre(p + 6);
      double err = 0.0;
      for (size_t q = 0; q < quad.points.size(); ++q) {
        const double x = quad.points[q] * h;
        const VecX v = space.basis.eval(quad.points[q]);
        err += quad.weights[q] * h *
               (std::pow(u(x) - proj.primal.dot(v), 2) +
                std::pow(n(x) - proj.dual.dot(v), 2));
      }
      err = std::sqrt(err);
      if (level >= 3) {
        rate_sum += std::log2(prev / err);
        ++rate_count;
      }
      prev = err;
    }
    const double rate = rate_sum / rate_count;
    // L2 rate on a single shrinking interval: p + 1 plus the h^{1/2}
    // measure factor.
    CHECK(rate == doctest::Approx(p + 1.5).epsilon(0.1));
  }
}
