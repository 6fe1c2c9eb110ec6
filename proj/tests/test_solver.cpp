#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "beamnet/manufactured.hpp"
#include "beamnet/pcg.hpp"
#include "beamnet/schwarz.hpp"
#include "beamnet/spectral.hpp"

using namespace beamnet;

namespace {

CondensedSystem cross_system(int refinement, int p = 3) {
  const Network net = refine_uniform(cross_network(), refinement);
  static std::vector<Network> keep_alive;  // systems hold pointers to nets
  keep_alive.push_back(net);
  const LoadSet loads = manufactured_loads(cross_exact_solution(), keep_alive.back());
  return assemble(keep_alive.back(), p, StabilizationRule{0, 1.0}, loads);
}

}  // namespace

TEST_CASE("coarse grid collapses flat directions") {
  const Network net = cross_network();
  const CoarseGrid grid = CoarseGrid::bounding(net, 2, 2, 1);
  CHECK(!grid.collapsed[0]);
  CHECK(!grid.collapsed[1]);
  CHECK(grid.collapsed[2]);
  CHECK(grid.node_count() == 9);
  CHECK_THROWS_AS(CoarseGrid::bounding(net, 0, 1, 1), std::invalid_argument);
}

TEST_CASE("trilinear shape values form a partition of unity") {
  const Network net = refine_uniform(cross_network(), 3);
  const CoarseGrid grid = CoarseGrid::bounding(net, 3, 2, 1);
  for (const auto& node : net.nodes) {
    double sum = 0.0;
    for (const auto& [index, value] : grid.shape_values(node.position)) {
      CHECK(value > 0.0);
      CHECK(index >= 0);
      CHECK(index < grid.node_count());
      sum += value;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(grid.shape_values(Vec3(5, 0, 0)), std::invalid_argument);
}

TEST_CASE("shape values are cardinal at coarse vertices and 1/4 at centers") {
  // A network spanning [0,2]^2 x {0} with a 2x2x1 grid puts coarse nodes on
  // the integer lattice.
  Network net;
  auto add_node = [&](double x, double y, NodeKind kind) {
    Node node;
    node.id = static_cast<int>(net.nodes.size());
    node.position = Vec3(x, y, 0);
    node.kind = kind;
    net.nodes.push_back(node);
  };
  add_node(0, 0, NodeKind::Dirichlet);
  add_node(2, 0, NodeKind::Free);
  add_node(1, 1, NodeKind::Free);   // cell corner shared by all four cells
  add_node(0.5, 0.5, NodeKind::Free);  // center of the first cell
  add_node(0, 2, NodeKind::Free);
  add_node(2, 2, NodeKind::Free);
  for (int i = 1; i < 6; ++i) {
    Edge edge;
    edge.id = i - 1;
    edge.node_k = i - 1;
    edge.node_l = i;
    net.edges.push_back(edge);
  }
  finalize_network(net);

  // Bounding box is [0,2]^2 (up to tiny inflation), so node 2 at (1,1) sits
  // on the central coarse vertex and node 3 at a cell center.
  const CoarseGrid grid = CoarseGrid::bounding(net, 2, 2, 1);
  const auto at_vertex = grid.shape_values(net.nodes[2].position);
  double max_value = 0.0;
  for (const auto& [index, value] : at_vertex) max_value = std::max(max_value, value);
  CHECK(max_value == doctest::Approx(1.0).epsilon(1e-8));

  const auto at_center = grid.shape_values(net.nodes[3].position);
  CHECK(at_center.size() == 4);  // z collapsed: four in-plane corners
  for (const auto& [index, value] : at_center) {
    CHECK(value == doctest::Approx(0.25).epsilon(1e-8));
  }
}

TEST_CASE("strict policy drops coarse functions touching Dirichlet nodes") {
  const Network net = refine_uniform(cross_network(), 2);
  const DofMap dofs = DofMap::build(net);
  const CoarseGrid grid = CoarseGrid::bounding(net, 2, 2, 1);
  const SparseMat strict = build_coarse_interpolation(net, grid, dofs, CoarsePolicy::Strict);
  const SparseMat free_cols = build_coarse_interpolation(net, grid, dofs, CoarsePolicy::Free);
  CHECK(strict.rows() == dofs.total_dofs());
  CHECK(strict.cols() < free_cols.cols());
  CHECK(strict.cols() > 0);
}

TEST_CASE("preconditioner is symmetric, linear, and positive definite") {
  const CondensedSystem system = cross_system(2);
  const SchwarzSetup setup =
      build_schwarz(system, CoarseGrid::bounding(*system.net, 2, 2, 1));

  std::mt19937 gen(7);
  std::normal_distribution<double> normal;
  const int n = system.dofs.total_dofs();
  auto random_vec = [&] {
    VecX v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(gen);
    return v;
  };
  const VecX r = random_vec();
  const VecX s = random_vec();
  const VecX br = apply_preconditioner(setup, r);
  const VecX bs = apply_preconditioner(setup, s);

  CHECK(std::abs(br.dot(s) - r.dot(bs)) < 1e-12 * br.norm() * s.norm());
  CHECK(br.dot(r) > 0.0);
  const VecX combined = apply_preconditioner(setup, VecX(2.0 * r + s));
  CHECK((combined - 2.0 * br - bs).norm() < 1e-12 * combined.norm());
  CHECK(apply_preconditioner(setup, VecX(VecX::Zero(n))).norm() == 0.0);
}

TEST_CASE("every free dof is covered by a subdomain") {
  const CondensedSystem system = cross_system(2);
  const SchwarzSetup setup =
      build_schwarz(system, CoarseGrid::bounding(*system.net, 2, 2, 1));
  std::vector<bool> covered(system.dofs.total_dofs(), false);
  for (const auto& subdomain : setup.subdomains) {
    for (int dof : subdomain) covered[dof] = true;
  }
  for (bool c : covered) CHECK(c);
}

TEST_CASE("pcg solves a diagonal system in at most two iterations") {
  VecX diag(2);
  diag << 2.0, 5.0;
  const VecX rhs = VecX::Ones(2);
  auto op = [&](const VecX& x) { return VecX(diag.cwiseProduct(x)); };
  auto identity = [](const VecX& r) { return r; };
  const auto [x, report] = pcg(op, rhs, identity);
  CHECK(report.converged);
  CHECK(report.iterations <= 2);
  CHECK((diag.cwiseProduct(x) - rhs).norm() < 1e-12);
}

TEST_CASE("pcg handles a zero right-hand side") {
  auto op = [](const VecX& x) { return x; };
  auto identity = [](const VecX& r) { return r; };
  const auto [x, report] = pcg(op, VecX(VecX::Zero(4)), identity);
  CHECK(report.converged);
  CHECK(report.iterations == 0);
  CHECK(x.norm() == 0.0);
}

TEST_CASE("pcg reports breakdown on an indefinite operator") {
  MatX indefinite = MatX::Zero(2, 2);
  indefinite(0, 0) = 1.0;
  indefinite(1, 1) = -1.0;
  auto op = [&](const VecX& x) { return VecX(indefinite * x); };
  auto identity = [](const VecX& r) { return r; };
  VecX rhs(2);
  rhs << 0.0, 1.0;
  CHECK_THROWS_AS(pcg(op, rhs, identity), std::runtime_error);
}

TEST_CASE("pcg matches the dense direct solve") {
  const CondensedSystem system = cross_system(2);
  const SchwarzSetup setup =
      build_schwarz(system, CoarseGrid::bounding(*system.net, 2, 2, 1));
  const auto [x, report] = pcg(
      system, [&](const VecX& r) { return apply_preconditioner(setup, r); });
  REQUIRE(report.converged);
  const VecX oracle = solve_direct(system);
  CHECK((x - oracle).norm() < 1e-8 * oracle.norm());
  // Residual history is monotone within round-off in the reported norm.
  CHECK(report.residual_history.front() == 1.0);
  CHECK(report.residual_history.back() <= 1e-10);
}

TEST_CASE("single-cell free-policy coarse space plus full subdomain is exact") {
  const CondensedSystem system = cross_system(1);
  const SchwarzSetup setup = build_schwarz(
      system, CoarseGrid::bounding(*system.net, 1, 1, 1), CoarsePolicy::Free);
  const auto [x, report] = pcg(
      system, [&](const VecX& r) { return apply_preconditioner(setup, r); });
  CHECK(report.converged);
  // With z collapsed the four coarse functions cover the whole box, so the
  // subdomains jointly contain every free dof; convergence is near-direct.
  CHECK(report.iterations <= 10);
}

TEST_CASE("inexact subdomain solves with flexible pcg still converge") {
  const CondensedSystem system = cross_system(3);
  const SchwarzSetup setup = build_schwarz(
      system, CoarseGrid::bounding(*system.net, 2, 2, 1), CoarsePolicy::Strict,
      LocalSolverMode::InnerCg, 1e-3);
  PcgOptions options;
  options.flexible = true;
  const auto [x, report] = pcg(
      system, [&](const VecX& r) { return apply_preconditioner(setup, r); },
      options);
  CHECK(report.converged);
  const VecX oracle = solve_direct(system);
  CHECK((x - oracle).norm() < 1e-7 * oracle.norm());
}

TEST_CASE("two-level iteration counts stay bounded under refinement") {
  int min_it = 1 << 30, max_it = 0;
  for (int k = 2; k <= 4; ++k) {
    const CondensedSystem system = cross_system(k);
    const SchwarzSetup setup =
        build_schwarz(system, CoarseGrid::bounding(*system.net, 2, 2, 1));
    const auto [x, report] = pcg(
        system, [&](const VecX& r) { return apply_preconditioner(setup, r); });
    REQUIRE(report.converged);
    min_it = std::min(min_it, report.iterations);
    max_it = std::max(max_it, report.iterations);
  }
  CHECK(max_it < 2 * min_it);
}

TEST_CASE("spectral equivalence report") {
  const CondensedSystem system = cross_system(1);
  const SpectralReport report = spectral_equivalence_report(system);
  CHECK(report.theta_min > 0.0);
  CHECK(report.theta_max >= report.theta_min);

  // Scaling all material coefficients scales both extremes linearly.
  Network scaled_net = refine_uniform(cross_network(), 1);
  for (auto& edge : scaled_net.edges) {
    edge.material = Material{3.0, 3.0, 3.0, 3.0, 3.0, 3.0};
  }
  const CondensedSystem scaled =
      assemble(scaled_net, 3, StabilizationRule{0, 1.0});
  const SpectralReport scaled_report = spectral_equivalence_report(scaled);
  CHECK(scaled_report.theta_min ==
        doctest::Approx(3.0 * report.theta_min).epsilon(1e-6));
  CHECK(scaled_report.theta_max ==
        doctest::Approx(3.0 * report.theta_max).epsilon(1e-6));
}
