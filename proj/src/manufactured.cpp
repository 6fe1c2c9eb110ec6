#include "beamnet/manufactured.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "beamnet/pcg.hpp"
#include "beamnet/schwarz.hpp"

namespace beamnet {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 point_on_edge(const Network& net, const Edge& edge, double x) {
  return net.nodes[edge.node_k].position + x * edge.tangent;
}

}  // namespace

ExactSolution cross_exact_solution() {
  ExactSolution exact;
  exact.u = [](const Vec3& p) {
    return Vec3(0.0, std::cos(kPi * p.y()), std::cos(kPi * p.x()));
  };
  exact.r = [](const Vec3& p) {
    return Vec3(0.0, std::sin(kPi * p.x()), std::sin(kPi * p.y()));
  };
  exact.du = [](const Vec3& p, const Vec3& d) {
    return Vec3(0.0, -kPi * std::sin(kPi * p.y()) * d.y(),
                -kPi * std::sin(kPi * p.x()) * d.x());
  };
  exact.dr = [](const Vec3& p, const Vec3& d) {
    return Vec3(0.0, kPi * std::cos(kPi * p.x()) * d.x(),
                kPi * std::cos(kPi * p.y()) * d.y());
  };
  exact.d2u = [](const Vec3& p, const Vec3& d) {
    return Vec3(0.0, -kPi * kPi * std::cos(kPi * p.y()) * d.y() * d.y(),
                -kPi * kPi * std::cos(kPi * p.x()) * d.x() * d.x());
  };
  exact.d2r = [](const Vec3& p, const Vec3& d) {
    return Vec3(0.0, -kPi * kPi * std::sin(kPi * p.x()) * d.x() * d.x(),
                -kPi * kPi * std::sin(kPi * p.y()) * d.y() * d.y());
  };
  return exact;
}

Network cross_network() {
  const ExactSolution exact = cross_exact_solution();
  Network net;
  const Vec3 positions[5] = {Vec3(0, 0, 0), Vec3(-1, 0, 0), Vec3(1, 0, 0),
                             Vec3(0, -1, 0), Vec3(0, 1, 0)};
  for (int i = 0; i < 5; ++i) {
    Node node;
    node.id = i;
    node.position = positions[i];
    if (i > 0) {
      node.kind = NodeKind::Dirichlet;
      node.dirichlet_u = exact.u(positions[i]);
      node.dirichlet_r = exact.r(positions[i]);
    }
    net.nodes.push_back(node);
  }
  for (int i = 1; i < 5; ++i) {
    Edge edge;
    edge.id = i - 1;
    edge.node_k = 0;
    edge.node_l = i;
    net.edges.push_back(edge);
  }
  finalize_network(net);
  return net;
}

EdgeFields derive_sources(const ExactSolution& exact, const Edge& edge,
                          const Network& net, bool validate) {
  const Mat3 frame = edge.frame;
  const Vec3 tangent = edge.tangent;
  const Vec3 cn = edge.material.cn_diag();
  const Vec3 cm = edge.material.cm_diag();
  const Vec3 base = net.nodes[edge.node_k].position;

  EdgeFields fields;
  fields.n = [=](double x) {
    const Vec3 p = base + x * tangent;
    const Vec3 local = -cn.cwiseProduct(frame.transpose() * exact.du(p, tangent) +
                                        axial_cross(frame.transpose() * exact.r(p)));
    return Vec3(frame * local);
  };
  fields.m = [=](double x) {
    const Vec3 p = base + x * tangent;
    const Vec3 local = -cm.cwiseProduct(frame.transpose() * exact.dr(p, tangent));
    return Vec3(frame * local);
  };
  fields.f = [=](double x) {
    const Vec3 p = base + x * tangent;
    const Vec3 local = -cn.cwiseProduct(frame.transpose() * exact.d2u(p, tangent) +
                                        axial_cross(frame.transpose() * exact.dr(p, tangent)));
    return Vec3(frame * local);
  };
  fields.g = [=, n = fields.n](double x) {
    const Vec3 p = base + x * tangent;
    const Vec3 local_m = -cm.cwiseProduct(frame.transpose() * exact.d2r(p, tangent));
    return Vec3(frame * local_m + tangent.cross(n(x)));
  };

  if (validate) {
    const double step = 1e-5;
    for (int q = 0; q < 5; ++q) {
      const double x = edge.length * (q + 0.5) / 5.0;
      const Vec3 dn = (fields.n(x + step) - fields.n(x - step)) / (2 * step);
      const Vec3 dm = (fields.m(x + step) - fields.m(x - step)) / (2 * step);
      const Vec3 f = fields.f(x);
      const Vec3 g = fields.g(x);
      if ((dn - f).norm() > 1e-6 * (1.0 + f.norm()) ||
          (dm + tangent.cross(fields.n(x)) - g).norm() >
              1e-6 * (1.0 + g.norm())) {
        throw std::runtime_error("manufactured sources fail balance check");
      }
    }
  }
  return fields;
}

LoadSet manufactured_loads(const ExactSolution& exact, const Network& net) {
  LoadSet loads(net.edges.size());
  for (const auto& edge : net.edges) {
    EdgeFields fields = derive_sources(exact, edge, net);
    loads[edge.id] = {fields.f, fields.g};
  }
  return loads;
}

std::pair<double, double> l2_errors(const GlobalSolution& global,
                                    const ExactSolution& exact,
                                    const Network& net, int p) {
  const QuadratureRule quad = QuadratureRule::gauss_legendre(p + 4);
  double primal = 0.0;
  double dual = 0.0;
  for (const auto& edge : net.edges) {
    const EdgeFields fields = derive_sources(exact, edge, net, false);
    const LocalSolution& sol = global.edgewise[edge.id];
    const double h = edge.length;
    for (size_t q = 0; q < quad.points.size(); ++q) {
      const double x = quad.points[q] * h;
      const double w = quad.weights[q] * h;
      const Vec3 point = point_on_edge(net, edge, x);
      primal += w * ((exact.u(point) - sol.eval_u(x)).squaredNorm() +
                     (exact.r(point) - sol.eval_r(x)).squaredNorm());
      dual += w * ((fields.n(x) - sol.eval_n(x)).squaredNorm() +
                   (fields.m(x) - sol.eval_m(x)).squaredNorm());
    }
  }
  return {std::sqrt(primal), std::sqrt(dual)};
}

namespace {

std::pair<double, double> solve_and_measure(const Network& net, int p,
                                            const StabilizationRule& rule,
                                            const ExactSolution& exact) {
  const LoadSet loads = manufactured_loads(exact, net);
  const CondensedSystem system = assemble(net, p, rule, loads);
  VecX x;
  if (system.dofs.total_dofs() <= 3000) {
    x = solve_direct(system);
  } else {
    const CoarseGrid grid = CoarseGrid::bounding(net, 4, 4, 1);
    const SchwarzSetup setup = build_schwarz(system, grid);
    PcgOptions options;
    options.tol = 1e-12;
    auto [solution, report] = pcg(
        system, [&](const VecX& r) { return apply_preconditioner(setup, r); },
        options);
    if (!report.converged) throw std::runtime_error("inner solver did not converge");
    x = solution;
  }
  return l2_errors(recover(system, x, loads), exact, net, p);
}

}  // namespace

std::vector<ConvergenceRecord> convergence_study(int p,
                                                 const StabilizationRule& rule,
                                                 int levels) {
  const ExactSolution exact = cross_exact_solution();
  const Network base = cross_network();
  std::vector<ConvergenceRecord> records;
  for (int k = 0; k < levels; ++k) {
    const Network net = refine_uniform(base, k);
    ConvergenceRecord record;
    record.level = k;
    record.h_max = 0.0;
    for (const auto& edge : net.edges) record.h_max = std::max(record.h_max, edge.length);
    std::tie(record.err_primal, record.err_dual) =
        solve_and_measure(net, p, rule, exact);
    if (!records.empty()) {
      record.eoc_primal = std::log2(records.back().err_primal / record.err_primal);
      record.eoc_dual = std::log2(records.back().err_dual / record.err_dual);
    }
    records.push_back(record);
  }
  return records;
}

std::vector<PSweepRecord> p_sweep(int level, int p_min, int p_max,
                                  const StabilizationRule& rule) {
  const ExactSolution exact = cross_exact_solution();
  const Network net = refine_uniform(cross_network(), level);
  std::vector<PSweepRecord> records;
  for (int p = p_min; p <= p_max; ++p) {
    PSweepRecord record;
    record.p = p;
    std::tie(record.err_primal, record.err_dual) =
        solve_and_measure(net, p, rule, exact);
    records.push_back(record);
  }
  return records;
}

}  // namespace beamnet
