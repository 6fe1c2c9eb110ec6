#include "beamnet/assembly.hpp"

#include <Eigen/Cholesky>
#include <thread>

namespace beamnet {

namespace {

Vec6 dirichlet_value(const Node& node) {
  Vec6 v;
  v.segment<3>(0) = node.dirichlet_u;
  v.segment<3>(3) = node.dirichlet_r;
  return v;
}

EdgeLoads loads_for(const LoadSet& loads, int edge_id) {
  if (edge_id < static_cast<int>(loads.size())) return loads[edge_id];
  return {};
}

}  // namespace

DofMap DofMap::build(const Network& net) {
  DofMap map;
  map.node_to_offset.assign(net.nodes.size(), -1);
  for (const auto& node : net.nodes) {
    if (node.kind == NodeKind::Free) {
      map.node_to_offset[node.id] = 6 * static_cast<int>(map.free_nodes.size());
      map.free_nodes.push_back(node.id);
    }
  }
  return map;
}

CondensedSystem assemble(const Network& net, int p,
                         const StabilizationRule& rule, const LoadSet& loads,
                         int threads) {
  CondensedSystem system;
  system.net = &net;
  system.p = p;
  system.dofs = DofMap::build(net);

  const int num_edges = static_cast<int>(net.edges.size());
  system.factorizations.reserve(num_edges);
  for (const auto& edge : net.edges) {
    system.factorizations.push_back(
        assemble_local_solver(edge, p, rule.tau(edge.length)));
  }

  // Per-edge blocks and lifting traces are independent; compute them in
  // parallel, then scatter in edge order for reproducibility.
  std::vector<Mat12> blocks(num_edges);
  std::vector<Vec12> lift(num_edges, Vec12::Zero());
  auto edge_work = [&](int begin, int end) {
    for (int e = begin; e < end; ++e) {
      const Edge& edge = net.edges[e];
      const auto& fact = system.factorizations[e];
      blocks[e] = condense(fact).matrix;

      Vec12 dirichlet = Vec12::Zero();
      const Node& nk = net.nodes[edge.node_k];
      const Node& nl = net.nodes[edge.node_l];
      if (nk.kind == NodeKind::Dirichlet)
        dirichlet.segment<6>(0) = dirichlet_value(nk);
      if (nl.kind == NodeKind::Dirichlet)
        dirichlet.segment<6>(6) = dirichlet_value(nl);

      const EdgeLoads edge_loads = loads_for(loads, edge.id);
      if (!edge_loads.empty() || dirichlet.squaredNorm() > 0.0) {
        const LocalSolution sol = local_solve(fact, dirichlet, edge_loads);
        // Trace with lambda = 0 at free endpoints gives -[n nu + tau u];
        // the load functional wants +[n nu + tau u] there.
        Vec12 zero_hybrid = Vec12::Zero();
        Vec12 trace = numerical_flux_trace(fact, sol, zero_hybrid);
        lift[e] = -trace;
      }
    }
  };
  if (threads <= 1 || num_edges < 2 * threads) {
    edge_work(0, num_edges);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (num_edges + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(num_edges, begin + chunk);
      if (begin < end) pool.emplace_back(edge_work, begin, end);
    }
    for (auto& worker : pool) worker.join();
  }

  const int n = system.dofs.total_dofs();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(num_edges * 144);
  system.rhs = VecX::Zero(n);
  for (int e = 0; e < num_edges; ++e) {
    const Edge& edge = net.edges[e];
    const int off[2] = {system.dofs.node_to_offset[edge.node_k],
                        system.dofs.node_to_offset[edge.node_l]};
    for (int a = 0; a < 2; ++a) {
      if (off[a] < 0) continue;
      system.rhs.segment<6>(off[a]) += lift[e].segment<6>(6 * a);
      for (int b = 0; b < 2; ++b) {
        if (off[b] < 0) continue;
        for (int i = 0; i < 6; ++i) {
          for (int j = 0; j < 6; ++j) {
            const double value = blocks[e](6 * a + i, 6 * b + j);
            if (value != 0.0) {
              triplets.emplace_back(off[a] + i, off[b] + j, value);
            }
          }
        }
      }
    }
  }
  for (const auto& node : net.nodes) {
    const int off = system.dofs.node_to_offset[node.id];
    if (off < 0) continue;
    system.rhs.segment<3>(off) -= node.point_force;
    system.rhs.segment<3>(off + 3) -= node.point_moment;
  }

  system.matrix.resize(n, n);
  system.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return system;
}

VecX apply(const CondensedSystem& system, const VecX& x) {
  if (x.size() != system.matrix.cols()) {
    throw std::invalid_argument("operator/vector dimension mismatch");
  }
  return system.matrix * x;
}

Vec12 edge_hybrid(const Edge& edge, const std::vector<Vec6>& node_values) {
  Vec12 hybrid;
  hybrid.segment<6>(0) = node_values[edge.node_k];
  hybrid.segment<6>(6) = node_values[edge.node_l];
  return hybrid;
}

GlobalSolution recover(const CondensedSystem& system, const VecX& solution,
                       const LoadSet& loads) {
  const Network& net = *system.net;
  GlobalSolution global;
  global.node_values.resize(net.nodes.size());
  for (const auto& node : net.nodes) {
    if (node.kind == NodeKind::Dirichlet) {
      global.node_values[node.id] = dirichlet_value(node);
    } else {
      global.node_values[node.id] =
          solution.segment<6>(system.dofs.node_to_offset[node.id]);
    }
  }
  global.edgewise.reserve(net.edges.size());
  for (const auto& edge : net.edges) {
    global.edgewise.push_back(
        local_solve(system.factorizations[edge.id],
                    edge_hybrid(edge, global.node_values),
                    loads_for(loads, edge.id)));
  }
  return global;
}

VecX solve_direct(const CondensedSystem& system) {
  const MatX dense = MatX(system.matrix);
  Eigen::LLT<MatX> llt(dense);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("condensed system is not positive definite");
  }
  return llt.solve(system.rhs);
}

}  // namespace beamnet
