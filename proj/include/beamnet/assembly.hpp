#pragma once

#include <vector>

#include "beamnet/local_solver.hpp"
#include "beamnet/network.hpp"

namespace beamnet {

/// Per-edge distributed loads, indexed by edge id; empty callbacks mean zero.
using LoadSet = std::vector<EdgeLoads>;

/// 6 unknowns per free node: displacement components 0..2, rotation 3..5.
struct DofMap {
  std::vector<int> free_nodes;          // free node ids in ascending order
  std::vector<int> node_to_offset;      // node id -> dof offset, -1 if Dirichlet

  static DofMap build(const Network& net);
  int total_dofs() const { return 6 * static_cast<int>(free_nodes.size()); }
};

/// Condensed global SPD system over the free-node hybrid unknowns.
struct CondensedSystem {
  SparseMat matrix;
  VecX rhs;
  DofMap dofs;
  std::vector<LocalSolverFactorization> factorizations;  // per edge
  const Network* net = nullptr;
  int p = 1;
};

struct GlobalSolution {
  std::vector<Vec6> node_values;  // per node: (u, r) merged with Dirichlet data
  std::vector<LocalSolution> edgewise;
};

/// Assemble the condensed system: scatter of the per-edge condensed blocks
/// restricted to free dofs, with Dirichlet lifting, distributed loads, and
/// point loads folded into the right-hand side.
CondensedSystem assemble(const Network& net, int p, const StabilizationRule& rule,
                         const LoadSet& loads = {}, int threads = 1);

/// Sparse operator application y = A x.
VecX apply(const CondensedSystem& system, const VecX& x);

/// Merge the solved free-node values with Dirichlet data and recompute the
/// edgewise polynomial solutions through the cached local solvers.
GlobalSolution recover(const CondensedSystem& system, const VecX& solution,
                       const LoadSet& loads = {});

/// Hybrid endpoint vector of an edge from per-node 6-vectors.
Vec12 edge_hybrid(const Edge& edge, const std::vector<Vec6>& node_values);

/// Dense direct solve (LLT); intended for small systems and test oracles.
VecX solve_direct(const CondensedSystem& system);

}  // namespace beamnet
