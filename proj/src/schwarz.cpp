#include "beamnet/schwarz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace beamnet {

CoarseGrid CoarseGrid::bounding(const Network& net, int nx, int ny, int nz) {
  if (nx < 1 || ny < 1 || nz < 1) {
    throw std::invalid_argument("coarse grid needs at least one cell per axis");
  }
  if (net.nodes.empty()) throw std::invalid_argument("empty network");

  CoarseGrid grid;
  grid.cells[0] = nx;
  grid.cells[1] = ny;
  grid.cells[2] = nz;
  Vec3 lo = net.nodes.front().position;
  Vec3 hi = lo;
  for (const auto& node : net.nodes) {
    lo = lo.cwiseMin(node.position);
    hi = hi.cwiseMax(node.position);
  }
  const double diameter = std::max((hi - lo).norm(), 1.0);
  for (int d = 0; d < 3; ++d) {
    const double extent = hi[d] - lo[d];
    if (extent < 1e-12 * diameter) {
      // Flat direction: one node layer, constant shape function.
      grid.collapsed[d] = true;
      grid.lo[d] = lo[d] - 0.5;
      grid.hi[d] = hi[d] + 0.5;
    } else {
      // Inflate slightly so boundary nodes fall strictly inside.
      const double pad = 1e-9 * extent;
      grid.lo[d] = lo[d] - pad;
      grid.hi[d] = hi[d] + pad;
    }
  }
  return grid;
}

std::vector<std::pair<int, double>> CoarseGrid::shape_values(
    const Vec3& point) const {
  int base[3];
  double local[3];
  for (int d = 0; d < 3; ++d) {
    if (collapsed[d]) {
      base[d] = 0;
      local[d] = 0.0;
      continue;
    }
    const double t = (point[d] - lo[d]) / (hi[d] - lo[d]) * cells[d];
    if (t < 0.0 || t > cells[d]) {
      throw std::invalid_argument("point outside coarse grid");
    }
    base[d] = std::min(static_cast<int>(t), cells[d] - 1);
    local[d] = t - base[d];
  }
  const int stride_y = layers(0);
  const int stride_z = layers(0) * layers(1);
  std::vector<std::pair<int, double>> out;
  for (int dz = 0; dz <= (collapsed[2] ? 0 : 1); ++dz) {
    const double wz = collapsed[2] ? 1.0 : (dz ? local[2] : 1.0 - local[2]);
    for (int dy = 0; dy <= (collapsed[1] ? 0 : 1); ++dy) {
      const double wy = collapsed[1] ? 1.0 : (dy ? local[1] : 1.0 - local[1]);
      for (int dx = 0; dx <= (collapsed[0] ? 0 : 1); ++dx) {
        const double wx = collapsed[0] ? 1.0 : (dx ? local[0] : 1.0 - local[0]);
        const double w = wx * wy * wz;
        if (w == 0.0) continue;
        const int index = (base[0] + dx) + (base[1] + dy) * stride_y +
                          (base[2] + dz) * stride_z;
        out.emplace_back(index, w);
      }
    }
  }
  return out;
}

SparseMat build_coarse_interpolation(const Network& net, const CoarseGrid& grid,
                                     const DofMap& dofs, CoarsePolicy policy) {
  const int coarse_nodes = grid.node_count();
  // A point counts as inside a basis function's support only above this
  // threshold; the box inflation otherwise gives boundary nodes spurious
  // ~1e-9 weights on every adjacent function.
  constexpr double kSupport = 1e-8;
  std::vector<bool> blocked(coarse_nodes, false);
  if (policy == CoarsePolicy::Strict) {
    for (const auto& node : net.nodes) {
      if (node.kind != NodeKind::Dirichlet) continue;
      for (const auto& [index, w] : grid.shape_values(node.position)) {
        if (w > kSupport) blocked[index] = true;
      }
    }
  }

  // Keep only coarse basis functions that act on at least one free node.
  std::vector<bool> used(coarse_nodes, false);
  std::vector<std::vector<std::pair<int, double>>> per_free(dofs.free_nodes.size());
  for (size_t i = 0; i < dofs.free_nodes.size(); ++i) {
    for (const auto& [index, w] : grid.shape_values(net.nodes[dofs.free_nodes[i]].position)) {
      if (blocked[index] || w <= kSupport) continue;
      per_free[i].emplace_back(index, w);
      used[index] = true;
    }
  }
  std::vector<int> column(coarse_nodes, -1);
  int kept = 0;
  for (int c = 0; c < coarse_nodes; ++c) {
    if (used[c]) column[c] = kept++;
  }
  if (kept == 0) {
    throw std::runtime_error("coarse space is empty; refine the grid or relax the policy");
  }

  std::vector<Eigen::Triplet<double>> triplets;
  for (size_t i = 0; i < dofs.free_nodes.size(); ++i) {
    const int row0 = 6 * static_cast<int>(i);
    for (const auto& [index, w] : per_free[i]) {
      const int col0 = 6 * column[index];
      for (int c = 0; c < 6; ++c) triplets.emplace_back(row0 + c, col0 + c, w);
    }
  }
  SparseMat restriction(dofs.total_dofs(), 6 * kept);
  restriction.setFromTriplets(triplets.begin(), triplets.end());
  return restriction;
}

SchwarzSetup build_schwarz(const CondensedSystem& system, const CoarseGrid& grid,
                           CoarsePolicy policy, LocalSolverMode mode,
                           double inner_tol) {
  const Network& net = *system.net;
  SchwarzSetup setup;
  setup.mode = mode;
  setup.inner_tol = inner_tol;
  setup.restriction = build_coarse_interpolation(net, grid, system.dofs, policy);

  const MatX coarse =
      MatX(setup.restriction.transpose() * system.matrix * setup.restriction);
  setup.coarse_solver.setThreshold(1e-12);
  setup.coarse_solver.compute(coarse);

  // One subdomain per kept coarse basis function: the free dofs of all
  // network nodes inside its support. Assemble support sets directly from
  // the nonzero pattern of the interpolation.
  const int columns = static_cast<int>(setup.restriction.cols()) / 6;
  std::vector<std::vector<int>> support(columns);
  for (int col = 0; col < setup.restriction.outerSize(); col += 6) {
    for (SparseMat::InnerIterator it(setup.restriction, col); it; ++it) {
      support[col / 6].push_back(static_cast<int>(it.row()));  // row = 6*i
    }
  }
  setup.subdomains.reserve(columns);
  setup.subdomain_matrices.reserve(columns);
  for (int s = 0; s < columns; ++s) {
    std::vector<int> dofs;
    dofs.reserve(6 * support[s].size());
    for (int row0 : support[s]) {
      for (int c = 0; c < 6; ++c) dofs.push_back(row0 + c);
    }
    std::sort(dofs.begin(), dofs.end());
    if (dofs.empty()) continue;

    std::unordered_map<int, int> global_to_local;
    global_to_local.reserve(dofs.size());
    for (size_t i = 0; i < dofs.size(); ++i) global_to_local[dofs[i]] = static_cast<int>(i);
    std::vector<Eigen::Triplet<double>> triplets;
    for (int gj : dofs) {
      const int lj = global_to_local[gj];
      for (SparseMat::InnerIterator it(system.matrix, gj); it; ++it) {
        auto found = global_to_local.find(static_cast<int>(it.row()));
        if (found != global_to_local.end()) {
          triplets.emplace_back(found->second, lj, it.value());
        }
      }
    }
    SparseMat local(static_cast<int>(dofs.size()), static_cast<int>(dofs.size()));
    local.setFromTriplets(triplets.begin(), triplets.end());
    setup.subdomains.push_back(std::move(dofs));
    setup.subdomain_matrices.push_back(std::move(local));
  }

  setup.subdomain_solvers.reserve(setup.subdomains.size());
  for (size_t s = 0; s < setup.subdomains.size(); ++s) {
    auto solver = std::make_unique<Eigen::SimplicialLDLT<SparseMat>>();
    solver->compute(setup.subdomain_matrices[s]);
    if (solver->info() != Eigen::Success) {
      throw std::runtime_error("subdomain factorization failed");
    }
    setup.subdomain_solvers.push_back(std::move(solver));
  }
  return setup;
}

namespace {

/// Unpreconditioned CG on a small sparse SPD block, relative residual tol.
VecX inner_cg(const SparseMat& a, const VecX& b, double tol) {
  VecX x = VecX::Zero(b.size());
  VecX r = b;
  const double target = tol * b.norm();
  if (b.norm() == 0.0) return x;
  VecX p = r;
  double rr = r.squaredNorm();
  const int max_it = 10 * static_cast<int>(b.size()) + 50;
  for (int it = 0; it < max_it && std::sqrt(rr) > target; ++it) {
    const VecX ap = a * p;
    const double alpha = rr / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  return x;
}

}  // namespace

VecX apply_preconditioner(const SchwarzSetup& setup, const VecX& r) {
  VecX z = setup.restriction *
           setup.coarse_solver.solve(VecX(setup.restriction.transpose() * r));
  for (size_t s = 0; s < setup.subdomains.size(); ++s) {
    const auto& dofs = setup.subdomains[s];
    VecX local(dofs.size());
    for (size_t i = 0; i < dofs.size(); ++i) local[i] = r[dofs[i]];
    VecX correction;
    if (setup.mode == LocalSolverMode::Direct) {
      correction = setup.subdomain_solvers[s]->solve(local);
    } else {
      correction = inner_cg(setup.subdomain_matrices[s], local, setup.inner_tol);
    }
    for (size_t i = 0; i < dofs.size(); ++i) z[dofs[i]] += correction[i];
  }
  return z;
}

}  // namespace beamnet
