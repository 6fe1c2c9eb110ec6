#pragma once

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "beamnet/assembly.hpp"

namespace beamnet {

enum class CoarsePolicy { Strict, Free };
enum class LocalSolverMode { Direct, InnerCg };

/// Uniform Cartesian mesh of a bounding box of the network. Dimensions with
/// zero spatial extent are collapsed to a single node layer with constant
/// shape functions, so flat networks keep a nondegenerate coarse space.
struct CoarseGrid {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();
  int cells[3] = {1, 1, 1};
  bool collapsed[3] = {false, false, false};

  static CoarseGrid bounding(const Network& net, int nx, int ny, int nz);

  int layers(int dim) const { return collapsed[dim] ? 1 : cells[dim] + 1; }
  int node_count() const { return layers(0) * layers(1) * layers(2); }
  /// Trilinear basis values at a point: list of (coarse node index, value),
  /// nonzero entries only. Throws if the point lies outside the box.
  std::vector<std::pair<int, double>> shape_values(const Vec3& point) const;
};

struct SchwarzSetup {
  SparseMat restriction;  // R0: 6F x 6m0
  // Rank-revealing factorization: degenerate geometry (for example all
  // network nodes on the coordinate axes) can make coarse basis functions
  // linearly dependent on the node set; the pseudo-inverse coarse solve
  // stays symmetric positive semidefinite in that case.
  Eigen::CompleteOrthogonalDecomposition<MatX> coarse_solver;
  std::vector<std::vector<int>> subdomains;  // free dof index sets
  std::vector<std::unique_ptr<Eigen::SimplicialLDLT<SparseMat>>> subdomain_solvers;
  std::vector<SparseMat> subdomain_matrices;  // kept for the inner-CG mode
  LocalSolverMode mode = LocalSolverMode::Direct;
  double inner_tol = 1e-3;
};

/// Coarse-to-fine interpolation from trilinear basis values at free network
/// node positions, applied identically to all 6 components. Strict policy
/// drops coarse basis functions whose support contains a Dirichlet node;
/// columns with no free-node support are always dropped.
SparseMat build_coarse_interpolation(const Network& net, const CoarseGrid& grid,
                                     const DofMap& dofs, CoarsePolicy policy);

SchwarzSetup build_schwarz(const CondensedSystem& system, const CoarseGrid& grid,
                           CoarsePolicy policy = CoarsePolicy::Strict,
                           LocalSolverMode mode = LocalSolverMode::Direct,
                           double inner_tol = 1e-3);

/// z = R0 (R0^T A R0)^-1 R0^T r + sum_i E_i A_ii^-1 E_i^T r.
VecX apply_preconditioner(const SchwarzSetup& setup, const VecX& r);

}  // namespace beamnet
