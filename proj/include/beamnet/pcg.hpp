#pragma once

#include <functional>
#include <vector>

#include "beamnet/assembly.hpp"

namespace beamnet {

/// Action of the preconditioner B on a residual.
using Preconditioner = std::function<VecX(const VecX&)>;

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;       // relative B-norm residuals
  std::vector<double> plain_residual_history;  // relative 2-norm residuals
  double setup_ms = 0.0;
  double solve_ms = 0.0;
};

struct PcgOptions {
  double tol = 1e-10;
  int maxit = 10000;
  bool flexible = false;  // Polak-Ribiere update for variable preconditioners
};

/// Preconditioned conjugate gradients on the condensed SPD system.
/// Convergence is measured in the B-inner-product residual norm relative to
/// the initial residual; throws on nonpositive curvature.
std::pair<VecX, SolveReport> pcg(const CondensedSystem& system,
                                 const Preconditioner& precond,
                                 const PcgOptions& options = {});

/// Generic variant for tests: explicit operator instead of a system.
std::pair<VecX, SolveReport> pcg(
    const std::function<VecX(const VecX&)>& apply_op, const VecX& rhs,
    const Preconditioner& precond, const PcgOptions& options = {});

}  // namespace beamnet
