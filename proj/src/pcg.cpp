#include "beamnet/pcg.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace beamnet {

std::pair<VecX, SolveReport> pcg(
    const std::function<VecX(const VecX&)>& apply_op, const VecX& rhs,
    const Preconditioner& precond, const PcgOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  VecX x = VecX::Zero(rhs.size());
  VecX r = rhs;

  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    report.converged = true;
    report.residual_history.push_back(0.0);
    report.plain_residual_history.push_back(0.0);
    return {x, report};
  }

  VecX z = precond(r);
  double rz = r.dot(z);
  if (rz < 0.0) throw std::runtime_error("preconditioner is not positive definite");
  const double rz0 = rz;
  VecX p = z;
  report.residual_history.push_back(1.0);
  report.plain_residual_history.push_back(1.0);

  for (int k = 0; k < options.maxit; ++k) {
    const VecX ap = apply_op(p);
    const double curvature = p.dot(ap);
    if (curvature <= 0.0) {
      throw std::runtime_error("nonpositive curvature encountered; operator is not SPD");
    }
    const double alpha = rz / curvature;
    x += alpha * p;
    const VecX r_prev = r;
    r -= alpha * ap;
    const VecX z_next = precond(r);
    const double rz_next = r.dot(z_next);
    // Polak-Ribiere beta stays robust when the preconditioner varies per
    // iteration; it coincides with the standard update for a fixed B in
    // exact arithmetic.
    const double beta_used =
        options.flexible ? z_next.dot(r - r_prev) / rz : rz_next / rz;
    report.iterations = k + 1;
    report.residual_history.push_back(std::sqrt(std::max(rz_next, 0.0) / rz0));
    report.plain_residual_history.push_back(r.norm() / rhs_norm);
    if (rz_next < 0.0) {
      throw std::runtime_error("preconditioner is not positive definite");
    }
    if (std::sqrt(rz_next / rz0) <= options.tol) {
      report.converged = true;
      rz = rz_next;
      break;
    }
    p = z_next + beta_used * p;
    z = z_next;
    rz = rz_next;
  }

  report.solve_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  return {x, report};
}

std::pair<VecX, SolveReport> pcg(const CondensedSystem& system,
                                 const Preconditioner& precond,
                                 const PcgOptions& options) {
  return pcg([&](const VecX& v) { return apply(system, v); }, system.rhs,
             precond, options);
}

}  // namespace beamnet
