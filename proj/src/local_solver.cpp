#include "beamnet/local_solver.hpp"

#include <cmath>
#include <stdexcept>

namespace beamnet {

namespace {

// Unknown vector layout: blocks [n, m, u, r], each 3 components with p+1
// coefficients; index = block*3*N + component*N + coefficient.
int block_offset(int block, int component, int n) {
  return block * 3 * n + component * n;
}

Vec3 eval_field(const MatX& coeff, const LegendreBasis& basis, double t) {
  return coeff * basis.eval(t);
}

}  // namespace

double StabilizationRule::tau(double h) const {
  switch (exponent) {
    case -1:
      return scale / h;
    case 0:
      return scale;
    case 1:
      return scale * h;
    default:
      throw std::invalid_argument("stabilization exponent must be -1, 0, 1");
  }
}

Vec3 LocalSolution::eval_u(double x) const {
  return eval_field(coeff_u, LegendreBasis(static_cast<int>(coeff_u.cols()) - 1),
                    x / length);
}
Vec3 LocalSolution::eval_r(double x) const {
  return eval_field(coeff_r, LegendreBasis(static_cast<int>(coeff_r.cols()) - 1),
                    x / length);
}
Vec3 LocalSolution::eval_n(double x) const {
  return eval_field(coeff_n, LegendreBasis(static_cast<int>(coeff_n.cols()) - 1),
                    x / length);
}
Vec3 LocalSolution::eval_m(double x) const {
  return eval_field(coeff_m, LegendreBasis(static_cast<int>(coeff_m.cols()) - 1),
                    x / length);
}

LocalSolverFactorization assemble_local_solver(const Edge& edge, int p,
                                               double tau) {
  if (tau <= 0.0) throw std::invalid_argument("stabilization must be positive");

  LocalSolverFactorization fact(p);
  fact.edge_id = edge.id;
  fact.length = edge.length;
  fact.frame = edge.frame;
  fact.cn = edge.material.cn_diag();
  fact.cm = edge.material.cm_diag();
  fact.tau = tau;

  const int n = fact.space.size();
  const double h = edge.length;
  const MatX& grad = fact.space.grad_coupling;  // G(i,j) = int phi_j phi_i'
  const VecX& v0 = fact.space.value_at_zero;
  const VecX& v1 = fact.space.value_at_one;
  const MatX endpoint = v0 * v0.transpose() + v1 * v1.transpose();

  MatX system = MatX::Zero(12 * n, 12 * n);
  auto block = [&](int test_block, int test_comp, int trial_block,
                   int trial_comp) {
    return system.block(block_offset(test_block, test_comp, n),
                        block_offset(trial_block, trial_comp, n), n, n);
  };

  // Local cross product with (1,0,0): (i x a) = (0, -a_z, a_y).
  for (int a = 0; a < 3; ++a) {
    // Row block 0 (tests p): -(Cn^-1 n, p) + (u, dx p) - (i x r, p)
    block(0, a, 0, a) -= (h / fact.cn[a]) * MatX::Identity(n, n);
    block(0, a, 2, a) += grad;
    // Row block 1 (tests q): -(Cm^-1 m, q) + (r, dx q)
    block(1, a, 1, a) -= (h / fact.cm[a]) * MatX::Identity(n, n);
    block(1, a, 3, a) += grad;
    // Row block 2 (tests v): (dx n, v) + tau <u, v>
    block(2, a, 0, a) += grad.transpose();
    block(2, a, 2, a) += tau * endpoint;
    // Row block 3 (tests w): (i x n, w) + (dx m, w) + tau <r, w>
    block(3, a, 1, a) += grad.transpose();
    block(3, a, 3, a) += tau * endpoint;
  }
  // Cross-product couplings between components 1 and 2.
  block(0, 1, 3, 2) += h * MatX::Identity(n, n);   // -(i x r)_y = +r_z
  block(0, 2, 3, 1) -= h * MatX::Identity(n, n);   // -(i x r)_z = -r_y
  block(3, 1, 0, 2) -= h * MatX::Identity(n, n);   // (i x n)_y = -n_z
  block(3, 2, 0, 1) += h * MatX::Identity(n, n);   // (i x n)_z = +n_y

  fact.lu.compute(system);
  if (std::abs(fact.lu.determinant()) == 0.0) {
    throw std::runtime_error("singular local solver on edge " +
                             std::to_string(edge.id));
  }
  return fact;
}

LocalSolution local_solve(const LocalSolverFactorization& fact,
                          const Vec12& hybrid, const EdgeLoads& loads) {
  const int n = fact.space.size();
  const double h = fact.length;
  const Mat3& t = fact.frame;
  const VecX& v0 = fact.space.value_at_zero;
  const VecX& v1 = fact.space.value_at_one;

  const Vec3 lambda_k = t.transpose() * hybrid.segment<3>(0);
  const Vec3 phi_k = t.transpose() * hybrid.segment<3>(3);
  const Vec3 lambda_l = t.transpose() * hybrid.segment<3>(6);
  const Vec3 phi_l = t.transpose() * hybrid.segment<3>(9);

  VecX rhs = VecX::Zero(12 * n);
  for (int a = 0; a < 3; ++a) {
    rhs.segment(block_offset(0, a, n), n) += lambda_l[a] * v1 - lambda_k[a] * v0;
    rhs.segment(block_offset(1, a, n), n) += phi_l[a] * v1 - phi_k[a] * v0;
    rhs.segment(block_offset(2, a, n), n) +=
        fact.tau * (lambda_k[a] * v0 + lambda_l[a] * v1);
    rhs.segment(block_offset(3, a, n), n) +=
        fact.tau * (phi_k[a] * v0 + phi_l[a] * v1);
  }
  if (!loads.empty()) {
    const auto& quad = fact.space.load_quad;
    for (size_t q = 0; q < quad.points.size(); ++q) {
      const double tq = quad.points[q];
      const double w = quad.weights[q] * h;
      const VecX values = fact.space.basis.eval(tq);
      if (loads.force) {
        const Vec3 f_local = t.transpose() * loads.force(tq * h);
        for (int a = 0; a < 3; ++a) {
          rhs.segment(block_offset(2, a, n), n) += w * f_local[a] * values;
        }
      }
      if (loads.moment) {
        const Vec3 g_local = t.transpose() * loads.moment(tq * h);
        for (int a = 0; a < 3; ++a) {
          rhs.segment(block_offset(3, a, n), n) += w * g_local[a] * values;
        }
      }
    }
  }

  const VecX x = fact.lu.solve(rhs);
  LocalSolution sol;
  sol.length = h;
  sol.coeff_n = MatX(3, n);
  sol.coeff_m = MatX(3, n);
  sol.coeff_u = MatX(3, n);
  sol.coeff_r = MatX(3, n);
  for (int a = 0; a < 3; ++a) {
    sol.coeff_n.row(a) = x.segment(block_offset(0, a, n), n).transpose();
    sol.coeff_m.row(a) = x.segment(block_offset(1, a, n), n).transpose();
    sol.coeff_u.row(a) = x.segment(block_offset(2, a, n), n).transpose();
    sol.coeff_r.row(a) = x.segment(block_offset(3, a, n), n).transpose();
  }
  // Rotate the componentwise-local solution back to global coordinates.
  sol.coeff_n = t * sol.coeff_n;
  sol.coeff_m = t * sol.coeff_m;
  sol.coeff_u = t * sol.coeff_u;
  sol.coeff_r = t * sol.coeff_r;
  return sol;
}

Vec12 numerical_flux_trace(const LocalSolverFactorization& fact,
                           const LocalSolution& sol, const Vec12& hybrid) {
  const VecX& v0 = fact.space.value_at_zero;
  const VecX& v1 = fact.space.value_at_one;
  const Vec3 n_k = sol.coeff_n * v0;
  const Vec3 n_l = sol.coeff_n * v1;
  const Vec3 m_k = sol.coeff_m * v0;
  const Vec3 m_l = sol.coeff_m * v1;
  const Vec3 u_k = sol.coeff_u * v0;
  const Vec3 u_l = sol.coeff_u * v1;
  const Vec3 r_k = sol.coeff_r * v0;
  const Vec3 r_l = sol.coeff_r * v1;

  Vec12 trace;
  trace.segment<3>(0) = n_k - fact.tau * (u_k - hybrid.segment<3>(0));
  trace.segment<3>(3) = m_k - fact.tau * (r_k - hybrid.segment<3>(3));
  trace.segment<3>(6) = -n_l - fact.tau * (u_l - hybrid.segment<3>(6));
  trace.segment<3>(9) = -m_l - fact.tau * (r_l - hybrid.segment<3>(9));
  return trace;
}

CondensedBlock condense(const LocalSolverFactorization& fact) {
  Mat12 k = Mat12::Zero();
  for (int j = 0; j < 12; ++j) {
    Vec12 hybrid = Vec12::Zero();
    hybrid[j] = 1.0;
    const LocalSolution sol = local_solve(fact, hybrid);
    k.col(j) = numerical_flux_trace(fact, sol, hybrid);
  }
  const double norm = k.norm();
  const double asym = (k - k.transpose()).norm();
  if (norm > 0.0 && asym > 1e-11 * norm) {
    throw std::runtime_error("condensed block asymmetry " +
                             std::to_string(asym / norm) + " on edge " +
                             std::to_string(fact.edge_id));
  }
  CondensedBlock block;
  block.matrix = 0.5 * (k + k.transpose());
  return block;
}

}  // namespace beamnet
