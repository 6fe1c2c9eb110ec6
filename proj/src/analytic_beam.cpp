#include "beamnet/analytic_beam.hpp"

#include <functional>

namespace beamnet {

namespace {

struct ClosedForm {
  double h = 0.0;
  Vec3 cn, cm;        // diagonal local coefficients
  Vec3 c, d;          // integration constants: n = -c, m = (i x c) x - d
  Vec3 lambda1, phi1;  // local endpoint data at x = 0

  Vec3 n(double) const { return -c; }
  Vec3 m(double x) const { return axial_cross(c) * x - d; }
  Vec3 r(double x) const {
    const Vec3 cm_inv_ixc = axial_cross(c).cwiseQuotient(cm);
    return -0.5 * cm_inv_ixc * x * x + d.cwiseQuotient(cm) * x + phi1;
  }
  Vec3 u(double x) const {
    const Vec3 cm_inv_ixc = axial_cross(c).cwiseQuotient(cm);
    const Vec3 cm_inv_d = d.cwiseQuotient(cm);
    return (1.0 / 6.0) * axial_cross(cm_inv_ixc) * x * x * x -
           0.5 * axial_cross(cm_inv_d) * x * x - axial_cross(phi1) * x +
           c.cwiseQuotient(cn) * x + lambda1;
  }
};

ClosedForm solve_closed_form(const Edge& edge, const Vec12& hybrid) {
  ClosedForm cf;
  cf.h = edge.length;
  cf.cn = edge.material.cn_diag();
  cf.cm = edge.material.cm_diag();

  const Mat3 t_inv = edge.frame.transpose();
  cf.lambda1 = t_inv * hybrid.segment<3>(0);
  cf.phi1 = t_inv * hybrid.segment<3>(3);
  const Vec3 lambda2 = t_inv * hybrid.segment<3>(6);
  const Vec3 phi2 = t_inv * hybrid.segment<3>(9);

  const Vec3 lambda_delta = lambda2 - cf.lambda1;
  const Vec3 phi_delta = phi2 - cf.phi1;
  const Vec3 phi_sigma = cf.phi1 + phi2;

  const double h = cf.h;
  const Vec3 d_diag(1.0, 1.0 + h * h / 12.0 * cf.cn[1] / cf.cm[2],
                    1.0 + h * h / 12.0 * cf.cn[2] / cf.cm[1]);

  const Vec3 dinv_cn_lambda =
      cf.cn.cwiseProduct(lambda_delta).cwiseQuotient(d_diag);
  const Vec3 dinv_cn_ixphi =
      cf.cn.cwiseProduct(axial_cross(phi_sigma)).cwiseQuotient(d_diag);

  cf.c = dinv_cn_lambda / h + 0.5 * dinv_cn_ixphi;
  cf.d = cf.cm.cwiseProduct(phi_delta) / h + 0.5 * axial_cross(dinv_cn_lambda) +
         0.25 * h * axial_cross(dinv_cn_ixphi);
  return cf;
}

MatX project_to_basis(const std::function<Vec3(double)>& field, double h,
                      const LegendreBasis& basis, const QuadratureRule& quad) {
  MatX coeff = MatX::Zero(3, basis.size());
  for (size_t q = 0; q < quad.points.size(); ++q) {
    coeff += quad.weights[q] * field(quad.points[q] * h) *
             basis.eval(quad.points[q]).transpose();
  }
  return coeff;
}

}  // namespace

LocalSolution analytic_local_solution(const Edge& edge, const Vec12& hybrid) {
  const ClosedForm cf = solve_closed_form(edge, hybrid);
  const LegendreBasis basis(3);
  const QuadratureRule quad = QuadratureRule::gauss_legendre(5);
  const Mat3& t = edge.frame;

  LocalSolution sol;
  sol.length = edge.length;
  sol.coeff_u = t * project_to_basis([&](double x) { return cf.u(x); },
                                     edge.length, basis, quad);
  sol.coeff_r = t * project_to_basis([&](double x) { return cf.r(x); },
                                     edge.length, basis, quad);
  sol.coeff_n = t * project_to_basis([&](double x) { return cf.n(x); },
                                     edge.length, basis, quad);
  sol.coeff_m = t * project_to_basis([&](double x) { return cf.m(x); },
                                     edge.length, basis, quad);
  return sol;
}

CondensedBlock analytic_flux_block(const Edge& edge) {
  const Mat3& t = edge.frame;
  Mat12 k = Mat12::Zero();
  for (int j = 0; j < 12; ++j) {
    Vec12 hybrid = Vec12::Zero();
    hybrid[j] = 1.0;
    const ClosedForm cf = solve_closed_form(edge, hybrid);
    Vec12 flux;
    flux.segment<3>(0) = t * cf.n(0.0);                  // -n(0) * (-1)
    flux.segment<3>(3) = t * cf.m(0.0);
    flux.segment<3>(6) = -(t * cf.n(edge.length));
    flux.segment<3>(9) = -(t * cf.m(edge.length));
    k.col(j) = flux;
  }
  CondensedBlock block;
  block.matrix = 0.5 * (k + k.transpose());
  return block;
}

double analytic_energy(const Edge& edge, const Vec12& hybrid) {
  const ClosedForm cf = solve_closed_form(edge, hybrid);
  const double h = cf.h;
  double energy = h * cf.c.cwiseQuotient(cf.cn).dot(cf.c);
  // m(x) = a x + b with a = i x c, b = -d; integrate (a x + b)^2 / cm.
  const Vec3 a = axial_cross(cf.c);
  const Vec3 b = -cf.d;
  for (int i = 0; i < 3; ++i) {
    energy += (a[i] * a[i] * h * h * h / 3.0 + a[i] * b[i] * h * h +
               b[i] * b[i] * h) /
              cf.cm[i];
  }
  return energy;
}

}  // namespace beamnet
