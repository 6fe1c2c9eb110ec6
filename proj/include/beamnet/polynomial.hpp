#pragma once

#include <vector>

#include "beamnet/types.hpp"

namespace beamnet {

/// Gauss-Legendre rule on [0,1], exact through degree 2n-1.
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;

  static QuadratureRule gauss_legendre(int n);
};

/// Legendre polynomials orthonormal on [0,1]:
///   phi_i(t) = sqrt(2i+1) * P_i(2t - 1).
struct LegendreBasis {
  int degree = 0;

  explicit LegendreBasis(int p) : degree(p) {}

  int size() const { return degree + 1; }
  /// Values phi_0..phi_p at t.
  VecX eval(double t) const;
  /// Derivatives d phi_i / dt at t.
  VecX eval_derivative(double t) const;
  VecX at_zero() const { return eval(0.0); }
  VecX at_one() const { return eval(1.0); }
};

/// Polynomial workspace for one degree: basis, stiffness coupling, endpoint
/// evaluations, and the quadrature rules used by the local solvers.
struct PolynomialSpace {
  LegendreBasis basis;
  QuadratureRule quad;       // p+2 points, bilinear terms
  QuadratureRule load_quad;  // higher rule for general load integrands

  // G(i,j) = int_0^1 phi_j(t) phi_i'(t) dt
  MatX grad_coupling;
  VecX value_at_zero;
  VecX value_at_one;

  explicit PolynomialSpace(int p, int load_points = -1);

  int degree() const { return basis.degree; }
  int size() const { return basis.size(); }
};

}  // namespace beamnet
