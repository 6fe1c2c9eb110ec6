#pragma once

#include <Eigen/LU>
#include <functional>

#include "beamnet/network.hpp"
#include "beamnet/polynomial.hpp"

namespace beamnet {

/// Distributed load callbacks for one edge. Arguments are arc length
/// x in [0, h_e]; returned vectors are in global coordinates.
using LoadFn = std::function<Vec3(double)>;

struct EdgeLoads {
  LoadFn force;   // f_e
  LoadFn moment;  // g_e

  bool empty() const { return !force && !moment; }
};

/// tau_e = c * h_e^s with s in {-1, 0, 1}.
struct StabilizationRule {
  int exponent = 0;
  double scale = 1.0;

  double tau(double h) const;
};

/// Polynomial solution fields of one edge, coefficients in the orthonormal
/// Legendre basis mapped to [0, h_e], components in global coordinates.
/// Column j of each 3 x (p+1) array multiplies basis function phi_j(x/h).
struct LocalSolution {
  double length = 0.0;
  MatX coeff_u;
  MatX coeff_r;
  MatX coeff_n;
  MatX coeff_m;

  Vec3 eval_u(double x) const;
  Vec3 eval_r(double x) const;
  Vec3 eval_n(double x) const;
  Vec3 eval_m(double x) const;
};

/// Hybrid endpoint data ordering used throughout: (lambda_k, phi_k,
/// lambda_l, phi_l), 3 components each, global coordinates.
struct LocalSolverFactorization {
  int edge_id = -1;
  double length = 0.0;
  Mat3 frame = Mat3::Identity();
  Vec3 cn;  // diagonal local coefficients
  Vec3 cm;
  double tau = 1.0;
  PolynomialSpace space;
  Eigen::PartialPivLU<MatX> lu;

  LocalSolverFactorization(int p) : space(p) {}
};

/// 12 x 12 condensed nodal block: rows/columns ordered endpoint k
/// (lambda, phi) then endpoint l, in global coordinates.
struct CondensedBlock {
  Mat12 matrix = Mat12::Zero();
};

/// Build and LU-factorize the discrete local system for one edge.
LocalSolverFactorization assemble_local_solver(const Edge& edge,
                                               int p, double tau);

/// Solve the local system for given hybrid endpoint data and loads.
LocalSolution local_solve(const LocalSolverFactorization& fact,
                          const Vec12& hybrid, const EdgeLoads& loads = {});

/// Numerical-flux trace vector of a local solution:
///   -[ n nu + tau (u - lambda) ] and -[ m nu + tau (r - phi) ]
/// at endpoint k then l, global coordinates.
Vec12 numerical_flux_trace(const LocalSolverFactorization& fact,
                           const LocalSolution& sol, const Vec12& hybrid);

/// Static condensation: flux traces of the 12 unit-hybrid solves, with the
/// symmetry of the resulting block verified and enforced.
CondensedBlock condense(const LocalSolverFactorization& fact);

}  // namespace beamnet
