#include "beamnet/projection.hpp"

#include <Eigen/LU>
#include <stdexcept>

namespace beamnet {

ProjectedPair hdg_projection(const ScalarFn& u, const ScalarFn& n, double h,
                             const PolynomialSpace& space, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("projection needs tau > 0");
  const int size = space.size();
  const int p = space.degree();

  // Moments of the input fields against the orthonormal basis. The inputs
  // are arbitrary smooth functions, so use a generous rule: the moment
  // conditions should hold well below the discretization error.
  VecX mom_u = VecX::Zero(size);
  VecX mom_n = VecX::Zero(size);
  const QuadratureRule quad = QuadratureRule::gauss_legendre(2 * p + 12);
  for (size_t q = 0; q < quad.points.size(); ++q) {
    const VecX values = space.basis.eval(quad.points[q]);
    mom_u += quad.weights[q] * u(quad.points[q] * h) * values;
    mom_n += quad.weights[q] * n(quad.points[q] * h) * values;
  }

  // Unknowns (a, b) = coefficients of (Pi_1, Pi_2); 2p moment rows plus
  // the two endpoint flux rows give a square system.
  MatX system = MatX::Zero(2 * size, 2 * size);
  VecX rhs = VecX::Zero(2 * size);
  for (int i = 0; i < p; ++i) {
    system(i, i) = 1.0;
    rhs[i] = mom_u[i];
    system(size + i, size + i) = 1.0;
    rhs[size + i] = mom_n[i];
  }
  const VecX& v0 = space.value_at_zero;
  const VecX& v1 = space.value_at_one;
  // Endpoint at x = 0 (nu = -1): -Pi_2(0) + tau Pi_1(0) = -n(0) + tau u(0).
  system.row(p).head(size) = tau * v0.transpose();
  system.row(p).tail(size) = -v0.transpose();
  rhs[p] = -n(0.0) + tau * u(0.0);
  // Endpoint at x = h (nu = +1).
  system.row(size + p).head(size) = tau * v1.transpose();
  system.row(size + p).tail(size) = v1.transpose();
  rhs[size + p] = n(h) + tau * u(h);

  Eigen::PartialPivLU<MatX> lu(system);
  const VecX x = lu.solve(rhs);
  if (!x.allFinite()) throw std::runtime_error("singular projection system");

  ProjectedPair result;
  result.primal = x.head(size);
  result.dual = x.tail(size);
  return result;
}

}  // namespace beamnet
