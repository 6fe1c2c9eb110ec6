#pragma once

#include <functional>
#include <utility>

#include "beamnet/polynomial.hpp"

namespace beamnet {

/// Scalar field on one edge, argument is arc length x in [0, h].
using ScalarFn = std::function<double(double)>;

/// Degree-p coefficient vectors (orthonormal Legendre basis on [0, h]) of
/// the HDG projection pair (Pi_1, Pi_2) of a primal/dual field pair (u, n).
/// The pair satisfies the moment conditions against degree p-1 polynomials
/// and the two endpoint flux conditions
///   Pi_2 nu + tau Pi_1 = n nu + tau u   at both endpoints.
struct ProjectedPair {
  VecX primal;
  VecX dual;
};

ProjectedPair hdg_projection(const ScalarFn& u, const ScalarFn& n, double h,
                             const PolynomialSpace& space, double tau);

}  // namespace beamnet
