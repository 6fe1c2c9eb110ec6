#include "beamnet/polynomial.hpp"

#include <cmath>
#include <stdexcept>

namespace beamnet {

QuadratureRule QuadratureRule::gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("quadrature needs >= 1 point");
  QuadratureRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  // Newton iteration on P_n over [-1,1], then map to [0,1].
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    rule.points[i] = 0.5 * (1.0 - x);  // cos ordering gives descending x
    rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

VecX LegendreBasis::eval(double t) const {
  const double x = 2.0 * t - 1.0;
  VecX values(size());
  double p0 = 1.0, p1 = x;
  for (int k = 0; k <= degree; ++k) {
    double pk;
    if (k == 0) {
      pk = 1.0;
    } else if (k == 1) {
      pk = x;
    } else {
      pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    values[k] = std::sqrt(2.0 * k + 1.0) * pk;
  }
  return values;
}

VecX LegendreBasis::eval_derivative(double t) const {
  const double x = 2.0 * t - 1.0;
  VecX deriv(size());
  // P'_{k+1} = (2k+1) P_k + P'_{k-1}
  double p0 = 1.0, p1 = x;
  double d0 = 0.0, d1 = 1.0;
  for (int k = 0; k <= degree; ++k) {
    double pk, dk;
    if (k == 0) {
      pk = 1.0;
      dk = 0.0;
    } else if (k == 1) {
      pk = x;
      dk = 1.0;
    } else {
      pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      dk = (2 * k - 1) * p1 + d0;
      p0 = p1;
      p1 = pk;
      d0 = d1;
      d1 = dk;
    }
    deriv[k] = std::sqrt(2.0 * k + 1.0) * 2.0 * dk;  // chain rule for x=2t-1
  }
  return deriv;
}

PolynomialSpace::PolynomialSpace(int p, int load_points)
    : basis(p),
      quad(QuadratureRule::gauss_legendre(p + 2)),
      load_quad(QuadratureRule::gauss_legendre(
          load_points > 0 ? load_points : 2 * p + 4)) {
  const int n = basis.size();
  grad_coupling = MatX::Zero(n, n);
  for (size_t q = 0; q < quad.points.size(); ++q) {
    const VecX values = basis.eval(quad.points[q]);
    const VecX deriv = basis.eval_derivative(quad.points[q]);
    grad_coupling += quad.weights[q] * deriv * values.transpose();
  }
  value_at_zero = basis.at_zero();
  value_at_one = basis.at_one();
}

}  // namespace beamnet
