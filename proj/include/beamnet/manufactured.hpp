#pragma once

#include <functional>
#include <vector>

#include "beamnet/assembly.hpp"

namespace beamnet {

/// Smooth global displacement/rotation fields with directional derivatives,
/// used to manufacture loads and measure discretization errors.
struct ExactSolution {
  using Field = std::function<Vec3(const Vec3&)>;
  using Derivative = std::function<Vec3(const Vec3&, const Vec3&)>;

  Field u;
  Field r;
  Derivative du;   // first directional derivative of u
  Derivative dr;
  Derivative d2u;  // second directional derivative of u
  Derivative d2r;
};

/// u = (0, cos(pi y), cos(pi x)), r = (0, sin(pi x), sin(pi y)).
ExactSolution cross_exact_solution();

/// Planar cross: arms along the x- and y-axes over [-1, 1], unit materials,
/// clamped tips carrying the exact fields as Dirichlet data.
Network cross_network();

/// Exact force/moment fields of an edge under the beam balance equations.
struct EdgeFields {
  LoadFn n;
  LoadFn m;
  LoadFn f;
  LoadFn g;
};

/// Differentiate the exact fields along one edge to obtain the dual fields
/// and the balancing distributed loads; validated against central finite
/// differences (step 1e-5) at interior sample points to 1e-6.
EdgeFields derive_sources(const ExactSolution& exact, const Edge& edge,
                          const Network& net, bool validate = true);

/// Loads for every edge of a network.
LoadSet manufactured_loads(const ExactSolution& exact, const Network& net);

/// Broken L2 errors (primal: u and r, dual: n and m) by per-edge quadrature
/// with p + 4 Gauss points.
std::pair<double, double> l2_errors(const GlobalSolution& global,
                                    const ExactSolution& exact,
                                    const Network& net, int p);

struct ConvergenceRecord {
  int level = 0;
  double h_max = 0.0;
  double err_primal = 0.0;
  double err_dual = 0.0;
  double eoc_primal = 0.0;  // vs previous level, 0 at level 0
  double eoc_dual = 0.0;
};

/// Refinement study on the cross network: levels k = 0..levels-1, direct
/// solve below 3000 dofs, otherwise Schwarz-preconditioned CG to 1e-12.
std::vector<ConvergenceRecord> convergence_study(int p,
                                                 const StabilizationRule& rule,
                                                 int levels);

struct PSweepRecord {
  int p = 0;
  double err_primal = 0.0;
  double err_dual = 0.0;
};

/// Errors at a fixed refinement level for a range of polynomial degrees.
std::vector<PSweepRecord> p_sweep(int level, int p_min, int p_max,
                                  const StabilizationRule& rule);

}  // namespace beamnet
