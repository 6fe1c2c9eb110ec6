#pragma once

#include "beamnet/local_solver.hpp"
#include "beamnet/network.hpp"

namespace beamnet {

/// Closed-form constant-coefficient beam solution for given hybrid endpoint
/// data and zero distributed loads. The exact fields are polynomial
/// (u cubic, r quadratic, n constant, m linear); they are returned as a
/// degree-3 LocalSolution in global coordinates.
LocalSolution analytic_local_solution(const Edge& edge, const Vec12& hybrid);

/// Exact 12 x 12 condensed nodal block of a constant-coefficient edge,
/// assembled column by column from the endpoint fluxes -n(x_n) nu_e,
/// -m(x_n) nu_e of the closed-form solution.
CondensedBlock analytic_flux_block(const Edge& edge);

/// Quadratic form of the exact condensed block evaluated through the
/// displayed energy integrals int Cn^-1 n.n + int Cm^-1 m.m; used as an
/// independent cross-check of the flux-based block.
double analytic_energy(const Edge& edge, const Vec12& hybrid);

}  // namespace beamnet
