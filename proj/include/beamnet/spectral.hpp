#pragma once

#include "beamnet/assembly.hpp"

namespace beamnet {

struct SpectralReport {
  double theta_min = 0.0;
  double theta_max = 0.0;

  double ratio() const { return theta_max / theta_min; }
};

/// Extreme generalized eigenvalues of A x = theta (L (+) L) x on the free
/// dofs, where L is the edge-length weighted graph Laplacian duplicated over
/// the six nodal components. Dense solve; intended for desk-scale systems.
SpectralReport spectral_equivalence_report(const CondensedSystem& system);

}  // namespace beamnet
