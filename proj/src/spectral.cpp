#include "beamnet/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace beamnet {

SpectralReport spectral_equivalence_report(const CondensedSystem& system) {
  const Network& net = *system.net;
  const DofMap& dofs = system.dofs;
  const int n = dofs.total_dofs();
  if (n == 0) throw std::invalid_argument("no free dofs");
  if (n > 3000) {
    throw std::invalid_argument("spectral report limited to small systems");
  }

  const SparseMat laplacian = graph_laplacian(net);
  MatX b = MatX::Zero(n, n);
  for (size_t i = 0; i < dofs.free_nodes.size(); ++i) {
    for (size_t j = 0; j < dofs.free_nodes.size(); ++j) {
      const double value =
          laplacian.coeff(dofs.free_nodes[i], dofs.free_nodes[j]);
      if (value == 0.0) continue;
      for (int c = 0; c < 6; ++c) {
        b(6 * static_cast<int>(i) + c, 6 * static_cast<int>(j) + c) = value;
      }
    }
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<MatX> solver(MatX(system.matrix), b);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("generalized eigenvalue solve failed");
  }
  SpectralReport report;
  report.theta_min = solver.eigenvalues().minCoeff();
  report.theta_max = solver.eigenvalues().maxCoeff();
  return report;
}

}  // namespace beamnet
