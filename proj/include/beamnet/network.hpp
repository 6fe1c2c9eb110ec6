#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "beamnet/types.hpp"

namespace beamnet {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NodeKind { Free, Dirichlet };

struct Node {
  int id = -1;
  Vec3 position = Vec3::Zero();
  NodeKind kind = NodeKind::Free;
  // Prescribed displacement/rotation, meaningful iff kind == Dirichlet.
  Vec3 dirichlet_u = Vec3::Zero();
  Vec3 dirichlet_r = Vec3::Zero();
  // Concentrated loads, meaningful iff kind == Free.
  Vec3 point_force = Vec3::Zero();
  Vec3 point_moment = Vec3::Zero();
};

/// Diagonal material coefficients in the local edge frame.
struct Material {
  double EA = 1.0;
  double kGA2 = 1.0;
  double kGA3 = 1.0;
  double GIt = 1.0;
  double EI2 = 1.0;
  double EI3 = 1.0;

  Vec3 cn_diag() const { return Vec3(EA, kGA2, kGA3); }
  Vec3 cm_diag() const { return Vec3(GIt, EI2, EI3); }
  bool positive() const {
    return EA > 0 && kGA2 > 0 && kGA3 > 0 && GIt > 0 && EI2 > 0 && EI3 > 0;
  }
};

struct Edge {
  int id = -1;
  int node_k = -1;  // normalized so node_k < node_l
  int node_l = -1;
  double length = 0.0;
  Vec3 tangent = Vec3::Zero();
  Mat3 frame = Mat3::Identity();  // columns (i_e, j_e, k_e), det = +1
  Material material;
};

struct Incidence {
  int edge = -1;
  int normal = 0;  // -1 at the lower-index endpoint, +1 at the other
};

struct Network {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<std::vector<Incidence>> adjacency;

  int free_count() const;
  int dirichlet_count() const;
};

/// Orthonormal right-handed frame with first column (p_l - p_k)/|p_l - p_k|.
/// Without a hint, the second column comes from the global axis least aligned
/// with the tangent, Gram-Schmidt orthonormalized.
Mat3 build_frame(const Vec3& p_k, const Vec3& p_l,
                 const std::optional<Vec3>& hint_j = std::nullopt);

/// Parse the JSON network format. Throws ParseError on malformed input and
/// ValidationError on structurally invalid networks.
Network parse_network(const std::string& text);

/// Validate structural invariants (connectivity, Dirichlet presence,
/// positive materials, frame orthonormality). Also fills adjacency.
/// Fully free networks are permitted with require_dirichlet = false; the
/// resulting operator is only positive semidefinite.
void finalize_network(Network& net, bool require_dirichlet = true);

/// Split every edge into 2^k equal collinear segments. Inserted nodes are
/// free with zero point loads.
Network refine_uniform(const Network& net, int k);

/// Edge-length weighted graph Laplacian, one scalar component, size K x K.
SparseMat graph_laplacian(const Network& net);

/// Lumped mass operator M[n,n] = 1/2 sum of incident edge lengths.
VecX mass_operator(const Network& net);

/// Smallest generalized eigenvalue of L x = lambda M x restricted to free
/// nodes, by inverse iteration to relative tolerance 1e-8.
double lambda_min_estimate(const SparseMat& laplacian, const VecX& mass,
                           const std::vector<bool>& dirichlet_mask,
                           int max_iterations = 500);

}  // namespace beamnet
