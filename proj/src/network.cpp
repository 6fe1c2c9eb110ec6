#include "beamnet/network.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <queue>

#include "json.hpp"

namespace beamnet {

namespace {

Vec3 read_vec3(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError("field '" + what + "' must be an array of 3 numbers");
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) {
      throw ParseError("field '" + what + "' must contain numbers");
    }
    v[i] = j[i].get<double>();
  }
  return v;
}

}  // namespace

int Network::free_count() const {
  int n = 0;
  for (const auto& node : nodes) n += node.kind == NodeKind::Free ? 1 : 0;
  return n;
}

int Network::dirichlet_count() const {
  return static_cast<int>(nodes.size()) - free_count();
}

Mat3 build_frame(const Vec3& p_k, const Vec3& p_l,
                 const std::optional<Vec3>& hint_j) {
  const Vec3 d = p_l - p_k;
  const double h = d.norm();
  if (h <= 0.0) throw ValidationError("edge endpoints coincide");
  const Vec3 i = d / h;

  Vec3 j_raw;
  if (hint_j) {
    j_raw = *hint_j - hint_j->dot(i) * i;
    if (j_raw.norm() < 1e-10 * hint_j->norm()) {
      throw ValidationError("frame hint is parallel to the edge tangent");
    }
  } else {
    int axis = 0;
    double best = std::abs(i[0]);
    for (int a = 1; a < 3; ++a) {
      if (std::abs(i[a]) < best) {
        best = std::abs(i[a]);
        axis = a;
      }
    }
    j_raw = Vec3::Unit(axis) - i[axis] * i;
  }
  const Vec3 j = j_raw.normalized();
  const Vec3 k = i.cross(j);

  Mat3 t;
  t.col(0) = i;
  t.col(1) = j;
  t.col(2) = k;
  return t;
}

void finalize_network(Network& net, bool require_dirichlet) {
  const int num_nodes = static_cast<int>(net.nodes.size());
  if (num_nodes == 0) throw ValidationError("network has no nodes");

  net.adjacency.assign(num_nodes, {});
  for (auto& edge : net.edges) {
    if (edge.node_k < 0 || edge.node_k >= num_nodes || edge.node_l < 0 ||
        edge.node_l >= num_nodes) {
      throw ValidationError("edge " + std::to_string(edge.id) +
                            " references a nonexistent node");
    }
    if (edge.node_k == edge.node_l) {
      throw ValidationError("edge " + std::to_string(edge.id) +
                            " is a self-loop");
    }
    if (edge.node_k > edge.node_l) std::swap(edge.node_k, edge.node_l);
    if (!edge.material.positive()) {
      throw ValidationError("edge " + std::to_string(edge.id) +
                            " has a nonpositive material coefficient");
    }

    const Vec3 d =
        net.nodes[edge.node_l].position - net.nodes[edge.node_k].position;
    edge.length = d.norm();
    if (edge.length <= 0.0) {
      throw ValidationError("edge " + std::to_string(edge.id) +
                            " has coincident endpoints");
    }
    edge.tangent = d / edge.length;
    if ((edge.frame.transpose() * edge.frame - Mat3::Identity()).norm() >
            1e-12 * 3 ||
        std::abs(edge.frame.determinant() - 1.0) > 1e-12 ||
        (edge.frame.col(0) - edge.tangent).norm() > 1e-12) {
      edge.frame = build_frame(net.nodes[edge.node_k].position,
                               net.nodes[edge.node_l].position);
    }

    net.adjacency[edge.node_k].push_back({edge.id, -1});
    net.adjacency[edge.node_l].push_back({edge.id, +1});
  }

  bool has_dirichlet = false;
  for (const auto& node : net.nodes) {
    has_dirichlet = has_dirichlet || node.kind == NodeKind::Dirichlet;
  }
  if (require_dirichlet && !has_dirichlet) {
    throw ValidationError("network has no Dirichlet node");
  }

  // Connectivity by BFS from node 0.
  std::vector<bool> seen(num_nodes, false);
  std::queue<int> queue;
  queue.push(0);
  seen[0] = true;
  while (!queue.empty()) {
    const int n = queue.front();
    queue.pop();
    for (const auto& inc : net.adjacency[n]) {
      const auto& e = net.edges[inc.edge];
      const int other = e.node_k == n ? e.node_l : e.node_k;
      if (!seen[other]) {
        seen[other] = true;
        queue.push(other);
      }
    }
  }
  for (int n = 0; n < num_nodes; ++n) {
    if (!seen[n]) {
      throw ValidationError("network is disconnected: node " +
                            std::to_string(n) + " is unreachable from node 0");
    }
  }
}

Network parse_network(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges")) {
    throw ParseError("expected an object with 'nodes' and 'edges' arrays");
  }

  Network net;
  int id = 0;
  for (const auto& jn : doc["nodes"]) {
    Node node;
    node.id = id++;
    if (!jn.contains("pos")) {
      throw ParseError("node " + std::to_string(node.id) + ": missing 'pos'");
    }
    node.position = read_vec3(jn["pos"], "pos");
    if (jn.contains("dirichlet")) {
      node.kind = NodeKind::Dirichlet;
      const auto& jd = jn["dirichlet"];
      if (jd.contains("u")) node.dirichlet_u = read_vec3(jd["u"], "dirichlet.u");
      if (jd.contains("r")) node.dirichlet_r = read_vec3(jd["r"], "dirichlet.r");
      if (jn.contains("force") || jn.contains("moment")) {
        throw ParseError("node " + std::to_string(node.id) +
                         ": Dirichlet nodes cannot carry point loads");
      }
    } else {
      if (jn.contains("force")) node.point_force = read_vec3(jn["force"], "force");
      if (jn.contains("moment"))
        node.point_moment = read_vec3(jn["moment"], "moment");
    }
    net.nodes.push_back(node);
  }

  id = 0;
  for (const auto& je : doc["edges"]) {
    Edge edge;
    edge.id = id++;
    if (!je.contains("nodes") || !je["nodes"].is_array() ||
        je["nodes"].size() != 2) {
      throw ParseError("edge " + std::to_string(edge.id) +
                       ": 'nodes' must be a pair of indices");
    }
    edge.node_k = je["nodes"][0].get<int>();
    edge.node_l = je["nodes"][1].get<int>();
    if (je.contains("material")) {
      const auto& jm = je["material"];
      auto get = [&](const char* key, double& out) {
        if (jm.contains(key)) out = jm[key].get<double>();
      };
      get("EA", edge.material.EA);
      get("kGA2", edge.material.kGA2);
      get("kGA3", edge.material.kGA3);
      get("GIt", edge.material.GIt);
      get("EI2", edge.material.EI2);
      get("EI3", edge.material.EI3);
    }
    if (je.contains("frame_j")) {
      const int k = std::min(edge.node_k, edge.node_l);
      const int l = std::max(edge.node_k, edge.node_l);
      if (k < 0 || l >= static_cast<int>(net.nodes.size()) || k == l) {
        throw ValidationError("edge " + std::to_string(edge.id) +
                              " references invalid nodes");
      }
      edge.frame = build_frame(net.nodes[k].position, net.nodes[l].position,
                               read_vec3(je["frame_j"], "frame_j"));
    }
    net.edges.push_back(edge);
  }

  finalize_network(net);
  return net;
}

Network refine_uniform(const Network& net, int k) {
  if (k <= 0) return net;
  const int segments = 1 << k;

  Network out;
  out.nodes = net.nodes;
  for (const auto& edge : net.edges) {
    const Vec3 pk = net.nodes[edge.node_k].position;
    const Vec3 pl = net.nodes[edge.node_l].position;
    int prev = edge.node_k;
    for (int s = 1; s <= segments; ++s) {
      int next;
      if (s == segments) {
        next = edge.node_l;
      } else {
        Node node;
        node.id = static_cast<int>(out.nodes.size());
        // Exact arithmetic midpoint combinations avoid positional drift.
        node.position = pk + (static_cast<double>(s) / segments) * (pl - pk);
        node.kind = NodeKind::Free;
        out.nodes.push_back(node);
        next = node.id;
      }
      Edge seg;
      seg.id = static_cast<int>(out.edges.size());
      seg.node_k = std::min(prev, next);
      seg.node_l = std::max(prev, next);
      seg.material = edge.material;
      seg.frame = edge.frame;  // collinear, so the parent frame is reused
      out.edges.push_back(seg);
      prev = next;
    }
  }
  finalize_network(out);
  return out;
}

SparseMat graph_laplacian(const Network& net) {
  const int n = static_cast<int>(net.nodes.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(net.edges.size() * 4);
  for (const auto& edge : net.edges) {
    const double w = 1.0 / edge.length;
    triplets.emplace_back(edge.node_k, edge.node_k, w);
    triplets.emplace_back(edge.node_l, edge.node_l, w);
    triplets.emplace_back(edge.node_k, edge.node_l, -w);
    triplets.emplace_back(edge.node_l, edge.node_k, -w);
  }
  SparseMat laplacian(n, n);
  laplacian.setFromTriplets(triplets.begin(), triplets.end());
  return laplacian;
}

VecX mass_operator(const Network& net) {
  VecX mass = VecX::Zero(net.nodes.size());
  for (const auto& edge : net.edges) {
    mass[edge.node_k] += 0.5 * edge.length;
    mass[edge.node_l] += 0.5 * edge.length;
  }
  return mass;
}

double lambda_min_estimate(const SparseMat& laplacian, const VecX& mass,
                           const std::vector<bool>& dirichlet_mask,
                           int max_iterations) {
  const int n = laplacian.rows();
  std::vector<int> free_index;
  for (int i = 0; i < n; ++i) {
    if (!dirichlet_mask[i]) free_index.push_back(i);
  }
  const int f = static_cast<int>(free_index.size());
  if (f == 0) throw ValidationError("no free nodes");

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<int> global_to_free(n, -1);
  for (int i = 0; i < f; ++i) global_to_free[free_index[i]] = i;
  for (int col = 0; col < n; ++col) {
    if (global_to_free[col] < 0) continue;
    for (SparseMat::InnerIterator it(laplacian, col); it; ++it) {
      const int row = static_cast<int>(it.row());
      if (global_to_free[row] < 0) continue;
      triplets.emplace_back(global_to_free[row], global_to_free[col],
                            it.value());
    }
  }
  SparseMat l_ff(f, f);
  l_ff.setFromTriplets(triplets.begin(), triplets.end());
  VecX m_ff(f);
  for (int i = 0; i < f; ++i) m_ff[i] = mass[free_index[i]];

  Eigen::SimplicialLDLT<SparseMat> solver(l_ff);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Laplacian factorization failed");
  }

  VecX x = VecX::Ones(f);
  x /= std::sqrt(x.dot(m_ff.cwiseProduct(x)));
  double lambda = 0.0;
  for (int iter = 0; iter < max_iterations; ++iter) {
    VecX y = solver.solve(m_ff.cwiseProduct(x));
    y /= std::sqrt(y.dot(m_ff.cwiseProduct(y)));
    const double next = y.dot(l_ff * y) / y.dot(m_ff.cwiseProduct(y));
    const bool converged = std::abs(next - lambda) <= 1e-8 * std::abs(next);
    lambda = next;
    x = y;
    if (converged && iter > 0) return lambda;
  }
  throw std::runtime_error("inverse iteration did not converge");
}

}  // namespace beamnet
