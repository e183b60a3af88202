#pragma once

#include <Eigen/Dense>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mpmsa/common.hpp"

namespace mpmsa {

enum class LaplacianKind { Dirichlet, Neumann };

// Boundary of a vertex subset Lambda in its ambient graph: inner boundary
// (vertices of Lambda with a neighbor outside), outer boundary, and the
// oriented boundary edge pairs (u in Lambda, u' outside).
struct BoundaryDecomposition {
  std::vector<int> inner;
  std::vector<int> outer;
  std::vector<std::pair<int, int>> edge_pairs;
};

// Finite connected graph with a declared growth dimension d and constant C_d
// such that |B_L(x)| <= C_d L^d for L >= 1. Lattice boxes (truncated Z^d
// segments with unit edges) carry integer coordinates and use the exact L1
// metric; generic graphs fall back to BFS with cached rows.
class Graph {
 public:
  // [-half_width, half_width]^d box
  static Graph lattice_segment(int dim, int half_width);
  static Graph lattice_box(const std::vector<std::pair<int, int>>& bounds);
  static Graph from_adjacency(std::vector<std::vector<int>> adj, int declared_dim = 1);

  // adjacency-list text format: one line per vertex, "index n1 n2 ...".
  static Graph load(const std::string& path);
  void save(const std::string& path) const;

  // copy/move transfer the data and BFS cache but never the cache mutex
  Graph(const Graph& other);
  Graph(Graph&& other) noexcept;
  Graph& operator=(const Graph&) = delete;
  Graph& operator=(Graph&&) = delete;

  int size() const { return static_cast<int>(adj_.size()); }
  int dim() const { return dim_; }
  double growth_constant() const { return growth_constant_; }
  bool is_box() const { return is_box_; }
  const std::vector<int>& neighbors(int v) const { return adj_[v]; }
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }
  int distance(int u, int v) const;
  const std::vector<int>& coord(int v) const;
  std::optional<int> vertex_at(const std::vector<int>& coord) const;
  int diameter_of(const std::vector<int>& subset) const;

  // closed ball as a sorted vertex list; radius >= 0
  std::vector<int> ball(int center, int radius) const;
  // max over all centers and radii in [1, radius_cap] of |B_L(x)| / L^d
  double growth_ratio_max(int radius_cap) const;

  BoundaryDecomposition boundary(const std::vector<int>& subset) const;
  Eigen::MatrixXd laplacian(const std::vector<int>& subset, LaplacianKind kind) const;
  // coupling operator Gamma_{Lambda,G} over the full graph: entries +1 at
  // (u,u') and (u',u) for boundary edge pairs, so that
  // H_G = (H_Lambda^D  (+)  H_{Lambda^c}^D) - Gamma holds exactly.
  Eigen::MatrixXd coupling_operator(const std::vector<int>& subset) const;

  // graph Laplacian of the whole graph plus a diagonal potential g*V
  Eigen::MatrixXd full_operator(const Eigen::VectorXd& potential, double g) const;

 private:
  Graph() = default;
  void validate() const;
  const std::vector<int>& bfs_row(int source) const;

  int dim_ = 1;
  double growth_constant_ = 3.0;
  bool is_box_ = false;
  std::vector<std::vector<int>> adj_;
  std::vector<std::vector<int>> coords_;
  std::vector<int> lo_, hi_;  // box bounds per axis
  mutable std::vector<std::vector<int>> bfs_cache_;
  mutable std::vector<char> bfs_done_;
  mutable std::mutex bfs_mutex_;
};

// Geometric resolvent identity check on a graph G with operator
// H_G = -Delta_G + diag(g*V). For x in Lambda, y outside, non-resonant E:
//   kind=Dirichlet: residual of Eq. G_G(x,y) = sum_{(u,u') in dLambda}
//                   G^D_Lambda(x,u) G_G(u',y), plus the inequality form
//                   |G_G(x,y)| <= sum |G^D_Lambda(x,u)| |G_G(u',y)|.
//   kind=Neumann:   same block-decoupling identity with the exact defect
//                   K = Gamma - D (D = diagonal boundary-degree correction).
struct GriReport {
  double lhs = 0.0;          // G_G(x,y;E)
  double rhs = 0.0;          // decoupled sum
  double residual = 0.0;     // |lhs - rhs|
  double relative_residual = 0.0;
  bool inequality_ok = true; // |lhs| <= sum of absolute terms (Dirichlet only)
  double inequality_slack = 0.0;
};
GriReport verify_gri(const Graph& g, const Eigen::VectorXd& potential, double coupling,
                     const std::vector<int>& subset, int x, int y, double E,
                     LaplacianKind inner_kind);

}  // namespace mpmsa
