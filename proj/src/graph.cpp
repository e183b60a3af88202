#include "mpmsa/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <sstream>

namespace mpmsa {

namespace {

std::int64_t box_size(const std::vector<int>& lo, const std::vector<int>& hi) {
  std::int64_t n = 1;
  for (size_t i = 0; i < lo.size(); ++i) n *= static_cast<std::int64_t>(hi[i] - lo[i] + 1);
  return n;
}

}  // namespace

Graph::Graph(const Graph& other)
    : dim_(other.dim_),
      growth_constant_(other.growth_constant_),
      is_box_(other.is_box_),
      adj_(other.adj_),
      coords_(other.coords_),
      lo_(other.lo_),
      hi_(other.hi_) {
  std::lock_guard<std::mutex> lock(other.bfs_mutex_);
  bfs_cache_ = other.bfs_cache_;
  bfs_done_ = other.bfs_done_;
}

Graph::Graph(Graph&& other) noexcept
    : dim_(other.dim_),
      growth_constant_(other.growth_constant_),
      is_box_(other.is_box_),
      adj_(std::move(other.adj_)),
      coords_(std::move(other.coords_)),
      lo_(std::move(other.lo_)),
      hi_(std::move(other.hi_)),
      bfs_cache_(std::move(other.bfs_cache_)),
      bfs_done_(std::move(other.bfs_done_)) {}

Graph Graph::lattice_segment(int dim, int half_width) {
  if (half_width < 1) throw ConfigError("lattice_segment: half_width must be >= 1");
  std::vector<std::pair<int, int>> bounds(dim, {-half_width, half_width});
  return lattice_box(bounds);
}

Graph Graph::lattice_box(const std::vector<std::pair<int, int>>& bounds) {
  const int d = static_cast<int>(bounds.size());
  if (d < 1) throw ConfigError("lattice_box: dimension must be >= 1");
  for (auto& b : bounds)
    if (b.second < b.first) throw ConfigError("lattice_box: empty axis range");

  Graph g;
  g.dim_ = d;
  g.growth_constant_ = 2.0 * d + 1.0;  // |B_L| <= (2d+1) L^d on Z^d, L >= 1
  g.is_box_ = true;
  g.lo_.resize(d);
  g.hi_.resize(d);
  for (int i = 0; i < d; ++i) {
    g.lo_[i] = bounds[i].first;
    g.hi_[i] = bounds[i].second;
  }
  const std::int64_t n = box_size(g.lo_, g.hi_);
  if (n > 2'000'000) throw CapacityError("lattice_box: too many vertices");

  g.coords_.resize(n);
  g.adj_.resize(n);
  // row-major enumeration, last axis fastest
  std::vector<int> c(g.lo_);
  for (std::int64_t v = 0; v < n; ++v) {
    g.coords_[v] = c;
    for (int i = d - 1; i >= 0; --i) {
      if (c[i] < g.hi_[i]) {
        ++c[i];
        break;
      }
      c[i] = g.lo_[i];
    }
  }
  std::vector<std::int64_t> stride(d);
  stride[d - 1] = 1;
  for (int i = d - 2; i >= 0; --i)
    stride[i] = stride[i + 1] * (g.hi_[i + 1] - g.lo_[i + 1] + 1);
  for (std::int64_t v = 0; v < n; ++v) {
    const auto& cv = g.coords_[v];
    for (int i = 0; i < d; ++i) {
      if (cv[i] > g.lo_[i]) g.adj_[v].push_back(static_cast<int>(v - stride[i]));
      if (cv[i] < g.hi_[i]) g.adj_[v].push_back(static_cast<int>(v + stride[i]));
    }
    std::sort(g.adj_[v].begin(), g.adj_[v].end());
  }
  return g;
}

Graph Graph::from_adjacency(std::vector<std::vector<int>> adj, int declared_dim) {
  Graph g;
  g.dim_ = declared_dim;
  g.growth_constant_ = 2.0 * declared_dim + 1.0;
  g.is_box_ = false;
  g.adj_ = std::move(adj);
  for (auto& nb : g.adj_) std::sort(nb.begin(), nb.end());
  g.validate();
  return g;
}

void Graph::validate() const {
  const int n = size();
  for (int v = 0; v < n; ++v) {
    for (int w : adj_[v]) {
      if (w < 0 || w >= n) throw ConfigError("graph: neighbor index out of range");
      if (w == v) throw ConfigError("graph: self-loop");
      if (!std::binary_search(adj_[w].begin(), adj_[w].end(), v))
        throw ConfigError("graph: adjacency not symmetric");
    }
  }
}

Graph Graph::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("graph load: cannot open " + path);
  std::vector<std::vector<int>> adj;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    int idx;
    if (!(ss >> idx)) throw ConfigError("graph load: bad line: " + line);
    if (idx != static_cast<int>(adj.size()))
      throw ConfigError("graph load: vertex indices must be consecutive from 0");
    std::vector<int> nb;
    int w;
    while (ss >> w) nb.push_back(w);
    adj.push_back(std::move(nb));
  }
  return from_adjacency(std::move(adj));
}

void Graph::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("graph save: cannot open " + path);
  for (int v = 0; v < size(); ++v) {
    out << v;
    for (int w : adj_[v]) out << ' ' << w;
    out << '\n';
  }
}

const std::vector<int>& Graph::coord(int v) const {
  if (!is_box_) throw DomainError("coord: not a lattice box");
  return coords_[v];
}

std::optional<int> Graph::vertex_at(const std::vector<int>& coord) const {
  if (!is_box_) throw DomainError("vertex_at: not a lattice box");
  if (static_cast<int>(coord.size()) != dim_) return std::nullopt;
  std::int64_t v = 0;
  for (int i = 0; i < dim_; ++i) {
    if (coord[i] < lo_[i] || coord[i] > hi_[i]) return std::nullopt;
    v = v * (hi_[i] - lo_[i] + 1) + (coord[i] - lo_[i]);
  }
  return static_cast<int>(v);
}

const std::vector<int>& Graph::bfs_row(int source) const {
  std::lock_guard<std::mutex> lock(bfs_mutex_);
  if (bfs_cache_.empty()) {
    bfs_cache_.resize(size());
    bfs_done_.assign(size(), 0);
  }
  if (!bfs_done_[source]) {
    std::vector<int>& dist = bfs_cache_[source];
    dist.assign(size(), -1);
    std::deque<int> q{source};
    dist[source] = 0;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int w : adj_[v])
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push_back(w);
        }
    }
    bfs_done_[source] = 1;
  }
  return bfs_cache_[source];
}

int Graph::distance(int u, int v) const {
  if (is_box_) {
    // boxes are L1-geodesic: axis-monotone shortest paths stay inside
    int d = 0;
    const auto& a = coords_[u];
    const auto& b = coords_[v];
    for (int i = 0; i < dim_; ++i) d += std::abs(a[i] - b[i]);
    return d;
  }
  int d = bfs_row(u)[v];
  if (d < 0) throw DomainError("distance: graph is disconnected");
  return d;
}

int Graph::diameter_of(const std::vector<int>& subset) const {
  int best = 0;
  for (size_t i = 0; i < subset.size(); ++i)
    for (size_t j = i + 1; j < subset.size(); ++j)
      best = std::max(best, distance(subset[i], subset[j]));
  return best;
}

std::vector<int> Graph::ball(int center, int radius) const {
  if (radius < 0) throw DomainError("ball: negative radius");
  std::vector<int> out;
  if (is_box_) {
    // enumerate box coords within L1 distance; ascending vertex id by
    // construction of the row-major enumeration
    const auto& c = coords_[center];
    std::vector<int> cur(dim_);
    std::function<void(int, int)> rec = [&](int axis, int budget) {
      if (axis == dim_) {
        out.push_back(*vertex_at(cur));
        return;
      }
      int lo = std::max(lo_[axis], c[axis] - budget);
      int hi = std::min(hi_[axis], c[axis] + budget);
      for (int x = lo; x <= hi; ++x) {
        cur[axis] = x;
        rec(axis + 1, budget - std::abs(x - c[axis]));
      }
    };
    rec(0, radius);
    std::sort(out.begin(), out.end());
    return out;
  }
  const auto& dist = bfs_row(center);
  for (int v = 0; v < size(); ++v)
    if (dist[v] >= 0 && dist[v] <= radius) out.push_back(v);
  return out;
}

double Graph::growth_ratio_max(int radius_cap) const {
  double worst = 0.0;
  for (int x = 0; x < size(); ++x)
    for (int L = 1; L <= radius_cap; ++L) {
      double ratio = static_cast<double>(ball(x, L).size()) / std::pow(L, dim_);
      worst = std::max(worst, ratio);
    }
  return worst;
}

BoundaryDecomposition Graph::boundary(const std::vector<int>& subset) const {
  std::vector<char> in(size(), 0);
  for (int v : subset) {
    if (v < 0 || v >= size()) throw DomainError("boundary: vertex out of range");
    in[v] = 1;
  }
  BoundaryDecomposition b;
  std::vector<char> outer_seen(size(), 0);
  for (int v : subset) {
    bool is_inner = false;
    for (int w : adj_[v]) {
      if (!in[w]) {
        is_inner = true;
        b.edge_pairs.emplace_back(v, w);
        if (!outer_seen[w]) {
          outer_seen[w] = 1;
          b.outer.push_back(w);
        }
      }
    }
    if (is_inner) b.inner.push_back(v);
  }
  std::sort(b.outer.begin(), b.outer.end());
  // inner and edge_pairs already ascending because subset iteration is in
  // caller order; normalize anyway
  std::sort(b.inner.begin(), b.inner.end());
  std::sort(b.edge_pairs.begin(), b.edge_pairs.end());
  return b;
}

Eigen::MatrixXd Graph::laplacian(const std::vector<int>& subset, LaplacianKind kind) const {
  const int m = static_cast<int>(subset.size());
  std::vector<int> local(size(), -1);
  for (int i = 0; i < m; ++i) local[subset[i]] = i;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    int deg_in = 0;
    for (int w : adj_[subset[i]]) {
      int j = local[w];
      if (j >= 0) {
        L(i, j) = -1.0;
        ++deg_in;
      }
    }
    L(i, i) = (kind == LaplacianKind::Dirichlet) ? degree(subset[i]) : deg_in;
  }
  return L;
}

Eigen::MatrixXd Graph::coupling_operator(const std::vector<int>& subset) const {
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(size(), size());
  for (auto [u, w] : boundary(subset).edge_pairs) {
    gamma(u, w) = 1.0;
    gamma(w, u) = 1.0;
  }
  return gamma;
}

Eigen::MatrixXd Graph::full_operator(const Eigen::VectorXd& potential, double g) const {
  if (potential.size() != size()) throw DomainError("full_operator: potential size mismatch");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(size(), size());
  for (int v = 0; v < size(); ++v) {
    h(v, v) = degree(v) + g * potential[v];
    for (int w : adj_[v]) h(v, w) = -1.0;
  }
  return h;
}

GriReport verify_gri(const Graph& g, const Eigen::VectorXd& potential, double coupling,
                     const std::vector<int>& subset, int x, int y, double E,
                     LaplacianKind inner_kind) {
  const int n = g.size();
  std::vector<char> in(n, 0);
  for (int v : subset) in[v] = 1;
  if (!in[x] || in[y]) throw DomainError("verify_gri: need x in Lambda, y outside");

  Eigen::MatrixXd hg = g.full_operator(potential, coupling);
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hg, Eigen::EigenvaluesOnly);
    double dist = (es.eigenvalues().array() - E).abs().minCoeff();
    if (dist < kResonanceTol * (1.0 + std::abs(E)))
      throw ResonanceError("verify_gri: E resonant with H_G", dist);
  }
  Eigen::MatrixXd green_g =
      (hg - E * Eigen::MatrixXd::Identity(n, n)).partialPivLu().solve(Eigen::MatrixXd::Identity(n, n));

  // inner operator on Lambda with the same diagonal potential
  const int m = static_cast<int>(subset.size());
  std::vector<int> local(n, -1);
  for (int i = 0; i < m; ++i) local[subset[i]] = i;
  Eigen::MatrixXd hin = g.laplacian(subset, inner_kind);
  for (int i = 0; i < m; ++i) hin(i, i) += coupling * potential[subset[i]];
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hin, Eigen::EigenvaluesOnly);
    double dist = (es.eigenvalues().array() - E).abs().minCoeff();
    if (dist < kResonanceTol * (1.0 + std::abs(E)))
      throw ResonanceError("verify_gri: E resonant with inner operator", dist);
  }
  Eigen::MatrixXd green_in =
      (hin - E * Eigen::MatrixXd::Identity(m, m)).partialPivLu().solve(Eigen::MatrixXd::Identity(m, m));

  // decoupling defect K with H_G = (A_Lambda (+) A_Lambda^c) - K:
  //   Dirichlet: K = Gamma (entries +1 at boundary pairs, both orientations)
  //   Neumann:   K = Gamma - D, D = diag(n_G - n_Lambda) on boundary vertices
  const BoundaryDecomposition bd = g.boundary(subset);
  GriReport rep;
  rep.lhs = green_g(x, y);
  double rhs = 0.0, abs_sum = 0.0;
  for (auto [u, up] : bd.edge_pairs) {
    double term = green_in(local[x], local[u]) * green_g(up, y);
    rhs += term;
    abs_sum += std::abs(green_in(local[x], local[u])) * std::abs(green_g(up, y));
  }
  if (inner_kind == LaplacianKind::Neumann) {
    // diagonal correction restricted to rows in Lambda
    for (int u : bd.inner) {
      int deg_out = 0;
      for (int w : g.neighbors(u))
        if (!in[w]) ++deg_out;
      rhs -= deg_out * green_in(local[x], local[u]) * green_g(u, y);
    }
  }
  rep.rhs = rhs;
  rep.residual = std::abs(rep.lhs - rhs);
  double scale = std::max({std::abs(rep.lhs), std::abs(rhs), 1e-300});
  rep.relative_residual = rep.residual / scale;
  if (inner_kind == LaplacianKind::Dirichlet) {
    rep.inequality_slack = abs_sum - std::abs(rep.lhs);
    rep.inequality_ok = rep.inequality_slack >= -1e-12 * std::max(1.0, abs_sum);
  }
  return rep;
}

}  // namespace mpmsa
