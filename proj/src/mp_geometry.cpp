#include "mpmsa/mp_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace mpmsa {

int rho(const Graph& g, const ParticleConfig& x, const ParticleConfig& y) {
  if (x.size() != y.size()) throw DomainError("rho: particle count mismatch");
  int best = 0;
  for (size_t j = 0; j < x.size(); ++j) best = std::max(best, g.distance(x[j], y[j]));
  return best;
}

int rho_sym(const Graph& g, const ParticleConfig& x, const ParticleConfig& y) {
  if (x.size() != y.size()) throw DomainError("rho_sym: particle count mismatch");
  const int n = static_cast<int>(x.size());
  if (n > 8) throw CapacityError("rho_sym: N > 8 permutation search");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  int best = -1;
  do {
    int r = 0;
    for (int j = 0; j < n; ++j) r = std::max(r, g.distance(x[j], y[perm[j]]));
    if (best < 0 || r < best) best = r;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

int support_diameter(const Graph& g, const ParticleConfig& x) {
  int best = 0;
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t j = i + 1; j < x.size(); ++j) best = std::max(best, g.distance(x[i], x[j]));
  return best;
}

std::vector<ParticleConfig> mp_neighbors(const Graph& g, const ParticleConfig& x) {
  std::vector<ParticleConfig> out;
  for (size_t j = 0; j < x.size(); ++j)
    for (int w : g.neighbors(x[j])) {
      ParticleConfig y = x;
      y[j] = w;
      out.push_back(std::move(y));
    }
  return out;
}

MpBall::MpBall(std::shared_ptr<const Graph> world, ParticleConfig center, int radius)
    : world_(std::move(world)), center_(std::move(center)), radius_(radius) {
  if (center_.empty()) throw DomainError("MpBall: empty configuration");
  if (radius_ < 0) throw DomainError("MpBall: negative radius");
  const int n = particles();
  factors_.resize(n);
  factor_pos_.resize(n);
  factor_inner_.resize(n);
  size_ = 1;
  for (int j = 0; j < n; ++j) {
    factors_[j] = world_->ball(center_[j], radius_);
    factor_pos_[j].assign(world_->size(), -1);
    for (size_t p = 0; p < factors_[j].size(); ++p) factor_pos_[j][factors_[j][p]] = static_cast<int>(p);
    auto bd = world_->boundary(factors_[j]);
    factor_inner_[j].assign(factors_[j].size(), 0);
    for (int v : bd.inner) factor_inner_[j][factor_pos_[j][v]] = 1;
    size_ *= static_cast<std::int64_t>(factors_[j].size());
    if (size_ > (std::int64_t{1} << 40)) throw CapacityError("MpBall: polydisk too large");
  }
  strides_.assign(n, 1);
  for (int j = n - 2; j >= 0; --j)
    strides_[j] = strides_[j + 1] * static_cast<std::int64_t>(factors_[j + 1].size());
  center_index_ = index_of(center_);
}

ParticleConfig MpBall::config_at(std::int64_t idx) const {
  if (idx < 0 || idx >= size_) throw DomainError("MpBall::config_at: index out of range");
  ParticleConfig x(particles());
  for (int j = 0; j < particles(); ++j) {
    x[j] = factors_[j][(idx / strides_[j]) % static_cast<std::int64_t>(factors_[j].size())];
  }
  return x;
}

std::int64_t MpBall::index_of(const ParticleConfig& x) const {
  if (static_cast<int>(x.size()) != particles()) return -1;
  std::int64_t idx = 0;
  for (int j = 0; j < particles(); ++j) {
    if (x[j] < 0 || x[j] >= world_->size()) return -1;
    int p = factor_pos_[j][x[j]];
    if (p < 0) return -1;
    idx += strides_[j] * p;
  }
  return idx;
}

std::int64_t MpBall::boundary_edge_count() const {
  // each boundary edge of the product moves exactly one coordinate out
  std::int64_t total = 0;
  for (int j = 0; j < particles(); ++j) {
    std::int64_t pairs_j = static_cast<std::int64_t>(world_->boundary(factors_[j]).edge_pairs.size());
    std::int64_t rest = 1;
    for (int i = 0; i < particles(); ++i)
      if (i != j) rest *= static_cast<std::int64_t>(factors_[i].size());
    total += pairs_j * rest;
  }
  return total;
}

std::vector<std::int64_t> MpBall::inner_boundary_indices() const {
  std::vector<std::int64_t> out;
  for (std::int64_t idx = 0; idx < size_; ++idx) {
    for (int j = 0; j < particles(); ++j) {
      int p = static_cast<int>((idx / strides_[j]) % static_cast<std::int64_t>(factors_[j].size()));
      if (factor_inner_[j][p]) {
        out.push_back(idx);
        break;
      }
    }
  }
  return out;
}

bool MpBall::disjoint_with(const MpBall& other) const {
  if (other.particles() != particles()) throw DomainError("disjoint_with: particle mismatch");
  // product sets: disjoint iff some factor pair is disjoint
  for (int j = 0; j < particles(); ++j) {
    bool meet = false;
    for (int v : factors_[j])
      if (other.factor_pos_[j][v] >= 0) {
        meet = true;
        break;
      }
    if (!meet) return true;
  }
  return false;
}

std::vector<int> MpBall::support() const {
  std::set<int> s;
  for (const auto& f : factors_) s.insert(f.begin(), f.end());
  return {s.begin(), s.end()};
}

int MpBall::rho_between(std::int64_t a, std::int64_t b) const {
  int best = 0;
  for (int j = 0; j < particles(); ++j) {
    int pa = static_cast<int>((a / strides_[j]) % static_cast<std::int64_t>(factors_[j].size()));
    int pb = static_cast<int>((b / strides_[j]) % static_cast<std::int64_t>(factors_[j].size()));
    best = std::max(best, world_->distance(factors_[j][pa], factors_[j][pb]));
  }
  return best;
}

namespace {

// balls B_L(a), B_L(b) in a connected graph are disjoint iff d(a,b) > 2L
bool balls_disjoint(const Graph& g, int a, int b, int L) { return g.distance(a, b) > 2 * L; }

}  // namespace

std::optional<SplitWitness> is_separable_from(const Graph& g, const ParticleConfig& x,
                                              const ParticleConfig& y, int L) {
  if (x.size() != y.size()) throw DomainError("is_separable_from: particle mismatch");
  const int n = static_cast<int>(x.size());
  if (n > 16) throw CapacityError("is_separable_from: N too large");
  if (n < 2) return std::nullopt;
  // ok[j] == 1 iff B_L(x_j) is disjoint from every B_L(y_i)
  std::vector<char> ok(n, 1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n && ok[j]; ++i)
      if (!balls_disjoint(g, x[j], y[i], L)) ok[j] = 0;
  // exhaustive over nonempty proper subsets, smallest first (deterministic)
  std::vector<int> masks;
  for (int mask = 1; mask < (1 << n) - 1; ++mask) masks.push_back(mask);
  std::stable_sort(masks.begin(), masks.end(),
                   [](int a, int b) { return __builtin_popcount(a) < __builtin_popcount(b); });
  for (int mask : masks) {
    bool good = true;
    for (int j = 0; j < n && good; ++j)
      if ((mask >> j) & 1)
        if (!ok[j]) good = false;
    if (!good) continue;
    SplitWitness w;
    for (int j = 0; j < n; ++j) ((mask >> j) & 1 ? w.j1 : w.j2).push_back(j);
    return w;
  }
  return std::nullopt;
}

namespace {

// one-sided weak-separability search: dominant configuration a, other b
std::optional<WeakSepWitness> weak_sep_one_side(const Graph& g, const ParticleConfig& a,
                                                const ParticleConfig& b, int L, bool a_is_x) {
  const int n = static_cast<int>(a.size());
  const int nl = n * L;
  // candidate centers: vertices within NL of some particle of either config
  std::set<int> centers;
  for (int p : a)
    for (int v : g.ball(p, nl)) centers.insert(v);
  for (int p : b)
    for (int v : g.ball(p, nl)) centers.insert(v);
  // precompute particle balls as bitsets
  const int gs = g.size();
  std::vector<std::vector<char>> ball_a(n, std::vector<char>(gs, 0)), ball_b(n, std::vector<char>(gs, 0));
  for (int j = 0; j < n; ++j) {
    for (int v : g.ball(a[j], L)) ball_a[j][v] = 1;
    for (int v : g.ball(b[j], L)) ball_b[j][v] = 1;
  }
  for (int c : centers) {
    for (int r = 0; r <= nl; ++r) {
      std::vector<int> lam = g.ball(c, r);
      std::vector<char> in_lam(gs, 0);
      for (int v : lam) in_lam[v] = 1;
      auto classify = [&](const std::vector<std::vector<char>>& balls, std::vector<int>& inside) {
        // returns false if some ball straddles Lambda
        for (int j = 0; j < n; ++j) {
          bool any = false, all = true;
          for (int v = 0; v < gs; ++v) {
            if (!balls[j][v]) continue;
            if (in_lam[v]) any = true;
            else all = false;
          }
          if (any && !all) return false;
          if (any && all) inside.push_back(j);
        }
        return true;
      };
      std::vector<int> j1, j2;
      if (!classify(ball_a, j1)) continue;
      if (!classify(ball_b, j2)) continue;
      if (static_cast<int>(j1.size()) > static_cast<int>(j2.size())) {
        WeakSepWitness w;
        w.lambda_center = c;
        w.lambda_radius = r;
        w.x_dominant = a_is_x;
        w.j1 = j1;
        w.j2 = j2;
        return w;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<WeakSepWitness> is_weakly_separable(const Graph& g, const ParticleConfig& x,
                                                  const ParticleConfig& y, int L) {
  if (x.size() != y.size()) throw DomainError("is_weakly_separable: particle mismatch");
  if (x.empty() || L < 0) throw DomainError("is_weakly_separable: bad arguments");
  if (auto w = weak_sep_one_side(g, x, y, L, true)) return w;
  if (auto w = weak_sep_one_side(g, y, x, L, false)) return w;
  return std::nullopt;
}

InteractiveClass classify_interactive(const Graph& g, const ParticleConfig& u, int L, int r0) {
  if (u.empty()) throw DomainError("classify_interactive: empty configuration");
  if (L < 8 * r0) throw DomainError("classify_interactive: requires L >= 8 r0");
  const int n = static_cast<int>(u.size());
  InteractiveClass out;
  out.partially_interactive = support_diameter(g, u) > 11 * n * L;
  if (!out.partially_interactive || n < 2) {
    out.partially_interactive = out.partially_interactive && n >= 2;
    return out;
  }
  // connected components of the overlap structure of the 2L-fattened balls:
  // i ~ j iff d(u_i, u_j) <= 4L
  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (int i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    comp[i] = ncomp;
    std::vector<int> stack{i};
    while (!stack.empty()) {
      int a = stack.back();
      stack.pop_back();
      for (int b = 0; b < n; ++b)
        if (comp[b] < 0 && g.distance(u[a], u[b]) <= 4 * L) {
          comp[b] = ncomp;
          stack.push_back(b);
        }
    }
    ++ncomp;
  }
  if (ncomp < 2)
    throw InternalCheckError("classify_interactive: PI configuration with a single cluster");
  for (int j = 0; j < n; ++j) (comp[j] == comp[0] ? out.decomposition.j1 : out.decomposition.j2).push_back(j);
  // cluster gap: distance between the L-fattened projected supports
  int gap = -1;
  for (int i : out.decomposition.j1)
    for (int j : out.decomposition.j2) {
      int d = g.distance(u[i], u[j]) - 2 * L;
      if (d < 0) d = 0;
      if (gap < 0 || d < gap) gap = d;
    }
  out.cluster_gap = gap;
  if (gap <= r0)
    throw InternalCheckError("classify_interactive: PI cluster gap <= r0 (impossible under L >= 8 r0)");
  return out;
}

}  // namespace mpmsa
