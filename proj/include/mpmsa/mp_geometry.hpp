#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mpmsa/graph.hpp"

namespace mpmsa {

// N-particle configuration: vertex ids in the single-particle graph,
// one per (distinguishable) particle.
using ParticleConfig = std::vector<int>;

// max-distance metric rho(x,y) = max_j d(x_j, y_j)
int rho(const Graph& g, const ParticleConfig& x, const ParticleConfig& y);
// symmetrized distance: min over permutations pi of rho(x, pi(y)); N <= 8
int rho_sym(const Graph& g, const ParticleConfig& x, const ParticleConfig& y);
// diameter of the support Pi x = {x_1, ..., x_N}
int support_diameter(const Graph& g, const ParticleConfig& x);

// neighbors in the N-particle configuration graph (move one particle along
// one ambient edge), ordered by (particle index, neighbor vertex)
std::vector<ParticleConfig> mp_neighbors(const Graph& g, const ParticleConfig& x);

// Polydisk B_L(u) = x_j B_L(u_j): product of single-particle balls of a
// common radius. Configurations are enumerated mixed-radix over the sorted
// factor vertex lists (last particle fastest).
class MpBall {
 public:
  MpBall(std::shared_ptr<const Graph> world, ParticleConfig center, int radius);

  const Graph& world() const { return *world_; }
  std::shared_ptr<const Graph> world_ptr() const { return world_; }
  const ParticleConfig& center() const { return center_; }
  int radius() const { return radius_; }
  int particles() const { return static_cast<int>(center_.size()); }
  std::int64_t size() const { return size_; }
  const std::vector<int>& factor(int j) const { return factors_[j]; }

  ParticleConfig config_at(std::int64_t idx) const;
  std::int64_t index_of(const ParticleConfig& x) const;  // -1 if outside
  bool contains(const ParticleConfig& x) const { return index_of(x) >= 0; }
  std::int64_t center_index() const { return center_index_; }

  // number of ambient configuration-graph edges leaving the polydisk
  std::int64_t boundary_edge_count() const;
  // indices of configurations with an ambient neighbor outside the polydisk
  std::vector<std::int64_t> inner_boundary_indices() const;
  // vertex-set disjointness (polydisks are products: disjoint iff some factor
  // pair of balls is disjoint)
  bool disjoint_with(const MpBall& other) const;
  // union of factor supports in the single-particle graph, sorted unique
  std::vector<int> support() const;
  // rho distance between configurations given by polydisk indices
  int rho_between(std::int64_t a, std::int64_t b) const;

 private:
  std::shared_ptr<const Graph> world_;
  ParticleConfig center_;
  int radius_;
  std::vector<std::vector<int>> factors_;
  std::vector<std::vector<int>> factor_pos_;  // world vertex -> position or -1
  std::vector<std::vector<char>> factor_inner_;  // position -> on factor inner boundary
  std::vector<std::int64_t> strides_;
  std::int64_t size_ = 0;
  std::int64_t center_index_ = 0;
};

// decomposition of the index set {0..N-1}
struct SplitWitness {
  std::vector<int> j1, j2;
};

// Separability: exists a nonempty proper index subset J' of x's particles with
// union_{j in J'} B_L(x_j) disjoint from Pi B_L(y) (searched exhaustively,
// smallest subsets first). none for N=1 by definition.
std::optional<SplitWitness> is_separable_from(const Graph& g, const ParticleConfig& x,
                                              const ParticleConfig& y, int L);

// Weak separability witness: single-particle ball Lambda (diameter <= 2NL,
// searched over centers within NL of the supports and radii 0..NL) with index
// sets J1 (for the dominant configuration) and J2 such that the J1-balls and
// J2-balls lie inside Lambda, all other balls are disjoint from Lambda, and
// |J1| > |J2|.
struct WeakSepWitness {
  int lambda_center = -1;
  int lambda_radius = -1;
  bool x_dominant = true;
  std::vector<int> j1, j2;  // j1 indexes the dominant config's particles
};
std::optional<WeakSepWitness> is_weakly_separable(const Graph& g, const ParticleConfig& x,
                                                  const ParticleConfig& y, int L);

// Interactive classification at radius L with interaction range r0:
// partially interactive (PI) iff diam(Pi u) > 11 N L (strict). For PI
// configurations returns the canonical cluster decomposition: J' = connected
// component (overlap structure of the 2L-fattened particle balls) containing
// particle 0. Requires L >= 8 r0; for PI the cluster gap (distance between the
// L-fattened projected supports) must exceed r0, else InternalCheckError.
struct InteractiveClass {
  bool partially_interactive = false;
  SplitWitness decomposition;  // valid iff partially_interactive
  int cluster_gap = -1;
};
InteractiveClass classify_interactive(const Graph& g, const ParticleConfig& u, int L, int r0);

}  // namespace mpmsa
