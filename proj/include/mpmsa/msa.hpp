#pragma once

#include <limits>
#include <string>

#include "mpmsa/hamiltonian.hpp"

namespace mpmsa {

// Scale-induction parameter pack. validate() throws ConfigError naming the
// violated constraint.
struct MsaParams {
  double alpha = 1.5;         // scale growth exponent, in (1,2)
  double beta = 0.5;          // resonance width exponent e^{-L^beta}
  double tau = 0.125;         // mass correction gamma(m,L) = m(1+L^{-tau})
  double varrho = 1.0 / 6.0;  // pair threshold exponent (1+varrho)/alpha
  double kappa = 13.0;        // base decay exponent of the induction targets
  double theta = 0.02;        // target growth rate per scale
  double m = 1.0;             // mass
  int n_hat = 2;              // maximal particle number
  int d = 1;                  // ambient lattice dimension
  double c_d = 3.0;           // ball growth constant |B_L| <= C_d L^d (2d+1 on Z^d)
  int L0 = 8;                 // initial scale
  double g = 1.0;             // disorder coupling
  int r0 = 0;                 // interaction range

  double kappa_floor() const { return 2.0 * alpha * n_hat * d / (2.0 - alpha); }
  double theta_ceiling() const { return (2.0 - alpha) / alpha - 2.0 * n_hat * d / kappa; }
  void validate() const;
};

// gamma(m,L) = m (1 + L^{-tau})
double gamma_factor(double m, long long L, double tau);
// particle-graded variant gamma(m,L,n) = m (1 + L^{-tau})^{n_hat - n + 1}
double gamma_graded(double m, long long L, double tau, int n, int n_hat);
// minimal pair distance subject to the NS bound: L^{(1+varrho)/alpha}
double pair_threshold(long long L, double varrho, double alpha);

// L_{j+1} = floor(L_j^alpha), strictly increasing; returns L_0..L_{k_max}
std::vector<long long> scale_sequence(int L0, double alpha, int k_max);
// P(n,k) = 3^{n_hat-n} * kappa * (1+theta)^k
double target_exponent(const MsaParams& p, int n, int k);

// strict test dist(Sigma(H), E) < e^{-L^beta}
bool is_e_resonant(double spectral_dist, long long L, double beta);
bool is_e_resonant(const BallOperator& op, double E, double beta);

// Non-singularity report for one ball at one energy. The bound
//   |dB| * |G(x,y;E)| <= e^{-gamma(m,L) rho(x,y)}
// is checked over all pairs with rho(x,y) >= L^{(1+varrho)/alpha}.
// Resonant balls are classified singular without evaluating the Green
// function; balls with no qualifying pair are NS iff non-resonant, with the
// vacuous flag set.
struct NsReport {
  bool ns = false;
  bool resonant = false;
  bool vacuous = false;
  std::int64_t qualifying_pairs = 0;  // pairs scanned (scan stops at a violation)
  // max over scanned qualifying pairs of log(|dB| |G|) + gamma * rho; NS iff
  // every qualifying pair has margin <= 0
  double worst_margin = -std::numeric_limits<double>::infinity();
  std::int64_t worst_a = -1, worst_b = -1;  // polydisk indices of the worst pair
  double spectral_dist = 0.0;
};
NsReport is_em_nonsingular(const BallOperator& op, double E, const MsaParams& p);
// PI fast path: identical outcome, Green entries assembled from the factor
// eigensystems (valid when the interaction vanishes across the split)
NsReport is_em_nonsingular_pi(const BallOperator& full, const SplitWitness& split, double E,
                              const MsaParams& p);

// Tunneling: B_{L_outer}(u) contains two disjoint singular balls of radius
// L_inner. Candidate centers are exactly the v with B_{L_inner}(v) contained
// in B_{L_outer}(u) (exact factor-set inclusion); disjointness is polydisk
// vertex-set disjointness. Scan order is the outer polydisk enumeration.
struct TunnelingReport {
  bool tunneling = false;
  std::int64_t candidates = 0;
  std::int64_t singular_count = 0;
  ParticleConfig witness_a, witness_b;  // first disjoint singular pair found
};
TunnelingReport is_e_tunneling(std::shared_ptr<const Graph> world, const ParticleConfig& u,
                               int l_outer, int l_inner,
                               std::shared_ptr<const PotentialSample> sample, double E,
                               const MsaParams& p, const Interaction& u_int);

// ---- deterministic-lemma falsification harnesses ----------------------------

struct LemmaSample {
  std::uint64_t trial = 0;
  double energy = 0.0;
  bool hypothesis = false;
  bool conclusion = false;
  bool violation = false;
  std::string detail;
};
struct HarnessReport {
  long long samples = 0;
  long long hypothesis_true = 0;
  long long violations = 0;
  long long graded_true = 0;  // PITRONS only: conclusion under graded gamma
  std::vector<LemmaSample> counterexamples;  // capped at 16 records
};

// hypothesis ENR && ENT at scale k+1 (inner radius L_k), conclusion EmNS
HarnessReport lemma_nr_nt_ns_harness(std::shared_ptr<const Graph> world, const MsaParams& p,
                                     const ParticleConfig& u, const Ensemble& ens,
                                     const Interaction& u_int, const std::vector<double>& energies,
                                     long long trials, std::uint64_t seed);

// hypotheses: (a) full PI ball ENR; (b) factor-1 (E-mu'',m)-NS for every
// factor-2 eigenvalue mu''; (c) symmetric. Conclusion: full ball EmNS.
HarnessReport pitrons_harness(std::shared_ptr<const Graph> world, const MsaParams& p,
                              const ParticleConfig& u, int k, const Ensemble& ens,
                              const Interaction& u_int, double E, long long trials,
                              std::uint64_t seed);

// ---- Monte Carlo scale estimates ---------------------------------------------

struct ScaleEstimates {
  int k = 0;
  long long L = 0;
  int n = 0;
  double target = 0.0;  // L^{-P(n,k)}
  double p_hat = 0.0, p_stderr = 0.0;
  long long p_trials = 0;
  // resonance estimator with the leading factor 4; defined for k >= 1
  bool q_defined = false;
  double q_hat = 0.0, q_stderr = 0.0;
  long long q_trials = 0;
  // PI singular inner ball present; defined for k >= 1
  bool s_defined = false;
  double s_hat = 0.0, s_stderr = 0.0;
  long long s_trials = 0;
  std::int64_t s_candidates = 0;  // PI candidate centers per outer ball
};

// particle 0 at the box midpoint shifted by -floor(spread/2) along axis 0,
// the rest at midpoint + (spread - floor(spread/2)): support diameter = spread.
// n = 1 is allowed with spread 0 only (the box-midpoint singleton)
ParticleConfig spread_center(const Graph& world, int n, int spread);

// representative center set replacing sup_x: deep-interior, boundary-adjacent,
// and (for n >= 2, when the world is wide enough) a PI-positioned spread
std::vector<ParticleConfig> representative_centers(const Graph& world, int n, long long L,
                                                   bool include_pi);

// P and (k>=1) Q estimators over the representative centers (max over centers
// of the per-center frequency); one shared eigendecomposition per ball/trial
ScaleEstimates estimate_p_q(std::shared_ptr<const Graph> world, const MsaParams& p, int n, int k,
                            double E, const std::vector<ParticleConfig>& centers,
                            const Ensemble& ens, const Interaction& u_int, long long trials,
                            std::uint64_t seed, int threads);
// S estimator at scale k >= 1: PI singular L_{k-1}-ball inside B_{L_k}(u)
ScaleEstimates estimate_s(std::shared_ptr<const Graph> world, const MsaParams& p, int n, int k,
                          double E, const std::vector<ParticleConfig>& pi_centers,
                          const Ensemble& ens, const Interaction& u_int, long long trials,
                          std::uint64_t seed, int threads);
// merge the P/Q part of a and the S part of b (same k, L, n)
ScaleEstimates merge_estimates(const ScaleEstimates& pq, const ScaleEstimates& s);

// P_{k+1} <= 1/2 C_d^{2N} L_{k+1}^{2Nd} P_k^2 + 1/4 Q_{k+1} + S_{k+1} (+3 sigma)
struct RecursionReport {
  double lhs = 0.0, rhs = 0.0, sigma = 0.0, margin = 0.0;
  bool ok = false;
  bool p_decreasing = false;  // p_{k+1} <= p_k + 3 sigma
  // S_{k+1} <= 1/4 C_d^{-2N} L_{k+1}^{-kappa (1+theta)^{k+1}} when the
  // corollary preconditions (kappa > 6Nd, theta < 1/6, L0 >= 4 C_d^N) hold
  bool s_bound_applicable = false;
  double s_bound_rhs = 0.0;
  bool s_bound_ok = false;
};
RecursionReport verify_recursion(const ScaleEstimates& at_k, const ScaleEstimates& at_k1,
                                 const MsaParams& p);

// ---- EVC statistics ----------------------------------------------------------

struct WegnerRow {
  double s = 0.0;
  double prob = 0.0;
  double stderr_ = 0.0;
  double ratio = 0.0;  // prob / s
};
struct WegnerCurve {
  std::vector<WegnerRow> rows;
  long long trials = 0;
  double energy = 0.0;
  std::int64_t ball_size = 0;
  double slope = 0.0;  // least squares through the origin on (s, prob)
  double ratio_max = 0.0, ratio_min = 0.0;  // over rows with prob > 0
};
WegnerCurve wegner_curve(std::shared_ptr<const Graph> world, const MsaParams& p, int n,
                         const ParticleConfig& u, int L, const Ensemble& ens, double E,
                         const std::vector<double>& s_grid, long long trials, std::uint64_t seed,
                         int threads);

struct TwoVolumeRow {
  double s = 0.0;
  double prob = 0.0;
  double stderr_ = 0.0;
};
struct TwoVolumeCurve {
  std::vector<TwoVolumeRow> rows;
  long long trials = 0;
  bool separable = false;
  bool weakly_separable = false;
  double fitted_exponent = 0.0;  // log-log least squares over rows with prob > 0
  double fit_residual = 0.0;
  int fit_points = 0;
};
// empirical P{dist(Sigma_x, Sigma_y) <= s} for a separable or weakly
// separable pair of L-balls sharing one potential sample per trial;
// DomainError if neither geometric predicate holds
TwoVolumeCurve two_volume_distance_curve(std::shared_ptr<const Graph> world, const MsaParams& p,
                                         const ParticleConfig& x, const ParticleConfig& y, int L,
                                         const Ensemble& ens, const Interaction& u_int,
                                         const std::vector<double>& s_grid, long long trials,
                                         std::uint64_t seed, int threads);

}  // namespace mpmsa
