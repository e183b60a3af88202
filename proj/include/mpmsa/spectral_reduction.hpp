#pragma once

// Fixed-to-variable-energy machinery: the boundary Green profile F_x(E), its
// singular-energy sets as interval covers built from the rational form, the
// measure events {mes E_x(a) > b}, shift covariance of the covers, and the
// two-volume variable-energy singularity estimates (eigenvalue-translation
// route for separable pairs, monotonicity-interval route for weakly separable
// pairs).

#include <cstdint>
#include <vector>

#include "mpmsa/msa.hpp"

namespace mpmsa {

// F_x(E) = max_{y in inner boundary} |G(x_c, y; E)| in rational form; each
// target keeps its own pole/residue list (vanishing residues removed)
struct EnergyProfile {
  std::int64_t center = 0;              // polydisk index of the probe point
  std::vector<std::int64_t> targets;    // inner-boundary polydisk indices
  std::vector<RationalGreen> rationals; // aligned with targets
  Eigen::VectorXd poles;                // ambient spectrum, ascending
  std::int64_t ball_size = 0;           // K in the cover-count bound
  double eval(double E) const;          // F_x(E)
};
EnergyProfile energy_profile(const BallOperator& op);

struct IntervalCover {
  std::vector<Interval> intervals;  // closed, disjoint, ascending
  double total_length = 0.0;
  int count = 0;
  bool full = false;  // threshold below the profile minimum: cover is all of I
  bool contains(double E) const;
};
IntervalCover fatten(const IntervalCover& cover, double pad, const Interval& clip);
bool covers_intersect(const IntervalCover& a, const IntervalCover& b);

// cover of {E in I : F_x(E) >= a} by closed intervals, one union of
// per-monotone-segment solves per boundary target; correct by construction
// (outward endpoint rounding) and subject to the hard count bound 3K^2
IntervalCover singular_energy_set(const EnergyProfile& profile, double a, const Interval& I);

// |f_y'(E)| <= sum_j |kappa_j| / c^2 <= K / c^2 at E with dist(E, poles) >= c
struct DerivativeBoundReport {
  long long samples = 0;
  double worst_ratio = 0.0;  // max over samples of |f'| / (kappa_abs_sum c^-2)
  bool ok = false;           // worst_ratio <= 1 and kappa sums <= K
};
DerivativeBoundReport check_derivative_bound(const EnergyProfile& profile, double c,
                                             const Interval& I, int samples);

// P{ mes(E_x(a)) > b } estimated per-sample from the interval cover, compared
// with the Chebyshev/Fubini surrogate b^{-1} |I| avg_E P{F_x(E) >= a}
struct MeasureBReport {
  long long trials = 0;
  double prob = 0.0, stderr_ = 0.0;
  double p_fixed_avg = 0.0;    // E-grid average of the fixed-energy tail
  double fubini_bound = 0.0;   // b^{-1} |I| p_fixed_avg
  double bound_sigma = 0.0;
  bool ok = false;             // prob <= fubini_bound + 3 sigma
  double mean_measure = 0.0;   // average of mes(E_x(a))
  int cover_count_max = 0;
};
MeasureBReport measure_event_B(std::shared_ptr<const Graph> world, const MsaParams& p,
                               const ParticleConfig& u, int L, const Ensemble& ens,
                               const Interaction& u_int, double a, double b, const Interval& I,
                               int e_grid, long long trials, std::uint64_t seed, int threads);

// covers commute with H -> H + t: endpoints translate by exactly t
struct ShiftReport {
  std::vector<double> t_grid;
  std::vector<double> drift;   // per t, max endpoint |e(t) - (e(0)+t)|
  double max_drift = 0.0;
  bool count_stable = true;    // same interval count for every t
};
ShiftReport shift_covariance_check(const BallOperator& op, const std::vector<double>& t_grid,
                                   double a, const Interval& I);

enum class TwoVolumeRoute { ETV, CPT };

// P{ exists E in I : F_x(E) >= threshold and F_y(E) >= threshold } decided by
// interval-cover intersection (threshold 2a and c-fattening on the ETV route,
// threshold a and no fattening on the CPT route), with the route's bound
// assembled from measured ingredients
struct TwoVolumeVariableReport {
  TwoVolumeRoute route = TwoVolumeRoute::ETV;
  long long trials = 0;
  bool separable = false, weakly_separable = false;
  double a = 0.0, b = 0.0, c = 0.0;
  double prob = 0.0, stderr_ = 0.0;
  double p_bx = 0.0, p_by = 0.0;      // P{mes(E(a)) > b} per ball
  double p_close = 0.0;               // ETV: P{dist(Sx,Sy) <= 4c}; CPT: endpoint collisions at 4b
  double p_fixed_avg = 0.0;           // CPT: E-grid fixed-energy tail average
  double bound = 0.0;                 // ETV: p_bx+p_by+p_close; CPT: 2 b^{-1}|I| p_fixed_avg + p_close
  double bound_sigma = 0.0;
  bool ok = false;                    // prob <= bound + 3 sigma
  long long chain_violations = 0;     // event without any bound ingredient firing
  int cover_count_max = 0;
  double cover_len_max = 0.0;
};
TwoVolumeVariableReport two_volume_variable_energy(std::shared_ptr<const Graph> world,
                                                   const MsaParams& p, const ParticleConfig& x,
                                                   const ParticleConfig& y, int L,
                                                   const Ensemble& ens, const Interaction& u_int,
                                                   double a, double b, double c, const Interval& I,
                                                   TwoVolumeRoute route, long long trials,
                                                   std::uint64_t seed, int threads);

// reference parameter schedule for scale k
struct ReductionSchedule {
  double a = 0.0, b = 0.0, c = 0.0;
};
ReductionSchedule reduction_schedule(const MsaParams& p, int k);
// schedule used by the monotonicity-interval route
ReductionSchedule cpt_schedule(const MsaParams& p, int k);

}  // namespace mpmsa
