#pragma once

// Eigenfunction-correlator decay: the deterministic Bessel-route bound, the
// correlator decay experiment with exponential/subexponential fits, per
// eigenvector localization centers and decay profiles, and finite-volume
// stabilization of spectral measures.

#include <cstdint>
#include <functional>
#include <utility>

#include "mpmsa/msa.hpp"

namespace mpmsa {

// <1_x| phi(H) |1_y> = sum_i phi(lambda_i) psi_i(x) psi_i(y); the second form
// restricts the sum to eigenvalues in I
double spectral_measure(const BallOperator& op, const std::function<double(double)>& phi,
                        std::int64_t x, std::int64_t y);
double spectral_measure(const BallOperator& op, const std::function<double(double)>& phi,
                        std::int64_t x, std::int64_t y, const Interval& I);

// smooth compactly supported test functions: s^j times the standard bump
// exp(1 - 1/(1-s^2)), with s the affine map of `support` onto (-1,1)
std::function<double(double)> test_function(int j, const Interval& support);

// deterministic step of the Bessel route: whenever every eigenvalue in I has
// an (lambda_i, m)-NS ball at x or at y, the correlator obeys 4 e^{-mL}
struct BesselReport {
  long long trials = 0;
  long long hypothesis_true = 0;
  long long violations = 0;         // bound failures among hypothesis-true samples
  double bound = 0.0;               // 4 e^{-mL}
  double worst_correlator = 0.0;    // max correlator among hypothesis-true samples
  double varsigma_hat = 0.0;        // hypothesis-failure frequency
  double varsigma_stderr = 0.0;
  std::int64_t max_eigenvalues_in_interval = 0;
};
BesselReport bessel_bound_check(std::shared_ptr<const Graph> world, const MsaParams& p,
                                const ParticleConfig& x, const ParticleConfig& y, int L, double m,
                                const Interval& I, const Ensemble& ens, const Interaction& u_int,
                                long long trials, std::uint64_t seed, int threads);

struct DecayFit {
  enum class Model { Exponential, Subexponential };
  Model model = Model::Exponential;
  bool uses_rho_sym = false;
  double m = 0.0;         // exponential rate in e^{-m r}
  double a = 0.0;         // subexponential amplitude in e^{-a ln^{1+c} r}
  double c = 0.0;         // subexponential log exponent
  double residual = 0.0;  // rms on the log scale
  int points = 0;
  bool decay = false;     // positive fitted rate over >= 2 points
};

struct CorrelatorRow {
  ParticleConfig x, y;
  int rho = 0;
  int rho_sym = 0;
  int diam = 0;           // max of the two support diameters (stratification key)
  double mean = 0.0;
  double stderr_ = 0.0;
  long long trials = 0;
};
struct CorrelatorTable {
  std::vector<CorrelatorRow> rows;
  long long trials = 0;
};
struct CorrelatorExperiment {
  CorrelatorTable table;
  DecayFit exp_rho, subexp_rho;          // fits in rho over non-orbit rows
  DecayFit exp_rho_sym, subexp_rho_sym;  // fits in rho_sym excluding orbit pairs
  std::vector<std::pair<int, DecayFit>> strata;  // exp-in-rho fit per diam stratum
  int fit_floor = 6;
  long long orbit_rows = 0;  // rho_sym = 0 rows (reported, never fitted in rho_sym)
};
// mean sup-correlator over the world operator for each configured pair; one
// eigensolve per trial shared by all pairs
CorrelatorExperiment correlator_decay_experiment(
    std::shared_ptr<const Graph> world, const MsaParams& p,
    const std::vector<std::pair<ParticleConfig, ParticleConfig>>& pairs, const Interval& I,
    const Ensemble& ens, const Interaction& u_int, long long trials, std::uint64_t seed,
    int threads, int fit_floor = 6);

struct EigenfunctionRecord {
  double lambda = 0.0;
  std::int64_t center = -1;      // argmax of |psi|, smallest polydisk index on ties
  std::vector<double> profile;   // max |psi| over the rho_sym sphere of each radius
  double fitted_m = 0.0;
  double residual = 0.0;
  bool decay = false;
};
// localization center and radial profile per eigenvector with eigenvalue in I
std::vector<EigenfunctionRecord> eigenfunction_decay(const BallOperator& op, const Interval& I,
                                                     int fit_floor = 1);

struct StabilizationRow {
  int phi_index = 0;
  double mean_drift = 0.0;
  double max_drift = 0.0;
};
struct StabilizationReport {
  long long trials = 0;
  long long l_small = 0, l_large = 0;
  std::vector<StabilizationRow> rows;
};
// |mu^k_{x,y}(phi) - mu^{k+1}_{x,y}(phi)| for the bump-polynomial family on
// `support`; x and y must sit at distance >= L_k/2 from the smaller ball's
// boundary
StabilizationReport stabilization_check(std::shared_ptr<const Graph> world, const MsaParams& p,
                                        const ParticleConfig& u, int k, const ParticleConfig& x,
                                        const ParticleConfig& y, const Interval& support,
                                        const Ensemble& ens, const Interaction& u_int,
                                        long long trials, std::uint64_t seed, int threads);

}  // namespace mpmsa
