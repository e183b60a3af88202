#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpmsa/common.hpp"
#include "mpmsa/graph.hpp"

namespace mpmsa {

// Site-potential ensembles. Uniform and Gaussian carry a Holder-continuity
// certificate sup_t (F(t+s) - F(t)) <= C_H s^delta; Bernoulli is the
// deliberately non-regular negative control (atoms, no certificate).
struct Ensemble {
  enum class Kind { Uniform, Gaussian, Bernoulli };
  Kind kind = Kind::Uniform;
  double a = 0.0, b = 1.0;   // Uniform[a,b]
  double mu = 0.0, sigma = 1.0;  // Gaussian
  double p = 0.5;            // Bernoulli success probability (value 1)

  static Ensemble uniform(double a, double b);
  static Ensemble gaussian(double mu, double sigma);
  static Ensemble bernoulli(double p);

  double draw(Rng& rng) const;
  // exact sup_t P{V in (t, t+s]} for the marginal (used as test oracle)
  double cdf_sup_increment(double s) const;
  struct Holder {
    double c_h;
    double delta;
  };
  std::optional<Holder> holder() const;
  std::string describe() const;
};

// IID potential over all vertices of a single-particle graph; value(v) by
// vertex id. Deterministic in (ensemble, seed).
struct PotentialSample {
  std::vector<double> values;
  Ensemble ensemble;
  std::uint64_t seed = 0;
  double operator[](int v) const { return values[v]; }
  int size() const { return static_cast<int>(values.size()); }
};
PotentialSample sample_potential(const Graph& g, const Ensemble& e, std::uint64_t seed);

// sample mean over a vertex subset and the fluctuation field eta = V - xi
struct MeanFluctuation {
  double xi = 0.0;
  std::vector<double> eta;  // aligned with the subset order
};
MeanFluctuation mean_fluctuation_decompose(const PotentialSample& v, const std::vector<int>& subset);

// Monte Carlo view of the conditional modulus nu_{xi}(s | eta): for each base
// sample, compute the exact conditional s-increment of the law of xi given the
// fluctuations (Gaussian: xi ~ N(mu, sigma^2/|Lambda|) independent of eta;
// Uniform: xi | eta ~ Uniform[a - min eta, b - max eta]). Bernoulli
// conditionals are degenerate and flagged.
struct ConditionalModulusReport {
  double s = 0.0;
  int trials = 0;
  double mean_modulus = 0.0;
  double max_modulus = 0.0;
  std::vector<double> tail_thresholds;
  std::vector<double> tail_probs;  // P{nu >= threshold}
  int degenerate_count = 0;        // conditional support reduced to a point / atoms
};
ConditionalModulusReport estimate_conditional_modulus(const Ensemble& e, int volume, double s,
                                                      int trials, std::uint64_t seed);

// empirical Holder check of the marginal CDF: max sliding-window fraction at
// width s vs the certificate C_H s^delta. The acceptance slack is twice the
// DKW sup-deviation radius at the 3-sigma confidence level (a sup over
// overlapping windows exceeds any single window's binomial band).
struct HolderCheckReport {
  double s = 0.0;
  int trials = 0;
  double sup_increment = 0.0;  // empirical sup_t (F(t+s)-F(t))
  double certificate = 0.0;    // C_H s^delta, 0 if none
  double stderr_binomial = 0.0;
  bool has_certificate = false;
  bool ok = true;  // sup <= certificate + 3 sigma (true vacuously without certificate)
};
HolderCheckReport holder_check(const Ensemble& e, double s, int trials, std::uint64_t seed);

}  // namespace mpmsa
