#include "mpmsa/random_field.hpp"

#include <algorithm>
#include <cmath>

namespace mpmsa {

double Rng::gaussian(double mu, double sigma) {
  if (have_spare_) {
    have_spare_ = false;
    return mu + sigma * spare_;
  }
  // Box-Muller; u1 in (0,1]
  double u1 = 1.0 - uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double z0 = r * std::cos(2.0 * M_PI * u2);
  spare_ = r * std::sin(2.0 * M_PI * u2);
  have_spare_ = true;
  return mu + sigma * z0;
}

void parallel_for_index(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  threads = std::max(1, static_cast<int>(std::min<std::int64_t>(threads, n)));
  if (threads == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::int64_t i = t; i < n; i += threads) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

int default_thread_count() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

Ensemble Ensemble::uniform(double a, double b) {
  if (!(b > a)) throw ConfigError("uniform ensemble: need b > a");
  Ensemble e;
  e.kind = Kind::Uniform;
  e.a = a;
  e.b = b;
  return e;
}

Ensemble Ensemble::gaussian(double mu, double sigma) {
  if (!(sigma > 0)) throw ConfigError("gaussian ensemble: need sigma > 0");
  Ensemble e;
  e.kind = Kind::Gaussian;
  e.mu = mu;
  e.sigma = sigma;
  return e;
}

Ensemble Ensemble::bernoulli(double p) {
  if (!(p > 0 && p < 1)) throw ConfigError("bernoulli ensemble: need 0 < p < 1");
  Ensemble e;
  e.kind = Kind::Bernoulli;
  e.p = p;
  return e;
}

double Ensemble::draw(Rng& rng) const {
  switch (kind) {
    case Kind::Uniform:
      return rng.uniform(a, b);
    case Kind::Gaussian:
      return rng.gaussian(mu, sigma);
    case Kind::Bernoulli:
      return rng.uniform01() < p ? 1.0 : 0.0;
  }
  throw InternalCheckError("ensemble: bad kind");
}

static double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double Ensemble::cdf_sup_increment(double s) const {
  if (s < 0) throw DomainError("cdf_sup_increment: s < 0");
  switch (kind) {
    case Kind::Uniform:
      return std::min(1.0, s / (b - a));
    case Kind::Gaussian: {
      // best window is centered at the mode
      double h = 0.5 * s / sigma;
      return normal_cdf(h) - normal_cdf(-h);
    }
    case Kind::Bernoulli:
      // atoms at 0 and 1: a window of width >= 1 can swallow both
      return s >= 1.0 ? 1.0 : std::max(p, 1 - p);
  }
  throw InternalCheckError("ensemble: bad kind");
}

std::optional<Ensemble::Holder> Ensemble::holder() const {
  switch (kind) {
    case Kind::Uniform:
      return Holder{1.0 / (b - a), 1.0};
    case Kind::Gaussian:
      return Holder{1.0 / (sigma * std::sqrt(2.0 * M_PI)), 1.0};
    case Kind::Bernoulli:
      return std::nullopt;
  }
  throw InternalCheckError("ensemble: bad kind");
}

std::string Ensemble::describe() const {
  char buf[96];
  switch (kind) {
    case Kind::Uniform:
      std::snprintf(buf, sizeof buf, "uniform(%g,%g)", a, b);
      break;
    case Kind::Gaussian:
      std::snprintf(buf, sizeof buf, "gaussian(%g,%g)", mu, sigma);
      break;
    case Kind::Bernoulli:
      std::snprintf(buf, sizeof buf, "bernoulli(%g)", p);
      break;
  }
  return buf;
}

PotentialSample sample_potential(const Graph& g, const Ensemble& e, std::uint64_t seed) {
  PotentialSample s;
  s.ensemble = e;
  s.seed = seed;
  s.values.resize(g.size());
  Rng rng(seed);
  for (int v = 0; v < g.size(); ++v) s.values[v] = e.draw(rng);
  return s;
}

MeanFluctuation mean_fluctuation_decompose(const PotentialSample& v, const std::vector<int>& subset) {
  if (subset.empty()) throw DomainError("mean_fluctuation_decompose: empty subset");
  MeanFluctuation mf;
  double sum = 0.0;
  for (int u : subset) sum += v[u];
  mf.xi = sum / static_cast<double>(subset.size());
  mf.eta.reserve(subset.size());
  for (int u : subset) mf.eta.push_back(v[u] - mf.xi);
  return mf;
}

ConditionalModulusReport estimate_conditional_modulus(const Ensemble& e, int volume, double s,
                                                      int trials, std::uint64_t seed) {
  if (volume < 1) throw DomainError("estimate_conditional_modulus: volume < 1");
  if (s < 0) throw DomainError("estimate_conditional_modulus: s < 0");
  ConditionalModulusReport rep;
  rep.s = s;
  rep.trials = trials;
  rep.tail_thresholds = {0.25, 0.5, 0.9};
  std::vector<int> tail_counts(rep.tail_thresholds.size(), 0);
  double sum = 0.0, mx = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    std::vector<double> v(volume);
    for (auto& x : v) x = e.draw(rng);
    double nu;
    switch (e.kind) {
      case Ensemble::Kind::Gaussian:
        // xi independent of eta; xi ~ N(mu, sigma^2/n)
        nu = Ensemble::gaussian(0.0, e.sigma / std::sqrt(volume)).cdf_sup_increment(s);
        break;
      case Ensemble::Kind::Uniform: {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= volume;
        double min_eta = v[0] - mean, max_eta = v[0] - mean;
        for (double x : v) {
          min_eta = std::min(min_eta, x - mean);
          max_eta = std::max(max_eta, x - mean);
        }
        // exact conditional law: xi | eta ~ Uniform[a - min eta, b - max eta]
        double len = (e.b - e.a) - (max_eta - min_eta);
        if (len <= 0) {
          nu = 1.0;
          ++rep.degenerate_count;
        } else {
          nu = std::min(1.0, s / len);
        }
        break;
      }
      case Ensemble::Kind::Bernoulli:
        // conditional law of xi given eta is atomic (eta determines how many
        // ones the sample has)
        nu = 1.0;
        ++rep.degenerate_count;
        break;
      default:
        throw InternalCheckError("estimate_conditional_modulus: bad kind");
    }
    sum += nu;
    mx = std::max(mx, nu);
    for (size_t i = 0; i < rep.tail_thresholds.size(); ++i)
      if (nu >= rep.tail_thresholds[i]) ++tail_counts[i];
  }
  rep.mean_modulus = trials > 0 ? sum / trials : 0.0;
  rep.max_modulus = mx;
  rep.tail_probs.resize(tail_counts.size());
  for (size_t i = 0; i < tail_counts.size(); ++i)
    rep.tail_probs[i] = trials > 0 ? static_cast<double>(tail_counts[i]) / trials : 0.0;
  return rep;
}

HolderCheckReport holder_check(const Ensemble& e, double s, int trials, std::uint64_t seed) {
  if (trials < 2) throw DomainError("holder_check: need >= 2 trials");
  if (s <= 0) throw DomainError("holder_check: need s > 0");
  HolderCheckReport rep;
  rep.s = s;
  rep.trials = trials;
  std::vector<double> draws(trials);
  Rng rng(seed);
  for (auto& x : draws) x = e.draw(rng);
  std::sort(draws.begin(), draws.end());
  // empirical sup_t #{draws in (t, t+s]} / n via two pointers
  int best = 0;
  size_t lo = 0;
  for (size_t hi = 0; hi < draws.size(); ++hi) {
    while (draws[hi] - draws[lo] > s) ++lo;
    best = std::max(best, static_cast<int>(hi - lo + 1));
  }
  rep.sup_increment = static_cast<double>(best) / trials;
  auto h = e.holder();
  rep.has_certificate = h.has_value();
  if (h) {
    rep.certificate = h->c_h * std::pow(s, h->delta);
    double p = std::min(1.0, rep.certificate);
    rep.stderr_binomial = std::sqrt(std::max(p * (1 - p), 1.0 / trials) / trials);
    // the windowed max runs over ~n overlapping windows and sits well above a
    // single window's 3-sigma band; the DKW sup-deviation radius at the same
    // confidence level (2 exp(-2 n eps^2) = 0.0027) is the correct slack for a
    // sup statistic, and the window increment deviates by at most twice it
    double dkw = std::sqrt(std::log(2.0 / 0.0027) / (2.0 * trials));
    rep.ok = rep.sup_increment <= rep.certificate + 2.0 * dkw;
  }
  return rep;
}

}  // namespace mpmsa
