#include "mpmsa/localization.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace mpmsa {

namespace {

double binom_stderr(double p, long long n) {
  return n > 0 ? std::sqrt(p * (1.0 - p) / n) : 0.0;
}

MpBall whole_world_ball(const std::shared_ptr<const Graph>& world, const ParticleConfig& anchor) {
  std::vector<int> all(world->size());
  std::iota(all.begin(), all.end(), 0);
  return MpBall(world, anchor, world->diameter_of(all));
}

// least squares of z ~ b0 - rate * w; returns {rate, rms residual}
std::pair<double, double> neg_slope_fit(const std::vector<double>& w,
                                        const std::vector<double>& z) {
  const size_t n = w.size();
  double sw = 0.0, sz = 0.0, sww = 0.0, swz = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sw += w[i];
    sz += z[i];
    sww += w[i] * w[i];
    swz += w[i] * z[i];
  }
  const double det = n * sww - sw * sw;
  if (det <= 0.0) return {0.0, 0.0};
  const double slope = (n * swz - sw * sz) / det;
  const double b0 = (sz - slope * sw) / n;
  double ss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = z[i] - (b0 + slope * w[i]);
    ss += r * r;
  }
  return {-slope, std::sqrt(ss / n)};
}

DecayFit fit_exponential(const std::vector<double>& r, const std::vector<double>& v,
                         bool uses_rho_sym) {
  DecayFit fit;
  fit.model = DecayFit::Model::Exponential;
  fit.uses_rho_sym = uses_rho_sym;
  fit.points = static_cast<int>(r.size());
  if (fit.points < 2) return fit;
  std::vector<double> z(v.size());
  for (size_t i = 0; i < v.size(); ++i) z[i] = std::log(v[i]);
  auto [rate, resid] = neg_slope_fit(r, z);
  fit.m = rate;
  fit.residual = resid;
  fit.decay = rate > 0.0;
  return fit;
}

DecayFit fit_subexponential(const std::vector<double>& r, const std::vector<double>& v,
                            bool uses_rho_sym) {
  DecayFit fit;
  fit.model = DecayFit::Model::Subexponential;
  fit.uses_rho_sym = uses_rho_sym;
  fit.points = static_cast<int>(r.size());
  if (fit.points < 2) return fit;
  std::vector<double> z(v.size());
  for (size_t i = 0; i < v.size(); ++i) z[i] = std::log(v[i]);
  fit.residual = std::numeric_limits<double>::infinity();
  for (int ci = 1; ci <= 20; ++ci) {
    const double c = 0.1 * ci;
    std::vector<double> w(r.size());
    for (size_t i = 0; i < r.size(); ++i) w[i] = std::pow(std::log(std::max(r[i], 1.0 + 1e-9)), 1.0 + c);
    auto [rate, resid] = neg_slope_fit(w, z);
    if (resid < fit.residual) {
      fit.residual = resid;
      fit.a = rate;
      fit.c = c;
    }
  }
  fit.decay = fit.a > 0.0;
  return fit;
}

}  // namespace

double spectral_measure(const BallOperator& op, const std::function<double(double)>& phi,
                        std::int64_t x, std::int64_t y) {
  const EigenSystem& es = op.eigensystem();
  double sum = 0.0;
  for (std::int64_t i = 0; i < es.values.size(); ++i)
    sum += phi(es.values[i]) * es.vectors(x, i) * es.vectors(y, i);
  return sum;
}

double spectral_measure(const BallOperator& op, const std::function<double(double)>& phi,
                        std::int64_t x, std::int64_t y, const Interval& I) {
  const EigenSystem& es = op.eigensystem();
  double sum = 0.0;
  for (std::int64_t i = 0; i < es.values.size(); ++i)
    if (I.contains(es.values[i])) sum += phi(es.values[i]) * es.vectors(x, i) * es.vectors(y, i);
  return sum;
}

std::function<double(double)> test_function(int j, const Interval& support) {
  if (j < 0) throw DomainError("test_function: require j >= 0");
  if (!(support.hi > support.lo)) throw DomainError("test_function: empty support");
  const double mid = 0.5 * (support.lo + support.hi);
  const double half = 0.5 * (support.hi - support.lo);
  return [j, mid, half](double lambda) {
    const double s = (lambda - mid) / half;
    if (std::abs(s) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s)) * std::pow(s, j);
  };
}

BesselReport bessel_bound_check(std::shared_ptr<const Graph> world, const MsaParams& p,
                                const ParticleConfig& x, const ParticleConfig& y, int L, double m,
                                const Interval& I, const Ensemble& ens, const Interaction& u_int,
                                long long trials, std::uint64_t seed, int threads) {
  if (trials < 1) throw ConfigError("bessel: require trials >= 1");
  if (rho(*world, x, y) <= 2 * L + 1)
    throw DomainError("bessel: require rho(x, y) > 2L + 1");
  MpBall bx(world, x, L), by(world, y, L);
  if (bx.boundary_edge_count() == 0 || by.boundary_edge_count() == 0)
    throw DomainError("bessel: balls must have nonempty boundary");
  if (bx.boundary_edge_count() != by.boundary_edge_count())
    throw DomainError("bessel: balls must have matching boundaries (keep both in the interior)");
  MpBall wb = whole_world_ball(world, x);
  const std::int64_t ix = wb.index_of(x), iy = wb.index_of(y);
  if (ix < 0 || iy < 0) throw InternalCheckError("bessel: configurations missing from the world");
  MsaParams pm = p;
  pm.m = m;
  BesselReport rep;
  rep.trials = trials;
  rep.bound = 4.0 * std::exp(-m * L);
  std::vector<std::uint8_t> hyp(trials, 0), viol(trials, 0);
  std::vector<double> corr(trials, 0.0);
  std::vector<std::int64_t> in_interval(trials, 0);
  parallel_for_index(trials, threads, [&](std::int64_t t) {
    auto sample =
        std::make_shared<PotentialSample>(sample_potential(*world, ens, derive_seed(seed, t)));
    BallOperator wop(wb, sample, p.g, u_int);
    BallOperator ox(bx, sample, p.g, u_int);
    BallOperator oy(by, sample, p.g, u_int);
    const Eigen::VectorXd& spec = wop.spectrum();
    bool ok = true;
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < spec.size() && ok; ++i) {
      if (!I.contains(spec[i])) continue;
      ++count;
      ok = is_em_nonsingular(ox, spec[i], pm).ns || is_em_nonsingular(oy, spec[i], pm).ns;
    }
    in_interval[t] = count;
    if (!ok) return;
    hyp[t] = 1;
    corr[t] = ef_correlator(wop, I, ix, iy);
    if (corr[t] > rep.bound * (1.0 + 1e-9)) viol[t] = 1;
  });
  for (long long t = 0; t < trials; ++t) {
    rep.max_eigenvalues_in_interval = std::max(rep.max_eigenvalues_in_interval, in_interval[t]);
    if (!hyp[t]) continue;
    ++rep.hypothesis_true;
    rep.violations += viol[t];
    rep.worst_correlator = std::max(rep.worst_correlator, corr[t]);
  }
  rep.varsigma_hat = 1.0 - static_cast<double>(rep.hypothesis_true) / trials;
  rep.varsigma_stderr = binom_stderr(rep.varsigma_hat, trials);
  return rep;
}

CorrelatorExperiment correlator_decay_experiment(
    std::shared_ptr<const Graph> world, const MsaParams& p,
    const std::vector<std::pair<ParticleConfig, ParticleConfig>>& pairs, const Interval& I,
    const Ensemble& ens, const Interaction& u_int, long long trials, std::uint64_t seed,
    int threads, int fit_floor) {
  if (pairs.empty()) throw ConfigError("correlator: empty pair list");
  if (trials < 1) throw ConfigError("correlator: require trials >= 1");
  MpBall wb = whole_world_ball(world, pairs.front().first);
  const size_t np = pairs.size();
  std::vector<std::int64_t> ix(np), iy(np);
  for (size_t i = 0; i < np; ++i) {
    ix[i] = wb.index_of(pairs[i].first);
    iy[i] = wb.index_of(pairs[i].second);
    if (ix[i] < 0 || iy[i] < 0) throw DomainError("correlator: pair outside the world");
  }
  std::vector<double> sums(np, 0.0), sumsq(np, 0.0);
  std::vector<std::vector<double>> per_trial(np, std::vector<double>(trials, 0.0));
  parallel_for_index(trials, threads, [&](std::int64_t t) {
    auto sample =
        std::make_shared<PotentialSample>(sample_potential(*world, ens, derive_seed(seed, t)));
    BallOperator wop(wb, sample, p.g, u_int);
    for (size_t i = 0; i < np; ++i) per_trial[i][t] = ef_correlator(wop, I, ix[i], iy[i]);
  });
  CorrelatorExperiment out;
  out.fit_floor = fit_floor;
  out.table.trials = trials;
  for (size_t i = 0; i < np; ++i) {
    for (long long t = 0; t < trials; ++t) {
      sums[i] += per_trial[i][t];
      sumsq[i] += per_trial[i][t] * per_trial[i][t];
    }
    CorrelatorRow row;
    row.x = pairs[i].first;
    row.y = pairs[i].second;
    row.rho = rho(*world, row.x, row.y);
    row.rho_sym = rho_sym(*world, row.x, row.y);
    row.diam = std::max(support_diameter(*world, row.x), support_diameter(*world, row.y));
    row.trials = trials;
    row.mean = sums[i] / trials;
    if (trials > 1) {
      double var = (sumsq[i] - trials * row.mean * row.mean) / (trials - 1.0);
      row.stderr_ = std::sqrt(std::max(var, 0.0) / trials);
    }
    if (row.rho_sym == 0) ++out.orbit_rows;
    out.table.rows.push_back(std::move(row));
  }
  // fits on the log scale over rows past the near-field floor
  auto collect = [&](bool sym, std::vector<double>& r, std::vector<double>& v) {
    for (const auto& row : out.table.rows) {
      const int dist = sym ? row.rho_sym : row.rho;
      if (sym && row.rho_sym == 0) continue;
      if (dist < fit_floor || row.mean <= 0.0) continue;
      r.push_back(dist);
      v.push_back(row.mean);
    }
  };
  std::vector<double> r, v;
  collect(false, r, v);
  out.exp_rho = fit_exponential(r, v, false);
  out.subexp_rho = fit_subexponential(r, v, false);
  r.clear();
  v.clear();
  collect(true, r, v);
  out.exp_rho_sym = fit_exponential(r, v, true);
  out.subexp_rho_sym = fit_subexponential(r, v, true);
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> strata;
  for (const auto& row : out.table.rows) {
    if (row.rho < fit_floor || row.mean <= 0.0) continue;
    strata[row.diam].first.push_back(row.rho);
    strata[row.diam].second.push_back(row.mean);
  }
  for (auto& [diam, data] : strata)
    if (data.first.size() >= 2)
      out.strata.emplace_back(diam, fit_exponential(data.first, data.second, false));
  return out;
}

std::vector<EigenfunctionRecord> eigenfunction_decay(const BallOperator& op, const Interval& I,
                                                     int fit_floor) {
  const EigenSystem& es = op.eigensystem();
  const MpBall& B = op.ball();
  const Graph& g = B.world();
  std::vector<EigenfunctionRecord> out;
  std::vector<ParticleConfig> cfg(B.size());
  for (std::int64_t i = 0; i < B.size(); ++i) cfg[i] = B.config_at(i);
  for (std::int64_t j = 0; j < es.values.size(); ++j) {
    if (!I.contains(es.values[j])) continue;
    EigenfunctionRecord rec;
    rec.lambda = es.values[j];
    double best = -1.0;
    for (std::int64_t i = 0; i < B.size(); ++i) {
      const double a = std::abs(es.vectors(i, j));
      if (a > best) {
        best = a;
        rec.center = i;
      }
    }
    std::vector<double> prof;
    for (std::int64_t i = 0; i < B.size(); ++i) {
      const int r = rho_sym(g, cfg[i], cfg[rec.center]);
      if (static_cast<size_t>(r) >= prof.size()) prof.resize(r + 1, 0.0);
      prof[r] = std::max(prof[r], std::abs(es.vectors(i, j)));
    }
    rec.profile = prof;
    std::vector<double> rs, vs;
    for (size_t r = static_cast<size_t>(std::max(fit_floor, 1)); r < prof.size(); ++r)
      if (prof[r] > 0.0) {
        rs.push_back(static_cast<double>(r));
        vs.push_back(prof[r]);
      }
    DecayFit fit = fit_exponential(rs, vs, true);
    rec.fitted_m = fit.m;
    rec.residual = fit.residual;
    rec.decay = fit.decay;
    out.push_back(std::move(rec));
  }
  return out;
}

StabilizationReport stabilization_check(std::shared_ptr<const Graph> world, const MsaParams& p,
                                        const ParticleConfig& u, int k, const ParticleConfig& x,
                                        const ParticleConfig& y, const Interval& support,
                                        const Ensemble& ens, const Interaction& u_int,
                                        long long trials, std::uint64_t seed, int threads) {
  if (trials < 1) throw ConfigError("stabilization: require trials >= 1");
  auto scales = scale_sequence(p.L0, p.alpha, k + 1);
  const int lk = static_cast<int>(scales[k]);
  const int lk1 = static_cast<int>(scales[k + 1]);
  if (2 * rho(*world, u, x) > lk || 2 * rho(*world, u, y) > lk)
    throw DomainError("stabilization: x, y must sit at distance >= L_k/2 from the boundary");
  MpBall small(world, u, lk), big(world, u, lk1);
  const std::int64_t sx = small.index_of(x), sy = small.index_of(y);
  const std::int64_t bx = big.index_of(x), by = big.index_of(y);
  if (sx < 0 || sy < 0 || bx < 0 || by < 0)
    throw InternalCheckError("stabilization: configurations missing from the balls");
  constexpr int kFamily = 4;
  std::vector<std::function<double(double)>> phis;
  for (int j = 0; j < kFamily; ++j) phis.push_back(test_function(j, support));
  std::vector<std::vector<double>> drift(kFamily, std::vector<double>(trials, 0.0));
  parallel_for_index(trials, threads, [&](std::int64_t t) {
    auto sample =
        std::make_shared<PotentialSample>(sample_potential(*world, ens, derive_seed(seed, t)));
    BallOperator os(small, sample, p.g, u_int);
    BallOperator ob(big, sample, p.g, u_int);
    for (int j = 0; j < kFamily; ++j)
      drift[j][t] =
          std::abs(spectral_measure(os, phis[j], sx, sy) - spectral_measure(ob, phis[j], bx, by));
  });
  StabilizationReport rep;
  rep.trials = trials;
  rep.l_small = lk;
  rep.l_large = lk1;
  for (int j = 0; j < kFamily; ++j) {
    StabilizationRow row;
    row.phi_index = j;
    for (long long t = 0; t < trials; ++t) {
      row.mean_drift += drift[j][t];
      row.max_drift = std::max(row.max_drift, drift[j][t]);
    }
    row.mean_drift /= trials;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace mpmsa
