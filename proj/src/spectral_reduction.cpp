#include "mpmsa/spectral_reduction.hpp"

#include <algorithm>
#include <cmath>

namespace mpmsa {

namespace {

constexpr double kEndpointPad = 1e-12;   // outward rounding / merge tolerance
constexpr double kHuge = 1e300;          // stand-in for the limit at a pole

double sample_stderr(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (v.size() - 1.0) / v.size());
}

double binom_stderr(double p, long long n) {
  return n > 0 ? std::sqrt(p * (1.0 - p) / n) : 0.0;
}

}  // namespace

double EnergyProfile::eval(double E) const {
  double mx = 0.0;
  for (const auto& r : rationals) mx = std::max(mx, std::abs(r.eval(E)));
  return mx;
}

EnergyProfile energy_profile(const BallOperator& op) {
  EnergyProfile prof;
  prof.center = op.ball().center_index();
  prof.targets = op.ball().inner_boundary_indices();
  if (prof.targets.empty())
    throw DomainError("energy_profile: ball has no inner boundary in this world");
  prof.rationals.reserve(prof.targets.size());
  for (std::int64_t y : prof.targets)
    prof.rationals.push_back(rational_green(op, prof.center, y));
  prof.poles = op.spectrum();
  prof.ball_size = op.dim();
  return prof;
}

bool IntervalCover::contains(double E) const {
  for (const auto& iv : intervals)
    if (iv.contains(E)) return true;
  return false;
}

namespace {

IntervalCover merge_intervals(std::vector<Interval> raw, const Interval& I) {
  IntervalCover cover;
  std::sort(raw.begin(), raw.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const auto& iv : raw) {
    if (!cover.intervals.empty() && iv.lo <= cover.intervals.back().hi + kEndpointPad)
      cover.intervals.back().hi = std::max(cover.intervals.back().hi, iv.hi);
    else
      cover.intervals.push_back(iv);
  }
  for (const auto& iv : cover.intervals) cover.total_length += iv.length();
  cover.count = static_cast<int>(cover.intervals.size());
  cover.full = cover.total_length >= I.length() - 1e-9;
  return cover;
}

// {sigma f >= a} restricted to one monotone piece [s,t]; vs/vt are the
// conceptual endpoint values of f (+-kHuge at a pole end)
void solve_monotone_piece(const RationalGreen& r, double s, double t, double vs, double vt,
                          double sigma, double a, std::vector<Interval>& out) {
  const double gs = sigma * vs, gt = sigma * vt;
  if (std::max(gs, gt) < a) return;
  if (std::min(gs, gt) >= a) {
    out.push_back({s, t});
    return;
  }
  const double tol = 1e-13 * std::max(1.0, std::abs(s) + std::abs(t));
  if (gt >= a) {  // set is [crossing, t]
    double lo = s, hi = t;
    while (hi - lo > tol) {
      double mid = 0.5 * (lo + hi);
      if (sigma * r.eval(mid) >= a)
        hi = mid;
      else
        lo = mid;
    }
    out.push_back({lo, t});
  } else {  // set is [s, crossing]
    double lo = s, hi = t;
    while (hi - lo > tol) {
      double mid = 0.5 * (lo + hi);
      if (sigma * r.eval(mid) >= a)
        lo = mid;
      else
        hi = mid;
    }
    out.push_back({s, hi});
  }
}

}  // namespace

IntervalCover singular_energy_set(const EnergyProfile& profile, double a, const Interval& I) {
  if (!(a > 0.0)) throw DomainError("singular_energy_set: require a > 0");
  if (!(I.hi >= I.lo)) throw DomainError("singular_energy_set: empty interval");
  if (I.length() > 1.0 + 1e-12)
    throw DomainError("singular_energy_set: require |I| <= 1");
  std::vector<Interval> raw;
  for (const auto& r : profile.rationals) {
    if (r.poles.empty()) continue;  // identically-zero target
    // segment boundaries: I endpoints plus interior poles
    struct Bnd {
      double e;
      int pole = -1;  // index into r.poles, -1 for an I endpoint
    };
    std::vector<Bnd> bnd;
    bnd.push_back({I.lo, -1});
    for (size_t j = 0; j < r.poles.size(); ++j)
      if (r.poles[j] > I.lo && r.poles[j] < I.hi)
        bnd.push_back({r.poles[j], static_cast<int>(j)});
    bnd.push_back({I.hi, -1});
    std::sort(bnd.begin(), bnd.end(), [](const Bnd& x, const Bnd& y) { return x.e < y.e; });

    for (size_t si = 0; si + 1 < bnd.size(); ++si) {
      const double u = bnd[si].e, v = bnd[si + 1].e;
      if (v - u <= 0.0) continue;
      // critical points of f inside (u, v) by derivative sign scan
      std::vector<double> brk;
      brk.push_back(u);
      double prev_x = u + (v - u) * 0.5 / 64.0;
      double prev_s = r.derivative(prev_x);
      for (int i = 1; i < 64; ++i) {
        double x = u + (v - u) * (i + 0.5) / 64.0;
        double sgn = r.derivative(x);
        if ((prev_s < 0.0 && sgn > 0.0) || (prev_s > 0.0 && sgn < 0.0)) {
          double lo = prev_x, hi = x;
          while (hi - lo > 1e-12) {
            double mid = 0.5 * (lo + hi);
            double dm = r.derivative(mid);
            if ((prev_s < 0.0) == (dm < 0.0))
              lo = mid;
            else
              hi = mid;
          }
          brk.push_back(0.5 * (lo + hi));
        }
        prev_x = x;
        prev_s = sgn;
      }
      brk.push_back(v);

      for (size_t pi = 0; pi + 1 < brk.size(); ++pi) {
        const double s = brk[pi], t = brk[pi + 1];
        if (t - s <= 0.0) continue;
        double vs, vt;
        if (pi == 0 && bnd[si].pole >= 0)
          // just right of pole j: f ~ kappa_j/(lambda_j - E) -> -sign(kappa) inf
          vs = -std::copysign(kHuge, r.kappa[bnd[si].pole]);
        else
          vs = r.eval(s);
        if (pi + 2 == brk.size() && bnd[si + 1].pole >= 0)
          vt = std::copysign(kHuge, r.kappa[bnd[si + 1].pole]);
        else
          vt = r.eval(t);
        solve_monotone_piece(r, s, t, vs, vt, +1.0, a, raw);
        solve_monotone_piece(r, s, t, vs, vt, -1.0, a, raw);
      }
    }
  }
  IntervalCover cover = merge_intervals(std::move(raw), I);
  const double kd = static_cast<double>(profile.ball_size);
  if (!(cover.count < 3.0 * kd * kd))
    throw InternalCheckError("singular_energy_set: cover count bound 3K^2 violated");
  return cover;
}

IntervalCover fatten(const IntervalCover& cover, double pad, const Interval& clip) {
  std::vector<Interval> raw;
  raw.reserve(cover.intervals.size());
  for (const auto& iv : cover.intervals)
    raw.push_back({std::max(iv.lo - pad, clip.lo), std::min(iv.hi + pad, clip.hi)});
  return merge_intervals(std::move(raw), clip);
}

bool covers_intersect(const IntervalCover& a, const IntervalCover& b) {
  size_t i = 0, j = 0;
  while (i < a.intervals.size() && j < b.intervals.size()) {
    const Interval& x = a.intervals[i];
    const Interval& y = b.intervals[j];
    if (x.lo <= y.hi && y.lo <= x.hi) return true;
    if (x.hi < y.hi)
      ++i;
    else
      ++j;
  }
  return false;
}

DerivativeBoundReport check_derivative_bound(const EnergyProfile& profile, double c,
                                             const Interval& I, int samples) {
  if (!(c > 0.0)) throw DomainError("derivative bound: require c > 0");
  if (samples < 1) throw DomainError("derivative bound: require samples >= 1");
  DerivativeBoundReport rep;
  const double kd = static_cast<double>(profile.ball_size);
  bool kappa_ok = true;
  for (const auto& r : profile.rationals)
    if (r.kappa_abs_sum() > kd + 1e-9) kappa_ok = false;
  for (int i = 0; i < samples; ++i) {
    double E = I.lo + I.length() * (i + 0.5) / samples;
    double dist = std::numeric_limits<double>::infinity();
    for (std::int64_t j = 0; j < profile.poles.size(); ++j)
      dist = std::min(dist, std::abs(profile.poles[j] - E));
    if (dist < c) continue;
    ++rep.samples;
    for (const auto& r : profile.rationals) {
      double cap = r.kappa_abs_sum() / (c * c);
      if (cap <= 0.0) continue;
      rep.worst_ratio = std::max(rep.worst_ratio, std::abs(r.derivative(E)) / cap);
    }
  }
  rep.ok = kappa_ok && rep.worst_ratio <= 1.0 + 1e-9;
  return rep;
}

MeasureBReport measure_event_B(std::shared_ptr<const Graph> world, const MsaParams& p,
                               const ParticleConfig& u, int L, const Ensemble& ens,
                               const Interaction& u_int, double a, double b, const Interval& I,
                               int e_grid, long long trials, std::uint64_t seed, int threads) {
  if (!(b > 0.0)) throw DomainError("measure_event_B: require b > 0");
  if (e_grid < 1) throw DomainError("measure_event_B: require e_grid >= 1");
  if (trials < 1) throw ConfigError("measure_event_B: require trials >= 1");
  MpBall ball(world, u, L);
  std::vector<double> mes(trials, 0.0), frac(trials, 0.0);
  std::vector<int> counts(trials, 0);
  parallel_for_index(trials, threads, [&](std::int64_t t) {
    auto sample =
        std::make_shared<PotentialSample>(sample_potential(*world, ens, derive_seed(seed, t)));
    BallOperator op(ball, sample, p.g, u_int);
    if (a <= 0.0) {  // |F| >= 0 everywhere: the singular set is all of I
      mes[t] = I.length();
      frac[t] = 1.0;
      counts[t] = 1;
      return;
    }
    EnergyProfile prof = energy_profile(op);
    IntervalCover cover = singular_energy_set(prof, a, I);
    mes[t] = cover.total_length;
    counts[t] = cover.count;
    int hit = 0;
    for (int i = 0; i < e_grid; ++i)
      if (prof.eval(I.lo + I.length() * (i + 0.5) / e_grid) >= a) ++hit;
    frac[t] = static_cast<double>(hit) / e_grid;
  });
  MeasureBReport rep;
  rep.trials = trials;
  long long events = 0;
  for (long long t = 0; t < trials; ++t) {
    if (mes[t] > b) ++events;
    rep.mean_measure += mes[t];
    rep.p_fixed_avg += frac[t];
    rep.cover_count_max = std::max(rep.cover_count_max, counts[t]);
  }
  rep.mean_measure /= trials;
  rep.p_fixed_avg /= trials;
  rep.prob = static_cast<double>(events) / trials;
  rep.stderr_ = binom_stderr(rep.prob, trials);
  rep.fubini_bound = I.length() * rep.p_fixed_avg / b;
  rep.bound_sigma = I.length() * sample_stderr(frac) / b;
  rep.ok = rep.prob <=
           rep.fubini_bound + 3.0 * std::sqrt(rep.stderr_ * rep.stderr_ +
                                              rep.bound_sigma * rep.bound_sigma);
  return rep;
}

ShiftReport shift_covariance_check(const BallOperator& op, const std::vector<double>& t_grid,
                                   double a, const Interval& I) {
  EnergyProfile prof0 = energy_profile(op);
  IntervalCover cover0 = singular_energy_set(prof0, a, I);
  ShiftReport rep;
  rep.t_grid = t_grid;
  for (double t : t_grid) {
    // honest recomputation: re-diagonalize H + t and rebuild the cover
    Eigen::MatrixXd M = op.matrix();
    M.diagonal().array() += t;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success)
      throw InternalCheckError("shift_covariance_check: eigensolver failed");
    BallOperator shifted(op.ball(), op.sample_ptr(), op.g(), op.interaction());
    shifted.set_eigensystem({es.eigenvalues(), es.eigenvectors()});
    EnergyProfile prof = energy_profile(shifted);
    IntervalCover cover = singular_energy_set(prof, a, {I.lo + t, I.hi + t});
    double drift = 0.0;
    if (cover.count != cover0.count) {
      rep.count_stable = false;
      drift = std::numeric_limits<double>::infinity();
    } else {
      for (int i = 0; i < cover.count; ++i) {
        drift = std::max(drift, std::abs(cover.intervals[i].lo - (cover0.intervals[i].lo + t)));
        drift = std::max(drift, std::abs(cover.intervals[i].hi - (cover0.intervals[i].hi + t)));
      }
    }
    rep.drift.push_back(drift);
    rep.max_drift = std::max(rep.max_drift, drift);
  }
  return rep;
}

TwoVolumeVariableReport two_volume_variable_energy(std::shared_ptr<const Graph> world,
                                                   const MsaParams& p, const ParticleConfig& x,
                                                   const ParticleConfig& y, int L,
                                                   const Ensemble& ens, const Interaction& u_int,
                                                   double a, double b, double c, const Interval& I,
                                                   TwoVolumeRoute route, long long trials,
                                                   std::uint64_t seed, int threads) {
  if (trials < 1) throw ConfigError("two_volume_variable_energy: require trials >= 1");
  if (!(a > 0.0 && b > 0.0)) throw DomainError("two_volume_variable_energy: require a, b > 0");
  TwoVolumeVariableReport rep;
  rep.route = route;
  rep.a = a;
  rep.b = b;
  rep.c = c;
  rep.trials = trials;
  rep.separable = is_separable_from(*world, x, y, L).has_value() ||
                  is_separable_from(*world, y, x, L).has_value();
  rep.weakly_separable = is_weakly_separable(*world, x, y, L).has_value();
  MpBall bx(world, x, L), by(world, y, L);
  if (route == TwoVolumeRoute::ETV) {
    if (!rep.separable)
      throw DomainError("two_volume_variable_energy: ETV route requires a separable pair");
    if (!(c > 0.0)) throw DomainError("two_volume_variable_energy: ETV route requires c > 0");
    const double kmax = static_cast<double>(std::max(bx.size(), by.size()));
    if (b > std::min(a * c * c / kmax, c) + 1e-15)
      throw DomainError("two_volume_variable_energy: require b <= min(a c^2 / |B|, c)");
  } else if (!rep.weakly_separable) {
    throw DomainError("two_volume_variable_energy: CPT route requires a weakly separable pair");
  }
  const double threshold = route == TwoVolumeRoute::ETV ? 2.0 * a : a;
  const int e_grid = 48;
  std::vector<std::uint8_t> ev(trials, 0), ebx(trials, 0), eby(trials, 0), ecl(trials, 0),
      eviol(trials, 0);
  std::vector<double> fx(trials, 0.0), fy(trials, 0.0);
  std::vector<int> ccount(trials, 0);
  std::vector<double> clen(trials, 0.0);
  parallel_for_index(trials, threads, [&](std::int64_t t) {
    auto sample =
        std::make_shared<PotentialSample>(sample_potential(*world, ens, derive_seed(seed, t)));
    BallOperator ox(bx, sample, p.g, u_int);
    BallOperator oy(by, sample, p.g, u_int);
    EnergyProfile px = energy_profile(ox);
    EnergyProfile py = energy_profile(oy);
    IntervalCover cx = singular_energy_set(px, threshold, I);
    IntervalCover cy = singular_energy_set(py, threshold, I);
    bool event;
    if (route == TwoVolumeRoute::ETV) {
      Interval wide{I.lo - c, I.hi + c};
      event = covers_intersect(fatten(cx, c, wide), fatten(cy, c, wide));
    } else {
      event = covers_intersect(cx, cy);
    }
    ev[t] = event ? 1 : 0;
    ccount[t] = std::max(cx.count, cy.count);
    clen[t] = std::max(cx.total_length, cy.total_length);
    // measure-event ingredients at level a
    IntervalCover mx = route == TwoVolumeRoute::ETV ? singular_energy_set(px, a, I) : cx;
    IntervalCover my = route == TwoVolumeRoute::ETV ? singular_energy_set(py, a, I) : cy;
    ebx[t] = mx.total_length > b ? 1 : 0;
    eby[t] = my.total_length > b ? 1 : 0;
    bool close = false;
    if (route == TwoVolumeRoute::ETV) {
      const Eigen::VectorXd& sa = ox.spectrum();
      const Eigen::VectorXd& sb = oy.spectrum();
      std::int64_t i = 0, j = 0;
      double best = std::numeric_limits<double>::infinity();
      while (i < sa.size() && j < sb.size()) {
        best = std::min(best, std::abs(sa[i] - sb[j]));
        if (sa[i] < sb[j])
          ++i;
        else
          ++j;
      }
      close = best <= 4.0 * c;
    } else {
      for (const auto& ix : mx.intervals) {
        for (const auto& iy : my.intervals) {
          if (std::abs(ix.lo - iy.lo) <= 4.0 * b || std::abs(ix.lo - iy.hi) <= 4.0 * b ||
              std::abs(ix.hi - iy.lo) <= 4.0 * b || std::abs(ix.hi - iy.hi) <= 4.0 * b) {
            close = true;
            break;
          }
        }
        if (close) break;
      }
      int hx = 0, hy = 0;
      for (int i = 0; i < e_grid; ++i) {
        double E = I.lo + I.length() * (i + 0.5) / e_grid;
        if (px.eval(E) >= a) ++hx;
        if (py.eval(E) >= a) ++hy;
      }
      fx[t] = static_cast<double>(hx) / e_grid;
      fy[t] = static_cast<double>(hy) / e_grid;
    }
    ecl[t] = close ? 1 : 0;
    eviol[t] = (event && !ebx[t] && !eby[t] && !close) ? 1 : 0;
  });
  long long nev = 0, nbx = 0, nby = 0, ncl = 0;
  for (long long t = 0; t < trials; ++t) {
    nev += ev[t];
    nbx += ebx[t];
    nby += eby[t];
    ncl += ecl[t];
    rep.chain_violations += eviol[t];
    rep.cover_count_max = std::max(rep.cover_count_max, ccount[t]);
    rep.cover_len_max = std::max(rep.cover_len_max, clen[t]);
  }
  rep.prob = static_cast<double>(nev) / trials;
  rep.stderr_ = binom_stderr(rep.prob, trials);
  rep.p_bx = static_cast<double>(nbx) / trials;
  rep.p_by = static_cast<double>(nby) / trials;
  rep.p_close = static_cast<double>(ncl) / trials;
  double sig_close = binom_stderr(rep.p_close, trials);
  if (route == TwoVolumeRoute::ETV) {
    rep.bound = rep.p_bx + rep.p_by + rep.p_close;
    double sx = binom_stderr(rep.p_bx, trials), sy = binom_stderr(rep.p_by, trials);
    rep.bound_sigma = std::sqrt(sx * sx + sy * sy + sig_close * sig_close);
  } else {
    double ax = 0.0, ay = 0.0;
    for (long long t = 0; t < trials; ++t) {
      ax += fx[t];
      ay += fy[t];
    }
    ax /= trials;
    ay /= trials;
    rep.p_fixed_avg = std::max(ax, ay);
    double sf = std::max(sample_stderr(fx), sample_stderr(fy));
    rep.bound = 2.0 * I.length() * rep.p_fixed_avg / b + rep.p_close;
    double sb = 2.0 * I.length() * sf / b;
    rep.bound_sigma = std::sqrt(sb * sb + sig_close * sig_close);
  }
  rep.ok = rep.prob <= rep.bound + 3.0 * std::sqrt(rep.stderr_ * rep.stderr_ +
                                                   rep.bound_sigma * rep.bound_sigma);
  return rep;
}

ReductionSchedule reduction_schedule(const MsaParams& p, int k) {
  auto scales = scale_sequence(p.L0, p.alpha, k);
  const double L = static_cast<double>(scales[k]);
  const double f = std::pow(1.0 + p.theta, k);
  ReductionSchedule s;
  s.a = std::pow(L, -(3.0 * p.kappa / 5.0) * f);
  s.b = std::pow(L, -(p.kappa / 5.0) * f);
  s.c = std::pow(L, -(p.kappa / 5.0 - p.d / 2.0) * f);
  return s;
}

ReductionSchedule cpt_schedule(const MsaParams& p, int k) {
  auto scales = scale_sequence(p.L0, p.alpha, k);
  const long long L = scales[k];
  const double f = std::pow(1.0 + p.theta, k);
  ReductionSchedule s;
  s.a = std::exp(-gamma_factor(p.m, L, p.tau) * static_cast<double>(L));
  s.b = std::pow(static_cast<double>(L), -(p.kappa / 2.0) * f);
  s.c = 0.0;
  return s;
}

}  // namespace mpmsa
