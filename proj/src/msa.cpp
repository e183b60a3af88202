#include "mpmsa/msa.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mpmsa {

namespace {

double smoothed_sigma(double p_hat, long long trials) {
  if (trials <= 0) return 0.0;
  double t = static_cast<double>(trials);
  double p = (p_hat * t + 0.5) / (t + 1.0);
  return std::sqrt(p * (1.0 - p) / t);
}

double binomial_stderr(double p_hat, long long trials) {
  if (trials <= 0) return 0.0;
  return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(trials));
}

std::vector<std::pair<int, int>> box_bounds(const Graph& g) {
  std::vector<std::pair<int, int>> b(g.dim(), {0, 0});
  for (int v = 0; v < g.size(); ++v) {
    const auto& c = g.coord(v);
    for (int a = 0; a < g.dim(); ++a) {
      if (v == 0) {
        b[a] = {c[a], c[a]};
      } else {
        b[a].first = std::min(b[a].first, c[a]);
        b[a].second = std::max(b[a].second, c[a]);
      }
    }
  }
  return b;
}

}  // namespace

void MsaParams::validate() const {
  std::ostringstream os;
  auto fail = [&os](const std::string& msg) {
    throw ConfigError("params: " + msg);
  };
  (void)os;
  if (!(alpha > 1.0 && alpha < 2.0)) fail("require alpha in (1,2), got " + std::to_string(alpha));
  if (!(beta > 0.0 && beta < 1.0)) fail("require beta in (0,1), got " + std::to_string(beta));
  if (!(tau > 0.0 && tau < 1.0)) fail("require tau in (0,1), got " + std::to_string(tau));
  if (!(varrho > 0.0)) fail("require varrho > 0, got " + std::to_string(varrho));
  if (!(m > 0.0)) fail("require m > 0, got " + std::to_string(m));
  if (n_hat < 1) fail("require N >= 1, got " + std::to_string(n_hat));
  if (d < 1) fail("require d >= 1, got " + std::to_string(d));
  if (!(c_d >= 1.0)) fail("require C_d >= 1, got " + std::to_string(c_d));
  if (L0 < 2) fail("require L0 >= 2, got " + std::to_string(L0));
  if (r0 < 0) fail("require r0 >= 0, got " + std::to_string(r0));
  if (!std::isfinite(g)) fail("require finite g");
  if (!(kappa > kappa_floor()))
    fail("require kappa > 2*alpha*N*d/(2-alpha) = " + std::to_string(kappa_floor()) + ", got " +
         std::to_string(kappa));
  if (!(theta > 0.0 && theta < theta_ceiling()))
    fail("require theta in (0, (2-alpha)/alpha - 2*N*d/kappa) = (0, " +
         std::to_string(theta_ceiling()) + "), got " + std::to_string(theta));
}

double gamma_factor(double m, long long L, double tau) {
  if (L < 1) throw DomainError("gamma: require L >= 1");
  return m * (1.0 + std::pow(static_cast<double>(L), -tau));
}

double gamma_graded(double m, long long L, double tau, int n, int n_hat) {
  if (n < 1 || n > n_hat) throw DomainError("gamma_graded: require 1 <= n <= N");
  return m * std::pow(1.0 + std::pow(static_cast<double>(L), -tau), n_hat - n + 1);
}

double pair_threshold(long long L, double varrho, double alpha) {
  return std::pow(static_cast<double>(L), (1.0 + varrho) / alpha);
}

std::vector<long long> scale_sequence(int L0, double alpha, int k_max) {
  if (L0 < 2) throw ConfigError("scale_sequence: require L0 >= 2");
  if (!(alpha > 1.0 && alpha < 2.0)) throw ConfigError("scale_sequence: require alpha in (1,2)");
  if (k_max < 0) throw ConfigError("scale_sequence: require k_max >= 0");
  std::vector<long long> seq;
  seq.reserve(k_max + 1);
  long long L = L0;
  seq.push_back(L);
  for (int k = 0; k < k_max; ++k) {
    double v = std::pow(static_cast<double>(L), alpha);
    if (v > 4.0e15) throw CapacityError("scale_sequence: scale overflow");
    long long r = static_cast<long long>(std::llround(v));
    long long next =
        (std::abs(v - static_cast<double>(r)) < 1e-9) ? r : static_cast<long long>(std::floor(v));
    if (next <= L)
      throw ConfigError("scale_sequence: not strictly increasing at L=" + std::to_string(L));
    L = next;
    seq.push_back(L);
  }
  return seq;
}

double target_exponent(const MsaParams& p, int n, int k) {
  if (n < 1 || n > p.n_hat) throw DomainError("target_exponent: require 1 <= n <= N");
  if (k < 0) throw DomainError("target_exponent: require k >= 0");
  return std::pow(3.0, p.n_hat - n) * p.kappa * std::pow(1.0 + p.theta, k);
}

bool is_e_resonant(double spectral_dist, long long L, double beta) {
  return spectral_dist < std::exp(-std::pow(static_cast<double>(L), beta));
}

bool is_e_resonant(const BallOperator& op, double E, double beta) {
  return is_e_resonant(op.spectral_distance(E), op.ball().radius(), beta);
}

namespace {

// largest rho over a polydisk = max factor diameter
int max_pair_rho(const MpBall& B) {
  int r = 0;
  for (int j = 0; j < B.particles(); ++j)
    r = std::max(r, B.world().diameter_of(B.factor(j)));
  return r;
}

// scan of |dB| |G| <= e^{-gamma rho} over qualifying pairs with a dense Green
// matrix; assumes the caller handled resonance and vacuity
void ns_scan_direct(NsReport& r, const BallOperator& op, double E, double gamma, double thr) {
  const MpBall& B = op.ball();
  const Graph& world = B.world();
  const std::int64_t n = B.size();
  const int np = B.particles();
  std::vector<int> cfg(static_cast<size_t>(n) * np);
  for (std::int64_t i = 0; i < n; ++i) {
    ParticleConfig x = B.config_at(i);
    std::copy(x.begin(), x.end(), cfg.begin() + i * np);
  }
  Eigen::MatrixXd G = green_matrix(op, E);
  const double logb = std::log(static_cast<double>(std::max<std::int64_t>(B.boundary_edge_count(), 1)));
  r.ns = true;
  for (std::int64_t a = 0; a < n; ++a) {
    const int* ca = cfg.data() + a * np;
    for (std::int64_t b = a + 1; b < n; ++b) {
      const int* cb = cfg.data() + b * np;
      int rho = 0;
      for (int j = 0; j < np; ++j) rho = std::max(rho, world.distance(ca[j], cb[j]));
      if (rho < thr) continue;
      ++r.qualifying_pairs;
      double margin = std::log(std::abs(G(a, b))) + logb + gamma * rho;
      if (margin > r.worst_margin) {
        r.worst_margin = margin;
        r.worst_a = a;
        r.worst_b = b;
      }
      if (margin > 0.0) {
        r.ns = false;
        return;
      }
    }
  }
}

// same scan with Green entries assembled blockwise from the factor
// eigensystems: G(x,y;E) = sum_a phi_a(x_1) phi_a(y_1) G''(x_2,y_2; E-lambda_a)
void ns_scan_pi(NsReport& r, const BallOperator& full, BallOperator& f1, BallOperator& f2,
                const SplitWitness& split, double E, double gamma, double thr) {
  const EigenSystem& e1 = f1.eigensystem();
  const EigenSystem& e2 = f2.eigensystem();
  const std::int64_t n1 = f1.dim(), n2 = f2.dim();
  if (n1 * n2 != full.dim()) throw InternalCheckError("ns_scan_pi: dimension mismatch");
  const MpBall& B1 = f1.ball();
  const MpBall& B2 = f2.ball();

  // factor rho tables
  Eigen::MatrixXi d1(n1, n1), d2(n2, n2);
  for (std::int64_t a = 0; a < n1; ++a)
    for (std::int64_t b = a; b < n1; ++b) d1(a, b) = d1(b, a) = B1.rho_between(a, b);
  for (std::int64_t a = 0; a < n2; ++a)
    for (std::int64_t b = a; b < n2; ++b) d2(a, b) = d2(b, a) = B2.rho_between(a, b);

  // factor-2 Green matrices at shifted energies E - lambda_a
  std::vector<Eigen::MatrixXd> t(n1);
  for (std::int64_t a = 0; a < n1; ++a) {
    Eigen::VectorXd w = (e2.values.array() - (E - e1.values[a])).inverse();
    t[a] = e2.vectors * w.asDiagonal() * e2.vectors.transpose();
  }

  const double logb =
      std::log(static_cast<double>(std::max<std::int64_t>(full.ball().boundary_edge_count(), 1)));
  r.ns = true;
  Eigen::MatrixXd blk(n2, n2);
  for (std::int64_t x1 = 0; x1 < n1; ++x1) {
    for (std::int64_t y1 = x1; y1 < n1; ++y1) {
      blk.setZero();
      for (std::int64_t a = 0; a < n1; ++a) {
        double w = e1.vectors(x1, a) * e1.vectors(y1, a);
        if (w != 0.0) blk.noalias() += w * t[a];
      }
      const int d1xy = d1(x1, y1);
      for (std::int64_t x2 = 0; x2 < n2; ++x2) {
        const std::int64_t y2_begin = (x1 == y1) ? x2 + 1 : 0;
        for (std::int64_t y2 = y2_begin; y2 < n2; ++y2) {
          int rho = std::max(d1xy, d2(x2, y2));
          if (rho < thr) continue;
          ++r.qualifying_pairs;
          double margin = std::log(std::abs(blk(x2, y2))) + logb + gamma * rho;
          if (margin > r.worst_margin) {
            r.worst_margin = margin;
            // report in full-polydisk indices
            ParticleConfig xa(full.ball().particles()), xb(full.ball().particles());
            ParticleConfig c1 = B1.config_at(x1), cy1 = B1.config_at(y1);
            ParticleConfig c2 = B2.config_at(x2), cy2 = B2.config_at(y2);
            for (size_t i = 0; i < split.j1.size(); ++i) {
              xa[split.j1[i]] = c1[i];
              xb[split.j1[i]] = cy1[i];
            }
            for (size_t i = 0; i < split.j2.size(); ++i) {
              xa[split.j2[i]] = c2[i];
              xb[split.j2[i]] = cy2[i];
            }
            r.worst_a = full.ball().index_of(xa);
            r.worst_b = full.ball().index_of(xb);
          }
          if (margin > 0.0) {
            r.ns = false;
            return;
          }
        }
      }
    }
  }
}

// shared preamble: resonance short-circuit and vacuity
bool ns_preamble(NsReport& r, const MpBall& B, double spectral_dist, double E,
                 const MsaParams& p) {
  const long long L = B.radius();
  r.spectral_dist = spectral_dist;
  r.resonant = is_e_resonant(spectral_dist, L, p.beta);
  const double thr = pair_threshold(L, p.varrho, p.alpha);
  if (max_pair_rho(B) < thr) {
    r.vacuous = true;
    r.ns = !r.resonant;
    return false;
  }
  if (r.resonant || spectral_dist < kResonanceTol * (1.0 + std::abs(E))) {
    r.ns = false;
    r.worst_margin = std::numeric_limits<double>::infinity();
    return false;
  }
  return true;
}

NsReport ns_pi_core(const BallOperator& full, BallOperator& f1, BallOperator& f2,
                    const SplitWitness& split, double E, const MsaParams& p, double gamma) {
  NsReport r;
  const EigenSystem& e1 = f1.eigensystem();
  const EigenSystem& e2 = f2.eigensystem();
  double dist = std::numeric_limits<double>::infinity();
  for (std::int64_t a = 0; a < f1.dim(); ++a)
    for (std::int64_t b = 0; b < f2.dim(); ++b)
      dist = std::min(dist, std::abs(e1.values[a] + e2.values[b] - E));
  if (!ns_preamble(r, full.ball(), dist, E, p)) return r;
  const double thr = pair_threshold(full.ball().radius(), p.varrho, p.alpha);
  ns_scan_pi(r, full, f1, f2, split, E, gamma, thr);
  return r;
}

}  // namespace

NsReport is_em_nonsingular(const BallOperator& op, double E, const MsaParams& p) {
  NsReport r;
  if (!ns_preamble(r, op.ball(), op.spectral_distance(E), E, p)) return r;
  const long long L = op.ball().radius();
  ns_scan_direct(r, op, E, gamma_factor(p.m, L, p.tau), pair_threshold(L, p.varrho, p.alpha));
  return r;
}

NsReport is_em_nonsingular_pi(const BallOperator& full, const SplitWitness& split, double E,
                              const MsaParams& p) {
  BallOperator f1 = sub_operator(full, split.j1);
  BallOperator f2 = sub_operator(full, split.j2);
  return ns_pi_core(full, f1, f2, split, E, p,
                    gamma_factor(p.m, full.ball().radius(), p.tau));
}

namespace {

// candidate inner balls B_{l_inner}(v) contained in B_{l_outer}(u), with the
// interactive classification computed once (geometry is sample-independent)
struct InnerCandidates {
  std::vector<MpBall> balls;
  std::vector<InteractiveClass> cls;
};

InnerCandidates inner_candidates(const std::shared_ptr<const Graph>& world,
                                 const ParticleConfig& u, int l_outer, int l_inner, int r0) {
  InnerCandidates out;
  const Graph& g = *world;
  MpBall outer(world, u, l_outer);
  const int np = outer.particles();
  for (std::int64_t i = 0; i < outer.size(); ++i) {
    ParticleConfig v = outer.config_at(i);
    bool contained = true;
    for (int j = 0; j < np && contained; ++j) {
      std::vector<int> inner = g.ball(v[j], l_inner);
      contained = std::includes(outer.factor(j).begin(), outer.factor(j).end(), inner.begin(),
                                inner.end());
    }
    if (!contained) continue;
    out.balls.emplace_back(world, v, l_inner);
    out.cls.push_back(classify_interactive(g, v, l_inner, r0));
  }
  return out;
}

struct CandidateOps {
  std::vector<BallOperator> ops;
  // factor operators for PI candidates (empty vectors otherwise), so the
  // factor eigensystems persist across energies
  std::vector<std::vector<BallOperator>> factors;
};

CandidateOps build_candidate_ops(const InnerCandidates& cand,
                                 const std::shared_ptr<const PotentialSample>& sample, double g,
                                 const Interaction& u_int) {
  CandidateOps out;
  out.ops.reserve(cand.balls.size());
  out.factors.resize(cand.balls.size());
  for (size_t i = 0; i < cand.balls.size(); ++i) {
    out.ops.emplace_back(cand.balls[i], sample, g, u_int);
    if (cand.cls[i].partially_interactive) {
      out.factors[i].push_back(sub_operator(out.ops[i], cand.cls[i].decomposition.j1));
      out.factors[i].push_back(sub_operator(out.ops[i], cand.cls[i].decomposition.j2));
    }
  }
  return out;
}

NsReport candidate_ns(const InnerCandidates& cand, CandidateOps& ops, size_t i, double E,
                      const MsaParams& p) {
  if (cand.cls[i].partially_interactive)
    return ns_pi_core(ops.ops[i], ops.factors[i][0], ops.factors[i][1],
                      cand.cls[i].decomposition, E, p,
                      gamma_factor(p.m, cand.balls[i].radius(), p.tau));
  return is_em_nonsingular(ops.ops[i], E, p);
}

TunnelingReport tunneling_scan(const InnerCandidates& cand, CandidateOps& ops, double E,
                               const MsaParams& p) {
  TunnelingReport rep;
  rep.candidates = static_cast<std::int64_t>(cand.balls.size());
  std::vector<size_t> singular;
  for (size_t i = 0; i < cand.balls.size(); ++i) {
    NsReport r = candidate_ns(cand, ops, i, E, p);
    if (r.ns) continue;
    ++rep.singular_count;
    for (size_t s : singular) {
      if (cand.balls[i].disjoint_with(cand.balls[s])) {
        rep.tunneling = true;
        rep.witness_a = cand.balls[s].center();
        rep.witness_b = cand.balls[i].center();
        return rep;
      }
    }
    singular.push_back(i);
  }
  return rep;
}

}  // namespace

TunnelingReport is_e_tunneling(std::shared_ptr<const Graph> world, const ParticleConfig& u,
                               int l_outer, int l_inner,
                               std::shared_ptr<const PotentialSample> sample, double E,
                               const MsaParams& p, const Interaction& u_int) {
  if (l_inner < 1 || l_outer <= l_inner)
    throw DomainError("tunneling: require 1 <= l_inner < l_outer");
  InnerCandidates cand = inner_candidates(world, u, l_outer, l_inner, p.r0);
  CandidateOps ops = build_candidate_ops(cand, sample, p.g, u_int);
  return tunneling_scan(cand, ops, E, p);
}

namespace {

void record_counterexample(HarnessReport& rep, std::uint64_t trial, double E,
                           const std::string& detail) {
  if (rep.counterexamples.size() >= 16) return;
  LemmaSample s;
  s.trial = trial;
  s.energy = E;
  s.hypothesis = true;
  s.conclusion = false;
  s.violation = true;
  s.detail = detail;
  rep.counterexamples.push_back(s);
}

}  // namespace

HarnessReport lemma_nr_nt_ns_harness(std::shared_ptr<const Graph> world, const MsaParams& p,
                                     const ParticleConfig& u, const Ensemble& ens,
                                     const Interaction& u_int, const std::vector<double>& energies,
                                     long long trials, std::uint64_t seed) {
  p.validate();
  if (energies.empty()) throw ConfigError("harness: empty energy grid");
  auto scales = scale_sequence(p.L0, p.alpha, 1);
  const int l0 = static_cast<int>(scales[0]);
  const int l1 = static_cast<int>(scales[1]);
  InnerCandidates cand = inner_candidates(world, u, l1, l0, p.r0);
  HarnessReport rep;
  for (long long t = 0; t < trials; ++t) {
    auto sample =
        std::make_shared<PotentialSample>(sample_potential(*world, ens, derive_seed(seed, t)));
    BallOperator outer(MpBall(world, u, l1), sample, p.g, u_int);
    CandidateOps cops = build_candidate_ops(cand, sample, p.g, u_int);
    for (double E : energies) {
      ++rep.samples;
      bool enr = !is_e_resonant(outer, E, p.beta);
      if (!enr) continue;
      TunnelingReport tun = tunneling_scan(cand, cops, E, p);
      if (tun.tunneling) continue;
      ++rep.hypothesis_true;
      NsReport ns = is_em_nonsingular(outer, E, p);
      if (!ns.ns) {
        ++rep.violations;
        std::ostringstream os;
        os << "ENR+ENT ball singular: margin=" << ns.worst_margin
           << " dist=" << ns.spectral_dist << " singular_inner=" << tun.singular_count;
        record_counterexample(rep, static_cast<std::uint64_t>(t), E, os.str());
      }
    }
  }
  return rep;
}

HarnessReport pitrons_harness(std::shared_ptr<const Graph> world, const MsaParams& p,
                              const ParticleConfig& u, int k, const Ensemble& ens,
                              const Interaction& u_int, double E, long long trials,
                              std::uint64_t seed) {
  p.validate();
  if (u_int.r0 > p.r0)
    throw ConfigError("pitrons: interaction range exceeds the declared r0");
  auto scales = scale_sequence(p.L0, p.alpha, k);
  const int L = static_cast<int>(scales[k]);
  InteractiveClass cls = classify_interactive(*world, u, L, p.r0);
  if (!cls.partially_interactive)
    throw DomainError("pitrons: center is not PI at this scale");
  const int n = static_cast<int>(u.size());
  const double g_std = gamma_factor(p.m, L, p.tau);
  const double g_graded = gamma_graded(p.m, L, p.tau, n, p.n_hat);
  HarnessReport rep;
  for (long long t = 0; t < trials; ++t) {
    auto sample =
        std::make_shared<PotentialSample>(sample_potential(*world, ens, derive_seed(seed, t)));
    BallOperator full(MpBall(world, u, L), sample, p.g, u_int);
    BallOperator f1 = sub_operator(full, cls.decomposition.j1);
    BallOperator f2 = sub_operator(full, cls.decomposition.j2);
    const EigenSystem& e1 = f1.eigensystem();
    const EigenSystem& e2 = f2.eigensystem();
    ++rep.samples;
    double dist = std::numeric_limits<double>::infinity();
    for (std::int64_t a = 0; a < f1.dim(); ++a)
      for (std::int64_t b = 0; b < f2.dim(); ++b)
        dist = std::min(dist, std::abs(e1.values[a] + e2.values[b] - E));
    if (is_e_resonant(dist, L, p.beta)) continue;
    bool factors_ns = true;
    for (std::int64_t b = 0; b < f2.dim() && factors_ns; ++b)
      factors_ns = is_em_nonsingular(f1, E - e2.values[b], p).ns;
    for (std::int64_t a = 0; a < f1.dim() && factors_ns; ++a)
      factors_ns = is_em_nonsingular(f2, E - e1.values[a], p).ns;
    if (!factors_ns) continue;
    ++rep.hypothesis_true;
    NsReport concl = ns_pi_core(full, f1, f2, cls.decomposition, E, p, g_std);
    NsReport graded = ns_pi_core(full, f1, f2, cls.decomposition, E, p, g_graded);
    if (graded.ns) ++rep.graded_true;
    if (!concl.ns) {
      ++rep.violations;
      std::ostringstream os;
      os << "PI hypotheses hold but ball singular: margin=" << concl.worst_margin
         << " dist=" << dist;
      record_counterexample(rep, static_cast<std::uint64_t>(t), E, os.str());
    }
  }
  return rep;
}

ParticleConfig spread_center(const Graph& world, int n, int spread) {
  if (!world.is_box()) throw DomainError("spread_center: box world required");
  if (n < 1) throw DomainError("spread_center: require n >= 1");
  if (n == 1 && spread != 0)
    throw DomainError("spread_center: a single particle cannot realize a nonzero spread");
  auto bounds = box_bounds(world);
  std::vector<int> mid(world.dim());
  for (int a = 0; a < world.dim(); ++a) mid[a] = (bounds[a].first + bounds[a].second) / 2;
  std::vector<int> lo = mid, hi = mid;
  lo[0] = mid[0] - spread / 2;
  hi[0] = lo[0] + spread;
  auto vlo = world.vertex_at(lo), vhi = world.vertex_at(hi);
  if (!vlo || !vhi) throw DomainError("spread_center: spread exceeds the world box");
  ParticleConfig u(n, *vhi);
  u[0] = *vlo;
  return u;
}

std::vector<ParticleConfig> representative_centers(const Graph& world, int n, long long L,
                                                   bool include_pi) {
  if (!world.is_box()) throw DomainError("representative_centers: box world required");
  if (n < 1) throw DomainError("representative_centers: require n >= 1");
  auto bounds = box_bounds(world);
  std::vector<int> mid(world.dim());
  for (int a = 0; a < world.dim(); ++a) mid[a] = (bounds[a].first + bounds[a].second) / 2;
  std::vector<ParticleConfig> out;
  auto vmid = world.vertex_at(mid);
  if (!vmid) throw InternalCheckError("representative_centers: midpoint outside box");
  out.push_back(ParticleConfig(n, *vmid));
  // boundary-adjacent: the ball just touches the world boundary along axis 0
  std::vector<int> edge = mid;
  edge[0] = bounds[0].second - static_cast<int>(L);
  if (edge[0] > bounds[0].first && edge[0] != mid[0]) {
    if (auto v = world.vertex_at(edge)) out.push_back(ParticleConfig(n, *v));
  }
  if (include_pi && n >= 2) {
    try {
      out.push_back(spread_center(world, n, static_cast<int>(11 * n * L + 1)));
    } catch (const DomainError&) {
      // world too narrow for a PI-positioned center; omit
    }
  }
  return out;
}

ScaleEstimates estimate_p_q(std::shared_ptr<const Graph> world, const MsaParams& p, int n, int k,
                            double E, const std::vector<ParticleConfig>& centers,
                            const Ensemble& ens, const Interaction& u_int, long long trials,
                            std::uint64_t seed, int threads) {
  p.validate();
  if (centers.empty()) throw DomainError("estimate_p_q: empty center set");
  if (trials < 1) throw ConfigError("estimate_p_q: require trials >= 1");
  for (const auto& u : centers)
    if (static_cast<int>(u.size()) != n) throw ConfigError("estimate_p_q: center arity mismatch");
  auto scales = scale_sequence(p.L0, p.alpha, k);
  const int L = static_cast<int>(scales[k]);
  const int C = static_cast<int>(centers.size());
  std::vector<InteractiveClass> cls;
  cls.reserve(C);
  for (const auto& u : centers) cls.push_back(classify_interactive(*world, u, L, p.r0));
  std::vector<std::uint8_t> sing(static_cast<size_t>(trials) * C, 0);
  std::vector<std::uint8_t> er(static_cast<size_t>(trials) * C, 0);
  parallel_for_index(trials, threads, [&](std::int64_t t) {
    auto sample =
        std::make_shared<PotentialSample>(sample_potential(*world, ens, derive_seed(seed, t)));
    for (int c = 0; c < C; ++c) {
      BallOperator op(MpBall(world, centers[c], L), sample, p.g, u_int);
      NsReport r = cls[c].partially_interactive
                       ? is_em_nonsingular_pi(op, cls[c].decomposition, E, p)
                       : is_em_nonsingular(op, E, p);
      sing[static_cast<size_t>(t) * C + c] = r.ns ? 0 : 1;
      er[static_cast<size_t>(t) * C + c] = r.resonant ? 1 : 0;
    }
  });
  ScaleEstimates est;
  est.k = k;
  est.L = L;
  est.n = n;
  est.target = std::pow(static_cast<double>(L), -target_exponent(p, n, k));
  double worst_p = -1.0, worst_q = -1.0;
  for (int c = 0; c < C; ++c) {
    long long cs = 0, ce = 0;
    for (long long t = 0; t < trials; ++t) {
      cs += sing[static_cast<size_t>(t) * C + c];
      ce += er[static_cast<size_t>(t) * C + c];
    }
    worst_p = std::max(worst_p, static_cast<double>(cs) / trials);
    worst_q = std::max(worst_q, static_cast<double>(ce) / trials);
  }
  est.p_hat = worst_p;
  est.p_stderr = binomial_stderr(worst_p, trials);
  est.p_trials = trials;
  if (k >= 1) {
    est.q_defined = true;
    est.q_hat = 4.0 * worst_q;
    est.q_stderr = 4.0 * binomial_stderr(worst_q, trials);
    est.q_trials = trials;
  }
  return est;
}

ScaleEstimates estimate_s(std::shared_ptr<const Graph> world, const MsaParams& p, int n, int k,
                          double E, const std::vector<ParticleConfig>& pi_centers,
                          const Ensemble& ens, const Interaction& u_int, long long trials,
                          std::uint64_t seed, int threads) {
  p.validate();
  if (k < 1) throw DomainError("estimate_s: require k >= 1");
  if (pi_centers.empty()) throw DomainError("estimate_s: empty center set");
  if (trials < 1) throw ConfigError("estimate_s: require trials >= 1");
  for (const auto& u : pi_centers)
    if (static_cast<int>(u.size()) != n) throw ConfigError("estimate_s: center arity mismatch");
  auto scales = scale_sequence(p.L0, p.alpha, k);
  const int L = static_cast<int>(scales[k]);
  const int Lp = static_cast<int>(scales[k - 1]);
  const int C = static_cast<int>(pi_centers.size());
  // PI candidates per outer center, geometry precomputed once
  std::vector<InnerCandidates> cand(C);
  std::int64_t max_candidates = 0;
  for (int c = 0; c < C; ++c) {
    InnerCandidates all = inner_candidates(world, pi_centers[c], L, Lp, p.r0);
    for (size_t i = 0; i < all.balls.size(); ++i) {
      if (!all.cls[i].partially_interactive) continue;
      cand[c].balls.push_back(all.balls[i]);
      cand[c].cls.push_back(all.cls[i]);
    }
    max_candidates = std::max<std::int64_t>(max_candidates, cand[c].balls.size());
  }
  std::vector<std::uint8_t> hit(static_cast<size_t>(trials) * C, 0);
  parallel_for_index(trials, threads, [&](std::int64_t t) {
    auto sample =
        std::make_shared<PotentialSample>(sample_potential(*world, ens, derive_seed(seed, t)));
    for (int c = 0; c < C; ++c) {
      CandidateOps ops = build_candidate_ops(cand[c], sample, p.g, u_int);
      bool any = false;
      for (size_t i = 0; i < cand[c].balls.size() && !any; ++i)
        any = !candidate_ns(cand[c], ops, i, E, p).ns;
      hit[static_cast<size_t>(t) * C + c] = any ? 1 : 0;
    }
  });
  ScaleEstimates est;
  est.k = k;
  est.L = L;
  est.n = n;
  est.target = std::pow(static_cast<double>(L), -target_exponent(p, n, k));
  double worst = 0.0;
  for (int c = 0; c < C; ++c) {
    long long cs = 0;
    for (long long t = 0; t < trials; ++t) cs += hit[static_cast<size_t>(t) * C + c];
    worst = std::max(worst, static_cast<double>(cs) / trials);
  }
  est.s_defined = true;
  est.s_hat = worst;
  est.s_stderr = binomial_stderr(worst, trials);
  est.s_trials = trials;
  est.s_candidates = max_candidates;
  return est;
}

ScaleEstimates merge_estimates(const ScaleEstimates& pq, const ScaleEstimates& s) {
  if (pq.k != s.k || pq.L != s.L || pq.n != s.n)
    throw InternalCheckError("merge_estimates: mismatched scales");
  ScaleEstimates out = pq;
  out.s_defined = s.s_defined;
  out.s_hat = s.s_hat;
  out.s_stderr = s.s_stderr;
  out.s_trials = s.s_trials;
  out.s_candidates = s.s_candidates;
  return out;
}

RecursionReport verify_recursion(const ScaleEstimates& at_k, const ScaleEstimates& at_k1,
                                 const MsaParams& p) {
  if (!at_k1.q_defined || !at_k1.s_defined)
    throw DomainError("verify_recursion: scale k+1 needs Q and S estimates");
  if (at_k1.k != at_k.k + 1 || at_k.n != at_k1.n)
    throw DomainError("verify_recursion: estimates are not adjacent scales");
  const int n = at_k.n;
  const double l1 = static_cast<double>(at_k1.L);
  const double amp = 0.5 * std::pow(p.c_d, 2 * n) * std::pow(l1, 2.0 * n * p.d);
  RecursionReport rep;
  rep.lhs = at_k1.p_hat;
  rep.rhs = amp * at_k.p_hat * at_k.p_hat + 0.25 * at_k1.q_hat + at_k1.s_hat;
  const double sp1 = smoothed_sigma(at_k1.p_hat, at_k1.p_trials);
  const double spk = smoothed_sigma(at_k.p_hat, at_k.p_trials);
  const double sqf = smoothed_sigma(at_k1.q_hat / 4.0, at_k1.q_trials);  // frequency sigma
  const double ss = smoothed_sigma(at_k1.s_hat, at_k1.s_trials);
  const double pk_sm = (at_k.p_hat * at_k.p_trials + 0.5) / (at_k.p_trials + 1.0);
  double var = sp1 * sp1 + std::pow(amp * 2.0 * pk_sm * spk, 2) + sqf * sqf + ss * ss;
  rep.sigma = std::sqrt(var);
  rep.margin = rep.rhs + 3.0 * rep.sigma - rep.lhs;
  rep.ok = rep.margin >= 0.0;
  rep.p_decreasing = at_k1.p_hat <= at_k.p_hat + 3.0 * std::sqrt(spk * spk + sp1 * sp1);
  rep.s_bound_applicable = p.kappa > 6.0 * n * p.d && p.theta < 1.0 / 6.0 &&
                           static_cast<double>(p.L0) >= 4.0 * std::pow(p.c_d, n);
  if (rep.s_bound_applicable) {
    rep.s_bound_rhs = 0.25 * std::pow(p.c_d, -2.0 * n) *
                      std::pow(l1, -p.kappa * std::pow(1.0 + p.theta, at_k1.k));
    rep.s_bound_ok = at_k1.s_hat <= rep.s_bound_rhs + 3.0 * ss;
  }
  return rep;
}

WegnerCurve wegner_curve(std::shared_ptr<const Graph> world, const MsaParams& p, int n,
                         const ParticleConfig& u, int L, const Ensemble& ens, double E,
                         const std::vector<double>& s_grid, long long trials, std::uint64_t seed,
                         int threads) {
  p.validate();
  if (static_cast<int>(u.size()) != n) throw ConfigError("wegner: center arity mismatch");
  if (s_grid.empty()) throw ConfigError("wegner: empty s grid");
  if (trials < 1) throw ConfigError("wegner: require trials >= 1");
  MpBall ball(world, u, L);
  std::vector<double> dist(trials, 0.0);
  parallel_for_index(trials, threads, [&](std::int64_t t) {
    auto sample =
        std::make_shared<PotentialSample>(sample_potential(*world, ens, derive_seed(seed, t)));
    BallOperator op(ball, sample, p.g, Interaction::none());
    dist[t] = op.spectral_distance(E);
  });
  WegnerCurve curve;
  curve.trials = trials;
  curve.energy = E;
  curve.ball_size = ball.size();
  double num = 0.0, den = 0.0;
  curve.ratio_min = std::numeric_limits<double>::infinity();
  curve.ratio_max = 0.0;
  for (double s : s_grid) {
    long long hits = 0;
    for (long long t = 0; t < trials; ++t)
      if (dist[t] < s) ++hits;
    WegnerRow row;
    row.s = s;
    row.prob = static_cast<double>(hits) / trials;
    row.stderr_ = binomial_stderr(row.prob, trials);
    row.ratio = row.prob / s;
    curve.rows.push_back(row);
    num += s * row.prob;
    den += s * s;
    if (row.prob > 0.0) {
      curve.ratio_min = std::min(curve.ratio_min, row.ratio);
      curve.ratio_max = std::max(curve.ratio_max, row.ratio);
    }
  }
  curve.slope = den > 0.0 ? num / den : 0.0;
  if (!std::isfinite(curve.ratio_min)) curve.ratio_min = 0.0;
  return curve;
}

TwoVolumeCurve two_volume_distance_curve(std::shared_ptr<const Graph> world, const MsaParams& p,
                                         const ParticleConfig& x, const ParticleConfig& y, int L,
                                         const Ensemble& ens, const Interaction& u_int,
                                         const std::vector<double>& s_grid, long long trials,
                                         std::uint64_t seed, int threads) {
  p.validate();
  if (s_grid.empty()) throw ConfigError("two-volume: empty s grid");
  if (trials < 1) throw ConfigError("two-volume: require trials >= 1");
  TwoVolumeCurve curve;
  curve.separable =
      is_separable_from(*world, x, y, L).has_value() || is_separable_from(*world, y, x, L).has_value();
  curve.weakly_separable = is_weakly_separable(*world, x, y, L).has_value();
  if (!curve.separable && !curve.weakly_separable)
    throw DomainError("two-volume: pair is neither separable nor weakly separable");
  MpBall bx(world, x, L), by(world, y, L);
  std::vector<double> gap(trials, 0.0);
  parallel_for_index(trials, threads, [&](std::int64_t t) {
    auto sample =
        std::make_shared<PotentialSample>(sample_potential(*world, ens, derive_seed(seed, t)));
    BallOperator ox(bx, sample, p.g, u_int);
    BallOperator oy(by, sample, p.g, u_int);
    const Eigen::VectorXd& a = ox.spectrum();
    const Eigen::VectorXd& b = oy.spectrum();
    double best = std::numeric_limits<double>::infinity();
    std::int64_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      best = std::min(best, std::abs(a[i] - b[j]));
      if (a[i] < b[j])
        ++i;
      else
        ++j;
    }
    gap[t] = best;
  });
  curve.trials = trials;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int npts = 0;
  for (double s : s_grid) {
    long long hits = 0;
    for (long long t = 0; t < trials; ++t)
      if (gap[t] <= s) ++hits;
    TwoVolumeRow row;
    row.s = s;
    row.prob = static_cast<double>(hits) / trials;
    row.stderr_ = binomial_stderr(row.prob, trials);
    curve.rows.push_back(row);
    if (row.prob > 0.0 && row.prob < 1.0) {
      double lx = std::log(s), ly = std::log(row.prob);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++npts;
    }
  }
  curve.fit_points = npts;
  if (npts >= 2) {
    double det = npts * sxx - sx * sx;
    if (det > 0.0) {
      curve.fitted_exponent = (npts * sxy - sx * sy) / det;
      double intercept = (sy - curve.fitted_exponent * sx) / npts;
      double ss = 0.0;
      for (const auto& row : curve.rows) {
        if (!(row.prob > 0.0 && row.prob < 1.0)) continue;
        double pred = intercept + curve.fitted_exponent * std::log(row.s);
        ss += (std::log(row.prob) - pred) * (std::log(row.prob) - pred);
      }
      curve.fit_residual = std::sqrt(ss / npts);
    }
  }
  return curve;
}

}  // namespace mpmsa
