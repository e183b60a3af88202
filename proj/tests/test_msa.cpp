#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "mpmsa/msa.hpp"

using namespace mpmsa;

namespace {

std::shared_ptr<const Graph> segment(int half) {
  return std::make_shared<Graph>(Graph::lattice_segment(1, half));
}

std::shared_ptr<const PotentialSample> fixed_potential(std::vector<double> v) {
  auto ps = std::make_shared<PotentialSample>();
  ps->values = std::move(v);
  return ps;
}

template <typename Fn>
std::string config_error_of(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

// independent re-derivation of the non-singularity decision: resonance test
// plus a full pair scan with per-entry Green solves (no early exit)
struct NsOracle {
  bool ns = false;
  bool resonant = false;
  double worst = -std::numeric_limits<double>::infinity();
  long long pairs = 0;
};

NsOracle ns_oracle(const BallOperator& op, double E, const MsaParams& p) {
  const MpBall& B = op.ball();
  NsOracle o;
  o.resonant = is_e_resonant(op.spectral_distance(E), B.radius(), p.beta);
  if (o.resonant) return o;
  const double thr = pair_threshold(B.radius(), p.varrho, p.alpha);
  const double gamma = gamma_factor(p.m, B.radius(), p.tau);
  const double logb =
      std::log(static_cast<double>(std::max<std::int64_t>(B.boundary_edge_count(), 1)));
  o.ns = true;
  for (std::int64_t a = 0; a < B.size(); ++a) {
    for (std::int64_t b = a + 1; b < B.size(); ++b) {
      int rho = B.rho_between(a, b);
      if (rho < thr) continue;
      ++o.pairs;
      double margin =
          std::log(std::abs(green(op, a, b, E, GreenMethod::Solve))) + logb + gamma * rho;
      o.worst = std::max(o.worst, margin);
      if (margin > 0.0) o.ns = false;
    }
  }
  return o;
}

}  // namespace

TEST_SUITE("msa") {
  TEST_CASE("scale sequence grows as floor of the power") {
    CHECK(scale_sequence(4, 1.5, 3) == std::vector<long long>{4, 8, 22, 103});
    CHECK(scale_sequence(6, 1.5, 2) == std::vector<long long>{6, 14, 52});
    CHECK(scale_sequence(8, 1.5, 2) == std::vector<long long>{8, 22, 103});
    CHECK(scale_sequence(12, 1.5, 1) == std::vector<long long>{12, 41});
    CHECK(scale_sequence(5, 1.5, 0) == std::vector<long long>{5});
    // 2^1.5 rounds down to 2: the sequence stalls and must be rejected
    CHECK_THROWS_AS(scale_sequence(2, 1.5, 1), ConfigError);
    CHECK_THROWS_AS(scale_sequence(1, 1.5, 1), ConfigError);
    CHECK_THROWS_AS(scale_sequence(4, 2.5, 1), ConfigError);
    CHECK_THROWS_AS(scale_sequence(4, 1.5, -1), ConfigError);
    CHECK_THROWS_AS(scale_sequence(100000, 1.5, 3), CapacityError);
  }

  TEST_CASE("decay exponents and the pair threshold") {
    // 256^{-1/8} = 1/2 exactly
    CHECK(gamma_factor(1.0, 256, 0.125) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(gamma_factor(0.25, 256, 0.125) == doctest::Approx(0.375).epsilon(1e-12));
    CHECK_THROWS_AS(gamma_factor(1.0, 0, 0.125), DomainError);
    // graded variant: exponent n_hat - n + 1 on the correction factor
    CHECK(gamma_graded(1.0, 256, 0.125, 2, 2) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(gamma_graded(1.0, 256, 0.125, 1, 2) == doctest::Approx(2.25).epsilon(1e-12));
    CHECK(gamma_graded(2.0, 256, 0.125, 1, 3) == doctest::Approx(2.0 * std::pow(1.5, 3)));
    CHECK_THROWS_AS(gamma_graded(1.0, 256, 0.125, 0, 2), DomainError);
    CHECK_THROWS_AS(gamma_graded(1.0, 256, 0.125, 3, 2), DomainError);
    // 512^{(1+1/6)/1.5} = 2^{9*7/9} = 128 exactly
    CHECK(pair_threshold(512, 1.0 / 6.0, 1.5) == doctest::Approx(128.0).epsilon(1e-12));
    CHECK(pair_threshold(8, 1.0 / 6.0, 1.5) == doctest::Approx(std::pow(2.0, 7.0 / 3.0)));
  }

  TEST_CASE("induction targets") {
    MsaParams p;  // kappa 13, theta 0.02, n_hat 2
    CHECK(target_exponent(p, 2, 0) == doctest::Approx(13.0));
    CHECK(target_exponent(p, 1, 0) == doctest::Approx(39.0));
    CHECK(target_exponent(p, 2, 3) == doctest::Approx(13.0 * 1.02 * 1.02 * 1.02));
    CHECK_THROWS_AS(target_exponent(p, 0, 1), DomainError);
    CHECK_THROWS_AS(target_exponent(p, 3, 1), DomainError);
    CHECK_THROWS_AS(target_exponent(p, 1, -1), DomainError);
  }

  TEST_CASE("parameter pack validation names the violated constraint") {
    MsaParams p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.kappa_floor() == doctest::Approx(12.0));  // 2*1.5*2*1/(0.5)
    CHECK(p.theta_ceiling() == doctest::Approx(1.0 / 3.0 - 4.0 / 13.0));
    p.kappa = 5.0;
    std::string msg = config_error_of([&] { p.validate(); });
    CHECK(msg.find("kappa > 2*alpha*N*d/(2-alpha)") != std::string::npos);
    p = MsaParams{};
    p.theta = 0.03;  // above the ceiling 1/39
    msg = config_error_of([&] { p.validate(); });
    CHECK(msg.find("theta") != std::string::npos);
    p = MsaParams{};
    p.alpha = 2.0;
    msg = config_error_of([&] { p.validate(); });
    CHECK(msg.find("alpha in (1,2)") != std::string::npos);
    p = MsaParams{};
    p.m = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = MsaParams{};
    p.L0 = 1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = MsaParams{};
    p.g = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }

  TEST_CASE("resonance test is strict") {
    double w = std::exp(-std::sqrt(8.0));
    CHECK_FALSE(is_e_resonant(w, 8, 0.5));  // equality is not resonant
    CHECK(is_e_resonant(w * (1.0 - 1e-12), 8, 0.5));
    CHECK_FALSE(is_e_resonant(w * (1.0 + 1e-12), 8, 0.5));
    // operator overload on a free segment ball
    auto world = segment(8);
    MsaParams p;
    p.g = 0.0;
    auto sample = std::make_shared<PotentialSample>(
        sample_potential(*world, Ensemble::uniform(0.0, 1.0), 1));
    BallOperator op(MpBall(world, {world->vertex_at({0}).value()}, 4), sample, p.g,
                    Interaction::none());
    CHECK_FALSE(is_e_resonant(op, -1.0, p.beta));
    CHECK(is_e_resonant(op, op.spectrum()[0], p.beta));
  }

  TEST_CASE("non-singularity decision matches a full-scan oracle") {
    auto world = segment(10);
    MsaParams p;
    p.g = 5.0;
    p.m = 1.0;
    ParticleConfig u = {world->vertex_at({0}).value()};
    MpBall ball(world, u, 4);
    int ns_seen = 0, s_seen = 0;
    for (int t = 0; t < 30; ++t) {
      auto sample = std::make_shared<PotentialSample>(
          sample_potential(*world, Ensemble::uniform(0.0, 1.0), derive_seed(77, t)));
      BallOperator op(ball, sample, p.g, Interaction::none());
      for (double E : {1.0, 6.0, 12.0}) {
        NsReport r = is_em_nonsingular(op, E, p);
        NsOracle o = ns_oracle(op, E, p);
        CHECK(r.resonant == o.resonant);
        CHECK(r.ns == o.ns);
        CHECK_FALSE(r.vacuous);
        if (r.ns && !r.resonant) {
          CHECK(r.qualifying_pairs == o.pairs);
          CHECK(std::abs(r.worst_margin - o.worst) < 1e-6);
          ++ns_seen;
        }
        if (!r.ns && !r.resonant) ++s_seen;
      }
    }
    // the sweep must exercise both outcomes to be meaningful
    CHECK(ns_seen > 0);
    CHECK(s_seen > 0);
  }

  TEST_CASE("resonant balls are singular without a Green scan") {
    auto world = segment(8);
    MsaParams p;
    p.g = 1.0;
    auto sample = std::make_shared<PotentialSample>(
        sample_potential(*world, Ensemble::uniform(0.0, 1.0), 3));
    BallOperator op(MpBall(world, {world->vertex_at({0}).value()}, 4), sample, p.g,
                    Interaction::none());
    NsReport r = is_em_nonsingular(op, op.spectrum()[2], p);
    CHECK(r.resonant);
    CHECK_FALSE(r.ns);
    CHECK(r.qualifying_pairs == 0);
    CHECK(r.worst_margin == std::numeric_limits<double>::infinity());
  }

  TEST_CASE("balls with no qualifying pair are flagged vacuous") {
    auto world = segment(2);  // diameter 4 < 8^{7/9}
    MsaParams p;
    p.g = 0.0;
    auto sample = std::make_shared<PotentialSample>(
        sample_potential(*world, Ensemble::uniform(0.0, 1.0), 5));
    BallOperator op(MpBall(world, {world->vertex_at({0}).value()}, 8), sample, p.g,
                    Interaction::none());
    NsReport far = is_em_nonsingular(op, -10.0, p);
    CHECK(far.vacuous);
    CHECK(far.ns);
    CHECK_FALSE(far.resonant);
    CHECK(far.qualifying_pairs == 0);
    NsReport at = is_em_nonsingular(op, op.spectrum()[0], p);
    CHECK(at.vacuous);
    CHECK(at.resonant);
    CHECK_FALSE(at.ns);
  }

  TEST_CASE("partially interactive fast path matches the direct scan") {
    auto world = segment(8);
    MsaParams p;
    p.g = 150.0;
    p.m = 0.25;
    // interaction-free two-particle ball: any split is exact
    ParticleConfig u = {world->vertex_at({-3}).value(), world->vertex_at({3}).value()};
    MpBall ball(world, u, 2);
    SplitWitness split;
    split.j1 = {0};
    split.j2 = {1};
    int both_ns = 0, singular = 0;
    for (int t = 0; t < 12; ++t) {
      auto sample = std::make_shared<PotentialSample>(
          sample_potential(*world, Ensemble::uniform(0.0, 1.0), derive_seed(91, t)));
      BallOperator op(ball, sample, p.g, Interaction::none());
      // in-band energies for the non-singular side, an exact eigenvalue for
      // the singular side
      for (double E : {12.0, 40.0, 80.0, op.spectrum()[op.dim() / 2]}) {
        NsReport a = is_em_nonsingular(op, E, p);
        NsReport b = is_em_nonsingular_pi(op, split, E, p);
        CHECK(a.ns == b.ns);
        CHECK(a.resonant == b.resonant);
        CHECK(a.vacuous == b.vacuous);
        CHECK(a.spectral_dist == doctest::Approx(b.spectral_dist).epsilon(1e-9));
        if (a.ns && !a.resonant) {
          CHECK(a.qualifying_pairs == b.qualifying_pairs);
          CHECK(std::abs(a.worst_margin - b.worst_margin) < 5e-6);
          ++both_ns;
        }
        if (!a.ns) ++singular;
      }
    }
    CHECK(both_ns > 0);
    CHECK(singular > 0);
  }

  TEST_CASE("tunneling scan finds a constructed resonant pair") {
    auto world = segment(10);
    MsaParams p;
    p.g = 1.0;
    auto v = [&](int c) { return world->vertex_at({c}).value(); };
    // two mirror-symmetric wells in a high barrier
    std::vector<double> pot(static_cast<size_t>(world->size()), 20.0);
    pot[v(-6)] = 0.0;
    pot[v(6)] = 0.0;
    auto sample = fixed_potential(pot);
    BallOperator well(MpBall(world, {v(6)}, 2), sample, p.g, Interaction::none());
    double E = well.spectrum()[0];  // exactly resonant at both wells
    ParticleConfig u = {v(0)};
    TunnelingReport rep = is_e_tunneling(world, u, 9, 2, sample, E, p, Interaction::none());
    CHECK(rep.tunneling);
    CHECK(rep.candidates == 15);  // centers -7..7 keep the inner ball inside
    CHECK(rep.singular_count >= 2);
    // the witnesses must be genuinely disjoint and genuinely singular
    MpBall wa(world, rep.witness_a, 2), wb(world, rep.witness_b, 2);
    CHECK(wa.disjoint_with(wb));
    BallOperator oa(wa, sample, p.g, Interaction::none());
    BallOperator ob(wb, sample, p.g, Interaction::none());
    CHECK_FALSE(is_em_nonsingular(oa, E, p).ns);
    CHECK_FALSE(is_em_nonsingular(ob, E, p).ns);
    // far energy: nothing resonant, high barrier keeps every ball non-singular
    TunnelingReport calm = is_e_tunneling(world, u, 9, 2, sample, -5.0, p, Interaction::none());
    CHECK_FALSE(calm.tunneling);
    CHECK(calm.singular_count == 0);
    CHECK(calm.candidates == 15);
    CHECK(calm.witness_a.empty());
    CHECK_THROWS_AS(is_e_tunneling(world, u, 2, 2, sample, E, p, Interaction::none()),
                    DomainError);
    CHECK_THROWS_AS(is_e_tunneling(world, u, 3, 0, sample, E, p, Interaction::none()),
                    DomainError);
  }

  TEST_CASE("a single well cannot tunnel: singular balls all overlap") {
    auto world = segment(10);
    MsaParams p;
    p.g = 1.0;
    auto v = [&](int c) { return world->vertex_at({c}).value(); };
    std::vector<double> pot(static_cast<size_t>(world->size()), 20.0);
    pot[v(0)] = 0.0;
    auto sample = fixed_potential(pot);
    BallOperator well(MpBall(world, {v(0)}, 2), sample, p.g, Interaction::none());
    double E = well.spectrum()[0];
    TunnelingReport rep = is_e_tunneling(world, {v(0)}, 9, 2, sample, E, p, Interaction::none());
    CHECK_FALSE(rep.tunneling);
    CHECK(rep.singular_count >= 1);
    // brute-force recount over all candidate centers
    long long sing = 0, cand = 0;
    std::vector<int> outer = world->ball(v(0), 9);
    for (int c = -10; c <= 10; ++c) {
      std::vector<int> inner = world->ball(v(c), 2);
      if (!std::includes(outer.begin(), outer.end(), inner.begin(), inner.end())) continue;
      ++cand;
      BallOperator op(MpBall(world, {v(c)}, 2), sample, p.g, Interaction::none());
      if (!is_em_nonsingular(op, E, p).ns) ++sing;
    }
    CHECK(rep.candidates == cand);
    CHECK(rep.singular_count == sing);
  }

  TEST_CASE("spread centers realize the requested support diameter") {
    auto world = segment(20);
    ParticleConfig u = spread_center(*world, 2, 7);
    CHECK(support_diameter(*world, u) == 7);
    ParticleConfig u3 = spread_center(*world, 3, 7);
    CHECK(support_diameter(*world, u3) == 7);
    CHECK(u3.size() == 3);
    // single particle: only the zero-spread midpoint singleton is realizable
    ParticleConfig u1 = spread_center(*world, 1, 0);
    CHECK(u1 == ParticleConfig{world->vertex_at({0}).value()});
    CHECK(support_diameter(*world, u1) == 0);
    CHECK_THROWS_AS(spread_center(*world, 1, 7), DomainError);
    CHECK_THROWS_AS(spread_center(*world, 0, 0), DomainError);
    CHECK_THROWS_AS(spread_center(*world, 2, 100), DomainError);
    Graph path = Graph::from_adjacency({{1}, {0, 2}, {1}});
    CHECK_THROWS_AS(spread_center(path, 2, 1), DomainError);
  }

  TEST_CASE("representative centers cover interior, edge, and spread") {
    auto world = segment(20);
    auto one = representative_centers(*world, 1, 5, false);
    CHECK(one.size() == 2);
    CHECK(one[0] == ParticleConfig{world->vertex_at({0}).value()});
    CHECK(one[1] == ParticleConfig{world->vertex_at({15}).value()});
    // too narrow for the spread position: it is omitted, not fatal
    auto narrow = representative_centers(*world, 2, 2, true);
    CHECK(narrow.size() == 2);
    auto wide = representative_centers(*segment(30), 2, 2, true);
    REQUIRE(wide.size() == 3);
    CHECK(support_diameter(*segment(30), wide[2]) == 45);  // 11*2*2 + 1
    CHECK(classify_interactive(*segment(30), wide[2], 2, 0).partially_interactive);
    CHECK_THROWS_AS(representative_centers(*world, 0, 5, false), DomainError);
  }

  TEST_CASE("delocalized control: zero disorder pins the estimate at one") {
    auto world = segment(12);
    MsaParams p;
    p.g = 0.0;
    p.L0 = 4;
    p.n_hat = 2;
    // free 9-site chain has the exact eigenvalue 2, so every trial is resonant
    auto est = estimate_p_q(world, p, 1, 0, 2.0, representative_centers(*world, 1, 4, false),
                            Ensemble::uniform(0.0, 1.0), Interaction::none(), 25, 11, 1);
    CHECK(est.p_hat == 1.0);
    CHECK(est.p_stderr == 0.0);
    CHECK(est.k == 0);
    CHECK(est.L == 4);
    CHECK_FALSE(est.q_defined);
    CHECK(est.target == doctest::Approx(std::pow(4.0, -39.0)));
  }

  TEST_CASE("strong disorder estimates are small and thread invariant") {
    auto world = segment(30);
    MsaParams p;
    p.g = 150.0;
    p.m = 0.25;
    p.L0 = 8;
    auto centers = representative_centers(*world, 1, 8, false);
    auto a = estimate_p_q(world, p, 1, 0, 12.0, centers, Ensemble::uniform(0.0, 1.0),
                          Interaction::none(), 60, 21, 1);
    auto b = estimate_p_q(world, p, 1, 0, 12.0, centers, Ensemble::uniform(0.0, 1.0),
                          Interaction::none(), 60, 21, 3);
    CHECK(a.p_hat == b.p_hat);
    CHECK(a.p_stderr == b.p_stderr);
    CHECK(a.p_hat <= 0.3);
    CHECK(a.p_trials == 60);
    CHECK_THROWS_AS(estimate_p_q(world, p, 1, 0, 12.0, {}, Ensemble::uniform(0.0, 1.0),
                                 Interaction::none(), 10, 1, 1),
                    DomainError);
    CHECK_THROWS_AS(estimate_p_q(world, p, 1, 0, 12.0, centers, Ensemble::uniform(0.0, 1.0),
                                 Interaction::none(), 0, 1, 1),
                    ConfigError);
    CHECK_THROWS_AS(estimate_p_q(world, p, 2, 0, 12.0, centers, Ensemble::uniform(0.0, 1.0),
                                 Interaction::none(), 10, 1, 1),
                    ConfigError);
  }

  TEST_CASE("recursion inequality arithmetic is pinned") {
    MsaParams p;
    p.c_d = 2.0;
    p.d = 1;
    ScaleEstimates at_k, at_k1;
    at_k.k = 0;
    at_k.L = 8;
    at_k.n = 1;
    at_k.p_hat = 0.1;
    at_k.p_trials = 400;
    at_k1 = at_k;
    at_k1.k = 1;
    at_k1.L = 22;
    at_k1.p_hat = 0.05;
    at_k1.q_defined = true;
    at_k1.q_hat = 0.2;
    at_k1.q_trials = 400;
    at_k1.s_defined = true;
    at_k1.s_hat = 0.01;
    at_k1.s_trials = 40000;  // small sigma: the corollary bound must fail honestly
    RecursionReport rep = verify_recursion(at_k, at_k1, p);
    // amplification 0.5 * 2^2 * 22^2 = 968; rhs = 968*0.01 + 0.05 + 0.01
    CHECK(rep.rhs == doctest::Approx(9.74).epsilon(1e-12));
    CHECK(rep.lhs == doctest::Approx(0.05));
    CHECK(rep.ok);
    CHECK(rep.p_decreasing);
    CHECK(rep.sigma > 0.0);
    CHECK(rep.margin == doctest::Approx(rep.rhs + 3 * rep.sigma - rep.lhs));
    // L0=8 >= 4*c_d^n with c_d=2, so the corollary bound applies
    CHECK(rep.s_bound_applicable);
    CHECK(rep.s_bound_rhs ==
          doctest::Approx(0.25 * std::pow(2.0, -2.0) * std::pow(22.0, -13.0 * 1.02)));
    CHECK_FALSE(rep.s_bound_ok);  // 0.01 is astronomically above it
    at_k1.s_hat = 0.0;
    CHECK(verify_recursion(at_k, at_k1, p).s_bound_ok);
    // missing Q/S or non-adjacent scales are rejected
    ScaleEstimates bare = at_k1;
    bare.q_defined = false;
    CHECK_THROWS_AS(verify_recursion(at_k, bare, p), DomainError);
    ScaleEstimates far = at_k1;
    far.k = 2;
    CHECK_THROWS_AS(verify_recursion(at_k, far, p), DomainError);
  }

  TEST_CASE("strong-disorder induction step verifies end to end") {
    auto world = segment(30);
    MsaParams p;
    p.g = 150.0;
    p.m = 0.25;
    p.L0 = 4;
    double E = 12.0;
    auto ens = Ensemble::uniform(0.0, 1.0);
    auto c0 = representative_centers(*world, 1, 4, false);
    auto c1 = representative_centers(*world, 1, 8, false);
    auto e0 = estimate_p_q(world, p, 1, 0, E, c0, ens, Interaction::none(), 80, 31, 1);
    auto e1 = estimate_p_q(world, p, 1, 1, E, c1, ens, Interaction::none(), 80, 32, 1);
    CHECK(e1.q_defined);
    CHECK(e1.q_hat >= 0.0);
    // one-particle worlds admit no partially interactive inner ball
    auto s1 = estimate_s(world, p, 1, 1, E, c1, ens, Interaction::none(), 10, 33, 1);
    CHECK(s1.s_defined);
    CHECK(s1.s_hat == 0.0);
    CHECK(s1.s_candidates == 0);
    RecursionReport rec = verify_recursion(e0, merge_estimates(e1, s1), p);
    CHECK(rec.ok);
    CHECK(rec.p_decreasing);
    CHECK_THROWS_AS(estimate_s(world, p, 1, 0, E, c1, ens, Interaction::none(), 10, 33, 1),
                    DomainError);
  }

  TEST_CASE("partially interactive singularity estimator counts candidates") {
    auto world = segment(55);
    MsaParams p;
    p.g = 150.0;
    p.m = 0.25;
    p.L0 = 4;
    ParticleConfig u = spread_center(*world, 2, 89);  // diameter > 11*2*4 stays PI
    auto s = estimate_s(world, p, 2, 1, 12.0, {u}, Ensemble::uniform(0.0, 1.0),
                        Interaction::none(), 8, 41, 1);
    // 9x9 inner offsets, PI kept while the diameter exceeds 88: 45 of 81
    CHECK(s.s_candidates == 45);
    CHECK(s.s_hat >= 0.0);
    CHECK(s.s_hat <= 1.0);
    CHECK(s.s_trials == 8);
  }

  TEST_CASE("eigenvalue concentration curve: uniform is linear, saturated, monotone") {
    auto world = segment(6);
    MsaParams p;
    p.g = 1.0;
    ParticleConfig u = {world->vertex_at({0}).value()};
    std::vector<double> grid = {0.02, 0.05, 0.1, 0.2};
    auto curve = wegner_curve(world, p, 1, u, 3, Ensemble::uniform(0.0, 1.0), 2.0, grid, 3000,
                              51, 1);
    REQUIRE(curve.rows.size() == 4);
    CHECK(curve.ball_size == 7);
    CHECK(curve.trials == 3000);
    for (size_t i = 0; i + 1 < curve.rows.size(); ++i)
      CHECK(curve.rows[i].prob <= curve.rows[i + 1].prob);
    for (const auto& row : curve.rows) {
      CHECK(row.ratio == doctest::Approx(row.prob / row.s));
      CHECK(row.prob >= 0.0);
      CHECK(row.prob <= 1.0);
    }
    CHECK(curve.slope > 0.0);
    // linearity: prob/s stays within a constant band over a decade of s
    CHECK(curve.ratio_max <= 4.0 * curve.ratio_min);
    // saturation far beyond the spectral spread
    auto sat = wegner_curve(world, p, 1, u, 3, Ensemble::uniform(0.0, 1.0), 2.0, {100.0}, 200,
                            52, 1);
    CHECK(sat.rows[0].prob == 1.0);
    // determinism across thread counts
    auto c3 = wegner_curve(world, p, 1, u, 3, Ensemble::uniform(0.0, 1.0), 2.0, grid, 3000, 51,
                           3);
    for (size_t i = 0; i < grid.size(); ++i) CHECK(curve.rows[i].prob == c3.rows[i].prob);
    CHECK_THROWS_AS(wegner_curve(world, p, 1, u, 3, Ensemble::uniform(0.0, 1.0), 2.0, {}, 10,
                                 1, 1),
                    ConfigError);
    CHECK_THROWS_AS(wegner_curve(world, p, 1, u, 3, Ensemble::uniform(0.0, 1.0), 2.0, grid, 0,
                                 1, 1),
                    ConfigError);
    CHECK_THROWS_AS(wegner_curve(world, p, 2, u, 3, Ensemble::uniform(0.0, 1.0), 2.0, grid, 10,
                                 1, 1),
                    ConfigError);
  }

  TEST_CASE("eigenvalue concentration control: atomic disorder breaks linearity") {
    auto world = segment(6);
    MsaParams p;
    p.g = 1.0;
    ParticleConfig u = {world->vertex_at({0}).value()};
    // the all-zero Bernoulli draw has the exact eigenvalue 2: an atom at s=0
    auto curve = wegner_curve(world, p, 1, u, 3, Ensemble::bernoulli(0.5), 2.0,
                              {1e-6, 0.01, 0.1, 0.3}, 3000, 53, 1);
    CHECK(curve.rows[0].prob > 0.0);
    CHECK(curve.ratio_max > 50.0 * curve.ratio_min);
  }

  TEST_CASE("two-volume spacing curve is symmetric and identifies the pair class") {
    auto world = segment(10);
    MsaParams p;
    p.g = 1.0;
    auto v = [&](int c) { return world->vertex_at({c}).value(); };
    ParticleConfig x = {v(-6), v(-6)}, y = {v(6), v(6)};
    std::vector<double> grid = {0.05, 0.1, 0.2, 0.4};
    auto ens = Ensemble::uniform(0.0, 1.0);
    auto cu = two_volume_distance_curve(world, p, x, y, 2, ens, Interaction::none(), grid, 300,
                                        61, 1);
    CHECK(cu.separable);
    REQUIRE(cu.rows.size() == 4);
    for (size_t i = 0; i + 1 < cu.rows.size(); ++i)
      CHECK(cu.rows[i].prob <= cu.rows[i + 1].prob);
    auto swapped = two_volume_distance_curve(world, p, y, x, 2, ens, Interaction::none(), grid,
                                             300, 61, 1);
    for (size_t i = 0; i < grid.size(); ++i) CHECK(cu.rows[i].prob == swapped.rows[i].prob);
    auto threaded = two_volume_distance_curve(world, p, x, y, 2, ens, Interaction::none(), grid,
                                              300, 61, 3);
    for (size_t i = 0; i < grid.size(); ++i) CHECK(cu.rows[i].prob == threaded.rows[i].prob);
    if (cu.fit_points >= 2) CHECK(cu.fitted_exponent > 0.0);
    // distant singletons are only weakly separable
    auto weak = two_volume_distance_curve(world, p, {v(-8)}, {v(8)}, 1, ens,
                                          Interaction::none(), grid, 100, 62, 1);
    CHECK_FALSE(weak.separable);
    CHECK(weak.weakly_separable);
    // adjacent singletons are neither
    CHECK_THROWS_AS(two_volume_distance_curve(world, p, {v(0)}, {v(1)}, 2, ens,
                                              Interaction::none(), grid, 10, 63, 1),
                    DomainError);
    CHECK_THROWS_AS(two_volume_distance_curve(world, p, x, y, 2, ens, Interaction::none(), {},
                                              10, 63, 1),
                    ConfigError);
  }

  TEST_CASE("deterministic lemma harnesses hold in the calibrated regime") {
    auto world = segment(30);
    MsaParams p;
    p.g = 150.0;
    p.m = 0.25;
    p.L0 = 6;
    p.n_hat = 1;
    ParticleConfig u = {world->vertex_at({0}).value()};
    auto rep = lemma_nr_nt_ns_harness(world, p, u, Ensemble::uniform(0.0, 1.0),
                                      Interaction::none(), {12.0, 25.0}, 20, 71);
    CHECK(rep.samples == 40);
    CHECK(rep.hypothesis_true > 0);
    CHECK(rep.violations == 0);
    CHECK(rep.counterexamples.empty());
    CHECK_THROWS_AS(lemma_nr_nt_ns_harness(world, p, u, Ensemble::uniform(0.0, 1.0),
                                           Interaction::none(), {}, 5, 71),
                    ConfigError);
  }

  TEST_CASE("partially interactive lemma harness holds in the calibrated regime") {
    auto world = segment(100);
    MsaParams p;
    p.g = 150.0;
    p.m = 0.25;
    p.L0 = 4;
    ParticleConfig u = spread_center(*world, 2, 11 * 2 * 8 + 1);
    auto rep = pitrons_harness(world, p, u, 1, Ensemble::uniform(0.0, 1.0), Interaction::none(),
                               12.0, 10, 81);
    CHECK(rep.samples == 10);
    CHECK(rep.hypothesis_true > 0);
    CHECK(rep.violations == 0);
    CHECK(rep.graded_true <= rep.hypothesis_true);
    // graded decay demands more than the plain rate, never the reverse
    CHECK(rep.graded_true >= 0);
    // a non-PI center is rejected outright
    ParticleConfig tight = {world->vertex_at({0}).value(), world->vertex_at({1}).value()};
    CHECK_THROWS_AS(pitrons_harness(world, p, tight, 1, Ensemble::uniform(0.0, 1.0),
                                    Interaction::none(), 12.0, 5, 81),
                    DomainError);
  }
}
