#include <cmath>
#include <numeric>

#include "doctest.h"
#include "mpmsa/random_field.hpp"

using namespace mpmsa;

TEST_SUITE("random_field") {
  TEST_CASE("sampling is deterministic in (ensemble, seed)") {
    Graph g = Graph::lattice_segment(1, 20);
    auto a = sample_potential(g, Ensemble::uniform(0.0, 1.0), 42);
    auto b = sample_potential(g, Ensemble::uniform(0.0, 1.0), 42);
    auto c = sample_potential(g, Ensemble::uniform(0.0, 1.0), 43);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    CHECK(a.size() == g.size());
    CHECK(a.seed == 42);
  }

  TEST_CASE("draws respect the marginal law") {
    Rng rng(1);
    auto u = Ensemble::uniform(-2.0, 3.0);
    auto n = Ensemble::gaussian(1.0, 2.0);
    auto be = Ensemble::bernoulli(0.3);
    const int t = 20000;
    double um = 0, nm = 0, n2 = 0, bm = 0;
    for (int i = 0; i < t; ++i) {
      double x = u.draw(rng);
      CHECK(x >= -2.0);
      CHECK(x < 3.0);
      um += x;
      double y = n.draw(rng);
      nm += y;
      n2 += y * y;
      double z = be.draw(rng);
      CHECK((z == 0.0 || z == 1.0));
      bm += z;
    }
    um /= t;
    nm /= t;
    bm /= t;
    double nv = n2 / t - nm * nm;
    CHECK(um == doctest::Approx(0.5).epsilon(0.1));        // mean of U[-2,3]
    CHECK(nm == doctest::Approx(1.0).epsilon(0.15));
    CHECK(nv == doctest::Approx(4.0).epsilon(0.15));
    CHECK(bm == doctest::Approx(0.3).epsilon(0.15));
  }

  TEST_CASE("sup CDF increment closed forms") {
    auto u = Ensemble::uniform(0.0, 4.0);
    CHECK(u.cdf_sup_increment(1.0) == doctest::Approx(0.25));
    CHECK(u.cdf_sup_increment(8.0) == doctest::Approx(1.0));
    auto n = Ensemble::gaussian(0.0, 2.0);
    // small windows concentrate at the mode: s * phi(0) / sigma
    CHECK(n.cdf_sup_increment(1e-3) ==
          doctest::Approx(1e-3 / (2.0 * std::sqrt(2.0 * M_PI))).epsilon(1e-3));
    auto b = Ensemble::bernoulli(0.3);
    CHECK(b.cdf_sup_increment(0.5) == doctest::Approx(0.7));  // atom at 0 dominates
    CHECK(b.cdf_sup_increment(1.5) == doctest::Approx(1.0));  // window spans both atoms
  }

  TEST_CASE("Holder certificates") {
    auto u = Ensemble::uniform(0.0, 4.0).holder();
    REQUIRE(u.has_value());
    CHECK(u->delta == doctest::Approx(1.0));
    CHECK(u->c_h == doctest::Approx(0.25));
    CHECK(Ensemble::gaussian(0.0, 1.0).holder().has_value());
    CHECK_FALSE(Ensemble::bernoulli(0.5).holder().has_value());
  }

  TEST_CASE("mean/fluctuation decomposition is exact") {
    Graph g = Graph::lattice_segment(1, 10);
    auto v = sample_potential(g, Ensemble::uniform(0.0, 1.0), 5);
    std::vector<int> subset = g.ball(3, 4);
    auto mf = mean_fluctuation_decompose(v, subset);
    double mean = 0;
    for (int s : subset) mean += v[s];
    mean /= subset.size();
    CHECK(mf.xi == doctest::Approx(mean).epsilon(1e-12));
    REQUIRE(mf.eta.size() == subset.size());
    double sum = std::accumulate(mf.eta.begin(), mf.eta.end(), 0.0);
    CHECK(sum == doctest::Approx(0.0).epsilon(1e-10));
    for (size_t i = 0; i < subset.size(); ++i)
      CHECK(mf.xi + mf.eta[i] == doctest::Approx(v[subset[i]]).epsilon(1e-12));
  }

  TEST_CASE("empirical Holder check against the certificate") {
    auto ok = holder_check(Ensemble::uniform(0.0, 1.0), 1e-2, 4000, 7);
    CHECK(ok.has_certificate);
    CHECK(ok.ok);
    double dkw = std::sqrt(std::log(2.0 / 0.0027) / (2.0 * 4000));
    CHECK(ok.sup_increment <= ok.certificate + 2 * dkw + 1e-12);
    auto b = holder_check(Ensemble::bernoulli(0.5), 1e-2, 1000, 7);
    CHECK_FALSE(b.has_certificate);
    CHECK(b.ok);  // vacuous without a certificate
    CHECK(b.sup_increment >= 0.4);  // the atom is visible at any window width
  }

  TEST_CASE("conditional modulus: Gaussian smooth, Bernoulli degenerate") {
    auto gr = estimate_conditional_modulus(Ensemble::gaussian(0.0, 1.0), 25, 1e-2, 200, 3);
    CHECK(gr.degenerate_count == 0);
    // xi | eta ~ N(mu, sigma^2/25): increment <= s * 5 / sqrt(2 pi)
    double cap = 1e-2 * 5.0 / std::sqrt(2.0 * M_PI);
    CHECK(gr.max_modulus <= cap * 1.0001);
    CHECK(gr.mean_modulus > 0.0);
    auto ur = estimate_conditional_modulus(Ensemble::uniform(0.0, 1.0), 25, 1e-2, 200, 3);
    CHECK(ur.degenerate_count == 0);
    CHECK(ur.mean_modulus > 0.0);
    CHECK(ur.max_modulus <= 1.0);
    auto br = estimate_conditional_modulus(Ensemble::bernoulli(0.5), 25, 1e-2, 50, 3);
    CHECK(br.degenerate_count == br.trials);
  }

  TEST_CASE("parallel map writes are schedule independent") {
    const int n = 500;
    std::vector<double> one(n), four(n);
    auto fill = [](std::vector<double>& out) {
      return [&out](std::int64_t i) {
        Rng r(derive_seed(99, static_cast<std::uint64_t>(i)));
        out[i] = r.uniform01();
      };
    };
    parallel_for_index(n, 1, fill(one));
    parallel_for_index(n, 4, fill(four));
    CHECK(one == four);
    parallel_for_index(0, 4, [](std::int64_t) { REQUIRE(false); });  // empty range is a no-op
  }

  TEST_CASE("rng stream derivation decorrelates neighbors") {
    Rng a(derive_seed(7, 0)), b(derive_seed(7, 1));
    int equal = 0;
    for (int i = 0; i < 64; ++i) equal += (a.next_u64() == b.next_u64()) ? 1 : 0;
    CHECK(equal == 0);
    Rng c(3);
    for (int i = 0; i < 1000; ++i) {
      double x = c.uniform01();
      CHECK(x >= 0.0);
      CHECK(x < 1.0);
    }
  }
}
