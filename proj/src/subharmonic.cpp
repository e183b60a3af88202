#include "mpmsa/subharmonic.hpp"

#include <algorithm>
#include <cmath>

namespace mpmsa {

namespace {

constexpr double kSlack = 1e-12;  // absolute+relative tolerance on the inequality

bool passes(double lhs, double rhs) { return lhs <= rhs + kSlack * (1.0 + rhs); }

}  // namespace

SubharmonicCertificate check_lq_subharmonic(const std::function<double(int)>& f, const Graph& g,
                                            int center, int L, int ell, double q) {
  if (ell < 0 || L < ell) throw DomainError("subharmonic: require 0 <= ell <= L");
  if (center < 0 || center >= g.size()) throw DomainError("subharmonic: center outside graph");
  SubharmonicCertificate cert;
  cert.center = center;
  cert.L = L;
  cert.ell = ell;
  cert.q = q;
  cert.verified = true;
  std::vector<int> domain = g.ball(center, L);  // sorted
  for (int x : domain) {
    std::vector<int> inner = g.ball(x, ell);
    if (!std::includes(domain.begin(), domain.end(), inner.begin(), inner.end())) continue;
    ++cert.checked;
    double mx = 0.0;
    for (int y : g.ball(x, ell + 1)) mx = std::max(mx, std::abs(f(y)));
    double lhs = std::abs(f(x));
    double rhs = q * mx;
    if (!passes(lhs, rhs)) {
      cert.verified = false;
      cert.witness = x;
      cert.witness_lhs = lhs;
      cert.witness_rhs = rhs;
      return cert;
    }
  }
  return cert;
}

SubharmonicCertificate check_lq_subharmonic_mp(const std::function<double(std::int64_t)>& f,
                                               const MpBall& domain, int L, int ell, double q) {
  if (ell < 0 || L < ell) throw DomainError("subharmonic: require 0 <= ell <= L");
  if (domain.radius() < L + 1)
    throw DomainError("subharmonic: domain radius must be at least L+1");
  const Graph& g = domain.world();
  const int np = domain.particles();
  const ParticleConfig u = domain.center();
  SubharmonicCertificate cert;
  cert.center = domain.center_index();
  cert.L = L;
  cert.ell = ell;
  cert.q = q;
  cert.verified = true;

  // factor vertex sets of B_L(u); polydisk containment is factorwise
  std::vector<std::vector<int>> factor_L(np);
  for (int j = 0; j < np; ++j) factor_L[j] = g.ball(u[j], L);

  std::vector<std::vector<int>> nb(np);  // factor balls of radius ell+1 around x
  std::vector<size_t> idx(np);
  ParticleConfig y(np);
  for (std::int64_t i = 0; i < domain.size(); ++i) {
    if (domain.rho_between(cert.center, i) > L) continue;
    ParticleConfig x = domain.config_at(i);
    bool contained = true;
    for (int j = 0; j < np && contained; ++j) {
      std::vector<int> inner = g.ball(x[j], ell);
      contained = std::includes(factor_L[j].begin(), factor_L[j].end(), inner.begin(), inner.end());
    }
    if (!contained) continue;
    ++cert.checked;
    for (int j = 0; j < np; ++j) {
      nb[j] = g.ball(x[j], ell + 1);
      idx[j] = 0;
    }
    // odometer over the product of the factor balls
    double mx = 0.0;
    for (;;) {
      for (int j = 0; j < np; ++j) y[j] = nb[j][idx[j]];
      std::int64_t yi = domain.index_of(y);
      if (yi < 0) throw InternalCheckError("subharmonic: neighbourhood left the domain");
      mx = std::max(mx, std::abs(f(yi)));
      int j = 0;
      while (j < np && ++idx[j] == nb[j].size()) idx[j++] = 0;
      if (j == np) break;
    }
    double lhs = std::abs(f(i));
    double rhs = q * mx;
    if (!passes(lhs, rhs)) {
      cert.verified = false;
      cert.witness = i;
      cert.witness_lhs = lhs;
      cert.witness_rhs = rhs;
      return cert;
    }
  }
  return cert;
}

double radial_bound(const SubharmonicCertificate& cert, double M) {
  if (!cert.verified) throw DomainError("radial_bound: certificate not verified");
  int e = (cert.L + 1) / (cert.ell + 1);
  return std::pow(cert.q, e) * M;
}

double two_point_bound(int center_distance, int r1, int r2, int ell, double q, double M) {
  if (ell < 0 || r1 < 0 || r2 < 0) throw DomainError("two_point_bound: negative radius");
  if (center_distance < r1 + r2 + 2)
    throw DomainError("two_point_bound: require center distance >= r1 + r2 + 2");
  int e = (r1 + 1) / (ell + 1) + (r2 + 1) / (ell + 1);
  return std::pow(q, e) * M;
}

GreenShCertificate green_subharmonicity_certificate(const BallOperator& domain, std::int64_t y,
                                                    int L, int ell, double E, double m,
                                                    const MsaParams& params) {
  const MpBall& B = domain.ball();
  if (ell < 0 || L < ell) throw DomainError("green certificate: require 0 <= ell <= L");
  if (B.radius() < L + 1)
    throw DomainError("green certificate: ambient ball radius must be at least L+1");
  if (y < 0 || y >= B.size()) throw DomainError("green certificate: y outside the domain");
  const std::int64_t ci = B.center_index();
  if (B.rho_between(ci, y) <= L)
    throw DomainError("green certificate: y must lie outside B_L(u)");
  double dist = domain.spectral_distance(E);
  if (is_e_resonant(dist, B.radius(), params.beta) || dist < kResonanceTol * (1.0 + std::abs(E)))
    throw ResonanceError("green certificate: ambient operator is resonant at E", dist);

  MsaParams p = params;
  p.m = m;
  GreenShCertificate out;

  // hypothesis: every ell-ball contained in B_L(u) is (E,m)-NS
  const Graph& g = B.world();
  const int np = B.particles();
  const ParticleConfig u = B.center();
  std::vector<std::vector<int>> factor_L(np);
  for (int j = 0; j < np; ++j) factor_L[j] = g.ball(u[j], L);
  out.hypothesis_holds = true;
  for (std::int64_t i = 0; i < B.size(); ++i) {
    if (B.rho_between(ci, i) > L) continue;
    ParticleConfig x = B.config_at(i);
    bool contained = true;
    for (int j = 0; j < np && contained; ++j) {
      std::vector<int> inner = g.ball(x[j], ell);
      contained = std::includes(factor_L[j].begin(), factor_L[j].end(), inner.begin(), inner.end());
    }
    if (!contained) continue;
    ++out.hypothesis_balls;
    BallOperator inner_op(MpBall(B.world_ptr(), x, ell), domain.sample_ptr(), domain.g(),
                          domain.interaction());
    NsReport r = is_em_nonsingular(inner_op, E, p);
    if (r.vacuous && r.ns) out.vacuous_ns = true;
    if (!r.ns) {
      out.hypothesis_holds = false;
      out.singular_center = i;
      return out;
    }
  }

  out.q = std::exp(-gamma_factor(m, ell, p.tau) * ell);
  Eigen::MatrixXd G = green_matrix(domain, E);
  auto f = [&G, y](std::int64_t i) { return std::abs(G(i, y)); };
  out.cert = check_lq_subharmonic_mp(f, B, L, ell, out.q);
  out.f_center = f(ci);
  for (std::int64_t i = 0; i < B.size(); ++i) {
    double v = f(i);
    out.m_global = std::max(out.m_global, v);
    if (B.rho_between(ci, i) <= L + 1) out.m_local = std::max(out.m_local, v);
  }
  if (out.cert.verified) {
    out.bound_global = radial_bound(out.cert, out.m_global);
    out.bound_local = radial_bound(out.cert, out.m_local);
    out.bound_ok = out.f_center <= out.bound_local * (1.0 + 1e-9) + 1e-300 &&
                   out.f_center <= out.bound_global * (1.0 + 1e-9) + 1e-300;
  }
  return out;
}

}  // namespace mpmsa
