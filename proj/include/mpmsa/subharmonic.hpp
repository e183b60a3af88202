#pragma once

// (l,q)-subharmonic functions on graphs and polydisks: verification of the
// defining inequality, the radial and two-point decay bounds, and the
// Green-function subharmonicity certificate tying the machinery to the
// nonsingularity predicate.

#include <cstdint>
#include <functional>

#include "mpmsa/msa.hpp"

namespace mpmsa {

// f is (l,q)-subharmonic in B_L(u) iff f(x) <= q max_{B_{l+1}(x)} f for every
// x whose ball B_l(x) is contained (as a vertex set) in B_L(u)
struct SubharmonicCertificate {
  std::int64_t center = -1;  // vertex id (graph) or polydisk index (product)
  int L = 0;
  int ell = 0;
  double q = 0.0;
  bool verified = false;
  std::int64_t checked = 0;       // number of x subject to the inequality
  std::int64_t witness = -1;      // first failing x, -1 when verified
  double witness_lhs = 0.0;       // f(witness)
  double witness_rhs = 0.0;       // q max_{B_{l+1}(witness)} f
};

// exhaustive check over x in B_L(center) with B_ell(x) subset of B_L(center);
// f is ingested through |.| so any vertex function is admissible
SubharmonicCertificate check_lq_subharmonic(const std::function<double(int)>& f, const Graph& g,
                                            int center, int L, int ell, double q);

// product (polydisk) version; f is indexed by the domain polydisk, which must
// have radius >= L+1 so the sup over B_{ell+1}(x) never leaves it.  Ball
// containment is checked factorwise (equivalent to vertex-set containment for
// max-metric polydisks).
SubharmonicCertificate check_lq_subharmonic_mp(const std::function<double(std::int64_t)>& f,
                                               const MpBall& domain, int L, int ell, double q);

// f(center) <= q^{floor((L+1)/(ell+1))} M for a verified certificate
double radial_bound(const SubharmonicCertificate& cert, double M);

// two-ball bound for separately subharmonic f2: exponent
// floor((r1+1)/(ell+1)) + floor((r2+1)/(ell+1)); requires the centers at
// distance >= r1 + r2 + 2 (the caller must have verified separate
// subharmonicity in each variable)
double two_point_bound(int center_distance, int r1, int r2, int ell, double q, double M);

// Certificate that x -> |G_domain(x, y; E)| is (ell, q)-subharmonic in
// B_L(u), with q = e^{-gamma(m, ell) ell}, whenever every ball B_ell(x)
// inside B_L(u) is (E,m)-NS for its own restriction.  The hypothesis is
// decided first; when it fails the direct check is skipped (q = 0).
struct GreenShCertificate {
  bool hypothesis_holds = false;
  std::int64_t hypothesis_balls = 0;   // inner balls examined
  std::int64_t singular_center = -1;   // first center failing NS, -1 if none
  bool vacuous_ns = false;             // some hypothesis ball was vacuously NS
  double q = 0.0;
  SubharmonicCertificate cert;         // direct check of |G(., y; E)|
  double f_center = 0.0;               // |G(u, y; E)|
  double m_global = 0.0;               // max |G(., y; E)| over the domain
  double m_local = 0.0;                // max over B_{L+1}(u)
  double bound_global = 0.0;           // radial bound with M = m_global
  double bound_local = 0.0;            // radial bound with M = m_local
  bool bound_ok = false;               // f_center within both bounds
};

// domain must be an operator on a polydisk of radius >= L+1 centred at u; y
// is a polydisk index outside B_L(u).  The mass parameter m overrides
// params.m for the NS hypothesis and for q.  Throws ResonanceError when E is
// resonant for the ambient operator.
GreenShCertificate green_subharmonicity_certificate(const BallOperator& domain, std::int64_t y,
                                                    int L, int ell, double E, double m,
                                                    const MsaParams& params);

}  // namespace mpmsa
