#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <optional>

#include "mpmsa/mp_geometry.hpp"
#include "mpmsa/random_field.hpp"

namespace mpmsa {

// Two-body interaction with finite range r0: U(x) = sum_{i<j} u2[d(x_i,x_j)]
// for d <= r0 (u2 indexed by integer distance, zero beyond r0).
struct Interaction {
  int r0 = 0;
  std::vector<double> u2;  // size r0+1; empty means free system

  static Interaction none() { return {}; }
  static Interaction contact(double amplitude, int range);
  double at_distance(int r) const {
    return (r <= r0 && r < static_cast<int>(u2.size())) ? u2[r] : 0.0;
  }
  bool trivial() const { return u2.empty(); }
};

double interaction_energy(const Graph& g, const ParticleConfig& x, const Interaction& u);

struct EigenSystem {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns
};

// Finite-volume N-particle operator on a polydisk:
//   H = -Delta^D + g * sum_j V(x_j) + U(x)
// (Dirichlet kinetic part by default: diagonal carries ambient configuration
// degrees). The eigendecomposition is computed lazily and cached.
class BallOperator {
 public:
  BallOperator(MpBall ball, std::shared_ptr<const PotentialSample> sample, double g,
               Interaction u, LaplacianKind kind = LaplacianKind::Dirichlet);

  const MpBall& ball() const { return ball_; }
  const Eigen::MatrixXd& matrix() const { return h_; }
  std::int64_t dim() const { return h_.rows(); }
  double g() const { return g_; }
  const Interaction& interaction() const { return u_; }
  const PotentialSample& sample() const { return *sample_; }
  std::shared_ptr<const PotentialSample> sample_ptr() const { return sample_; }

  const EigenSystem& eigensystem() const;
  const Eigen::VectorXd& spectrum() const { return eigensystem().values; }
  double spectral_distance(double E) const;

  // install a precomputed eigendecomposition (PI tensor fast path); the
  // caller asserts it matches the assembled matrix
  void set_eigensystem(EigenSystem es) const;

 private:
  MpBall ball_;
  std::shared_ptr<const PotentialSample> sample_;
  double g_;
  Interaction u_;
  LaplacianKind kind_;
  Eigen::MatrixXd h_;
  mutable std::optional<EigenSystem> eig_;
};

BallOperator assemble(MpBall ball, std::shared_ptr<const PotentialSample> sample, double g,
                      const Interaction& u, LaplacianKind kind = LaplacianKind::Dirichlet);

enum class GreenMethod { Solve, Eigen };

// Green function entry G(x, y; E) = <1_x | (H - E)^{-1} | 1_y>; refuses
// near-resonant energies (ResonanceError).
double green(const BallOperator& op, std::int64_t x, std::int64_t y, double E,
             GreenMethod method = GreenMethod::Eigen);
Eigen::MatrixXd green_matrix(const BallOperator& op, double E);

// rational form of a fixed Green entry: f(E) = sum_j kappa_j / (lambda_j - E)
// with poles aggregated over near-degenerate eigenvalue clusters
struct RationalGreen {
  std::vector<double> poles;
  std::vector<double> kappa;
  double eval(double E) const;
  double derivative(double E) const;
  double kappa_abs_sum() const;
};
RationalGreen rational_green(const BallOperator& op, std::int64_t x, std::int64_t y);

// Tensor identities for partially interactive polydisks B = B' x B''
// (interaction vanishes across the cluster gap):
//   (a) G(u,y;E) = sum_a P'_a(u',y') G''(u'',y''; E - lambda_a)
//   (b) G(u,y;E) = sum_b P''_b(u'',y'') G'(u',y'; E - mu_b)
// plus the Kronecker-sum spectrum check.
struct PiTensorReport {
  double kron_spectrum_err = 0.0;    // max |sorted Kronecker sums - spectrum|
  double identity_a_resid = 0.0;     // max abs residual over checked entries
  double identity_b_resid = 0.0;
  double interaction_split_err = 0.0;
  int checked_entries = 0;
};
PiTensorReport pi_tensor_check(const BallOperator& full, const SplitWitness& split, double E);

// Build the eigensystem of a PI polydisk from its factor operators via
// Kronecker sums (exact when the interaction splits).
EigenSystem pi_eigensystem(const BallOperator& full, const SplitWitness& split,
                           BallOperator* factor1 = nullptr, BallOperator* factor2 = nullptr);

// factor operator on the sub-configuration (particles in `part`)
BallOperator sub_operator(const BallOperator& full, const std::vector<int>& part);

// eigenfunction correlator sum_{lambda_i in I} |psi_i(x) psi_i(y)| (realizes
// the sup over Borel functions of modulus <= 1 on I); always in [0,1]
double ef_correlator(const BallOperator& op, const Interval& I, std::int64_t x, std::int64_t y);
// |<1_x| P_I e^{-itH} P_I |1_y>|, bounded by the correlator
double propagator_element(const BallOperator& op, const Interval& I, double t, std::int64_t x,
                          std::int64_t y);

}  // namespace mpmsa
