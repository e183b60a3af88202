#include "mpmsa/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mpmsa {

Interaction Interaction::contact(double amplitude, int range) {
  if (range < 0) throw ConfigError("interaction: negative range");
  Interaction u;
  u.r0 = range;
  u.u2.assign(range + 1, amplitude);
  return u;
}

double interaction_energy(const Graph& g, const ParticleConfig& x, const Interaction& u) {
  if (u.trivial()) return 0.0;
  double e = 0.0;
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t j = i + 1; j < x.size(); ++j) e += u.at_distance(g.distance(x[i], x[j]));
  return e;
}

BallOperator::BallOperator(MpBall ball, std::shared_ptr<const PotentialSample> sample, double g,
                           Interaction u, LaplacianKind kind)
    : ball_(std::move(ball)), sample_(std::move(sample)), g_(g), u_(std::move(u)), kind_(kind) {
  const std::int64_t n = ball_.size();
  if (n > kEigensolveCap) throw CapacityError("assemble: polydisk dimension exceeds eigensolve cap");
  if (sample_->size() != ball_.world().size())
    throw DomainError("assemble: potential sample size mismatch");
  const Graph& world = ball_.world();
  const int np = ball_.particles();
  h_ = Eigen::MatrixXd::Zero(n, n);
  for (std::int64_t idx = 0; idx < n; ++idx) {
    ParticleConfig x = ball_.config_at(idx);
    double diag = 0.0;
    int deg_in = 0;
    for (int j = 0; j < np; ++j) {
      diag += g_ * (*sample_)[x[j]];
      for (int w : world.neighbors(x[j])) {
        ParticleConfig y = x;
        y[j] = w;
        std::int64_t idy = ball_.index_of(y);
        if (idy >= 0) {
          h_(idx, idy) = -1.0;
          ++deg_in;
        }
      }
      if (kind_ == LaplacianKind::Dirichlet) diag += world.degree(x[j]);
    }
    if (kind_ == LaplacianKind::Neumann) diag += deg_in;
    diag += interaction_energy(world, x, u_);
    h_(idx, idx) = diag;
  }
}

BallOperator assemble(MpBall ball, std::shared_ptr<const PotentialSample> sample, double g,
                      const Interaction& u, LaplacianKind kind) {
  return BallOperator(std::move(ball), std::move(sample), g, u, kind);
}

const EigenSystem& BallOperator::eigensystem() const {
  if (!eig_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_);
    if (es.info() != Eigen::Success) throw InternalCheckError("eigensolve failed");
    eig_ = EigenSystem{es.eigenvalues(), es.eigenvectors()};
  }
  return *eig_;
}

void BallOperator::set_eigensystem(EigenSystem es) const { eig_ = std::move(es); }

double BallOperator::spectral_distance(double E) const {
  return (spectrum().array() - E).abs().minCoeff();
}

static void resonance_guard(const BallOperator& op, double E) {
  double dist = op.spectral_distance(E);
  if (dist < kResonanceTol * (1.0 + std::abs(E)))
    throw ResonanceError("green: E within resonance tolerance of the spectrum", dist);
}

double green(const BallOperator& op, std::int64_t x, std::int64_t y, double E, GreenMethod method) {
  resonance_guard(op, E);
  const std::int64_t n = op.dim();
  if (x < 0 || x >= n || y < 0 || y >= n) throw DomainError("green: index out of range");
  if (method == GreenMethod::Solve) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs[y] = 1.0;
    Eigen::MatrixXd a = op.matrix() - E * Eigen::MatrixXd::Identity(n, n);
    return a.partialPivLu().solve(rhs)[x];
  }
  const EigenSystem& es = op.eigensystem();
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i)
    s += es.vectors(x, i) * es.vectors(y, i) / (es.values[i] - E);
  return s;
}

Eigen::MatrixXd green_matrix(const BallOperator& op, double E) {
  resonance_guard(op, E);
  const EigenSystem& es = op.eigensystem();
  return es.vectors * (es.values.array() - E).inverse().matrix().asDiagonal() *
         es.vectors.transpose();
}

double RationalGreen::eval(double E) const {
  double s = 0.0;
  for (size_t j = 0; j < poles.size(); ++j) s += kappa[j] / (poles[j] - E);
  return s;
}

double RationalGreen::derivative(double E) const {
  double s = 0.0;
  for (size_t j = 0; j < poles.size(); ++j) {
    double d = poles[j] - E;
    s += kappa[j] / (d * d);
  }
  return s;
}

double RationalGreen::kappa_abs_sum() const {
  double s = 0.0;
  for (double k : kappa) s += std::abs(k);
  return s;
}

RationalGreen rational_green(const BallOperator& op, std::int64_t x, std::int64_t y) {
  const EigenSystem& es = op.eigensystem();
  RationalGreen r;
  const std::int64_t n = op.dim();
  std::int64_t i = 0;
  while (i < n) {
    // aggregate near-degenerate clusters so each pole is simple
    std::int64_t j = i;
    double k = 0.0;
    while (j < n && es.values[j] - es.values[i] <= 1e-12 * (1.0 + std::abs(es.values[i]))) {
      k += es.vectors(x, j) * es.vectors(y, j);
      ++j;
    }
    if (std::abs(k) > 1e-15) {
      r.poles.push_back(es.values[i]);
      r.kappa.push_back(k);
    }
    i = j;
  }
  return r;
}

BallOperator sub_operator(const BallOperator& full, const std::vector<int>& part) {
  ParticleConfig sub_center;
  for (int j : part) sub_center.push_back(full.ball().center()[j]);
  MpBall sub_ball(full.ball().world_ptr(), sub_center, full.ball().radius());
  return BallOperator(std::move(sub_ball), full.sample_ptr(), full.g(), full.interaction());
}

// map a full-polydisk index to the pair (index in factor-1 ball, index in
// factor-2 ball) for the given particle split
static std::pair<std::int64_t, std::int64_t> split_index(const MpBall& full, const MpBall& b1,
                                                         const MpBall& b2, const SplitWitness& sp,
                                                         std::int64_t idx) {
  ParticleConfig x = full.config_at(idx);
  ParticleConfig x1, x2;
  for (int j : sp.j1) x1.push_back(x[j]);
  for (int j : sp.j2) x2.push_back(x[j]);
  std::int64_t i1 = b1.index_of(x1), i2 = b2.index_of(x2);
  if (i1 < 0 || i2 < 0) throw InternalCheckError("split_index: configuration outside factor ball");
  return {i1, i2};
}

EigenSystem pi_eigensystem(const BallOperator& full, const SplitWitness& split, BallOperator* f1,
                           BallOperator* f2) {
  BallOperator b1 = sub_operator(full, split.j1);
  BallOperator b2 = sub_operator(full, split.j2);
  const EigenSystem& e1 = b1.eigensystem();
  const EigenSystem& e2 = b2.eigensystem();
  const std::int64_t n1 = b1.dim(), n2 = b2.dim(), n = full.dim();
  if (n1 * n2 != n) throw InternalCheckError("pi_eigensystem: dimension mismatch");
  // eigenpairs (lambda_a + mu_b, phi_a (x) psi_b), mapped through the particle
  // permutation of the full polydisk enumeration
  std::vector<std::pair<std::int64_t, std::int64_t>> where(n);
  for (std::int64_t idx = 0; idx < n; ++idx)
    where[idx] = split_index(full.ball(), b1.ball(), b2.ball(), split, idx);
  std::vector<int> order(n);
  std::vector<double> vals(n);
  for (std::int64_t a = 0; a < n1; ++a)
    for (std::int64_t b = 0; b < n2; ++b) vals[a * n2 + b] = e1.values[a] + e2.values[b];
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int p, int q) { return vals[p] < vals[q]; });
  EigenSystem es;
  es.values.resize(n);
  es.vectors.resize(n, n);
  for (std::int64_t col = 0; col < n; ++col) {
    int p = order[col];
    std::int64_t a = p / n2, b = p % n2;
    es.values[col] = vals[p];
    for (std::int64_t idx = 0; idx < n; ++idx)
      es.vectors(idx, col) = e1.vectors(where[idx].first, a) * e2.vectors(where[idx].second, b);
  }
  if (f1) *f1 = std::move(b1);
  if (f2) *f2 = std::move(b2);
  return es;
}

PiTensorReport pi_tensor_check(const BallOperator& full, const SplitWitness& split, double E) {
  PiTensorReport rep;
  BallOperator b1 = sub_operator(full, split.j1);
  BallOperator b2 = sub_operator(full, split.j2);
  const EigenSystem& e1 = b1.eigensystem();
  const EigenSystem& e2 = b2.eigensystem();
  const std::int64_t n1 = b1.dim(), n2 = b2.dim(), n = full.dim();
  if (n1 * n2 != n) throw InternalCheckError("pi_tensor_check: dimension mismatch");

  // interaction must split: U(x) = U(x') + U(x'') on sampled configurations
  const Graph& world = full.ball().world();
  for (std::int64_t idx = 0; idx < std::min<std::int64_t>(n, 64); ++idx) {
    std::int64_t probe = (idx * 2654435761LL) % n;
    ParticleConfig x = full.ball().config_at(probe);
    ParticleConfig x1, x2;
    for (int j : split.j1) x1.push_back(x[j]);
    for (int j : split.j2) x2.push_back(x[j]);
    double err = std::abs(interaction_energy(world, x, full.interaction()) -
                          interaction_energy(world, x1, full.interaction()) -
                          interaction_energy(world, x2, full.interaction()));
    rep.interaction_split_err = std::max(rep.interaction_split_err, err);
  }

  // Kronecker-sum spectrum vs directly assembled spectrum
  std::vector<double> kron;
  kron.reserve(n);
  for (std::int64_t a = 0; a < n1; ++a)
    for (std::int64_t b = 0; b < n2; ++b) kron.push_back(e1.values[a] + e2.values[b]);
  std::sort(kron.begin(), kron.end());
  const Eigen::VectorXd& direct = full.spectrum();
  for (std::int64_t i = 0; i < n; ++i)
    rep.kron_spectrum_err = std::max(rep.kron_spectrum_err, std::abs(kron[i] - direct[i]));

  // identities (a)/(b) on the center row against the dense inverse
  {
    double dist = full.spectral_distance(E);
    if (dist < kResonanceTol * (1.0 + std::abs(E)))
      throw ResonanceError("pi_tensor_check: E resonant", dist);
  }
  std::int64_t u = full.ball().center_index();
  Eigen::MatrixXd gm = green_matrix(full, E);
  std::vector<std::pair<std::int64_t, std::int64_t>> where(n);
  for (std::int64_t idx = 0; idx < n; ++idx)
    where[idx] = split_index(full.ball(), b1.ball(), b2.ball(), split, idx);
  const auto [u1, u2] = where[u];

  // G''(x'', y''; E - lambda_a) rows for the fixed u'' (rational form), and
  // symmetric for (b)
  std::vector<std::int64_t> targets = full.ball().inner_boundary_indices();
  if (targets.empty()) targets.push_back(n - 1);
  for (std::int64_t y : targets) {
    const auto [y1, y2] = where[y];
    double ga = 0.0, gb = 0.0;
    for (std::int64_t a = 0; a < n1; ++a) {
      double proj = e1.vectors(u1, a) * e1.vectors(y1, a);
      double g2 = 0.0;
      for (std::int64_t b = 0; b < n2; ++b)
        g2 += e2.vectors(u2, b) * e2.vectors(y2, b) / (e2.values[b] - (E - e1.values[a]));
      ga += proj * g2;
    }
    for (std::int64_t b = 0; b < n2; ++b) {
      double proj = e2.vectors(u2, b) * e2.vectors(y2, b);
      double g1 = 0.0;
      for (std::int64_t a = 0; a < n1; ++a)
        g1 += e1.vectors(u1, a) * e1.vectors(y1, a) / (e1.values[a] - (E - e2.values[b]));
      gb += proj * g1;
    }
    rep.identity_a_resid = std::max(rep.identity_a_resid, std::abs(ga - gm(u, y)));
    rep.identity_b_resid = std::max(rep.identity_b_resid, std::abs(gb - gm(u, y)));
    ++rep.checked_entries;
  }
  return rep;
}

double ef_correlator(const BallOperator& op, const Interval& I, std::int64_t x, std::int64_t y) {
  const EigenSystem& es = op.eigensystem();
  double s = 0.0;
  for (std::int64_t i = 0; i < op.dim(); ++i)
    if (I.contains(es.values[i])) s += std::abs(es.vectors(x, i) * es.vectors(y, i));
  if (s > 1.0 + 1e-10) throw InternalCheckError("ef_correlator: value above 1");
  return std::min(s, 1.0);
}

double propagator_element(const BallOperator& op, const Interval& I, double t, std::int64_t x,
                          std::int64_t y) {
  const EigenSystem& es = op.eigensystem();
  std::complex<double> s = 0.0;
  for (std::int64_t i = 0; i < op.dim(); ++i)
    if (I.contains(es.values[i]))
      s += std::exp(std::complex<double>(0.0, -t * es.values[i])) * es.vectors(x, i) *
           es.vectors(y, i);
  return std::abs(s);
}

}  // namespace mpmsa
