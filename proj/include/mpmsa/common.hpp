#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mpmsa {

// Error taxonomy; the CLI maps these to exit codes (config 2, capacity 3,
// internal invariant 4).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InternalCheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Raised when a Green-function evaluation is requested too close to the
// spectrum: dist(Sigma(H), E) < 1e-8 * (1 + |E|).
struct ResonanceError : std::runtime_error {
  double spectral_distance;
  explicit ResonanceError(const std::string& msg, double dist)
      : std::runtime_error(msg), spectral_distance(dist) {}
};

inline constexpr double kResonanceTol = 1e-8;     // relative, scaled by 1+|E|
inline constexpr int kEigensolveCap = 4096;       // dense eigensolve dimension cap

// ---- deterministic RNG -----------------------------------------------------
//
// All randomness flows through splitmix64 counter streams keyed by
// (master_seed, stream). Uniform/gaussian draws are implemented here rather
// than via std::*_distribution so regeneration is bit-identical across
// standard-library versions and independent of thread scheduling.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0x6a09e667f3bcc909ULL)) {
    // warm up so nearby seeds decorrelate
    for (int i = 0; i < 4; ++i) next_u64();
  }
  std::uint64_t next_u64() {
    state_ = splitmix64(state_ + 0x9e3779b97f4a7c15ULL);
    return state_;
  }
  // uniform in [0,1) with 53-bit mantissa
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
  double gaussian(double mu, double sigma);  // Box-Muller, one value per call pair

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// ---- deterministic parallel map ---------------------------------------------
//
// Runs fn(i) for i in [0, n). Results must be written into caller-owned slots
// indexed by i, so the merge is associative and the output independent of the
// thread count (the determinism contract for CSV outputs).
void parallel_for_index(std::int64_t n, int threads,
                        const std::function<void(std::int64_t)>& fn);

int default_thread_count();

// closed interval [lo, hi]
struct Interval {
  double lo = 0.0, hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

}  // namespace mpmsa
