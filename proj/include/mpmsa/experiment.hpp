#pragma once

// Experiment orchestration: flat key-value configs with [section] grouping,
// experiment assembly/validation, deterministic CSV emission with run
// manifests (content digests), and the verification suite driving the
// identity checks and falsification harnesses.

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mpmsa/localization.hpp"
#include "mpmsa/msa.hpp"
#include "mpmsa/spectral_reduction.hpp"

namespace mpmsa {

// Flat key-value configuration. Keys are fully qualified as "section.key"
// ("key" alone before any [section] header); first-write order is preserved
// so that parse(serialize(c)) == c exactly.
class ConfigMap {
 public:
  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // ConfigError if absent
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  // insert or overwrite (overwrite keeps the original position)
  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, long long value);

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  bool operator==(const ConfigMap& other) const { return entries_ == other.entries_; }
  bool operator!=(const ConfigMap& other) const { return !(*this == other); }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// "key = value" lines, "#"/";" comments, [section] headers qualify keys
ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config(const std::string& path);
std::string serialize_config(const ConfigMap& c);

// particle tuple literal "(0,3)": flat integer list, d coordinates per
// particle on lattice boxes, raw vertex ids otherwise
std::vector<int> parse_tuple(const std::string& text);
std::string format_tuple(const std::vector<int>& flat);
// comma-separated doubles
std::vector<double> parse_double_list(const std::string& text);
// pair list "(0,0)|(4,4); (0,0)|(6,6)"
std::vector<std::pair<std::vector<int>, std::vector<int>>> parse_pair_list(
    const std::string& text);

// resolve a tuple literal against a world graph (coordinates on boxes, vertex
// ids otherwise); ConfigError on arity mismatch or out-of-graph entries
ParticleConfig config_from_tuple(const Graph& world, const std::vector<int>& flat, int n);

// [ensemble] marginal = uniform|gaussian|bernoulli with a/b, mu/sigma, p
Ensemble ensemble_from_config(const ConfigMap& c);
MsaParams params_from_config(const ConfigMap& c);

struct ExperimentConfig {
  std::string kind;  // wegner | msa-scan | spectral-reduce | correlator | verify-lemmas
  MsaParams params;
  Ensemble ensemble = Ensemble::uniform(0.0, 1.0);
  Interaction interaction;  // [interaction] amplitude/range; default none
  int dim = 1;
  int half_width = 0;  // 0 = derived from the experiment's largest scale
  std::string graph_path;  // adjacency-list override for [graph] box fields
  int n = 1;               // particle number of the experiment
  long long trials = 100;
  std::uint64_t master_seed = 1;
  int threads = 1;
  std::string out;  // defaults to "<kind>.csv"
  ConfigMap raw;    // authoritative echo of every configured key

  std::shared_ptr<const Graph> build_world(long long max_scale) const;
};

// validates MsaParams (naming the violated constraint), kind, trials, threads
ExperimentConfig experiment_from_map(const ConfigMap& c);
ExperimentConfig load_experiment(const std::string& path);

struct RunManifest {
  std::string kind;
  std::string artifact_version;
  std::string started_at, finished_at;  // UTC ISO-8601
  std::vector<std::pair<std::string, long long>> per_scale_trials;
  std::vector<std::pair<std::string, std::string>> outputs;  // path -> FNV-1a digest
  std::string config_echo;
  std::string to_json() const;
};

// FNV-1a 64-bit digest of the file bytes as 16 hex digits
std::string file_digest(const std::string& path);
std::string json_escape(const std::string& s);

// Dispatches on cfg.kind, writes the kind's CSV (fixed header, %.17g doubles,
// deterministic row order independent of cfg.threads) plus the manifest at
// <out>.manifest.json. Partial outputs are removed when a run throws.
RunManifest run_experiment(const ExperimentConfig& cfg);

struct VerifyCheck {
  std::string name;
  bool pass = false;
  long long violations = 0;
  std::string detail;
};
struct VerifyReport {
  std::vector<VerifyCheck> checks;
  long long hard_violations = 0;
  bool pass() const;
  std::string to_text() const;
};
// fast: GRI, rational decomposition, shift covariance, PI tensor,
// subharmonic certificates, the deterministic-lemma harnesses, and the
// Bessel-route bound at small scales; full adds Wegner linearity and the
// scale recursion. Budgeted to finish fast mode in well under two minutes.
VerifyReport verify_suite(bool full, std::uint64_t seed, int threads);

}  // namespace mpmsa
