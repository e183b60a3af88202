#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <string>
#include <vector>

#include "doctest.h"
#include "mpmsa/experiment.hpp"

using namespace mpmsa;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("mpmsa_exp_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

// independent FNV-1a 64 (hex constants rather than the decimal ones upstream)
std::string fnv_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool iso_utc(const std::string& s) {
  static const std::regex re(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)");
  return std::regex_match(s, re);
}

}  // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("config map: ordered entries, typed access, key validation") {
  ConfigMap c;
  c.set("x", "1");
  c.set("run.trials", "20");
  c.set("y", "hello");
  c.set("run.seed", "7");
  CHECK(c.entries().size() == 4);
  CHECK(c.entries()[0].first == "x");

  // overwrite keeps the original position
  c.set("x", "9");
  CHECK(c.entries()[0] == std::pair<std::string, std::string>{"x", "9"});
  CHECK(c.entries().size() == 4);

  CHECK(c.has("run.trials"));
  CHECK_FALSE(c.has("trials"));
  CHECK(c.get("y") == "hello");
  CHECK(c.get_or("z", "fallback") == "fallback");
  CHECK(c.get_int("run.trials") == 20);
  CHECK(c.get_double("run.trials") == 20.0);
  CHECK(c.get_int_or("nope", -3) == -3);
  CHECK(c.get_double_or("nope", 2.5) == 2.5);

  CHECK_THROWS_WITH_AS(c.get("absent.key"), doctest::Contains("absent.key"), ConfigError);
  CHECK_THROWS_WITH_AS(c.get_int("y"), doctest::Contains("expected an integer"), ConfigError);
  c.set("frac", "3.5");
  CHECK(c.get_double("frac") == 3.5);
  CHECK_THROWS_AS(c.get_int("frac"), ConfigError);
  CHECK_THROWS_AS(c.set("bad key", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("", "1"), ConfigError);

  c.set_double("d", 0.1);
  c.set_int("i", -42);
  CHECK(c.get_double("d") == 0.1);  // %.17g round-trips doubles exactly
  CHECK(c.get_int("i") == -42);
}

TEST_CASE("config text: sections, comments, and parse errors with line numbers") {
  const std::string text =
      "# leading comment\n"
      "; alternative comment style\n"
      "top = 1\n"
      "\n"
      "[run]\n"
      "trials = 50   # trailing comment\n"
      "label = a#b\n"
      "[]\n"
      "bare = again\n"
      "[params]\n"
      "expr = a=b\n";
  ConfigMap c = parse_config_text(text);
  CHECK(c.get("top") == "1");
  CHECK(c.get_int("run.trials") == 50);
  CHECK(c.get("run.label") == "a#b");  // '#' only comments after whitespace
  CHECK(c.get("bare") == "again");     // "[]" returns to top level
  CHECK(c.get("params.expr") == "a=b");

  CHECK_THROWS_WITH_AS(parse_config_text("a = 1\nbroken line\n"), doctest::Contains("line 2"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[oops\n"), doctest::Contains("unterminated"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("bad key = 1\n"), doctest::Contains("invalid key"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[bad section]\nx = 1\n"),
                       doctest::Contains("invalid section"), ConfigError);
}

TEST_CASE("config serialization round-trips exactly, including section interleave") {
  ConfigMap c;
  c.set("kind", "wegner");
  c.set("run.trials", "12");
  c.set("run.out", "w.csv");
  c.set("toplevel", "yes");  // forces a "[]" header on serialization
  c.set("params.kappa", "13");
  c.set("run.master_seed", "5");  // reopens [run] after [params]

  const std::string text = serialize_config(c);
  CHECK(text.find("[]\ntoplevel = yes") != std::string::npos);
  ConfigMap back = parse_config_text(text);
  CHECK(back == c);
  // serialization is a fixed point
  CHECK(serialize_config(back) == text);
}

TEST_CASE("tuple, number-list, and pair-list literals") {
  CHECK(parse_tuple("(0,3)") == std::vector<int>{0, 3});
  CHECK(parse_tuple("  ( -2 , 5 )  ") == std::vector<int>{-2, 5});
  CHECK(parse_tuple("(7)") == std::vector<int>{7});
  CHECK(format_tuple({-2, 5}) == "(-2,5)");
  CHECK(parse_tuple(format_tuple({1, -9, 4})) == std::vector<int>{1, -9, 4});
  CHECK_THROWS_AS(parse_tuple("0,3"), ConfigError);
  CHECK_THROWS_AS(parse_tuple("()"), ConfigError);
  CHECK_THROWS_AS(parse_tuple("(a)"), ConfigError);
  CHECK(parse_tuple("(1,)") == std::vector<int>{1});  // trailing comma tolerated
  CHECK_THROWS_AS(parse_tuple("(1.5)"), ConfigError);

  CHECK(parse_double_list("1.5, 2e-3 ,7") == std::vector<double>{1.5, 2e-3, 7.0});
  CHECK(parse_double_list("1,,2") == std::vector<double>{1.0, 2.0});
  CHECK(parse_double_list("").empty());
  CHECK_THROWS_AS(parse_double_list("1,x"), ConfigError);

  const auto pairs = parse_pair_list("(0,0)|(4,4); (1,1)|(2,2);");
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].first == std::vector<int>{0, 0});
  CHECK(pairs[1].second == std::vector<int>{2, 2});
  CHECK_THROWS_AS(parse_pair_list("(0,0)(4,4)"), ConfigError);
  CHECK_THROWS_AS(parse_pair_list("(0,0)|(4,4)|(5,5)"), ConfigError);
  CHECK_THROWS_AS(parse_pair_list("  ;  "), ConfigError);
}

TEST_CASE("tuples resolve to particle configurations against the world") {
  const Graph seg = Graph::lattice_segment(1, 5);
  const ParticleConfig two = config_from_tuple(seg, {0, 3}, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0] == seg.vertex_at({0}).value());
  CHECK(two[1] == seg.vertex_at({3}).value());
  CHECK_THROWS_WITH_AS(config_from_tuple(seg, {0, 3, 1}, 2), doctest::Contains("coordinates"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(config_from_tuple(seg, {99}, 1), doctest::Contains("outside"), ConfigError);
  CHECK_THROWS_AS(config_from_tuple(seg, {0}, 0), ConfigError);

  const Graph plane = Graph::lattice_segment(2, 3);
  const ParticleConfig one = config_from_tuple(plane, {1, -2}, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == plane.vertex_at({1, -2}).value());
  CHECK_THROWS_AS(config_from_tuple(plane, {1}, 1), ConfigError);

  // on a non-box graph the flat entries are raw vertex ids
  const Graph tri = Graph::from_adjacency({{1}, {0, 2}, {1}});
  const ParticleConfig raw = config_from_tuple(tri, {0, 2}, 2);
  CHECK(raw == ParticleConfig{0, 2});
  CHECK_THROWS_AS(config_from_tuple(tri, {0, 5}, 2), ConfigError);
  CHECK_THROWS_AS(config_from_tuple(tri, {0, 1, 2}, 2), ConfigError);
}

TEST_CASE("experiment assembly: defaults, validation, and inference") {
  ConfigMap c;
  c.set("kind", "wegner");
  ExperimentConfig cfg = experiment_from_map(c);
  CHECK(cfg.kind == "wegner");
  CHECK(cfg.n == 1);
  CHECK(cfg.trials == 100);
  CHECK(cfg.threads == 1);
  CHECK(cfg.master_seed == 1);
  CHECK(cfg.out == "wegner.csv");
  CHECK(cfg.ensemble.kind == Ensemble::Kind::Uniform);
  CHECK(cfg.interaction.trivial());
  CHECK(cfg.params.r0 == 0);

  ConfigMap g = c;
  g.set("ensemble.marginal", "gaussian");
  g.set("ensemble.mu", "1.5");
  g.set("ensemble.sigma", "2");
  ExperimentConfig gcfg = experiment_from_map(g);
  CHECK(gcfg.ensemble.kind == Ensemble::Kind::Gaussian);
  CHECK(gcfg.ensemble.mu == 1.5);
  CHECK(gcfg.ensemble.sigma == 2.0);
  g.set("ensemble.marginal", "poisson");
  CHECK_THROWS_WITH_AS(experiment_from_map(g), doctest::Contains("marginal"), ConfigError);

  ConfigMap i = c;
  i.set("interaction.amplitude", "2.0");
  i.set("interaction.range", "1");
  ExperimentConfig icfg = experiment_from_map(i);
  CHECK_FALSE(icfg.interaction.trivial());
  CHECK(icfg.params.r0 == 1);

  // parameter echo and the named constraint on kappa
  ConfigMap k = c;
  k.set("params.kappa", "20");
  CHECK(experiment_from_map(k).params.kappa == 20.0);
  k.set("params.kappa", "5");
  CHECK_THROWS_WITH_AS(experiment_from_map(k), doctest::Contains("kappa"), ConfigError);

  ConfigMap bad = c;
  bad.set("run.trials", "-1");
  CHECK_THROWS_AS(experiment_from_map(bad), ConfigError);
  bad = c;
  bad.set("run.threads", "0");
  CHECK_THROWS_AS(experiment_from_map(bad), ConfigError);
  bad = c;
  bad.set("wegner.n", "3");  // exceeds n_hat = 2
  CHECK_THROWS_WITH_AS(experiment_from_map(bad), doctest::Contains("n_hat"), ConfigError);
  bad = c;
  bad.set("graph.dim", "2");
  CHECK_THROWS_WITH_AS(experiment_from_map(bad), doctest::Contains("graph.dim"), ConfigError);

  ConfigMap none;
  CHECK_THROWS_WITH_AS(experiment_from_map(none), doctest::Contains("kind"), ConfigError);
  none.set("kind", "frobnicate");
  CHECK_THROWS_WITH_AS(experiment_from_map(none), doctest::Contains("unknown experiment kind"),
                       ConfigError);

  // correlator infers the particle number from the first pair tuple
  ConfigMap corr;
  corr.set("kind", "correlator");
  corr.set("correlator.pairs", "(0,0)|(4,4)");
  CHECK(experiment_from_map(corr).n == 2);

  // world construction: derived half-width, and the capacity guard
  ExperimentConfig wcfg = experiment_from_map(c);
  auto world = wcfg.build_world(8);
  CHECK(world->size() == 2 * (2 * 8 + 2) + 1);
  wcfg.half_width = 2'000'000;
  CHECK_THROWS_AS(wcfg.build_world(8), CapacityError);
}

TEST_CASE("file digests match the published fnv-1a vectors") {
  const fs::path dir = fresh_dir("digest");
  write_file(dir / "empty.bin", "");
  write_file(dir / "a.bin", "a");
  write_file(dir / "abc.bin", "abc");
  CHECK(file_digest((dir / "empty.bin").string()) == "cbf29ce484222325");
  CHECK(file_digest((dir / "a.bin").string()) == "af63dc4c8601ec8c");
  CHECK(file_digest((dir / "abc.bin").string()) == "e71fa2190541574b");
  CHECK(fnv_hex("abc") == "e71fa2190541574b");
  CHECK_THROWS_AS(file_digest((dir / "missing.bin").string()), ConfigError);

  CHECK(json_escape("a\"b\\c\nd\te") == "a\\\"b\\\\c\\nd\\te");
  CHECK(json_escape(std::string(1, '\x01')) == "\\u0001");
}

TEST_CASE("wegner run: artifacts, digests, and thread-count invariance") {
  const fs::path dir = fresh_dir("wegner");
  ConfigMap c;
  c.set("kind", "wegner");
  c.set("wegner.L", "2");
  c.set("wegner.s_grid", "0.05,0.2");
  c.set("run.trials", "30");
  c.set("run.master_seed", "7");
  c.set("run.out", (dir / "w1.csv").string());

  const RunManifest man = run_experiment(experiment_from_map(c));
  CHECK(man.kind == "wegner");
  CHECK(iso_utc(man.started_at));
  CHECK(iso_utc(man.finished_at));
  REQUIRE(man.per_scale_trials.size() == 1);
  CHECK(man.per_scale_trials[0] == std::pair<std::string, long long>{"trials", 30});

  const std::string csv = read_file(dir / "w1.csv");
  const auto rows = lines_of(csv);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "s,prob,stderr,ratio");
  CHECK(rows[1].substr(0, rows[1].find(',')) == "0.050000000000000003");  // %.17g of 0.05
  REQUIRE(man.outputs.size() == 1);
  CHECK(man.outputs[0].first == (dir / "w1.csv").string());
  CHECK(man.outputs[0].second == fnv_hex(csv));

  const std::string mjson = read_file(dir / "w1.csv.manifest.json");
  CHECK(mjson.find("\"kind\": \"wegner\"") != std::string::npos);
  CHECK(mjson.find(fnv_hex(csv)) != std::string::npos);
  CHECK(mjson.find("kind = wegner") != std::string::npos);  // config echo

  // identical bytes from a different worker count
  c.set("run.threads", "3");
  c.set("run.out", (dir / "w3.csv").string());
  run_experiment(experiment_from_map(c));
  CHECK(read_file(dir / "w3.csv") == csv);

  // dry run: header-only CSV is still a valid, digested artifact
  c.set("run.trials", "0");
  c.set("run.out", (dir / "w0.csv").string());
  const RunManifest dry = run_experiment(experiment_from_map(c));
  CHECK(lines_of(read_file(dir / "w0.csv")) == std::vector<std::string>{"s,prob,stderr,ratio"});
  CHECK(dry.outputs[0].second == fnv_hex(read_file(dir / "w0.csv")));
}

TEST_CASE("msa-scan run: trial floor and per-scale rows") {
  const fs::path dir = fresh_dir("msa");
  ConfigMap c;
  c.set("kind", "msa-scan");
  c.set("params.g", "50");
  c.set("params.L0", "4");
  c.set("params.n_hat", "1");
  c.set("msa.k_max", "0");
  c.set("msa.energy", "27");
  c.set("run.trials", "100");
  c.set("run.master_seed", "3");
  c.set("run.out", (dir / "scan.csv").string());

  const RunManifest man = run_experiment(experiment_from_map(c));
  const auto rows = lines_of(read_file(dir / "scan.csv"));
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] == "k,L_k,estimator,value,stderr,target,trials");
  CHECK(rows[1].substr(0, 10) == "0,4,p_hat,");
  REQUIRE(man.per_scale_trials.size() == 1);
  CHECK(man.per_scale_trials[0].first == "k=0");

  c.set("run.trials", "50");
  CHECK_THROWS_WITH_AS(run_experiment(experiment_from_map(c)),
                       doctest::Contains("trials >= 100"), ConfigError);
  CHECK_FALSE(fs::exists(dir / "scan2.csv"));

  c.set("run.trials", "0");  // dry run bypasses the floor
  c.set("run.out", (dir / "dry.csv").string());
  run_experiment(experiment_from_map(c));
  CHECK(lines_of(read_file(dir / "dry.csv")).size() == 1);
}

TEST_CASE("spectral-reduce run and partial-output cleanup on failure") {
  const fs::path dir = fresh_dir("reduce");
  ConfigMap c;
  c.set("kind", "spectral-reduce");
  c.set("reduce.n", "2");
  c.set("reduce.L", "2");
  c.set("reduce.route", "etv");
  c.set("reduce.x", "(-6,-6)");
  c.set("reduce.y", "(6,6)");
  c.set("reduce.a", "0.5");
  c.set("reduce.c", "0.05");
  c.set("reduce.b", "5e-5");
  c.set("reduce.interval_lo", "5.5");
  c.set("reduce.interval_hi", "6.5");
  c.set("run.trials", "2");
  c.set("run.out", (dir / "red.csv").string());

  run_experiment(experiment_from_map(c));
  const auto rows = lines_of(read_file(dir / "red.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "trial,cover_count,total_length,event");
  CHECK(rows[1].substr(0, 2) == "0,");
  CHECK(rows[2].substr(0, 2) == "1,");

  // an inadmissible fattening width fails after the writer opened; the
  // partial CSV and the manifest must not survive
  c.set("reduce.b", "0.01");
  c.set("run.out", (dir / "bad.csv").string());
  CHECK_THROWS_AS(run_experiment(experiment_from_map(c)), DomainError);
  CHECK_FALSE(fs::exists(dir / "bad.csv"));
  CHECK_FALSE(fs::exists(dir / "bad.csv.manifest.json"));

  c.set("reduce.b", "5e-5");
  c.set("reduce.route", "nonsense");
  CHECK_THROWS_AS(run_experiment(experiment_from_map(c)), ConfigError);
}

TEST_CASE("correlator run: quoted tuple cells and the fit sidecar") {
  const fs::path dir = fresh_dir("correlator");
  ConfigMap c;
  c.set("kind", "correlator");
  c.set("params.g", "50");
  c.set("correlator.pairs", "(-3)|(0); (-3)|(3)");
  c.set("correlator.interval", "24.5,25.5");
  c.set("run.trials", "5");
  c.set("run.out", (dir / "corr.csv").string());

  const RunManifest man = run_experiment(experiment_from_map(c));
  const auto rows = lines_of(read_file(dir / "corr.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "x,y,rho,rho_sym,mean,stderr,trials");
  CHECK(rows[1].substr(0, 16) == "\"(-3)\",\"(0)\",3,3");
  CHECK(rows[2].substr(0, 16) == "\"(-3)\",\"(3)\",6,6");

  REQUIRE(man.outputs.size() == 2);  // CSV plus the fit sidecar
  const std::string side = read_file(dir / "corr.csv.fit.json");
  CHECK(side.find("\"fits\": [") != std::string::npos);
  CHECK(side.find("\"model\": \"exp\"") != std::string::npos);
  CHECK(side.find("\"model\": \"subexp\"") != std::string::npos);
  CHECK(man.outputs[1].second == fnv_hex(side));

  ConfigMap bad = c;
  bad.set("correlator.interval", "3");
  CHECK_THROWS_AS(run_experiment(experiment_from_map(bad)), ConfigError);
  bad = c;
  bad.set("correlator.distance", "euclid");
  CHECK_THROWS_AS(run_experiment(experiment_from_map(bad)), ConfigError);
}

TEST_CASE("verify-lemmas run in the calibrated regime") {
  const fs::path dir = fresh_dir("lemmas");
  ConfigMap c;
  c.set("kind", "verify-lemmas");
  c.set("params.g", "150");
  c.set("params.m", "0.25");
  c.set("params.L0", "6");
  c.set("params.n_hat", "1");
  c.set("lemmas.energies", "12,25");
  c.set("run.trials", "5");
  c.set("run.master_seed", "11");
  c.set("run.out", (dir / "lem.csv").string());

  run_experiment(experiment_from_map(c));
  const auto rows = lines_of(read_file(dir / "lem.csv"));
  REQUIRE(rows.size() == 2);  // single-particle config: no pitrons harness
  CHECK(rows[0] == "harness,samples,hypothesis_true,violations,graded_true");
  CHECK(rows[1].substr(0, 12) == "nr_nt_ns,10,");
  CHECK(rows[1].find(",0,0") != std::string::npos);  // zero violations
}

TEST_CASE("verification suite passes in fast mode") {
  const VerifyReport rep = verify_suite(false, 1, 1);
  REQUIRE(rep.checks.size() == 8);
  const char* names[8] = {"gri_identity",  "rational_green",  "shift_covariance",
                          "pi_tensor",     "subharmonic_certificates",
                          "lemma_nr_nt_ns", "pitrons",        "bessel_bound"};
  for (size_t i = 0; i < 8; ++i) {
    CHECK(rep.checks[i].name == names[i]);
    CHECK(rep.checks[i].pass);
  }
  CHECK(rep.hard_violations == 0);
  CHECK(rep.pass());
  const std::string text = rep.to_text();
  CHECK(text.find("verify-suite: PASS") != std::string::npos);
  CHECK(text.find("[FAIL]") == std::string::npos);
}

TEST_SUITE_END();
