#include <cmath>
#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mpmsa/experiment.hpp"

namespace {

using namespace mpmsa;

struct CommonOpts {
  std::string config;
  std::string out;
  long long seed = -1;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config, "experiment config file");
  cmd->add_option("--seed", o.seed, "master seed (overrides config)");
  cmd->add_option("--threads", o.threads, "worker threads (overrides config)");
  cmd->add_option("--out", o.out, "output CSV path (overrides config)");
}

ConfigMap base_config(const CommonOpts& o, const std::string& kind) {
  ConfigMap c;
  if (!o.config.empty()) c = load_config(o.config);
  c.set("kind", kind);
  if (o.seed >= 0) c.set_int("run.master_seed", o.seed);
  if (o.threads > 0) c.set_int("run.threads", o.threads);
  if (!o.out.empty()) c.set("run.out", o.out);
  return c;
}

int run_kind(const ConfigMap& c) {
  const ExperimentConfig cfg = experiment_from_map(c);
  const RunManifest man = run_experiment(cfg);
  for (const auto& out : man.outputs)
    std::cout << out.first << "  fnv1a64:" << out.second << "\n";
  std::cout << "manifest: " << cfg.out << ".manifest.json\n";
  return 0;
}

int guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ResonanceError& e) {
    std::cerr << "config error (resonant energy): " << e.what() << "\n";
    return 2;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 3;
  } catch (const InternalCheckError& e) {
    std::cerr << "hard-invariant violation: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for multi-particle multi-scale localization analysis"};
  app.require_subcommand(1);

  CommonOpts wegner_opts;
  long long wegner_trials = -1;
  CLI::App* wegner = app.add_subcommand("wegner", "spectral-distance tail curve P{dist(Sigma,E)<s}");
  add_common(wegner, wegner_opts);
  wegner->add_option("--trials", wegner_trials, "trial count (overrides config)");

  CommonOpts msa_opts;
  struct {
    long long particles = -1, dim = -1, l0 = -1, scales = -1, trials = -1;
    double alpha = NAN, kappa = NAN, theta = NAN, m = NAN, g = NAN, energy = NAN;
    std::string e_grid;
  } msa_flags;
  CLI::App* msa = app.add_subcommand("msa-scan", "scale-induction estimators P/Q/S per scale");
  add_common(msa, msa_opts);
  msa->add_option("--particles", msa_flags.particles, "particle number N");
  msa->add_option("--dim", msa_flags.dim, "lattice dimension d");
  msa->add_option("--L0", msa_flags.l0, "initial scale");
  msa->add_option("--alpha", msa_flags.alpha, "scale growth exponent");
  msa->add_option("--kappa", msa_flags.kappa, "base target exponent");
  msa->add_option("--theta", msa_flags.theta, "target growth rate");
  msa->add_option("--m", msa_flags.m, "mass");
  msa->add_option("--g", msa_flags.g, "disorder coupling");
  msa->add_option("--E", msa_flags.energy, "probe energy");
  msa->add_option("--E-grid", msa_flags.e_grid, "comma-separated energy grid");
  msa->add_option("--scales", msa_flags.scales, "largest scale index k_max");
  msa->add_option("--trials", msa_flags.trials, "trial count (>= 100)");

  CommonOpts reduce_opts;
  long long reduce_trials = -1;
  std::string reduce_route;
  CLI::App* reduce =
      app.add_subcommand("spectral-reduce", "per-trial singular-energy covers and pair events");
  add_common(reduce, reduce_opts);
  reduce->add_option("--trials", reduce_trials, "trial count (overrides config)");
  reduce->add_option("--route", reduce_route, "two-volume route")
      ->check(CLI::IsMember({"etv", "cpt"}));

  CommonOpts corr_opts;
  struct {
    std::string pairs, distance, interval, fit;
    long long trials = -1;
  } corr_flags;
  CLI::App* corr =
      app.add_subcommand("correlator", "eigenfunction-correlator decay over configured pairs");
  add_common(corr, corr_opts);
  corr->add_option("--pairs", corr_flags.pairs, "file of config pairs, one (..)|(..) per line");
  corr->add_option("--distance", corr_flags.distance, "fit distance")
      ->check(CLI::IsMember({"rho", "rhos"}));
  corr->add_option("--interval", corr_flags.interval, "energy interval lo,hi");
  corr->add_option("--trials", corr_flags.trials, "trial count (overrides config)");
  corr->add_option("--fit", corr_flags.fit, "fit model selection")
      ->check(CLI::IsMember({"exp", "subexp", "both"}));

  CommonOpts lemmas_opts;
  long long lemmas_trials = -1;
  CLI::App* lemmas =
      app.add_subcommand("verify-lemmas", "deterministic-lemma falsification harnesses");
  add_common(lemmas, lemmas_opts);
  lemmas->add_option("--trials", lemmas_trials, "trial count (overrides config)");

  std::string suite_level = "fast";
  long long suite_seed = 1;
  int suite_threads = 1;
  CLI::App* suite = app.add_subcommand("verify-suite", "identity checks and harness sweep");
  suite->add_option("--level", suite_level, "fast or full")
      ->check(CLI::IsMember({"fast", "full"}));
  suite->add_option("--seed", suite_seed, "master seed");
  suite->add_option("--threads", suite_threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (wegner->parsed()) {
    return guarded([&] {
      ConfigMap c = base_config(wegner_opts, "wegner");
      if (wegner_trials >= 0) c.set_int("run.trials", wegner_trials);
      return run_kind(c);
    });
  }
  if (msa->parsed()) {
    return guarded([&] {
      ConfigMap c = base_config(msa_opts, "msa-scan");
      if (msa_flags.particles >= 0) c.set_int("msa.n", msa_flags.particles);
      if (msa_flags.dim >= 1) c.set_int("params.d", msa_flags.dim);
      if (msa_flags.l0 >= 0) c.set_int("params.L0", msa_flags.l0);
      if (!std::isnan(msa_flags.alpha)) c.set_double("params.alpha", msa_flags.alpha);
      if (!std::isnan(msa_flags.kappa)) c.set_double("params.kappa", msa_flags.kappa);
      if (!std::isnan(msa_flags.theta)) c.set_double("params.theta", msa_flags.theta);
      if (!std::isnan(msa_flags.m)) c.set_double("params.m", msa_flags.m);
      if (!std::isnan(msa_flags.g)) c.set_double("params.g", msa_flags.g);
      if (!std::isnan(msa_flags.energy)) c.set_double("msa.energy", msa_flags.energy);
      if (!msa_flags.e_grid.empty()) c.set("msa.energy_grid", msa_flags.e_grid);
      if (msa_flags.scales >= 0) c.set_int("msa.k_max", msa_flags.scales);
      if (msa_flags.trials >= 0) c.set_int("run.trials", msa_flags.trials);
      return run_kind(c);
    });
  }
  if (reduce->parsed()) {
    return guarded([&] {
      ConfigMap c = base_config(reduce_opts, "spectral-reduce");
      if (reduce_trials >= 0) c.set_int("run.trials", reduce_trials);
      if (!reduce_route.empty()) c.set("reduce.route", reduce_route);
      return run_kind(c);
    });
  }
  if (corr->parsed()) {
    return guarded([&] {
      ConfigMap c = base_config(corr_opts, "correlator");
      if (!corr_flags.pairs.empty()) c.set("correlator.pairs_file", corr_flags.pairs);
      if (!corr_flags.distance.empty()) c.set("correlator.distance", corr_flags.distance);
      if (!corr_flags.interval.empty()) c.set("correlator.interval", corr_flags.interval);
      if (!corr_flags.fit.empty()) c.set("correlator.fit", corr_flags.fit);
      if (corr_flags.trials >= 0) c.set_int("run.trials", corr_flags.trials);
      return run_kind(c);
    });
  }
  if (lemmas->parsed()) {
    return guarded([&] {
      ConfigMap c = base_config(lemmas_opts, "verify-lemmas");
      if (lemmas_trials >= 0) c.set_int("run.trials", lemmas_trials);
      return run_kind(c);
    });
  }
  if (suite->parsed()) {
    return guarded([&] {
      const VerifyReport rep =
          verify_suite(suite_level == "full", static_cast<std::uint64_t>(suite_seed),
                       suite_threads);
      std::cout << rep.to_text();
      return rep.pass() ? 0 : 4;
    });
  }
  return 2;
}
