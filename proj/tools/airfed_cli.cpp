#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "airfed/config.hpp"
#include "airfed/errors.hpp"
#include "airfed/experiment.hpp"
#include "airfed/validation.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("config", f.config, "experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "base seed (trial i uses seed xor i)");
  cmd->add_option("--jobs", f.jobs, "trials run concurrently");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--set", f.overrides, "override a config key, section.key=value")->take_all();
}

airfed::ExperimentConfig load(const CommonFlags& f) {
  airfed::ExperimentConfig cfg = airfed::load_config(f.config);
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw airfed::Error(airfed::Errc::invalid_config, "--set expects section.key=value, got '" + kv + "'");
    }
    airfed::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.jobs) cfg.jobs = *f.jobs;
  if (f.out) cfg.output_dir = *f.out;
  cfg.validate();
  return cfg;
}

void print_result(const airfed::AggregateResult& r) {
  std::printf("%-40s kappa=%-10.4g initial_gap=%.4e final_mean_gap=%.4e G=%.4e\n", r.label.c_str(),
              r.kappa, r.initial_gap, r.final_mean_gap, r.measured_g);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"airfed: federated learning over a fading multiple-access channel"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  auto* run = app.add_subcommand("run", "run one experiment and write result.csv, plot.dat, summary.txt");
  add_common(run, run_flags);
  bool dump = false;
  run->add_flag("--dump-trials", dump, "also write trial_<i>.csv");

  CommonFlags sweep_flags;
  std::vector<double> kappas;
  auto* sweep = app.add_subcommand("sweep", "run one experiment per condition number");
  add_common(sweep, sweep_flags);
  sweep->add_option("--kappa", kappas, "condition numbers (default: sweep.kappas)");

  std::string suite_name;
  std::uint64_t validate_seed = 1;
  auto* validate = app.add_subcommand("validate", "run built-in invariant suites");
  validate->add_option("suite", suite_name, "prox | channel | estimator | bounds | all")->required();
  validate->add_option("--seed", validate_seed, "seed");

  CommonFlags replay_flags;
  std::size_t trial = 0;
  auto* replay = app.add_subcommand("replay", "re-run a single trial and write trial_<i>.csv");
  add_common(replay, replay_flags);
  replay->add_option("--trial", trial, "trial index")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = load(run_flags);
      if (dump) cfg.dump_trials = true;
      print_result(airfed::run_experiment(cfg));
      std::printf("wrote %s\n", cfg.output_dir.string().c_str());
    } else if (*sweep) {
      const auto cfg = load(sweep_flags);
      const std::vector<double>& ks = kappas.empty() ? cfg.kappas : kappas;
      if (ks.empty()) {
        throw airfed::Error(airfed::Errc::invalid_config, "sweep needs --kappa or sweep.kappas");
      }
      for (const auto& r : airfed::sweep_kappa(cfg, ks)) print_result(r);
      std::printf("wrote %s\n", cfg.output_dir.string().c_str());
    } else if (*validate) {
      const auto report = airfed::validation::run_suite(airfed::validation::parse_suite(suite_name),
                                                        validate_seed);
      std::cout << report.format();
      return report.passed() ? 0 : 1;
    } else if (*replay) {
      const auto cfg = load(replay_flags);
      if (trial >= cfg.trials) {
        throw airfed::Error(airfed::Errc::invalid_config, "--trial must be below run.trials");
      }
      const auto trace = airfed::replay_trial(cfg, trial);
      std::printf("trial %zu (seed %llu): final gap %.6e\n", trial,
                  static_cast<unsigned long long>(airfed::trial_seed(cfg.seed, trial)), trace.final_gap);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "airfed: %s\n", e.what());
    return 2;
  }
  return 0;
}
