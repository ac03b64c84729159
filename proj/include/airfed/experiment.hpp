#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "airfed/algorithms.hpp"
#include "airfed/config.hpp"
#include "airfed/problems.hpp"

namespace airfed {

/// One row of result.csv. NaN marks a column that does not apply.
struct AggregateRow {
  std::size_t round = 0;
  double mean_gap = 0.0;
  double min_gap = 0.0;
  double max_gap = 0.0;
  double mean_selected = 0.0;
  double mean_alpha = 0.0;
  double thm1_bound = 0.0;
  double thm2_as_stated = 0.0;
  double thm2_as_proved = 0.0;
};

struct AggregateResult {
  std::string label;
  std::vector<AggregateRow> rows;
  std::size_t trials = 0;
  double initial_gap = 0.0;
  double final_mean_gap = 0.0;
  double measured_g = 0.0;  // max over trials
  double delta0 = 0.0;
  double kappa = 0.0;
  double lip_sum = 0.0;
  double step = 0.0;
  double max_power = 0.0;
  std::size_t power_checks = 0;
  double max_tx_power = 0.0;
};

struct ExperimentRun {
  AggregateResult aggregate;
  std::vector<TrialTrace> traces;
};

/// Trial i runs its channel on seed ^ i; the problem is drawn once per
/// experiment from `seed` on the problem stream.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  return seed ^ static_cast<std::uint64_t>(trial);
}

FederatedProblem make_problem(const ExperimentConfig& cfg);

TrialTrace run_trial(const ExperimentConfig& cfg, const FederatedProblem& prob, std::size_t trial);

/// Runs every trial (up to cfg.jobs at once) and aggregates in trial order.
/// No files are written.
ExperimentRun run_trials(const ExperimentConfig& cfg, const FederatedProblem& prob);

AggregateResult aggregate(const ExperimentConfig& cfg, const FederatedProblem& prob,
                          std::span<const TrialTrace> traces, std::string label);

std::string default_label(const ExperimentConfig& cfg);

/// run_trials + result.csv, plot.dat, summary.txt (and trial_<i>.csv when
/// dump_trials) under cfg.output_dir.
AggregateResult run_experiment(const ExperimentConfig& cfg);

/// One experiment per kappa on the same seeds, written to
/// output_dir/kappa_<k>/ plus a combined output_dir/plot.dat.
std::vector<AggregateResult> sweep_kappa(const ExperimentConfig& cfg, std::span<const double> kappas);

/// Re-runs a single trial and writes output_dir/trial_<i>.csv.
TrialTrace replay_trial(const ExperimentConfig& cfg, std::size_t trial);

// Output formats. Numbers are printed with %.17e; NaN prints as an empty field.

inline constexpr const char* kResultHeader =
    "round,mean_gap,min_gap,max_gap,mean_selected,mean_alpha,thm1_bound,thm2_as_stated,"
    "thm2_as_proved";
inline constexpr const char* kTrialHeader =
    "round,gap,distance,selected,alpha,eff_noise_var,deferred";
inline constexpr double kLogGapFloor = -16.0;

std::string format_csv(const AggregateResult& result);
std::string format_plotdata(std::span<const AggregateResult> results);
std::string format_trial_csv(const TrialTrace& trace);
std::string format_summary(const ExperimentConfig& cfg, const AggregateResult& result);

void emit_csv(const AggregateResult& result, const std::filesystem::path& path);
void emit_plotdata(std::span<const AggregateResult> results, const std::filesystem::path& path);
void emit_trial_csv(const TrialTrace& trace, const std::filesystem::path& path);

}  // namespace airfed
