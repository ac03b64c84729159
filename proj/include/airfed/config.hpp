#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "airfed/algorithms.hpp"
#include "airfed/channel.hpp"
#include "airfed/problems.hpp"

namespace airfed {

/// Everything one experiment needs. Read from an INI-style file:
///
///   [problem]   devices, samples_per_device, dim, data_noise_var,
///               conditioning (well | ill), kappa
///   [channel]   error_free, noise_var, threshold, max_power (required),
///               selection (threshold_only | top_b | with_replacement), b
///   [algorithm] name (fedsplit | gbma | fedsgd), step, rate, local_steps
///   [run]       rounds (required), trials, seed, output_dir, jobs, dump_trials
///   [sweep]     kappas (comma separated)
///
/// `step` and `rate` accept `auto`. Unknown sections or keys are rejected.
struct ExperimentConfig {
  GenConfig gen;
  bool error_free = false;
  ChannelParams chan;
  AlgorithmSpec algo;
  std::size_t rounds = 400;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  std::size_t jobs = 1;
  bool dump_trials = false;
  std::vector<double> kappas;

  ChannelModel channel_model() const;
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sets one `section.key` to `value`, with the same parsing rules as the file.
void apply_override(ExperimentConfig& cfg, const std::string& dotted_key, const std::string& value);

/// Canonical INI rendering; parse_config(render_config(c)) reproduces c.
/// Without `include_runtime` the output_dir and jobs keys are left out, so the
/// echo does not depend on where or how parallel the run happened.
std::string render_config(const ExperimentConfig& cfg, bool include_runtime = true);

}  // namespace airfed
