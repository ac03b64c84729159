#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "airfed/channel.hpp"
#include "airfed/problems.hpp"
#include "airfed/rng.hpp"

namespace airfed::validation {

enum class Suite { prox, channel, estimator, bounds, all };

const char* to_string(Suite suite) noexcept;
Suite parse_suite(const std::string& text);

struct Check {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct Report {
  std::vector<Check> checks;

  bool passed() const;
  /// One line per check plus a closing tally.
  std::string format() const;
};

/// Runs the named suite (every suite for Suite::all) from `seed`. Failures are
/// report content, never exceptions.
Report run_suite(Suite suite, std::uint64_t seed);

// Monte Carlo estimators of the aggregation statistics.

struct Unbiasedness {
  RealVector mean;       // Monte Carlo mean of the recovered estimate
  RealVector target;     // (1/N) sum theta_n
  RealVector std_error;  // per coordinate
  double worst_z = 0.0;  // max_j |mean_j - target_j| / std_error_j
};

/// Full aircomp_aggregate rounds in with_replacement mode (params.mode is
/// overridden) with the payloads held fixed.
Unbiasedness mc_unbiasedness(std::span<const RealVector> models, ChannelParams params,
                             std::size_t samples, Rng& rng);

struct MomentMatch {
  double measured = 0.0;
  double expected = 0.0;
  double rel_error() const;
};

/// ||w~||^2 with w~ = y / (sqrt(alpha) B) - mean of the transmitted models,
/// y produced by precode + mac_superpose over B fixed devices. Compared with
/// equivalent_noise_norm_expect.
MomentMatch mc_noise_norm(std::span<const RealVector> models, double alpha, double noise_var,
                          std::size_t samples, Rng& rng);

/// E||theta_B - theta_bar||^2 for B indices drawn uniformly with replacement,
/// against (1/(BN)) sum ||theta_n||^2 - (1/B) ||theta_bar||^2.
MomentMatch mc_sampling_variance(std::span<const RealVector> models, std::size_t b,
                                 std::size_t samples, Rng& rng);

struct Theorem1Check {
  std::size_t rounds_checked = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max distance / bound over checked rounds
};

/// Multiplicative slack on the distance bound.
inline constexpr double kTheorem1Slack = 1e-9;

/// Error-free FedSplit at the default step from theta0 = 0. Round t is checked
/// against theorem1_bound(delta0, kappa, t - 1) for as long as that bound stays
/// above 1e-12 (1 + ||theta*||); below it the iterates sit at rounding level.
Theorem1Check check_theorem1(const FederatedProblem& prob, std::size_t rounds);

}  // namespace airfed::validation
