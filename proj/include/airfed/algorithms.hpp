#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "airfed/channel.hpp"
#include "airfed/problems.hpp"
#include "airfed/rng.hpp"

namespace airfed {

/// Ideal uplink: the server receives the exact average.
struct ErrorFree {};

using ChannelModel = std::variant<ErrorFree, ChannelParams>;

inline bool is_error_free(const ChannelModel& chan) {
  return std::holds_alternative<ErrorFree>(chan);
}

struct FedSplitState {
  std::vector<RealVector> local_models;
  RealVector server_estimate;
  double step = 0.0;
  std::size_t round = 0;

  /// Every device and the server start at theta0.
  static FedSplitState initial(const FederatedProblem& prob, double step, const RealVector& theta0);
};

struct GdState {
  RealVector server_model;
  double rate = 0.0;
  std::size_t local_steps = 1;
  std::size_t round = 0;
};

/// Channel-side facts about one communication round.
struct RoundRecord {
  std::size_t round = 0;
  std::size_t selected_count = 0;
  double alpha = 0.0;          // NaN when nothing was transmitted or error-free
  double eff_noise_var = 0.0;  // NaN when nothing was transmitted or error-free
  bool deferred = false;       // no transmission reached the server
  std::size_t power_checks = 0;
  double max_tx_power = 0.0;
};

/// theta_n + 2 (prox_{s,n}(2 server_est - theta_n) - server_est)
RealVector fedsplit_local_update(const DeviceProblem& dev, const RealVector& server_est,
                                 const RealVector& local, double step);

std::pair<FedSplitState, RoundRecord> fedsplit_round(const FederatedProblem& prob,
                                                     const FedSplitState& state,
                                                     const ChannelModel& chan, Rng& rng);

/// Per-device payload for the gradient methods: the sum of the gradients seen
/// along `local_steps` local descent steps (the plain gradient when 1).
RealVector gd_payload(const DeviceProblem& dev, const RealVector& theta, double rate,
                      std::size_t local_steps);

/// Gradient step over the multiple-access channel: the recovered average
/// payload is rescaled by |B| so that the noiseless all-selected limit is
/// theta - rate * grad F(theta).
std::pair<GdState, RoundRecord> gbma_round(const FederatedProblem& prob, const GdState& state,
                                           const ChannelModel& chan, Rng& rng);

enum class Algorithm { fedsplit, gbma, fedsgd };

const char* to_string(Algorithm algo) noexcept;
Algorithm parse_algorithm(const std::string& text);

struct AlgorithmSpec {
  Algorithm kind = Algorithm::fedsplit;
  std::optional<double> step;  // fedsplit; default 1/sqrt(ell_* L^*)
  std::optional<double> rate;  // gbma/fedsgd; default 2/(sum ell_n + sum L_n)
  std::size_t local_steps = 1;
};

double default_gd_rate(const FederatedProblem& prob);

struct TraceRecord {
  std::size_t round = 0;
  double gap = 0.0;       // F(theta_hat^t) - F(theta*)
  double distance = 0.0;  // ||theta_hat^t - theta*||
  std::size_t selected_count = 0;
  double alpha = 0.0;
  double eff_noise_var = 0.0;
  bool deferred = false;
};

struct TrialTrace {
  double initial_gap = 0.0;       // at theta0, before round 1
  double initial_distance = 0.0;
  std::vector<TraceRecord> records;  // rounds 1..T
  double final_gap = 0.0;
  double measured_g = 0.0;  // max over t, n of ||theta_n^t|| (server model for GD)
  double delta0 = 0.0;      // (1/N) sum ||theta_n^0 - theta_n*||^2 (||theta^0 - theta*||^2 for GD)
  double step = 0.0;        // s for fedsplit, eta for GD
  std::size_t power_checks = 0;
  double max_tx_power = 0.0;
};

/// Runs `rounds` rounds from theta0 = 0. fedsgd always runs error-free with a
/// single local step.
TrialTrace run_algorithm(const FederatedProblem& prob, const AlgorithmSpec& algo,
                         const ChannelModel& chan, std::size_t rounds, Rng& rng);

/// (1/N) sum ||theta_n^0 - theta_n*||^2 for the FedSplit fixed points at `step`.
double fedsplit_delta0(const FederatedProblem& prob, double step,
                       const std::vector<RealVector>& initial_locals);

}  // namespace airfed
