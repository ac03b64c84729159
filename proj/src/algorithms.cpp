#include "airfed/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "airfed/errors.hpp"
#include "airfed/theory.hpp"

namespace airfed {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

RecoveredModel exact_average(std::span<const RealVector> payloads) {
  RecoveredModel out;
  out.estimate = RealVector::Zero(payloads.front().size());
  for (const auto& p : payloads) out.estimate += p;
  out.estimate /= static_cast<double>(payloads.size());
  out.selected_count = payloads.size();
  return out;
}

RoundRecord record_from(const AggregationOutcome& outcome, std::size_t round) {
  RoundRecord rec;
  rec.round = round;
  rec.power_checks = outcome.power_checks;
  rec.max_tx_power = outcome.max_tx_power;
  if (outcome.recovered) {
    rec.selected_count = outcome.recovered->selected_count;
    rec.alpha = outcome.round.alpha;
    rec.eff_noise_var = outcome.recovered->eff_noise_var;
  } else {
    rec.deferred = true;
    rec.alpha = kNaN;
    rec.eff_noise_var = kNaN;
  }
  return rec;
}

RoundRecord error_free_record(std::size_t round, std::size_t n_devices) {
  RoundRecord rec;
  rec.round = round;
  rec.selected_count = n_devices;
  rec.alpha = kNaN;
  rec.eff_noise_var = kNaN;
  return rec;
}

}  // namespace

FedSplitState FedSplitState::initial(const FederatedProblem& prob, double step,
                                     const RealVector& theta0) {
  if (!(step > 0.0)) throw Error(Errc::non_positive_step, "FedSplitState: step must be > 0");
  if (static_cast<std::size_t>(theta0.size()) != prob.dim()) {
    throw Error(Errc::dimension_mismatch, "FedSplitState: theta0 has wrong length");
  }
  FedSplitState s;
  s.local_models.assign(prob.size(), theta0);
  s.server_estimate = theta0;
  s.step = step;
  return s;
}

RealVector fedsplit_local_update(const DeviceProblem& dev, const RealVector& server_est,
                                 const RealVector& local, double step) {
  if (server_est.size() != local.size()) {
    throw Error(Errc::dimension_mismatch, "fedsplit_local_update: server and local dims differ");
  }
  const RealVector half = prox(dev, step, 2.0 * server_est - local);
  return local + 2.0 * (half - server_est);
}

std::pair<FedSplitState, RoundRecord> fedsplit_round(const FederatedProblem& prob,
                                                     const FedSplitState& state,
                                                     const ChannelModel& chan, Rng& rng) {
  if (state.local_models.size() != prob.size()) {
    throw Error(Errc::dimension_mismatch, "fedsplit_round: state has wrong device count");
  }
  FedSplitState next;
  next.step = state.step;
  next.round = state.round + 1;
  next.local_models.reserve(prob.size());
  for (std::size_t n = 0; n < prob.size(); ++n) {
    next.local_models.push_back(fedsplit_local_update(prob.devices()[n], state.server_estimate,
                                                      state.local_models[n], state.step));
  }

  if (is_error_free(chan)) {
    next.server_estimate = exact_average(next.local_models).estimate;
    return {std::move(next), error_free_record(next.round, prob.size())};
  }

  const auto& params = std::get<ChannelParams>(chan);
  const AggregationOutcome outcome =
      aircomp_aggregate(next.local_models, params, rng, state.round);
  // nothing received: the server keeps its previous estimate
  next.server_estimate = outcome.recovered ? outcome.recovered->estimate : state.server_estimate;
  return {std::move(next), record_from(outcome, next.round)};
}

RealVector gd_payload(const DeviceProblem& dev, const RealVector& theta, double rate,
                      std::size_t local_steps) {
  if (local_steps == 1) return gradient(dev, theta);
  RealVector local = theta;
  RealVector acc = RealVector::Zero(theta.size());
  for (std::size_t k = 0; k < local_steps; ++k) {
    const RealVector g = gradient(dev, local);
    acc += g;
    local -= rate * g;
  }
  return acc;
}

std::pair<GdState, RoundRecord> gbma_round(const FederatedProblem& prob, const GdState& state,
                                           const ChannelModel& chan, Rng& rng) {
  if (!(state.rate > 0.0)) throw Error(Errc::non_positive_step, "gbma_round: rate must be > 0");
  if (state.local_steps < 1) throw Error(Errc::invalid_config, "gbma_round: local_steps must be >= 1");
  if (static_cast<std::size_t>(state.server_model.size()) != prob.dim()) {
    throw Error(Errc::dimension_mismatch, "gbma_round: model has wrong length");
  }
  GdState next = state;
  next.round = state.round + 1;

  if (is_error_free(chan) && state.local_steps == 1) {
    next.server_model = state.server_model - state.rate * global_gradient(prob, state.server_model);
    return {std::move(next), error_free_record(next.round, prob.size())};
  }

  std::vector<RealVector> payloads;
  payloads.reserve(prob.size());
  for (const auto& dev : prob.devices()) {
    payloads.push_back(gd_payload(dev, state.server_model, state.rate, state.local_steps));
  }

  if (is_error_free(chan)) {
    const RecoveredModel avg = exact_average(payloads);
    next.server_model = state.server_model -
                        state.rate * static_cast<double>(avg.selected_count) * avg.estimate;
    return {std::move(next), error_free_record(next.round, prob.size())};
  }

  const auto& params = std::get<ChannelParams>(chan);
  const AggregationOutcome outcome = aircomp_aggregate(payloads, params, rng, state.round);
  if (outcome.recovered) {
    next.server_model = state.server_model -
                        state.rate * static_cast<double>(outcome.recovered->selected_count) *
                            outcome.recovered->estimate;
  }
  return {std::move(next), record_from(outcome, next.round)};
}

const char* to_string(Algorithm algo) noexcept {
  switch (algo) {
    case Algorithm::fedsplit: return "fedsplit";
    case Algorithm::gbma: return "gbma";
    case Algorithm::fedsgd: return "fedsgd";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& text) {
  if (text == "fedsplit") return Algorithm::fedsplit;
  if (text == "gbma") return Algorithm::gbma;
  if (text == "fedsgd") return Algorithm::fedsgd;
  throw Error(Errc::invalid_config, "unknown algorithm '" + text + "'");
}

double default_gd_rate(const FederatedProblem& prob) {
  return 2.0 / (prob.ell_sum() + prob.lip_sum());
}

double fedsplit_delta0(const FederatedProblem& prob, double step,
                       const std::vector<RealVector>& initial_locals) {
  const auto targets = fixed_points(prob, step);
  if (initial_locals.size() != targets.size()) {
    throw Error(Errc::dimension_mismatch, "fedsplit_delta0: wrong number of local models");
  }
  double total = 0.0;
  for (std::size_t n = 0; n < targets.size(); ++n) {
    total += (initial_locals[n] - targets[n]).squaredNorm();
  }
  return total / static_cast<double>(targets.size());
}

namespace {

TraceRecord trace_record(const FederatedProblem& prob, const RealVector& estimate,
                         const RoundRecord& rec) {
  TraceRecord out;
  out.round = rec.round;
  out.gap = optimality_gap(prob, estimate);
  out.distance = (estimate - prob.theta_star()).norm();
  out.selected_count = rec.selected_count;
  out.alpha = rec.alpha;
  out.eff_noise_var = rec.eff_noise_var;
  out.deferred = rec.deferred;
  return out;
}

void absorb_power(TrialTrace& trace, const RoundRecord& rec) {
  trace.power_checks += rec.power_checks;
  trace.max_tx_power = std::max(trace.max_tx_power, rec.max_tx_power);
}

}  // namespace

TrialTrace run_algorithm(const FederatedProblem& prob, const AlgorithmSpec& algo,
                         const ChannelModel& chan, std::size_t rounds, Rng& rng) {
  if (rounds < 1) throw Error(Errc::invalid_config, "run_algorithm: rounds must be >= 1");
  if (const auto* params = std::get_if<ChannelParams>(&chan)) params->validate(prob.size());

  const RealVector theta0 = RealVector::Zero(static_cast<Eigen::Index>(prob.dim()));
  TrialTrace trace;
  trace.records.reserve(rounds);
  trace.initial_gap = optimality_gap(prob, theta0);
  trace.initial_distance = (theta0 - prob.theta_star()).norm();

  if (algo.kind == Algorithm::fedsplit) {
    const double step = algo.step.value_or(prob.default_step());
    FedSplitState state = FedSplitState::initial(prob, step, theta0);
    trace.step = step;
    trace.delta0 = fedsplit_delta0(prob, step, state.local_models);
    trace.measured_g = theory::measure_g(state.local_models);
    for (std::size_t t = 0; t < rounds; ++t) {
      auto [next, rec] = fedsplit_round(prob, state, chan, rng);
      state = std::move(next);
      trace.measured_g = std::max(trace.measured_g, theory::measure_g(state.local_models));
      trace.records.push_back(trace_record(prob, state.server_estimate, rec));
      absorb_power(trace, rec);
    }
  } else {
    const bool sgd = algo.kind == Algorithm::fedsgd;
    const ChannelModel effective = sgd ? ChannelModel{ErrorFree{}} : chan;
    GdState state;
    state.server_model = theta0;
    state.rate = algo.rate.value_or(default_gd_rate(prob));
    state.local_steps = sgd ? 1 : algo.local_steps;
    trace.step = state.rate;
    trace.delta0 = (theta0 - prob.theta_star()).squaredNorm();
    trace.measured_g = theta0.norm();
    for (std::size_t t = 0; t < rounds; ++t) {
      auto [next, rec] = gbma_round(prob, state, effective, rng);
      state = std::move(next);
      trace.measured_g = std::max(trace.measured_g, state.server_model.norm());
      trace.records.push_back(trace_record(prob, state.server_model, rec));
      absorb_power(trace, rec);
    }
  }
  trace.final_gap = trace.records.back().gap;
  return trace;
}

}  // namespace airfed
