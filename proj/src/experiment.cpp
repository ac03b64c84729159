#include "airfed/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "airfed/errors.hpp"
#include "airfed/theory.hpp"

namespace airfed {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string sci(double v) {
  if (std::isnan(v)) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

std::string compact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << contents;
  out.close();
  if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

bool has_thm1(const ExperimentConfig& cfg) {
  return cfg.algo.kind == Algorithm::fedsplit && cfg.error_free;
}

bool has_thm2(const ExperimentConfig& cfg) {
  return cfg.algo.kind == Algorithm::fedsplit && !cfg.error_free &&
         cfg.chan.mode == SelectionMode::top_b && cfg.chan.threshold > 0.0;
}

}  // namespace

FederatedProblem make_problem(const ExperimentConfig& cfg) {
  Rng rng(cfg.seed, Stream::problem);
  return gen_problem(cfg.gen, rng);
}

TrialTrace run_trial(const ExperimentConfig& cfg, const FederatedProblem& prob, std::size_t trial) {
  Rng rng(trial_seed(cfg.seed, trial), Stream::channel);
  return run_algorithm(prob, cfg.algo, cfg.channel_model(), cfg.rounds, rng);
}

ExperimentRun run_trials(const ExperimentConfig& cfg, const FederatedProblem& prob) {
  cfg.validate();
  std::vector<TrialTrace> traces(cfg.trials);
  const std::size_t workers = std::min(cfg.jobs, cfg.trials);

  if (workers <= 1) {
    for (std::size_t i = 0; i < cfg.trials; ++i) traces[i] = run_trial(cfg, prob, i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cfg.trials; i = next++) {
          try {
            traces[i] = run_trial(cfg, prob, i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  ExperimentRun run;
  run.aggregate = aggregate(cfg, prob, traces, default_label(cfg));
  run.traces = std::move(traces);
  return run;
}

std::string default_label(const ExperimentConfig& cfg) {
  std::string label = to_string(cfg.algo.kind);
  if (cfg.algo.kind == Algorithm::fedsgd || cfg.error_free) return label + "/error_free";
  return label + "/aircomp";
}

AggregateResult aggregate(const ExperimentConfig& cfg, const FederatedProblem& prob,
                          std::span<const TrialTrace> traces, std::string label) {
  if (traces.empty()) throw Error(Errc::invalid_config, "aggregate: no traces");
  const std::size_t rounds = traces.front().records.size();
  for (const auto& tr : traces) {
    if (tr.records.size() != rounds) {
      throw Error(Errc::dimension_mismatch, "aggregate: traces differ in length");
    }
  }

  AggregateResult out;
  out.label = std::move(label);
  out.trials = traces.size();
  out.kappa = prob.kappa();
  out.lip_sum = prob.lip_sum();
  out.delta0 = traces.front().delta0;
  out.step = traces.front().step;
  out.initial_gap = traces.front().initial_gap;
  out.max_power = cfg.chan.max_power;
  for (const auto& tr : traces) {
    out.measured_g = std::max(out.measured_g, tr.measured_g);
    out.power_checks += tr.power_checks;
    out.max_tx_power = std::max(out.max_tx_power, tr.max_tx_power);
  }

  theory::BoundInputs bound;
  const bool thm1 = has_thm1(cfg);
  const bool thm2 = has_thm2(cfg) && out.measured_g > 0.0;
  if (thm2) {
    bound.delta0 = out.delta0;
    bound.kappa = out.kappa;
    bound.lip_sum = out.lip_sum;
    bound.g_bound = out.measured_g;
    bound.b = cfg.chan.b;
    bound.dim = prob.dim();
    bound.noise_var = cfg.chan.noise_var;
    bound.threshold = cfg.chan.threshold;
    bound.max_power = cfg.chan.max_power;
  }

  const double p = static_cast<double>(traces.size());
  out.rows.reserve(rounds);
  for (std::size_t r = 0; r < rounds; ++r) {
    AggregateRow row;
    row.round = traces.front().records[r].round;
    row.min_gap = std::numeric_limits<double>::infinity();
    row.max_gap = -std::numeric_limits<double>::infinity();
    double gap_sum = 0.0;
    double selected_sum = 0.0;
    double alpha_sum = 0.0;
    std::size_t alpha_count = 0;
    for (const auto& tr : traces) {
      const auto& rec = tr.records[r];
      gap_sum += rec.gap;
      row.min_gap = std::min(row.min_gap, rec.gap);
      row.max_gap = std::max(row.max_gap, rec.gap);
      selected_sum += static_cast<double>(rec.selected_count);
      if (std::isfinite(rec.alpha)) {
        alpha_sum += rec.alpha;
        ++alpha_count;
      }
    }
    row.mean_gap = gap_sum / p;
    // keep mean inside [min, max] under rounding
    row.mean_gap = std::clamp(row.mean_gap, row.min_gap, row.max_gap);
    row.mean_selected = selected_sum / p;
    row.mean_alpha = alpha_count ? alpha_sum / static_cast<double>(alpha_count) : kNaN;
    row.thm1_bound = thm1 ? theory::theorem1_bound(out.delta0, out.kappa, row.round - 1) : kNaN;
    row.thm2_as_stated =
        thm2 ? theory::theorem2_bound(bound, row.round, theory::BoundVariant::as_stated) : kNaN;
    row.thm2_as_proved =
        thm2 ? theory::theorem2_bound(bound, row.round, theory::BoundVariant::as_proved) : kNaN;
    out.rows.push_back(row);
  }
  out.final_mean_gap = out.rows.back().mean_gap;
  return out;
}

AggregateResult run_experiment(const ExperimentConfig& cfg) {
  const FederatedProblem prob = make_problem(cfg);
  ExperimentRun run = run_trials(cfg, prob);
  emit_csv(run.aggregate, cfg.output_dir / "result.csv");
  emit_plotdata(std::span<const AggregateResult>(&run.aggregate, 1), cfg.output_dir / "plot.dat");
  write_file(cfg.output_dir / "summary.txt", format_summary(cfg, run.aggregate));
  if (cfg.dump_trials) {
    for (std::size_t i = 0; i < run.traces.size(); ++i) {
      emit_trial_csv(run.traces[i], cfg.output_dir / ("trial_" + std::to_string(i) + ".csv"));
    }
  }
  return run.aggregate;
}

std::vector<AggregateResult> sweep_kappa(const ExperimentConfig& cfg, std::span<const double> kappas) {
  if (kappas.empty()) throw Error(Errc::invalid_config, "sweep_kappa: no kappa values");
  std::vector<AggregateResult> results;
  for (double kappa : kappas) {
    if (!(kappa >= 1.0)) throw Error(Errc::invalid_kappa, "sweep_kappa: kappa = " + compact(kappa));
    ExperimentConfig sub = cfg;
    sub.gen.conditioning = Conditioning::ill;
    sub.gen.kappa_target = kappa;
    sub.output_dir = cfg.output_dir / ("kappa_" + compact(kappa));
    AggregateResult res = run_experiment(sub);
    res.label = "kappa=" + compact(kappa) + "/" + default_label(sub);
    results.push_back(std::move(res));
  }
  emit_plotdata(results, cfg.output_dir / "plot.dat");
  return results;
}

TrialTrace replay_trial(const ExperimentConfig& cfg, std::size_t trial) {
  cfg.validate();
  const FederatedProblem prob = make_problem(cfg);
  TrialTrace trace = run_trial(cfg, prob, trial);
  emit_trial_csv(trace, cfg.output_dir / ("trial_" + std::to_string(trial) + ".csv"));
  return trace;
}

std::string format_csv(const AggregateResult& result) {
  std::string out = kResultHeader;
  out += '\n';
  for (const auto& row : result.rows) {
    out += std::to_string(row.round);
    for (double v : {row.mean_gap, row.min_gap, row.max_gap, row.mean_selected, row.mean_alpha,
                     row.thm1_bound, row.thm2_as_stated, row.thm2_as_proved}) {
      out += ',';
      out += sci(v);
    }
    out += '\n';
  }
  return out;
}

std::string format_plotdata(std::span<const AggregateResult> results) {
  if (results.empty()) throw Error(Errc::invalid_config, "emit_plotdata: no results");
  std::string out = "# label round log10_mean_gap\n";
  char buf[64];
  for (const auto& res : results) {
    for (const auto& row : res.rows) {
      const double lg = row.mean_gap > 0.0 ? std::max(std::log10(row.mean_gap), kLogGapFloor)
                                           : kLogGapFloor;
      std::snprintf(buf, sizeof buf, " %zu %.17e\n", row.round, lg);
      out += res.label;
      out += buf;
    }
  }
  return out;
}

std::string format_trial_csv(const TrialTrace& trace) {
  std::string out = kTrialHeader;
  out += '\n';
  for (const auto& rec : trace.records) {
    out += std::to_string(rec.round) + ',' + sci(rec.gap) + ',' + sci(rec.distance) + ',' +
           std::to_string(rec.selected_count) + ',' + sci(rec.alpha) + ',' +
           sci(rec.eff_noise_var) + ',' + (rec.deferred ? "1" : "0") + '\n';
  }
  return out;
}

std::string format_summary(const ExperimentConfig& cfg, const AggregateResult& result) {
  std::ostringstream out;
  out << "# configuration\n" << render_config(cfg, false) << "\n# results\n";
  out << "label = " << result.label << "\n"
      << "trials = " << result.trials << "\n"
      << "rounds = " << result.rows.size() << "\n"
      << "kappa = " << sci(result.kappa) << "\n"
      << "lip_sum = " << sci(result.lip_sum) << "\n"
      << "step = " << sci(result.step) << "\n"
      << "delta0 = " << sci(result.delta0) << "\n"
      << "measured_g = " << sci(result.measured_g) << "\n"
      << "initial_gap = " << sci(result.initial_gap) << "\n"
      << "final_mean_gap = " << sci(result.final_mean_gap) << "\n"
      << "max_power = " << sci(result.max_power) << "\n"
      << "power_checks = " << result.power_checks << "\n"
      << "max_tx_power = " << sci(result.max_tx_power) << "\n";
  return out.str();
}

void emit_csv(const AggregateResult& result, const std::filesystem::path& path) {
  write_file(path, format_csv(result));
}

void emit_plotdata(std::span<const AggregateResult> results, const std::filesystem::path& path) {
  write_file(path, format_plotdata(results));
}

void emit_trial_csv(const TrialTrace& trace, const std::filesystem::path& path) {
  write_file(path, format_trial_csv(trace));
}

}  // namespace airfed
