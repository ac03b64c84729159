// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   airfed_acceptance [output_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "airfed/channel.hpp"
#include "airfed/config.hpp"
#include "airfed/errors.hpp"
#include "airfed/experiment.hpp"
#include "airfed/validation.hpp"
#include "oracles.hpp"

using namespace airfed;
namespace fs = std::filesystem;

namespace {

// criterion 1
constexpr std::size_t kBoundInstances = 20;
constexpr std::size_t kBoundRounds = 400;
// criterion 2
constexpr double kOptimalityGap = 1e-10;
constexpr std::size_t kOptimalityRounds = 400;
// criterion 3
constexpr double kFloorSeparation = 10.0;
constexpr std::size_t kFloorWindow = 100;       // last rounds averaged into the floor
constexpr double kLinearPhaseDrop = 100.0;      // initial gap / floor
constexpr double kLinearPhaseReach = 2.0;       // decreasing until mean gap <= 2 floor
// criterion 4
constexpr double kSweepTarget = 1e-3;
constexpr double kFedsplitRatioLo = 5.0, kFedsplitRatioHi = 20.0;
constexpr double kGdRatioLo = 50.0, kGdRatioHi = 200.0;
// criterion 5
constexpr std::size_t kTopB = 50;
// criterion 6
constexpr std::size_t kMonteCarlo = 100000;
constexpr double kUnbiasedZ = 3.0;
constexpr double kNoiseNormRel = 0.01;
constexpr double kSamplingRel = 0.02;
// criterion 7
constexpr std::size_t kProxInstances = 100;
constexpr double kProxAgreement = 1e-8;
constexpr double kProxResidual = 1e-9;
constexpr double kNonexpansiveSlack = 1e-12;
// criterion 8
constexpr double kTransceiverExact = 1e-10;

fs::path g_out;
fs::path g_configs = AIRFED_CONFIG_DIR;

struct Outcome {
  bool passed = false;
  std::string detail;
};

char g_buf[512];

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(g_buf, sizeof g_buf, f, args...);
  return g_buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig well_config() { return load_config(g_configs / "well_conditioned.cfg"); }
ExperimentConfig ill_config() { return load_config(g_configs / "ill_conditioned.cfg"); }

double tail_floor(const AggregateResult& r) {
  const std::size_t n = std::min(kFloorWindow, r.rows.size());
  double sum = 0.0;
  for (std::size_t i = r.rows.size() - n; i < r.rows.size(); ++i) sum += r.rows[i].mean_gap;
  return sum / static_cast<double>(n);
}

bool linear_phase(const AggregateResult& r, double floor) {
  if (!(r.initial_gap >= kLinearPhaseDrop * floor)) return false;
  double prev = r.initial_gap;
  for (const auto& row : r.rows) {
    if (!(row.mean_gap < prev)) return false;
    if (row.mean_gap <= kLinearPhaseReach * floor) return true;
    prev = row.mean_gap;
  }
  return false;
}

std::optional<std::size_t> rounds_to(const AggregateResult& r, double target) {
  for (const auto& row : r.rows) {
    if (row.mean_gap <= target) return row.round;
  }
  return std::nullopt;
}

// Power bookkeeping shared by criteria 3-5 and reported under 8.
struct PowerTally {
  std::size_t checks = 0;
  double max_power = 0.0;
  double budget = std::numeric_limits<double>::infinity();
  bool violation = false;
  void absorb(const AggregateResult& r) {
    checks += r.power_checks;
    max_power = std::max(max_power, r.max_tx_power);
    budget = std::min(budget, r.max_power);
  }
};
PowerTally g_power;

// CSV bytes produced by criteria 3-5, re-checked under 9.
struct Produced {
  ExperimentConfig cfg;
  std::vector<double> kappas;  // empty for run_experiment
  std::vector<fs::path> files;
};
std::vector<Produced> g_produced;

AggregateResult tracked_run(const ExperimentConfig& cfg) {
  try {
    AggregateResult r = run_experiment(cfg);
    g_power.absorb(r);
    g_produced.push_back({cfg, {}, {cfg.output_dir / "result.csv"}});
    return r;
  } catch (const Error& e) {
    if (e.code() == Errc::power_violation) g_power.violation = true;
    throw;
  }
}

Outcome criterion1() {
  std::size_t violations = 0, rounds = 0;
  double worst = 0.0;
  const auto base = well_config();
  for (std::size_t i = 0; i < kBoundInstances; ++i) {
    Rng rng(trial_seed(base.seed, i), Stream::problem);
    const auto prob = gen_problem(base.gen, rng);
    const auto c = validation::check_theorem1(prob, kBoundRounds);
    violations += c.violations;
    rounds += c.rounds_checked;
    worst = std::max(worst, c.worst_ratio);
  }
  return {violations == 0 && rounds > 0,
          fmt("%zu instances, %zu rounds checked, violations %zu, worst distance/bound %.3g",
              kBoundInstances, rounds, violations, worst)};
}

Outcome criterion2() {
  auto cfg = well_config();
  cfg.error_free = true;
  cfg.rounds = kOptimalityRounds;
  double worst_final = 0.0;
  std::size_t latest = 0;
  bool ok = true;
  for (std::size_t i = 0; i < kBoundInstances; ++i) {
    Rng rng(trial_seed(cfg.seed, i), Stream::problem);
    const auto prob = gen_problem(cfg.gen, rng);
    Rng chan(0, Stream::channel);
    const auto tr = run_algorithm(prob, cfg.algo, ErrorFree{}, cfg.rounds, chan);
    std::optional<std::size_t> hit;
    for (const auto& r : tr.records) {
      if (r.gap < kOptimalityGap) {
        hit = r.round;
        break;
      }
    }
    worst_final = std::max(worst_final, tr.final_gap);
    if (!hit || !(tr.final_gap < kOptimalityGap)) ok = false;
    if (hit) latest = std::max(latest, *hit);
  }
  return {ok, fmt("worst final gap %.3e (< %.0e), slowest instance below target at round %zu of %zu",
                  worst_final, kOptimalityGap, latest, kOptimalityRounds)};
}

Outcome criterion3() {
  auto fs_cfg = well_config();
  fs_cfg.output_dir = g_out / "c3_fedsplit";
  auto gd_cfg = fs_cfg;
  gd_cfg.algo.kind = Algorithm::gbma;
  gd_cfg.output_dir = g_out / "c3_gbma";
  const auto fs_res = tracked_run(fs_cfg);
  const auto gd_res = tracked_run(gd_cfg);
  const double f_floor = tail_floor(fs_res);
  const double g_floor = tail_floor(gd_res);
  const bool sep = g_floor >= kFloorSeparation * f_floor;
  const bool lin_f = linear_phase(fs_res, f_floor);
  const bool lin_g = linear_phase(gd_res, g_floor);
  return {sep && lin_f && lin_g,
          fmt("floors fedsplit %.3e, gbma %.3e, gbma/fedsplit %.3g (need >= %.0f); linear phase "
              "fedsplit %s, gbma %s",
              f_floor, g_floor, g_floor / f_floor, kFloorSeparation, lin_f ? "yes" : "no",
              lin_g ? "yes" : "no")};
}

Outcome criterion4() {
  const std::vector<double> ks{1e2, 1e4};
  auto fs_cfg = ill_config();
  fs_cfg.error_free = true;
  fs_cfg.trials = 1;
  fs_cfg.rounds = static_cast<std::size_t>(20.0 * std::sqrt(ks.back())) + 200;
  fs_cfg.output_dir = g_out / "c4_fedsplit";
  auto gd_cfg = fs_cfg;
  gd_cfg.algo.kind = Algorithm::gbma;
  gd_cfg.rounds = static_cast<std::size_t>(10.0 * ks.back());
  gd_cfg.output_dir = g_out / "c4_gbma";

  const auto fs_res = sweep_kappa(fs_cfg, ks);
  const auto gd_res = sweep_kappa(gd_cfg, ks);
  for (const auto* cfg : {&fs_cfg, &gd_cfg}) {
    Produced p{*cfg, ks, {}};
    for (double k : ks) p.files.push_back(cfg->output_dir / fmt("kappa_%g", k) / "result.csv");
    g_produced.push_back(std::move(p));
  }

  const auto f_lo = rounds_to(fs_res[0], kSweepTarget), f_hi = rounds_to(fs_res[1], kSweepTarget);
  const auto g_lo = rounds_to(gd_res[0], kSweepTarget), g_hi = rounds_to(gd_res[1], kSweepTarget);
  if (!f_lo || !f_hi || !g_lo || !g_hi) {
    return {false, "a run never reached the target gap"};
  }
  const double rf = static_cast<double>(*f_hi) / static_cast<double>(*f_lo);
  const double rg = static_cast<double>(*g_hi) / static_cast<double>(*g_lo);
  const bool ok = rf >= kFedsplitRatioLo && rf <= kFedsplitRatioHi && rg >= kGdRatioLo &&
                  rg <= kGdRatioHi;
  return {ok, fmt("rounds to gap %.0e: fedsplit %zu -> %zu (x%.3g, need [%.0f, %.0f]); "
                  "gbma %zu -> %zu (x%.3g, need [%.0f, %.0f])",
                  kSweepTarget, *f_lo, *f_hi, rf, kFedsplitRatioLo, kFedsplitRatioHi, *g_lo, *g_hi,
                  rg, kGdRatioLo, kGdRatioHi)};
}

Outcome criterion5() {
  auto cfg = well_config();
  cfg.chan.mode = SelectionMode::top_b;
  cfg.chan.b = kTopB;
  cfg.output_dir = g_out / "c5_topb";
  const auto res = tracked_run(cfg);
  std::size_t violations = 0, compared = 0;
  double worst = 0.0;
  for (const auto& row : res.rows) {
    if (std::isnan(row.thm2_as_proved)) continue;
    ++compared;
    worst = std::max(worst, row.mean_gap / row.thm2_as_proved);
    if (row.mean_gap > row.thm2_as_proved) ++violations;
  }
  return {compared == res.rows.size() && violations == 0,
          fmt("%zu rounds, B = %zu, measured G %.4g, violations %zu, worst gap/bound %.3g", compared,
              kTopB, res.measured_g, violations, worst)};
}

Outcome criterion6() {
  Rng rng(well_config().seed, Stream::validation);
  GenConfig gen;
  const auto prob = gen_problem(gen, rng);
  const auto models = fixed_points(prob, prob.default_step());

  ChannelParams params;
  params.noise_var = 1.0;
  params.threshold = 0.5;
  params.max_power = 10.0;
  params.b = 10;
  const auto u = validation::mc_unbiasedness(models, params, kMonteCarlo, rng);
  const std::vector<RealVector> subset(models.begin(), models.begin() + 10);
  const auto n = validation::mc_noise_norm(subset, 0.5, 1.0, kMonteCarlo, rng);
  const auto s = validation::mc_sampling_variance(models, 10, kMonteCarlo, rng);
  const bool ok = u.worst_z <= kUnbiasedZ && n.rel_error() <= kNoiseNormRel &&
                  s.rel_error() <= kSamplingRel;
  return {ok, fmt("(a) max |z| %.3g (<= %.0f); (b) noise norm rel err %.2e (<= %.0e); "
                  "(c) sampling variance rel err %.2e (<= %.0e)",
                  u.worst_z, kUnbiasedZ, n.rel_error(), kNoiseNormRel, s.rel_error(), kSamplingRel)};
}

Outcome criterion7() {
  Rng rng(well_config().seed, Stream::validation);
  double agree = 0.0, resid = 0.0, expand = 0.0;
  bool ok = true;
  for (std::size_t k = 0; k < kProxInstances; ++k) {
    const std::size_t d = 1 + rng.below(8);
    const std::size_t m = d + rng.below(4 * d);
    const auto dev = oracle::random_device(m, d, rng);
    const double s = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
    const RealVector z1 = 3.0 * linalg::standard_normal_vector(d, rng);
    const RealVector z2 = 3.0 * linalg::standard_normal_vector(d, rng);
    const RealVector p1 = prox(dev, s, z1);
    const RealVector p2 = prox(dev, s, z2);
    const RealVector q1 = oracle::prox_by_descent(dev, s, z1);

    const double a = (p1 - q1).norm() / (1.0 + q1.norm());
    const double r = (gradient(dev, p1) + (p1 - z1) / s).norm() / (1.0 + z1.norm());
    const double e = (p1 - p2).norm() / (z1 - z2).norm();
    agree = std::max(agree, a);
    resid = std::max(resid, r);
    expand = std::max(expand, e);
    if (a > kProxAgreement || r > kProxResidual || e > 1.0 + kNonexpansiveSlack) ok = false;
  }
  return {ok, fmt("%zu instances: max oracle disagreement %.2e (<= %.0e), max residual %.2e "
                  "(<= %.0e), max ||dp||/||dz|| %.6f",
                  kProxInstances, agree, kProxAgreement, resid, kProxResidual, expand)};
}

Outcome criterion8() {
  Rng rng(well_config().seed, Stream::validation);
  const auto prob = gen_problem(GenConfig{}, rng);
  std::vector<RealVector> models = fixed_points(prob, prob.default_step());
  for (auto& m : models) m = m.normalized() * 1.5;
  RealVector avg = RealVector::Zero(prob.dim());
  for (const auto& m : models) avg += m;
  avg /= static_cast<double>(models.size());

  ChannelParams p;
  p.noise_var = 0.0;
  p.threshold = 0.0;
  p.max_power = 10.0;
  const auto out = aircomp_aggregate(models, p, rng, 0);
  const double err = (out.recovered->estimate - avg).cwiseAbs().maxCoeff();

  const bool power_ok = !g_power.violation && g_power.checks > 0 &&
                        g_power.max_power <= g_power.budget + kPowerSlack;
  return {err <= kTransceiverExact && power_ok,
          fmt("noiseless average error %.2e (<= %.0e); %zu power checks in criteria 3-5, "
              "max ||x||^2 %.6g vs P0 %.6g",
              err, kTransceiverExact, g_power.checks, g_power.max_power, g_power.budget)};
}

Outcome criterion9() {
  std::size_t files = 0, mismatched = 0;
  for (const auto& prod : g_produced) {
    std::vector<std::string> before;
    for (const auto& f : prod.files) before.push_back(slurp(f));
    auto cfg = prod.cfg;
    cfg.output_dir = cfg.output_dir.string() + "_repeat";
    cfg.jobs = 3;  // the merge must not depend on parallelism
    if (prod.kappas.empty()) {
      run_experiment(cfg);
    } else {
      sweep_kappa(cfg, prod.kappas);
    }
    for (std::size_t i = 0; i < prod.files.size(); ++i) {
      const fs::path again = cfg.output_dir / fs::relative(prod.files[i], prod.cfg.output_dir);
      ++files;
      if (before[i].empty() || slurp(again) != before[i]) ++mismatched;
    }
  }
  return {files > 0 && mismatched == 0,
          fmt("%zu CSVs from criteria 3-5 re-run with 3 jobs, %zu differ", files, mismatched)};
}

}  // namespace

int main(int argc, char** argv) {
  g_out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "airfed_acceptance";
  fs::remove_all(g_out);
  fs::create_directories(g_out);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"distance bound, error-free fedsplit", criterion1},
      {"error-free fedsplit reaches the optimum", criterion2},
      {"noisy floors, fedsplit vs gbma", criterion3},
      {"rounds-to-target scaling with kappa", criterion4},
      {"noisy top-b gap under the error bound", criterion5},
      {"estimator Monte Carlo properties", criterion6},
      {"prox oracle equivalence", criterion7},
      {"transceiver exactness and power budget", criterion8},
      {"byte-identical reruns", criterion9},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("raised: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %zu: %s  %s  [%s] (%.1fs)\n", i + 1, o.passed ? "PASS" : "FAIL",
                criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.passed;
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures ? 1 : 0;
}
