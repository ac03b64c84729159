#include "airfed/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "airfed/algorithms.hpp"
#include "airfed/errors.hpp"
#include "airfed/theory.hpp"

namespace airfed::validation {

namespace {

constexpr std::size_t kMonteCarloSamples = 100000;

void add(Report& r, Suite suite, std::string name, double measured, double tol, bool ok) {
  r.checks.push_back({to_string(suite), std::move(name), measured, tol, ok});
}

void add_le(Report& r, Suite suite, std::string name, double measured, double tol) {
  add(r, suite, std::move(name), measured, tol, measured <= tol);
}

RealVector average(std::span<const RealVector> models) {
  RealVector avg = RealVector::Zero(models.front().size());
  for (const auto& m : models) avg += m;
  return avg / static_cast<double>(models.size());
}

/// Payloads that look like FedSplit local models: the fixed points of a
/// generated problem.
std::vector<RealVector> sample_models(std::size_t n, Rng& rng) {
  GenConfig gen;
  gen.n_devices = n;
  const FederatedProblem prob = gen_problem(gen, rng);
  return fixed_points(prob, prob.default_step());
}

DeviceProblem random_device(Rng& rng) {
  const std::size_t d = 1 + rng.below(8);
  const std::size_t m = d + rng.below(4 * d);
  RealMatrix x = linalg::standard_normal_matrix(m, d, rng);
  RealVector y = linalg::standard_normal_vector(m, rng);
  return DeviceProblem(std::move(x), std::move(y));
}

void prox_suite(Report& r, std::uint64_t seed) {
  Rng rng(seed, Stream::validation);
  double worst_residual = 0.0;
  double worst_expansion = 0.0;
  std::size_t built = 0;
  while (built < 100) {
    DeviceProblem dev = [&]() -> DeviceProblem {
      for (;;) {
        try {
          return random_device(rng);
        } catch (const Error& e) {
          if (e.code() != Errc::rank_deficient) throw;
        }
      }
    }();
    ++built;
    const double s = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
    const auto d = dev.dim();
    const RealVector z1 = 3.0 * linalg::standard_normal_vector(d, rng);
    const RealVector z2 = 3.0 * linalg::standard_normal_vector(d, rng);
    const RealVector x1 = prox(dev, s, z1);
    const RealVector x2 = prox(dev, s, z2);

    const RealVector grad = dev.gram() * x1 - dev.moment() + (x1 - z1) / s;
    const double scale = std::max(1.0, dev.moment().norm() + z1.norm() / s);
    worst_residual = std::max(worst_residual, grad.norm() / scale);
    worst_expansion = std::max(worst_expansion, (x1 - x2).norm() / (z1 - z2).norm());
  }
  add_le(r, Suite::prox, "optimality residual (100 instances)", worst_residual, 1e-9);
  add_le(r, Suite::prox, "nonexpansive ratio", worst_expansion, 1.0 + 1e-12);
}

void channel_suite(Report& r, std::uint64_t seed) {
  Rng rng(seed, Stream::validation);

  constexpr std::size_t kFadingDraws = 1000000;
  const auto h = draw_fading(kFadingDraws, rng);
  double gain = 0.0;
  for (const auto& c : h) gain += std::norm(c);
  gain /= static_cast<double>(kFadingDraws);
  add_le(r, Suite::channel, "fading E|h|^2 = 1", std::abs(gain - 1.0), 0.005);

  const std::vector<RealVector> models = sample_models(100, rng);
  ChannelParams params;
  params.noise_var = 0.0;
  params.threshold = 0.0;
  params.max_power = 10.0;
  const auto out = aircomp_aggregate(models, params, rng, 0);
  const double avg_err = (out.recovered->estimate - average(models)).cwiseAbs().maxCoeff();
  add_le(r, Suite::channel, "noiseless all-selected average", avg_err, 1e-10);

  const auto coeffs = draw_fading(models.size(), rng);
  Selection all(models.size(), 1);
  const double alpha = scaling_factor(coeffs, all, models, params.max_power);
  double inversion = 0.0;
  double power_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < models.size(); ++n) {
    const ComplexVector x = precode(models[n], coeffs[n], alpha, true);
    const ComplexVector hx = coeffs[n] * x;
    const ComplexVector want = std::sqrt(alpha) * models[n].cast<ComplexScalar>();
    inversion = std::max(inversion, (hx - want).cwiseAbs().maxCoeff() / (1.0 + want.norm()));
    power_excess = std::max(power_excess, x.squaredNorm() - params.max_power);
  }
  add_le(r, Suite::channel, "channel inversion h x = sqrt(alpha) theta", inversion, 1e-12);
  add_le(r, Suite::channel, "power ||x||^2 - P0", power_excess, kPowerSlack);

  std::size_t mismatches = 0;
  const double gamma = 0.5;
  const auto sel = select_devices(h, gamma);
  for (std::size_t n = 0; n < h.size(); ++n) {
    if ((sel[n] == 1) != (std::abs(h[n]) >= gamma)) ++mismatches;
  }
  add_le(r, Suite::channel, "threshold selection mismatches", static_cast<double>(mismatches), 0.0);

  ChannelParams noisy;
  noisy.noise_var = 1.0;
  noisy.threshold = 0.5;
  noisy.max_power = 10.0;
  std::size_t checks = 0;
  double worst_power = 0.0;
  for (std::size_t t = 0; t < 2000; ++t) {
    const auto o = aircomp_aggregate(models, noisy, rng, t);
    checks += o.power_checks;
    worst_power = std::max(worst_power, o.max_tx_power);
  }
  add(r, Suite::channel, "power budget over " + std::to_string(checks) + " transmissions",
      worst_power, noisy.max_power + kPowerSlack, worst_power <= noisy.max_power + kPowerSlack);
}

void estimator_suite(Report& r, std::uint64_t seed) {
  Rng rng(seed, Stream::validation);
  const std::vector<RealVector> models = sample_models(100, rng);

  ChannelParams params;
  params.noise_var = 1.0;
  params.threshold = 0.5;
  params.max_power = 10.0;
  params.b = 10;
  const auto unbiased = mc_unbiasedness(models, params, kMonteCarloSamples, rng);
  add_le(r, Suite::estimator, "unbiasedness (max |z| over coordinates)", unbiased.worst_z, 3.0);

  const std::vector<RealVector> subset(models.begin(), models.begin() + 10);
  const auto noise = mc_noise_norm(subset, 0.5, 1.0, kMonteCarloSamples, rng);
  add_le(r, Suite::estimator, "noise norm relative error", noise.rel_error(), 0.01);

  const auto sampling = mc_sampling_variance(models, 10, kMonteCarloSamples, rng);
  add_le(r, Suite::estimator, "sampling variance relative error", sampling.rel_error(), 0.02);
}

void bounds_suite(Report& r, std::uint64_t seed) {
  std::size_t violations = 0;
  std::size_t rounds = 0;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng rng(seed ^ i, Stream::problem);
    const FederatedProblem prob = gen_problem(GenConfig{}, rng);
    const auto c = check_theorem1(prob, 400);
    violations += c.violations;
    rounds += c.rounds_checked;
    worst = std::max(worst, c.worst_ratio);
  }
  add_le(r, Suite::bounds,
         "distance bound violations (20 runs, " + std::to_string(rounds) + " rounds)",
         static_cast<double>(violations), 0.0);
  add_le(r, Suite::bounds, "worst distance / bound", worst, 1.0 + kTheorem1Slack);

  // exact count must be the first t where the bound reaches eps
  std::size_t bad = 0;
  for (double kappa : {1.0, 4.0, 100.0, 1e4}) {
    for (double eps : {1e-2, 1e-6, 1e-10}) {
      const auto it = theory::iteration_complexity(eps, kappa);
      const bool reaches = theory::theorem1_bound(1.0, kappa, it.exact) <= eps * (1.0 + 1e-12);
      const bool minimal =
          it.exact == 0 || theory::theorem1_bound(1.0, kappa, it.exact - 1) > eps * (1.0 + 1e-12);
      if (!reaches || !minimal) ++bad;
    }
  }
  add_le(r, Suite::bounds, "iteration count minimality failures", static_cast<double>(bad), 0.0);
}

}  // namespace

const char* to_string(Suite suite) noexcept {
  switch (suite) {
    case Suite::prox: return "prox";
    case Suite::channel: return "channel";
    case Suite::estimator: return "estimator";
    case Suite::bounds: return "bounds";
    case Suite::all: return "all";
  }
  return "?";
}

Suite parse_suite(const std::string& text) {
  for (Suite s : {Suite::prox, Suite::channel, Suite::estimator, Suite::bounds, Suite::all}) {
    if (text == to_string(s)) return s;
  }
  throw Error(Errc::invalid_config,
              "unknown suite '" + text + "' (prox, channel, estimator, bounds, all)");
}

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string Report::format() const {
  std::ostringstream out;
  std::size_t ok = 0;
  char buf[64];
  for (const auto& c : checks) {
    ok += c.passed;
    out << (c.passed ? "PASS " : "FAIL ") << '[' << c.suite << "] " << c.name;
    std::snprintf(buf, sizeof buf, ": measured %.6g, tolerance %.6g\n", c.measured, c.tolerance);
    out << buf;
  }
  out << ok << '/' << checks.size() << " checks passed\n";
  return out.str();
}

Report run_suite(Suite suite, std::uint64_t seed) {
  Report report;
  auto guarded = [&](Suite s, void (*fn)(Report&, std::uint64_t)) {
    try {
      fn(report, seed);
    } catch (const std::exception& e) {
      add(report, s, std::string("suite raised: ") + e.what(), 1.0, 0.0, false);
    }
  };
  if (suite == Suite::prox || suite == Suite::all) guarded(Suite::prox, prox_suite);
  if (suite == Suite::channel || suite == Suite::all) guarded(Suite::channel, channel_suite);
  if (suite == Suite::estimator || suite == Suite::all) guarded(Suite::estimator, estimator_suite);
  if (suite == Suite::bounds || suite == Suite::all) guarded(Suite::bounds, bounds_suite);
  return report;
}

double MomentMatch::rel_error() const {
  if (expected == 0.0) return std::abs(measured);
  return std::abs(measured - expected) / std::abs(expected);
}

Unbiasedness mc_unbiasedness(std::span<const RealVector> models, ChannelParams params,
                             std::size_t samples, Rng& rng) {
  if (models.empty() || samples < 2) {
    throw Error(Errc::invalid_config, "mc_unbiasedness: need models and at least 2 samples");
  }
  params.mode = SelectionMode::with_replacement;
  const auto d = models.front().size();
  RealVector sum = RealVector::Zero(d);
  RealVector sum_sq = RealVector::Zero(d);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto out = aircomp_aggregate(models, params, rng, i);
    const RealVector& e = out.recovered->estimate;
    sum += e;
    sum_sq += e.cwiseAbs2();
  }
  const double n = static_cast<double>(samples);
  Unbiasedness u;
  u.mean = sum / n;
  u.target = average(models);
  const RealVector var = (sum_sq / n - u.mean.cwiseAbs2()) * (n / (n - 1.0));
  u.std_error = (var.cwiseMax(0.0) / n).cwiseSqrt();
  for (Eigen::Index j = 0; j < d; ++j) {
    const double diff = std::abs(u.mean(j) - u.target(j));
    const double z = u.std_error(j) > 0.0 ? diff / u.std_error(j)
                                          : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    u.worst_z = std::max(u.worst_z, z);
  }
  return u;
}

MomentMatch mc_noise_norm(std::span<const RealVector> models, double alpha, double noise_var,
                          std::size_t samples, Rng& rng) {
  if (models.empty() || samples == 0) {
    throw Error(Errc::invalid_config, "mc_noise_norm: need models and samples");
  }
  if (!(alpha > 0.0)) throw Error(Errc::zero_alpha, "mc_noise_norm: alpha must be > 0");
  const std::size_t b = models.size();
  const auto coeffs = draw_fading(b, rng);
  std::vector<ComplexVector> signals;
  signals.reserve(b);
  for (std::size_t n = 0; n < b; ++n) signals.push_back(precode(models[n], coeffs[n], alpha, true));
  const ComplexVector clean = average(models).cast<ComplexScalar>();
  const double scale = 1.0 / (std::sqrt(alpha) * static_cast<double>(b));

  double acc = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const ComplexVector y = mac_superpose(signals, coeffs, noise_var, rng);
    acc += (y * scale - clean).squaredNorm();
  }
  MomentMatch m;
  m.measured = acc / static_cast<double>(samples);
  m.expected = equivalent_noise_norm_expect(alpha, b, noise_var,
                                            static_cast<std::size_t>(models.front().size()));
  return m;
}

MomentMatch mc_sampling_variance(std::span<const RealVector> models, std::size_t b,
                                 std::size_t samples, Rng& rng) {
  if (models.empty() || samples == 0 || b == 0) {
    throw Error(Errc::invalid_config, "mc_sampling_variance: need models, b >= 1 and samples");
  }
  const RealVector bar = average(models);
  const double n = static_cast<double>(models.size());
  const double bd = static_cast<double>(b);
  std::vector<ComplexScalar> coeffs(models.size(), ComplexScalar(1.0, 0.0));

  double acc = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Selection counts = select_with_replacement(coeffs, 0.0, b, rng);
    RealVector sub = RealVector::Zero(bar.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (counts[k]) sub += static_cast<double>(counts[k]) * models[k];
    }
    acc += (sub / bd - bar).squaredNorm();
  }
  double norm_sum = 0.0;
  for (const auto& m : models) norm_sum += m.squaredNorm();

  MomentMatch out;
  out.measured = acc / static_cast<double>(samples);
  out.expected = norm_sum / (bd * n) - bar.squaredNorm() / bd;
  return out;
}

Theorem1Check check_theorem1(const FederatedProblem& prob, std::size_t rounds) {
  AlgorithmSpec algo;
  algo.kind = Algorithm::fedsplit;
  Rng unused(0, Stream::channel);
  const TrialTrace trace = run_algorithm(prob, algo, ErrorFree{}, rounds, unused);
  const double floor = 1e-12 * (1.0 + prob.theta_star().norm());

  Theorem1Check c;
  for (const auto& rec : trace.records) {
    const double bound = theory::theorem1_bound(trace.delta0, prob.kappa(), rec.round - 1);
    if (bound < floor) break;
    ++c.rounds_checked;
    const double ratio = rec.distance / bound;
    c.worst_ratio = std::max(c.worst_ratio, ratio);
    if (rec.distance > bound * (1.0 + kTheorem1Slack)) ++c.violations;
  }
  return c;
}

}  // namespace airfed::validation
