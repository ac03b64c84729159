#include "airfed/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "airfed/errors.hpp"

namespace airfed {

const char* to_string(SelectionMode mode) noexcept {
  switch (mode) {
    case SelectionMode::threshold_only: return "threshold_only";
    case SelectionMode::top_b: return "top_b";
    case SelectionMode::with_replacement: return "with_replacement";
  }
  return "unknown";
}

SelectionMode parse_selection_mode(const std::string& text) {
  if (text == "threshold_only" || text == "threshold") return SelectionMode::threshold_only;
  if (text == "top_b") return SelectionMode::top_b;
  if (text == "with_replacement") return SelectionMode::with_replacement;
  throw Error(Errc::invalid_config, "unknown selection mode '" + text + "'");
}

void ChannelParams::validate(std::size_t n_devices) const {
  if (!(noise_var >= 0.0)) throw Error(Errc::negative_variance, "channel noise_var must be >= 0");
  if (!(threshold >= 0.0)) throw Error(Errc::invalid_config, "channel threshold must be >= 0");
  if (!(max_power > 0.0)) throw Error(Errc::invalid_config, "channel max_power must be > 0");
  if (mode == SelectionMode::top_b && (b < 1 || b > n_devices)) {
    throw Error(Errc::invalid_config, "top_b needs 1 <= b <= N (b = " + std::to_string(b) + ")");
  }
  if (mode == SelectionMode::with_replacement && b < 1) {
    throw Error(Errc::invalid_config, "with_replacement needs b >= 1");
  }
}

std::size_t ChannelRound::selected_count() const {
  return std::accumulate(selected.begin(), selected.end(), std::size_t{0});
}

std::vector<ComplexScalar> draw_fading(std::size_t n, Rng& rng) {
  return linalg::complex_gaussian(1.0, rng, n);
}

Selection select_devices(std::span<const ComplexScalar> coeffs, double gamma) {
  Selection flags(coeffs.size(), 0);
  for (std::size_t n = 0; n < coeffs.size(); ++n) flags[n] = std::abs(coeffs[n]) >= gamma ? 1 : 0;
  return flags;
}

std::optional<Selection> select_top_b(std::span<const ComplexScalar> coeffs, double gamma,
                                      std::size_t b) {
  if (b == 0) throw Error(Errc::invalid_config, "select_top_b: b must be >= 1");
  std::vector<std::size_t> passers;
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    if (std::abs(coeffs[n]) >= gamma) passers.push_back(n);
  }
  if (passers.size() < b) return std::nullopt;
  std::stable_sort(passers.begin(), passers.end(), [&](std::size_t lhs, std::size_t rhs) {
    return std::abs(coeffs[lhs]) > std::abs(coeffs[rhs]);
  });
  Selection flags(coeffs.size(), 0);
  for (std::size_t i = 0; i < b; ++i) flags[passers[i]] = 1;
  return flags;
}

Selection select_with_replacement(std::vector<ComplexScalar>& coeffs, double gamma,
                                  std::size_t b, Rng& rng) {
  if (b == 0 || coeffs.empty()) {
    throw Error(Errc::invalid_config, "select_with_replacement: need b >= 1 and N >= 1");
  }
  Selection counts(coeffs.size(), 0);
  for (std::size_t i = 0; i < b; ++i) ++counts[rng.below(coeffs.size())];
  // |h|^2 given |h| >= gamma is gamma^2 + Exp(1) for h ~ CN(0,1)
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    if (counts[n] == 0 || std::abs(coeffs[n]) >= gamma) continue;
    const double mag = std::sqrt(gamma * gamma + rng.exponential());
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    coeffs[n] = std::polar(mag, phase);
  }
  return counts;
}

double scaling_factor(std::span<const ComplexScalar> coeffs, const Selection& selected,
                      std::span<const RealVector> models, double p0) {
  if (!(p0 > 0.0)) throw Error(Errc::invalid_config, "scaling_factor: P0 must be > 0");
  if (coeffs.size() != selected.size() || models.size() != selected.size()) {
    throw Error(Errc::dimension_mismatch, "scaling_factor: coeffs, flags and models differ in length");
  }
  double alpha = std::numeric_limits<double>::infinity();
  double weakest_gain = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t n = 0; n < selected.size(); ++n) {
    if (selected[n] == 0) continue;
    any = true;
    const double gain = std::norm(coeffs[n]);
    weakest_gain = std::min(weakest_gain, gain);
    const double model_sq = models[n].squaredNorm();
    if (model_sq == 0.0) continue;
    alpha = std::min(alpha, gain * p0 / model_sq);
  }
  if (!any) throw Error(Errc::empty_selection, "scaling_factor: no device selected");
  if (std::isinf(alpha)) alpha = weakest_gain * p0;
  return alpha;
}

ComplexVector precode(const RealVector& model, ComplexScalar h, double alpha, bool selected) {
  if (!selected) return ComplexVector::Zero(model.size());
  const double gain = std::norm(h);
  if (gain == 0.0) throw Error(Errc::zero_channel, "precode: selected device has h = 0");
  const ComplexScalar inverse = std::sqrt(alpha) * std::conj(h) / gain;
  return model.cast<ComplexScalar>() * inverse;
}

ComplexVector mac_superpose(std::span<const ComplexVector> signals,
                            std::span<const ComplexScalar> coeffs, double noise_var, Rng& rng) {
  if (signals.size() != coeffs.size()) {
    throw Error(Errc::dimension_mismatch, "mac_superpose: signals and coefficients differ in count");
  }
  if (signals.empty()) throw Error(Errc::dimension_mismatch, "mac_superpose: no signals");
  const auto d = signals.front().size();
  ComplexVector y = ComplexVector::Zero(d);
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (signals[i].size() != d) {
      throw Error(Errc::dimension_mismatch, "mac_superpose: signals differ in dimension");
    }
    y += coeffs[i] * signals[i];
  }
  y += linalg::complex_gaussian_vector(noise_var, rng, static_cast<std::size_t>(d));
  return y;
}

RecoveredModel recover(const ComplexVector& y, double alpha, std::size_t selected_count,
                       double noise_var) {
  if (selected_count == 0) throw Error(Errc::empty_selection, "recover: empty selection");
  if (!(alpha > 0.0)) throw Error(Errc::zero_alpha, "recover: alpha = " + std::to_string(alpha));
  const double scale = 1.0 / (std::sqrt(alpha) * static_cast<double>(selected_count));
  RecoveredModel out;
  out.estimate = y.real() * scale;
  out.eff_noise_var =
      noise_var / (alpha * static_cast<double>(selected_count) * static_cast<double>(selected_count));
  out.selected_count = selected_count;
  return out;
}

double equivalent_noise_norm_expect(double alpha, std::size_t b, double noise_var, std::size_t d) {
  if (!(alpha > 0.0)) throw Error(Errc::zero_alpha, "equivalent_noise_norm_expect: alpha must be > 0");
  if (b == 0) throw Error(Errc::empty_selection, "equivalent_noise_norm_expect: b must be >= 1");
  const double bb = static_cast<double>(b);
  return static_cast<double>(d) * noise_var / (alpha * bb * bb);
}

AggregationOutcome aircomp_aggregate(std::span<const RealVector> payloads,
                                     const ChannelParams& params, Rng& rng,
                                     std::size_t round_index) {
  const std::size_t n_devices = payloads.size();
  params.validate(n_devices);

  AggregationOutcome out;
  out.round.round_index = round_index;
  out.round.coeffs = draw_fading(n_devices, rng);

  switch (params.mode) {
    case SelectionMode::threshold_only:
      out.round.selected = select_devices(out.round.coeffs, params.threshold);
      break;
    case SelectionMode::top_b: {
      auto chosen = select_top_b(out.round.coeffs, params.threshold, params.b);
      if (chosen) {
        out.round.selected = std::move(*chosen);
      } else {
        out.round.selected.assign(n_devices, 0);
        out.round.deferred = true;
      }
      break;
    }
    case SelectionMode::with_replacement:
      out.round.selected =
          select_with_replacement(out.round.coeffs, params.threshold, params.b, rng);
      break;
  }

  const std::size_t count = out.round.selected_count();
  if (count == 0) {
    out.round.deferred = true;
    return out;
  }

  out.round.alpha = scaling_factor(out.round.coeffs, out.round.selected, payloads, params.max_power);

  std::vector<ComplexVector> signals;
  std::vector<ComplexScalar> gains;
  signals.reserve(count);
  gains.reserve(count);
  for (std::size_t n = 0; n < n_devices; ++n) {
    if (out.round.selected[n] == 0) continue;
    ComplexVector x = precode(payloads[n], out.round.coeffs[n], out.round.alpha, true);
    const double power = x.squaredNorm();
    ++out.power_checks;
    out.max_tx_power = std::max(out.max_tx_power, power);
    if (power > params.max_power + kPowerSlack) {
      throw Error(Errc::power_violation, "device " + std::to_string(n) + " transmits power " +
                                             std::to_string(power) + " > P0 = " +
                                             std::to_string(params.max_power));
    }
    for (std::uint32_t k = 0; k < out.round.selected[n]; ++k) {
      signals.push_back(x);
      gains.push_back(out.round.coeffs[n]);
    }
  }

  const ComplexVector y = mac_superpose(signals, gains, params.noise_var, rng);
  out.recovered = recover(y, out.round.alpha, count, params.noise_var);
  return out;
}

}  // namespace airfed
