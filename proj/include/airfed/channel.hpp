#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "airfed/linalg.hpp"
#include "airfed/rng.hpp"

namespace airfed {

/// How the transmitting set is chosen each round.
///  - threshold_only:   every device with |h_n| >= gamma transmits.
///  - top_b:            the b strongest devices above gamma transmit; fewer
///                      than b passers defers the round.
///  - with_replacement: b slots drawn uniformly with replacement over all
///                      devices, fading conditioned on |h| >= gamma. Makes the
///                      b draws independent, for estimator statistics.
enum class SelectionMode { threshold_only, top_b, with_replacement };

const char* to_string(SelectionMode mode) noexcept;
SelectionMode parse_selection_mode(const std::string& text);

struct ChannelParams {
  double noise_var = 1.0;
  double threshold = 0.5;
  double max_power = 10.0;
  SelectionMode mode = SelectionMode::threshold_only;
  std::size_t b = 1;  // top_b / with_replacement

  void validate(std::size_t n_devices) const;
};

/// Per-device transmission multiplicity. 0/1 in threshold and top-b modes
/// (the selection indicators beta_n); may exceed 1 with replacement.
using Selection = std::vector<std::uint32_t>;

struct ChannelRound {
  std::vector<ComplexScalar> coeffs;
  Selection selected;
  double alpha = 0.0;
  std::size_t round_index = 0;
  bool deferred = false;

  std::size_t selected_count() const;
};

struct RecoveredModel {
  RealVector estimate;
  double eff_noise_var = 0.0;
  std::size_t selected_count = 0;
};

std::vector<ComplexScalar> draw_fading(std::size_t n, Rng& rng);

Selection select_devices(std::span<const ComplexScalar> coeffs, double gamma);

/// nullopt means the round is deferred (fewer than b devices pass gamma).
/// Ties in magnitude go to the lower device index.
std::optional<Selection> select_top_b(std::span<const ComplexScalar> coeffs, double gamma,
                                      std::size_t b);

/// Draws b device slots uniformly with replacement and redraws the fading of
/// every sampled device from CN(0,1) conditioned on |h| >= gamma. Mutates
/// coeffs for the sampled devices.
Selection select_with_replacement(std::vector<ComplexScalar>& coeffs, double gamma,
                                  std::size_t b, Rng& rng);

/// alpha = min over selected n of |h_n|^2 P0 / ||theta_n||^2. Zero-norm
/// payloads are skipped; if every selected payload is zero the norm is taken
/// as 1.
double scaling_factor(std::span<const ComplexScalar> coeffs, const Selection& selected,
                      std::span<const RealVector> models, double p0);

/// x = sqrt(alpha) * conj(h) / |h|^2 * theta, or zero when not selected.
ComplexVector precode(const RealVector& model, ComplexScalar h, double alpha, bool selected);

/// y = sum_i h_i x_i + w, w ~ CN(0, noise_var I).
ComplexVector mac_superpose(std::span<const ComplexVector> signals,
                            std::span<const ComplexScalar> coeffs, double noise_var, Rng& rng);

/// estimate = Re(y) / (sqrt(alpha) * selected_count)
RecoveredModel recover(const ComplexVector& y, double alpha, std::size_t selected_count,
                       double noise_var);

/// E||w~||^2 = d sigma_w^2 / (alpha b^2)
double equivalent_noise_norm_expect(double alpha, std::size_t b, double noise_var, std::size_t d);

/// Result of one over-the-air aggregation.
struct AggregationOutcome {
  ChannelRound round;
  std::optional<RecoveredModel> recovered;  // empty when nobody transmitted
  std::size_t power_checks = 0;
  double max_tx_power = 0.0;
};

/// Full transceiver chain for one round: fading, selection, scaling, channel
/// inversion, superposition with noise, recovery. Every transmitted signal is
/// checked against the power budget; a violation throws Errc::power_violation.
AggregationOutcome aircomp_aggregate(std::span<const RealVector> payloads,
                                     const ChannelParams& params, Rng& rng,
                                     std::size_t round_index);

/// Slack allowed on ||x_n||^2 <= P0 for rounding.
inline constexpr double kPowerSlack = 1e-12;

}  // namespace airfed
