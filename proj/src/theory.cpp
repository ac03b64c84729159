#include "airfed/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "airfed/errors.hpp"

namespace airfed::theory {

namespace {

void require_kappa(double kappa) {
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) {
    throw Error(Errc::invalid_kappa, "kappa = " + std::to_string(kappa));
  }
}

}  // namespace

double contraction_factor(double kappa) {
  require_kappa(kappa);
  return 1.0 - 2.0 / (std::sqrt(kappa) + 1.0);
}

double theorem1_bound(double delta0, double kappa, std::size_t t) {
  if (!(delta0 >= 0.0)) throw Error(Errc::invalid_config, "theorem1_bound: delta0 must be >= 0");
  const double rho = contraction_factor(kappa);
  return std::pow(rho, static_cast<double>(t)) * std::sqrt(delta0);
}

IterationCount iteration_complexity(double eps, double kappa, double delta0) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw Error(Errc::invalid_eps, "iteration_complexity: eps = " + std::to_string(eps));
  }
  if (!(delta0 >= 0.0)) throw Error(Errc::invalid_config, "iteration_complexity: delta0 must be >= 0");
  const double rho = contraction_factor(kappa);
  IterationCount out;
  out.asymptotic = std::sqrt(kappa) * std::log(1.0 / eps);

  const double start = std::sqrt(delta0);
  if (start <= eps) return out;
  if (rho == 0.0) {
    out.exact = 1;
    return out;
  }
  const double estimate = std::log(start / eps) / std::log(1.0 / rho);
  // the closed form can land one off either side of an exact power
  auto t = static_cast<std::size_t>(std::max(0.0, std::floor(estimate) - 1.0));
  while (std::pow(rho, static_cast<double>(t)) * start > eps * (1.0 + 1e-12)) ++t;
  out.exact = t;
  return out;
}

void BoundInputs::validate() const {
  require_kappa(kappa);
  if (!(delta0 >= 0.0)) throw Error(Errc::invalid_config, "BoundInputs: delta0 must be >= 0");
  if (!(lip_sum > 0.0)) throw Error(Errc::invalid_config, "BoundInputs: L must be > 0");
  if (!(g_bound > 0.0)) throw Error(Errc::invalid_config, "BoundInputs: G must be > 0");
  if (b < 1) throw Error(Errc::invalid_config, "BoundInputs: B must be >= 1");
  if (dim < 1) throw Error(Errc::invalid_config, "BoundInputs: d must be >= 1");
  if (!(noise_var >= 0.0)) throw Error(Errc::negative_variance, "BoundInputs: noise_var must be >= 0");
  if (!(threshold > 0.0)) throw Error(Errc::invalid_config, "BoundInputs: gamma must be > 0");
  if (!(max_power > 0.0)) throw Error(Errc::invalid_config, "BoundInputs: P0 must be > 0");
}

const char* to_string(BoundVariant v) noexcept {
  return v == BoundVariant::as_stated ? "as_stated" : "as_proved";
}

BoundVariant parse_bound_variant(const std::string& text) {
  if (text == "as_stated") return BoundVariant::as_stated;
  if (text == "as_proved") return BoundVariant::as_proved;
  throw Error(Errc::invalid_variant, "unknown bound variant '" + text + "'");
}

double theorem2_bound(const BoundInputs& inp, std::size_t t, BoundVariant variant) {
  inp.validate();
  const double q = contraction_factor(inp.kappa);
  const double rho_t = std::pow(q * q, static_cast<double>(t));
  const double b = static_cast<double>(inp.b);
  const double bracket = b + static_cast<double>(inp.dim) * inp.noise_var /
                                 (inp.threshold * inp.threshold * inp.max_power);
  const double floor = inp.g_bound * inp.g_bound / (b * b) * bracket;
  switch (variant) {
    case BoundVariant::as_stated:
      return inp.delta0 * rho_t / (2.0 * inp.lip_sum) + floor / (2.0 * inp.lip_sum);
    case BoundVariant::as_proved:
      return 0.5 * inp.lip_sum * (inp.delta0 * rho_t + floor);
  }
  throw Error(Errc::invalid_variant, "theorem2_bound: unknown variant");
}

double measure_g(std::span<const RealVector> models) {
  double g = 0.0;
  for (const auto& m : models) g = std::max(g, m.norm());
  return g;
}

}  // namespace airfed::theory
