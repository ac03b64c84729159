#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "airfed/linalg.hpp"

namespace airfed::theory {

/// 1 - 2 / (sqrt(kappa) + 1), in [0, 1).
double contraction_factor(double kappa);

/// contraction_factor(kappa)^t * sqrt(delta0): the distance bound on the
/// error-free FedSplit average after t + 1 rounds.
double theorem1_bound(double delta0, double kappa, std::size_t t);

struct IterationCount {
  std::size_t exact = 0;    // smallest t with contraction^t * sqrt(delta0) <= eps
  double asymptotic = 0.0;  // sqrt(kappa) * log(1/eps)
};

IterationCount iteration_complexity(double eps, double kappa, double delta0 = 1.0);

struct BoundInputs {
  double delta0 = 0.0;
  double kappa = 1.0;
  double lip_sum = 1.0;
  double g_bound = 1.0;
  std::size_t b = 1;
  std::size_t dim = 1;
  double noise_var = 0.0;
  double threshold = 1.0;
  double max_power = 1.0;

  void validate() const;
};

/// as_stated:  delta0 rho^t / (2L) + G^2 / (2 B^2 L) (B + d sw^2 / (g^2 P0))
/// as_proved:  (L/2) [delta0 rho^t + G^2 / B^2 (B + d sw^2 / (g^2 P0))]
/// with rho = contraction_factor(kappa)^2.
enum class BoundVariant { as_stated, as_proved };

const char* to_string(BoundVariant v) noexcept;
BoundVariant parse_bound_variant(const std::string& text);

double theorem2_bound(const BoundInputs& inp, std::size_t t,
                      BoundVariant variant = BoundVariant::as_proved);

/// max_i ||models[i]||
double measure_g(std::span<const RealVector> models);

}  // namespace airfed::theory
