#pragma once

#include <stdexcept>
#include <string>

namespace airfed {

enum class Errc {
  dimension_mismatch,
  not_positive_definite,
  non_convergence,
  negative_variance,
  rank_deficient,
  invalid_kappa,
  non_positive_step,
  empty_selection,
  zero_alpha,
  zero_channel,
  invalid_eps,
  invalid_variant,
  power_violation,
  invalid_config,
  io_error,
};

const char* to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the Python bindings) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace airfed
