#include "airfed/errors.hpp"

namespace airfed {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::not_positive_definite: return "NotPositiveDefinite";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::negative_variance: return "NegativeVariance";
    case Errc::rank_deficient: return "RankDeficient";
    case Errc::invalid_kappa: return "InvalidKappa";
    case Errc::non_positive_step: return "NonPositiveStep";
    case Errc::empty_selection: return "EmptySelection";
    case Errc::zero_alpha: return "ZeroAlpha";
    case Errc::zero_channel: return "ZeroChannel";
    case Errc::invalid_eps: return "InvalidEps";
    case Errc::invalid_variant: return "InvalidVariant";
    case Errc::power_violation: return "PowerViolation";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace airfed
