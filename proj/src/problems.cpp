#include "airfed/problems.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "airfed/errors.hpp"

namespace airfed {

namespace {

// Designs whose smallest Gram eigenvalue falls below this fraction of the
// largest are treated as rank deficient.
constexpr double kRankTolerance = 1e-12;
constexpr int kMaxGenerationAttempts = 10;

void require_dim(const DeviceProblem& dev, const RealVector& v, const char* op) {
  if (static_cast<std::size_t>(v.size()) != dev.dim()) {
    throw Error(Errc::dimension_mismatch, std::string(op) + ": vector has length " +
                                              std::to_string(v.size()) + ", device dim is " +
                                              std::to_string(dev.dim()));
  }
}

void require_step(double step, const char* op) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(Errc::non_positive_step, std::string(op) + ": step = " + std::to_string(step));
  }
}

}  // namespace

DeviceProblem::DeviceProblem(RealMatrix design, RealVector targets)
    : design_(std::move(design)), targets_(std::move(targets)) {
  if (design_.rows() != targets_.size() || design_.cols() == 0) {
    throw Error(Errc::dimension_mismatch,
                "DeviceProblem: design is " + std::to_string(design_.rows()) + "x" +
                    std::to_string(design_.cols()) + ", targets have length " +
                    std::to_string(targets_.size()));
  }
  if (!design_.allFinite() || !targets_.allFinite()) {
    throw Error(Errc::dimension_mismatch, "DeviceProblem: non-finite data");
  }
  gram_ = design_.transpose() * design_;
  gram_ = 0.5 * (gram_ + gram_.transpose());
  moment_ = design_.transpose() * targets_;
  const auto eig = linalg::extreme_eigs(gram_);
  ell_ = eig.lambda_min;
  lip_ = eig.lambda_max;
  if (design_.rows() < design_.cols() || !(ell_ > kRankTolerance * lip_)) {
    throw Error(Errc::rank_deficient, "DeviceProblem: design does not have full column rank");
  }
}

FederatedProblem::FederatedProblem(std::vector<DeviceProblem> devices, RealVector theta_true)
    : devices_(std::move(devices)), theta_true_(std::move(theta_true)) {
  if (devices_.empty()) {
    throw Error(Errc::dimension_mismatch, "FederatedProblem: no devices");
  }
  const auto d = static_cast<Eigen::Index>(devices_.front().dim());
  hessian_ = RealMatrix::Zero(d, d);
  moment_sum_ = RealVector::Zero(d);
  ell_star_ = devices_.front().ell();
  lip_star_ = devices_.front().lip();
  for (const auto& dev : devices_) {
    if (static_cast<Eigen::Index>(dev.dim()) != d) {
      throw Error(Errc::dimension_mismatch, "FederatedProblem: devices disagree on dimension");
    }
    hessian_ += dev.gram();
    moment_sum_ += dev.moment();
    ell_star_ = std::min(ell_star_, dev.ell());
    lip_star_ = std::max(lip_star_, dev.lip());
    lip_sum_ += dev.lip();
    ell_sum_ += dev.ell();
  }
  if (theta_true_.size() == 0) theta_true_ = RealVector::Zero(d);
  if (theta_true_.size() != d) {
    throw Error(Errc::dimension_mismatch, "FederatedProblem: theta_true has wrong length");
  }
  theta_star_ = global_optimum(devices_);
}

double FederatedProblem::default_step() const { return 1.0 / std::sqrt(ell_star_ * lip_star_); }

void GenConfig::validate() const {
  if (n_devices == 0 || dim == 0) {
    throw Error(Errc::invalid_config, "GenConfig: n_devices and dim must be positive");
  }
  if (samples_per_device < dim) {
    throw Error(Errc::invalid_config, "GenConfig: samples_per_device (" +
                                          std::to_string(samples_per_device) +
                                          ") must be >= dim (" + std::to_string(dim) + ")");
  }
  if (!(data_noise_var >= 0.0)) {
    throw Error(Errc::invalid_config, "GenConfig: data_noise_var must be >= 0");
  }
  if (conditioning == Conditioning::ill && !(kappa_target >= 1.0)) {
    throw Error(Errc::invalid_kappa, "GenConfig: kappa_target = " + std::to_string(kappa_target));
  }
}

RealMatrix gen_design_well(std::size_t m, std::size_t d, Rng& rng) {
  return linalg::standard_normal_matrix(m, d, rng);
}

RealMatrix random_orthogonal(std::size_t d, Rng& rng) {
  const RealMatrix g = linalg::standard_normal_matrix(d, d, rng);
  Eigen::HouseholderQR<RealMatrix> qr(g);
  return qr.householderQ();
}

RealMatrix gen_design_ill(std::size_t m, std::size_t d, double kappa_target, Rng& rng) {
  if (!(kappa_target >= 1.0)) {
    throw Error(Errc::invalid_kappa, "gen_design_ill: kappa_target = " + std::to_string(kappa_target));
  }
  const RealMatrix v = random_orthogonal(d, rng);
  return gen_design_ill(m, d, kappa_target, v, rng);
}

RealMatrix gen_design_ill(std::size_t m, std::size_t d, double kappa_target,
                          const RealMatrix& right_basis, Rng& rng) {
  if (!(kappa_target >= 1.0)) {
    throw Error(Errc::invalid_kappa, "gen_design_ill: kappa_target = " + std::to_string(kappa_target));
  }
  if (d == 1 && kappa_target != 1.0) {
    throw Error(Errc::invalid_kappa, "gen_design_ill: a single column can only have kappa = 1");
  }
  if (m < d || d == 0) {
    throw Error(Errc::dimension_mismatch, "gen_design_ill: need m >= d >= 1");
  }
  const auto dd = static_cast<Eigen::Index>(d);
  if (right_basis.rows() != dd || right_basis.cols() != dd) {
    throw Error(Errc::dimension_mismatch, "gen_design_ill: right basis must be d x d");
  }

  const RealMatrix g = linalg::standard_normal_matrix(m, d, rng);
  Eigen::HouseholderQR<RealMatrix> qr(g);
  const RealMatrix u = qr.householderQ() * RealMatrix::Identity(static_cast<Eigen::Index>(m), dd);

  // sigma_0 = sqrt(kappa) down to sigma_{d-1} = 1, log-spaced
  RealVector sigma(dd);
  for (Eigen::Index i = 0; i < dd; ++i) {
    const double frac = d == 1 ? 0.0 : static_cast<double>(dd - 1 - i) / static_cast<double>(dd - 1);
    sigma(i) = std::pow(kappa_target, 0.5 * frac);
  }
  return u * sigma.asDiagonal() * right_basis.transpose();
}

FederatedProblem gen_problem(const GenConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t m = cfg.samples_per_device;
  const std::size_t d = cfg.dim;
  const double noise_sd = std::sqrt(cfg.data_noise_var);

  RealVector theta_true = linalg::standard_normal_vector(d, rng);
  RealMatrix basis;
  if (cfg.conditioning == Conditioning::ill) basis = random_orthogonal(d, rng);

  std::vector<DeviceProblem> devices;
  devices.reserve(cfg.n_devices);
  for (std::size_t n = 0; n < cfg.n_devices; ++n) {
    for (int attempt = 1;; ++attempt) {
      RealMatrix x = cfg.conditioning == Conditioning::ill
                         ? gen_design_ill(m, d, cfg.kappa_target, basis, rng)
                         : gen_design_well(m, d, rng);
      RealVector noise = linalg::standard_normal_vector(m, rng) * noise_sd;
      RealVector y = x * theta_true + noise;
      try {
        devices.emplace_back(std::move(x), std::move(y));
        break;
      } catch (const Error& e) {
        if (e.code() != Errc::rank_deficient || attempt >= kMaxGenerationAttempts) throw;
      }
    }
  }
  return FederatedProblem(std::move(devices), std::move(theta_true));
}

double loss(const DeviceProblem& dev, const RealVector& theta) {
  require_dim(dev, theta, "loss");
  return 0.5 * (dev.targets() - dev.design() * theta).squaredNorm();
}

double global_loss(const FederatedProblem& prob, const RealVector& theta) {
  double total = 0.0;
  for (const auto& dev : prob.devices()) total += loss(dev, theta);
  return total;
}

RealVector gradient(const DeviceProblem& dev, const RealVector& theta) {
  require_dim(dev, theta, "gradient");
  return dev.gram() * theta - dev.moment();
}

RealVector global_gradient(const FederatedProblem& prob, const RealVector& theta) {
  if (static_cast<std::size_t>(theta.size()) != prob.dim()) {
    throw Error(Errc::dimension_mismatch, "global_gradient: wrong vector length");
  }
  return prob.hessian() * theta - prob.moment_sum();
}

double optimality_gap(const FederatedProblem& prob, const RealVector& theta) {
  if (static_cast<std::size_t>(theta.size()) != prob.dim()) {
    throw Error(Errc::dimension_mismatch, "optimality_gap: wrong vector length");
  }
  const RealVector e = theta - prob.theta_star();
  return std::max(0.5 * e.dot(prob.hessian() * e), 0.0);
}

RealVector prox(const DeviceProblem& dev, double step, const RealVector& z) {
  require_step(step, "prox");
  require_dim(dev, z, "prox");
  RealMatrix a = dev.gram();
  a.diagonal().array() += 1.0 / step;
  return linalg::spd_solve(a, dev.moment() + z / step);
}

RealVector global_optimum(std::span<const DeviceProblem> devices) {
  if (devices.empty()) {
    throw Error(Errc::dimension_mismatch, "global_optimum: no devices");
  }
  const auto d = static_cast<Eigen::Index>(devices.front().dim());
  RealMatrix h = RealMatrix::Zero(d, d);
  RealVector b = RealVector::Zero(d);
  for (const auto& dev : devices) {
    if (static_cast<Eigen::Index>(dev.dim()) != d) {
      throw Error(Errc::dimension_mismatch, "global_optimum: devices disagree on dimension");
    }
    h += dev.gram();
    b += dev.moment();
  }
  RealVector x = linalg::spd_solve(h, b);
  // one step of iterative refinement
  x += linalg::spd_solve(h, b - h * x);
  return x;
}

std::vector<RealVector> fixed_points(const FederatedProblem& prob, double step) {
  require_step(step, "fixed_points");
  std::vector<RealVector> out;
  out.reserve(prob.size());
  for (const auto& dev : prob.devices()) {
    out.push_back(prob.theta_star() - step * gradient(dev, prob.theta_star()));
  }
  return out;
}

}  // namespace airfed
