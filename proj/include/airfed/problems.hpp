#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "airfed/linalg.hpp"
#include "airfed/rng.hpp"

namespace airfed {

/// One device's least-squares data f_n(theta) = 0.5 * ||Y_n - X_n theta||^2,
/// with the Gram matrix and moment cached and the convexity constants taken
/// from the exact extreme eigenvalues of X_n^T X_n.
class DeviceProblem {
 public:
  DeviceProblem(RealMatrix design, RealVector targets);

  const RealMatrix& design() const noexcept { return design_; }
  const RealVector& targets() const noexcept { return targets_; }
  /// X^T X
  const RealMatrix& gram() const noexcept { return gram_; }
  /// X^T Y
  const RealVector& moment() const noexcept { return moment_; }
  /// strong-convexity constant
  double ell() const noexcept { return ell_; }
  /// smoothness constant
  double lip() const noexcept { return lip_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(design_.cols()); }
  std::size_t samples() const noexcept { return static_cast<std::size_t>(design_.rows()); }

 private:
  RealMatrix design_;
  RealVector targets_;
  RealMatrix gram_;
  RealVector moment_;
  double ell_ = 0.0;
  double lip_ = 0.0;
};

class FederatedProblem {
 public:
  FederatedProblem(std::vector<DeviceProblem> devices, RealVector theta_true);

  const std::vector<DeviceProblem>& devices() const noexcept { return devices_; }
  std::size_t size() const noexcept { return devices_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(theta_star_.size()); }

  const RealVector& theta_star() const noexcept { return theta_star_; }
  const RealVector& theta_true() const noexcept { return theta_true_; }
  /// min_n ell_n
  double ell_star() const noexcept { return ell_star_; }
  /// max_n L_n
  double lip_star() const noexcept { return lip_star_; }
  double kappa() const noexcept { return lip_star_ / ell_star_; }
  /// sum_n L_n, the smoothness constant of F
  double lip_sum() const noexcept { return lip_sum_; }
  double ell_sum() const noexcept { return ell_sum_; }
  /// sum_n X_n^T X_n, the (constant) Hessian of F
  const RealMatrix& hessian() const noexcept { return hessian_; }
  const RealVector& moment_sum() const noexcept { return moment_sum_; }
  /// 1 / sqrt(ell_* L^*)
  double default_step() const;

 private:
  std::vector<DeviceProblem> devices_;
  RealVector theta_true_;
  RealVector theta_star_;
  RealMatrix hessian_;
  RealVector moment_sum_;
  double ell_star_ = 0.0;
  double lip_star_ = 0.0;
  double lip_sum_ = 0.0;
  double ell_sum_ = 0.0;
};

enum class Conditioning { well, ill };

struct GenConfig {
  std::size_t n_devices = 100;
  std::size_t samples_per_device = 200;
  std::size_t dim = 6;
  double data_noise_var = 0.25;
  Conditioning conditioning = Conditioning::well;
  double kappa_target = 1.0;  // used when conditioning == ill

  void validate() const;
};

/// Draw order: theta_true, then (ill only) the shared right singular basis,
/// then for each device its design followed by its noise vector.
FederatedProblem gen_problem(const GenConfig& cfg, Rng& rng);

RealMatrix gen_design_well(std::size_t m, std::size_t d, Rng& rng);

/// X = U diag(sigma) V^T with log-spaced sigma, sigma_max^2 / sigma_min^2 =
/// kappa_target and sigma_min = 1. Draws its own random right basis V.
RealMatrix gen_design_ill(std::size_t m, std::size_t d, double kappa_target, Rng& rng);

/// As above with a caller-supplied orthogonal right basis (d x d).
RealMatrix gen_design_ill(std::size_t m, std::size_t d, double kappa_target,
                          const RealMatrix& right_basis, Rng& rng);

/// Orthonormal d x d basis from the QR factorization of a Gaussian matrix.
RealMatrix random_orthogonal(std::size_t d, Rng& rng);

double loss(const DeviceProblem& dev, const RealVector& theta);
double global_loss(const FederatedProblem& prob, const RealVector& theta);
RealVector gradient(const DeviceProblem& dev, const RealVector& theta);
RealVector global_gradient(const FederatedProblem& prob, const RealVector& theta);

/// F(theta) - F(theta*) evaluated as 0.5 (theta - theta*)^T H (theta - theta*),
/// which is exact for the quadratic F and never negative.
double optimality_gap(const FederatedProblem& prob, const RealVector& theta);

/// argmin_x f_n(x) + ||z - x||^2 / (2 s), i.e. (X^T X + I/s)^{-1} (X^T Y + z/s).
RealVector prox(const DeviceProblem& dev, double step, const RealVector& z);

/// (sum X_n^T X_n)^{-1} sum X_n^T Y_n
RealVector global_optimum(std::span<const DeviceProblem> devices);

/// theta_n* = theta* - s grad f_n(theta*): the fixed points of the FedSplit
/// local update for step s.
std::vector<RealVector> fixed_points(const FederatedProblem& prob, double step);

}  // namespace airfed
