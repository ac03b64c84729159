#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "airfed/channel.hpp"
#include "airfed/linalg.hpp"
#include "airfed/problems.hpp"

namespace airfed::oracle {

/// All eigenvalues (ascending) from Eigen's self-adjoint solver.
RealVector eigenvalues(const RealMatrix& a);

/// Central differences of f at x with step h.
RealVector finite_difference_gradient(const std::function<double(const RealVector&)>& f,
                                      const RealVector& x, double h);

/// Minimizes f_n(x) + ||z - x||^2 / (2 s) by gradient descent with the exact
/// 1 / (L + 1/s) step, until the gradient norm drops below tol.
RealVector prox_by_descent(const DeviceProblem& dev, double s, const RealVector& z,
                           double tol = 1e-13, std::size_t max_iter = 2000000);

/// Top-b selection by exhaustive pairwise ranking: device n is chosen when it
/// passes gamma and fewer than b passers outrank it (larger magnitude, or equal
/// magnitude and lower index).
std::optional<Selection> top_b_by_rank(std::span<const ComplexScalar> coeffs, double gamma,
                                       std::size_t b);

/// Full-rank random device with m rows and d columns.
DeviceProblem random_device(std::size_t m, std::size_t d, Rng& rng);

}  // namespace airfed::oracle
