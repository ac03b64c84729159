#include "oracles.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "airfed/errors.hpp"

namespace airfed::oracle {

RealVector eigenvalues(const RealMatrix& a) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

RealVector finite_difference_gradient(const std::function<double(const RealVector&)>& f,
                                      const RealVector& x, double h) {
  RealVector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    RealVector up = x, down = x;
    up(i) += h;
    down(i) -= h;
    g(i) = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

RealVector prox_by_descent(const DeviceProblem& dev, double s, const RealVector& z, double tol,
                           std::size_t max_iter) {
  const RealMatrix& g = dev.gram();
  const RealVector& b = dev.moment();
  const double lr = 1.0 / (eigenvalues(g).maxCoeff() + 1.0 / s);
  RealVector x = z;
  for (std::size_t k = 0; k < max_iter; ++k) {
    const RealVector grad = g * x - b + (x - z) / s;
    if (grad.norm() <= tol * (1.0 + b.norm() + z.norm() / s)) break;
    x -= lr * grad;
  }
  return x;
}

std::optional<Selection> top_b_by_rank(std::span<const ComplexScalar> coeffs, double gamma,
                                       std::size_t b) {
  const std::size_t n = coeffs.size();
  Selection out(n, 0);
  std::size_t passers = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mi = std::abs(coeffs[i]);
    if (mi < gamma) continue;
    ++passers;
    std::size_t above = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double mj = std::abs(coeffs[j]);
      if (j == i || mj < gamma) continue;
      if (mj > mi || (mj == mi && j < i)) ++above;
    }
    if (above < b) out[i] = 1;
  }
  if (passers < b) return std::nullopt;
  return out;
}

DeviceProblem random_device(std::size_t m, std::size_t d, Rng& rng) {
  for (;;) {
    RealMatrix x = linalg::standard_normal_matrix(m, d, rng);
    RealVector y = linalg::standard_normal_vector(m, rng);
    try {
      return DeviceProblem(std::move(x), std::move(y));
    } catch (const Error&) {
    }
  }
}

}  // namespace airfed::oracle
