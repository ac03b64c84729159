#include "airfed/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "airfed/errors.hpp"

namespace airfed::linalg {

namespace {

void require_square(const RealMatrix& a, const char* op) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(Errc::dimension_mismatch, std::string(op) + ": matrix is " +
                                              std::to_string(a.rows()) + "x" +
                                              std::to_string(a.cols()));
  }
}

void require_symmetric(const RealMatrix& a, const char* op) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw Error(Errc::dimension_mismatch,
                std::string(op) + ": matrix is not symmetric (max asymmetry " +
                    std::to_string(asym) + ")");
  }
}

}  // namespace

RealVector spd_solve(const RealMatrix& a, const RealVector& b) {
  require_square(a, "spd_solve");
  if (a.rows() != b.size()) {
    throw Error(Errc::dimension_mismatch, "spd_solve: rhs has length " +
                                              std::to_string(b.size()) + ", expected " +
                                              std::to_string(a.rows()));
  }
  require_symmetric(a, "spd_solve");

  const Eigen::Index n = a.rows();
  // lower-triangular factor, A = L L^T
  RealMatrix l = RealMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > 0.0)) {
      throw Error(Errc::not_positive_definite,
                  "spd_solve: pivot " + std::to_string(j) + " is " + std::to_string(pivot));
    }
    const double diag = std::sqrt(pivot);
    l(j, j) = diag;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / diag;
    }
  }

  RealVector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = b(i);
    for (Eigen::Index k = 0; k < i; ++k) v -= l(i, k) * y(k);
    y(i) = v / l(i, i);
  }
  RealVector x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double v = y(i);
    for (Eigen::Index k = i + 1; k < n; ++k) v -= l(k, i) * x(k);
    x(i) = v / l(i, i);
  }
  return x;
}

EigenRange extreme_eigs(const RealMatrix& a) {
  require_square(a, "extreme_eigs");
  require_symmetric(a, "extreme_eigs");

  const Eigen::Index n = a.rows();
  RealMatrix w = 0.5 * (a + a.transpose());
  const double norm = w.norm();
  if (norm == 0.0) return {0.0, 0.0};

  constexpr int kMaxSweeps = 100;
  const double tol = 1e-15 * norm;
  auto off_diagonal = [&w, n] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) s += w(p, q) * w(p, q);
    return std::sqrt(2.0 * s);
  };

  bool converged = off_diagonal() <= tol;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = w(p, q);
        if (apq == 0.0) continue;
        // symmetric Schur rotation zeroing w(p, q)
        const double tau = (w(q, q) - w(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double wkp = w(k, p);
          const double wkq = w(k, q);
          w(k, p) = c * wkp - s * wkq;
          w(k, q) = s * wkp + c * wkq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double wpk = w(p, k);
          const double wqk = w(q, k);
          w(p, k) = c * wpk - s * wqk;
          w(q, k) = s * wpk + c * wqk;
        }
      }
    }
    converged = off_diagonal() <= tol;
  }
  if (!converged) {
    throw Error(Errc::non_convergence, "extreme_eigs: Jacobi sweeps exhausted");
  }

  const RealVector diag = w.diagonal();
  return {std::max(diag.minCoeff(), 0.0), diag.maxCoeff()};
}

std::vector<ComplexScalar> complex_gaussian(double sigma2, Rng& rng, std::size_t n) {
  if (!(sigma2 >= 0.0)) {
    throw Error(Errc::negative_variance, "complex_gaussian: sigma2 = " + std::to_string(sigma2));
  }
  std::vector<ComplexScalar> out(n, ComplexScalar(0.0, 0.0));
  if (sigma2 == 0.0) return out;
  const double sd = std::sqrt(sigma2 / 2.0);
  for (auto& z : out) {
    const double re = rng.normal();
    const double im = rng.normal();
    z = ComplexScalar(sd * re, sd * im);
  }
  return out;
}

ComplexVector complex_gaussian_vector(double sigma2, Rng& rng, std::size_t n) {
  const auto samples = complex_gaussian(sigma2, rng, n);
  ComplexVector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = samples[i];
  return v;
}

RealMatrix standard_normal_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  RealMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  // row-major draw order
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
  return m;
}

RealVector standard_normal_vector(std::size_t n, Rng& rng) {
  RealVector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  return v;
}

bool all_finite(const RealMatrix& a) { return a.allFinite(); }

}  // namespace airfed::linalg
