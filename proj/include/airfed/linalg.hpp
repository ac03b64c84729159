#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <vector>

#include "airfed/rng.hpp"

namespace airfed {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexScalar = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;

namespace linalg {

/// Solves A x = b for symmetric positive-definite A by Cholesky factorization.
/// Throws Errc::not_positive_definite when a pivot is not strictly positive.
RealVector spd_solve(const RealMatrix& a, const RealVector& b);

struct EigenRange {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Smallest and largest eigenvalue of a symmetric PSD matrix (cyclic Jacobi).
EigenRange extreme_eigs(const RealMatrix& a);

/// n draws from CN(0, sigma2): independent real/imaginary parts, each with
/// variance sigma2 / 2.
std::vector<ComplexScalar> complex_gaussian(double sigma2, Rng& rng, std::size_t n);

/// Same distribution, packed as a vector.
ComplexVector complex_gaussian_vector(double sigma2, Rng& rng, std::size_t n);

RealMatrix standard_normal_matrix(std::size_t rows, std::size_t cols, Rng& rng);
RealVector standard_normal_vector(std::size_t n, Rng& rng);

bool all_finite(const RealMatrix& a);

}  // namespace linalg
}  // namespace airfed
