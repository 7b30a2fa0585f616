#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "flagshift/errors.hpp"

namespace flagshift {

using Complex = std::complex<double>;

// Scalar kernel K(z,w) = sum_n a_n (z conj(w))^n on a disk of radius `radius`,
// truncated at degree M = coeffs.size() - 1.  All a_n > 0.
struct DiagonalKernel {
    std::vector<double> coeffs;   // a_0 .. a_M
    int truncation_degree = 0;    // M
    double radius = 0.8;          // evaluation disk |z|,|w| <= radius
    double tail_bound = 0.0;      // geometric bound on the dropped tail at radius^2

    int degree() const { return truncation_degree; }

    // K(z,w), exact for the truncated series.
    Complex eval(Complex z, Complex w) const;

    // K(w,w) = sum a_n |w|^(2n); always real and positive.
    double eval_diag(Complex w) const;
};

// Mixed-derivative table: entries(i,j) = d^i/dz^i d^j/dconj(w)^j K(z,w),
// i,j = 0..order-1.  On the diagonal z = w it is a Gram matrix, hence
// Hermitian positive semi-definite.
struct KernelJetMatrix {
    int order = 1;
    Eigen::MatrixXcd entries;
    Complex z;
    Complex w;
};

// a_n = binom(lambda + n - 1, n); the coefficient sequence of (1 - z conj(w))^(-lambda).
DiagonalKernel binomial_kernel(double lambda, int degree, double radius = 0.8);

// Kernel from an explicit positive coefficient list.
DiagonalKernel kernel_from_coeffs(const std::vector<double>& coeffs, double radius = 0.8);

// Mixed jets of K up to order r-1 in each variable, exact for the truncated
// series.  Requires |z|,|w| <= radius and truncation degree >= r + 16.
KernelJetMatrix eval_jet(const DiagonalKernel& K, Complex z, Complex w, int r);

// 2x2 matrix kernel [[K0, dwbar K0], [dz K0, dz dwbar K0 + K1]]: the rank-2
// model kernel built from a line-bundle kernel and its first jet.
class MatrixKernelGamma {
public:
    MatrixKernelGamma(DiagonalKernel K0, DiagonalKernel K1);

    Eigen::Matrix2cd operator()(Complex z, Complex w) const;

    const DiagonalKernel& base() const { return K0_; }
    const DiagonalKernel& twist() const { return K1_; }

private:
    DiagonalKernel K0_;
    DiagonalKernel K1_;
};

MatrixKernelGamma kernel_gamma(const DiagonalKernel& K0, const DiagonalKernel& K1);

} // namespace flagshift
