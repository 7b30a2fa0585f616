#pragma once

#include <vector>

#include <Eigen/Dense>

#include "flagshift/kernels.hpp"

namespace flagshift {

struct CurvatureSample {
    Complex point;
    double value = 0.0;   // curvature of the line bundle at `point`; < 0 for these kernels
};

struct MetricSample {
    Complex point;
    double h = 0.0;           // ||gamma_0(w)||^2
    double t1_norm_sq = 0.0;  // ||t_1(w)||^2
};

struct SecondFundamentalFormSample {
    Complex point;
    double coefficient = 0.0;  // coefficient of d zbar, carries the leading minus sign
};

// Curvature -d d-bar log K(w,w), computed from exact series jets as
// -(K * ddbarK - dK * dbarK) / K^2.  Invariant under positive rescaling of K.
CurvatureSample curvature_line(const DiagonalKernel& K, Complex w);

// h = K0(w,w) and ||t_1||^2 = K1(w,w) for the canonical rank-2 model.
MetricSample metric_sample(const DiagonalKernel& K0, const DiagonalKernel& K1, Complex w);

// theta_12 = -(dz dzbar log h) / sqrt(||t_1||^2 / h + dz dzbar log h)
// with h = K0(w,w), ||t_1||^2 = K1(w,w).
SecondFundamentalFormSample second_fundamental_form(const DiagonalKernel& K0,
                                                    const DiagonalKernel& K1, Complex w);

// Upper-triangular k x k change-of-frame matrix of a holomorphic phi:
// entry (i,j) = binom(j,i) * phi^(j-i) for 0-indexed i <= j.
// phi_jet holds (phi(w), phi'(w), ..., phi^(k-1)(w)).
Eigen::MatrixXcd frame_change_matrix(const std::vector<Complex>& phi_jet, int k);

} // namespace flagshift
