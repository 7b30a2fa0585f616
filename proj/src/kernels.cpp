#include "flagshift/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace flagshift {

namespace {

// Ratio-test tail bound at x = radius^2: if the coefficient ratios settle
// below q with q*x < 1, the dropped tail is under a_M x^M * qx/(1-qx).
double geometric_tail_bound(const std::vector<double>& a, double radius) {
    const double x = radius * radius;
    const std::size_t M = a.size() - 1;
    double q = 0.0;
    const std::size_t lo = M / 2;
    for (std::size_t n = lo; n < M; ++n) q = std::max(q, a[n + 1] / a[n]);
    if (q <= 0.0) q = 1.0;           // single-coefficient kernel: assume flat
    const double qx = q * x;
    if (qx >= 1.0) return std::numeric_limits<double>::infinity();
    return a[M] * std::pow(x, static_cast<double>(M)) * qx / (1.0 - qx);
}

} // namespace

Complex DiagonalKernel::eval(Complex z, Complex w) const {
    const Complex t = z * std::conj(w);
    Complex acc = 0.0;
    for (std::size_t n = coeffs.size(); n-- > 0;) acc = acc * t + coeffs[n];
    return acc;
}

double DiagonalKernel::eval_diag(Complex w) const {
    const double x = std::norm(w);
    double acc = 0.0;
    for (std::size_t n = coeffs.size(); n-- > 0;) acc = acc * x + coeffs[n];
    return acc;
}

DiagonalKernel binomial_kernel(double lambda, int degree, double radius) {
    if (lambda <= 0.0)
        throw parameter_error("binomial_kernel: lambda must be positive, got " + std::to_string(lambda));
    if (degree < 1)
        throw parameter_error("binomial_kernel: degree must be >= 1");
    if (radius <= 0.0 || radius >= 1.0)
        throw parameter_error("binomial_kernel: radius must lie in (0,1)");

    // a_0 = 1, a_{n+1} = a_n (lambda + n) / (n + 1)
    std::vector<double> a(static_cast<std::size_t>(degree) + 1);
    a[0] = 1.0;
    for (int n = 0; n < degree; ++n)
        a[static_cast<std::size_t>(n) + 1] = a[static_cast<std::size_t>(n)] * (lambda + n) / (n + 1.0);

    DiagonalKernel K;
    K.coeffs = std::move(a);
    K.truncation_degree = degree;
    K.radius = radius;
    K.tail_bound = geometric_tail_bound(K.coeffs, radius);
    return K;
}

DiagonalKernel kernel_from_coeffs(const std::vector<double>& coeffs, double radius) {
    if (coeffs.empty())
        throw parameter_error("kernel_from_coeffs: empty coefficient list");
    for (std::size_t n = 0; n < coeffs.size(); ++n)
        if (!(coeffs[n] > 0.0))
            throw parameter_error("kernel_from_coeffs: coefficient a_" + std::to_string(n) + " is not positive");
    if (radius <= 0.0 || radius >= 1.0)
        throw parameter_error("kernel_from_coeffs: radius must lie in (0,1)");

    DiagonalKernel K;
    K.coeffs = coeffs;
    K.truncation_degree = static_cast<int>(coeffs.size()) - 1;
    K.radius = radius;
    K.tail_bound = geometric_tail_bound(K.coeffs, radius);
    return K;
}

KernelJetMatrix eval_jet(const DiagonalKernel& K, Complex z, Complex w, int r) {
    if (r < 1) throw parameter_error("eval_jet: order must be >= 1");
    if (std::abs(z) > K.radius + 1e-15 || std::abs(w) > K.radius + 1e-15)
        throw domain_error("eval_jet: point outside the accuracy disk of radius " + std::to_string(K.radius));
    constexpr int kGuardTerms = 16;
    if (K.truncation_degree < r + kGuardTerms)
        throw truncation_error("eval_jet: truncation degree " + std::to_string(K.truncation_degree) +
                               " too small for order " + std::to_string(r) +
                               " (needs >= order + " + std::to_string(kGuardTerms) + ")");

    // entry(i,j) = sum_{n >= max(i,j)} a_n n!/(n-i)! n!/(n-j)! z^(n-i) conj(w)^(n-j)
    const Complex wb = std::conj(w);
    const int M = K.truncation_degree;
    Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(r, r);
    std::vector<Complex> zpow(static_cast<std::size_t>(M) + 1), wpow(static_cast<std::size_t>(M) + 1);
    zpow[0] = 1.0;
    wpow[0] = 1.0;
    for (int n = 1; n <= M; ++n) {
        zpow[static_cast<std::size_t>(n)] = zpow[static_cast<std::size_t>(n) - 1] * z;
        wpow[static_cast<std::size_t>(n)] = wpow[static_cast<std::size_t>(n) - 1] * wb;
    }
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
            Complex acc = 0.0;
            for (int n = std::max(i, j); n <= M; ++n) {
                double f = K.coeffs[static_cast<std::size_t>(n)];
                for (int k = 0; k < i; ++k) f *= (n - k);
                for (int k = 0; k < j; ++k) f *= (n - k);
                acc += f * zpow[static_cast<std::size_t>(n - i)] * wpow[static_cast<std::size_t>(n - j)];
            }
            E(i, j) = acc;
        }
    }

    KernelJetMatrix J;
    J.order = r;
    J.entries = std::move(E);
    J.z = z;
    J.w = w;
    return J;
}

MatrixKernelGamma::MatrixKernelGamma(DiagonalKernel K0, DiagonalKernel K1)
    : K0_(std::move(K0)), K1_(std::move(K1)) {
    if (std::abs(K0_.radius - K1_.radius) > 1e-15)
        throw parameter_error("kernel_gamma: kernels must share an evaluation radius");
}

Eigen::Matrix2cd MatrixKernelGamma::operator()(Complex z, Complex w) const {
    const KernelJetMatrix J = eval_jet(K0_, z, w, 2);
    Eigen::Matrix2cd G = J.entries;
    G(1, 1) += K1_.eval(z, w);
    return G;
}

MatrixKernelGamma kernel_gamma(const DiagonalKernel& K0, const DiagonalKernel& K1) {
    return MatrixKernelGamma(K0, K1);
}

} // namespace flagshift
