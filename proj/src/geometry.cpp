#include "flagshift/geometry.hpp"

#include <cmath>
#include <string>

namespace flagshift {

namespace {

constexpr double kDegenerateMetric = 1e-12;

} // namespace

CurvatureSample curvature_line(const DiagonalKernel& K, Complex w) {
    const KernelJetMatrix J = eval_jet(K, w, w, 2);
    const double k00 = J.entries(0, 0).real();
    if (k00 < kDegenerateMetric)
        throw degenerate_metric_error("curvature_line: K(w,w) below degeneracy threshold at |w| = " +
                                      std::to_string(std::abs(w)));
    // K, dz dwbar K are real on the diagonal; dz K and dwbar K are conjugates.
    const double k11 = J.entries(1, 1).real();
    const double cross = std::norm(J.entries(1, 0));
    const double value = -(k00 * k11 - cross) / (k00 * k00);
    return {w, value};
}

MetricSample metric_sample(const DiagonalKernel& K0, const DiagonalKernel& K1, Complex w) {
    const double h = K0.eval_diag(w);
    const double t1 = K1.eval_diag(w);
    if (h < kDegenerateMetric || t1 < kDegenerateMetric)
        throw degenerate_metric_error("metric_sample: kernel diagonal below degeneracy threshold");
    return {w, h, t1};
}

SecondFundamentalFormSample second_fundamental_form(const DiagonalKernel& K0,
                                                    const DiagonalKernel& K1, Complex w) {
    const MetricSample m = metric_sample(K0, K1, w);
    const double ddbar_log_h = -curvature_line(K0, w).value;
    const double radicand = m.t1_norm_sq / m.h + ddbar_log_h;
    if (!(radicand > 0.0))
        throw geometric_degeneracy_error("second_fundamental_form: non-positive radicand at |w| = " +
                                         std::to_string(std::abs(w)));
    return {w, -ddbar_log_h / std::sqrt(radicand)};
}

Eigen::MatrixXcd frame_change_matrix(const std::vector<Complex>& phi_jet, int k) {
    if (k < 1) throw parameter_error("frame_change_matrix: k must be >= 1");
    if (static_cast<int>(phi_jet.size()) < k)
        throw parameter_error("frame_change_matrix: jet sequence shorter than k");

    Eigen::MatrixXcd Psi = Eigen::MatrixXcd::Zero(k, k);
    for (int j = 0; j < k; ++j) {
        double binom = 1.0;  // binom(j, i) built up incrementally over i
        for (int i = j; i >= 0; --i) {
            Psi(i, j) = binom * phi_jet[static_cast<std::size_t>(j - i)];
            if (i > 0) binom = binom * i / (j - i + 1.0);
        }
    }
    return Psi;
}

} // namespace flagshift
