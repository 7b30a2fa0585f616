#include "flagshift/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flagshift {

namespace {

constexpr double kFrameAccuracyTol = 1e-4;

// The compressed block acting on its own kernel section leaves a defect only
// in the last coordinate: (T - w) s(w) = -sqrt(a_{N-1}) w^N e_{N-1}.
double block_truncation_residual(const ShiftBlock& b, Complex w) {
    const double top = std::sqrt(b.kernel.coeffs[static_cast<std::size_t>(b.dim) - 1]) *
                       std::pow(std::abs(w), b.dim);
    double nrm_sq = 0.0;
    double p = 1.0;
    for (int n = 0; n < b.dim; ++n) {
        nrm_sq += b.kernel.coeffs[static_cast<std::size_t>(n)] * p;
        p *= std::norm(w);
    }
    return top / std::sqrt(nrm_sq);
}

double theta12_from_forms(const HermitianBiPoly& h_form, const HermitianBiPoly& t1_form, Complex w) {
    const double h = h_form.eval(w);
    const double t1sq = t1_form.eval(w);
    const double loglap = h_form.log_laplacian(w);
    const double radicand = t1sq / h + loglap;
    if (!(radicand > 0.0))
        throw geometric_degeneracy_error("theta12: inclusion form radicand is not positive");
    return -loglap / std::sqrt(radicand);
}

} // namespace

std::vector<Complex> polar_grid(int radii, int angles, double rmax) {
    if (radii < 1 || angles < 1) throw parameter_error("polar_grid: counts must be positive");
    if (!(rmax > 0.0) || rmax >= 1.0) throw parameter_error("polar_grid: rmax must lie in (0,1)");
    std::vector<Complex> grid;
    grid.reserve(static_cast<std::size_t>(radii) * static_cast<std::size_t>(angles));
    for (int j = 1; j <= radii; ++j) {
        const double r = rmax * j / radii;
        for (int m = 0; m < angles; ++m) {
            const double a = 2.0 * std::numbers::pi * m / angles;
            grid.push_back(Complex(r * std::cos(a), r * std::sin(a)));
        }
    }
    return grid;
}

InvariantReport invariant_report(const FlagOperator& T, const std::vector<Complex>& grid, Exec exec) {
    if (T.block_count() < 1) throw parameter_error("invariant_report: empty model");
    const int n = T.block_count();
    const double radius = T.blocks.front().kernel.radius;
    for (Complex w : grid)
        if (std::abs(w) > radius + 1e-15)
            throw domain_error("invariant_report: grid point outside the model radius");

    const FrameFamily F = frame_family(T);

    std::vector<HermitianBiPoly> t_forms;
    t_forms.reserve(static_cast<std::size_t>(n));
    for (const auto& t : F.t) t_forms.push_back(gram_form(t, t));

    std::map<std::pair<int, int>, HermitianBiPoly> extra_forms;
    for (const auto& [key, S] : T.intertwiners) {
        if (key.second == key.first + 1) continue;
        const int N = T.block_dim();
        const VectorPoly& tl = F.t[static_cast<std::size_t>(key.second)];
        VectorPoly lifted;
        lifted.C = Eigen::MatrixXcd::Zero(tl.C.rows(), tl.C.cols());
        lifted.C.middleRows(key.first * N, N) =
            T.intertwiner_matrix(key.first, key.second) * tl.C.middleRows(key.second * N, N);
        extra_forms.emplace(key, gram_form(lifted, lifted));
    }

    HermitianBiPoly h_form;
    if (n == 2) h_form = gram_form(F.t[0], F.t[0]);

    struct Row {
        double curv_last = 0.0;
        double curv_first = 0.0;
        std::vector<double> ratios;
        std::vector<double> extras;
        double theta = 0.0;
    };

    const auto rows = map_indexed<Row>(
        grid.size(),
        [&](std::size_t g) {
            const Complex w = grid[g];
            for (const auto& b : T.blocks)
                if (block_truncation_residual(b, w) > kFrameAccuracyTol)
                    throw accuracy_error(
                        "invariant_report: block truncation residual exceeds the accuracy bound; "
                        "increase the model dimension or shrink the grid");
            Row row;
            row.curv_last = curvature_line(T.blocks.back().kernel, w).value;
            row.curv_first = curvature_line(T.blocks.front().kernel, w).value;
            std::vector<double> tnorm_sq(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) tnorm_sq[static_cast<std::size_t>(i)] = t_forms[static_cast<std::size_t>(i)].eval(w);
            row.ratios.resize(static_cast<std::size_t>(n) - 1);
            for (int i = 1; i < n; ++i)
                row.ratios[static_cast<std::size_t>(i) - 1] =
                    std::sqrt(tnorm_sq[static_cast<std::size_t>(i) - 1] / tnorm_sq[static_cast<std::size_t>(i)]);
            row.extras.reserve(extra_forms.size());
            for (const auto& [key, form] : extra_forms)
                row.extras.push_back(std::sqrt(form.eval(w) / tnorm_sq[0]));
            if (n == 2) row.theta = theta12_from_forms(h_form, t_forms[1], w);
            return row;
        },
        exec);

    InvariantReport rep;
    rep.grid = grid;
    rep.curvature_last.reserve(grid.size());
    rep.curvature_first.reserve(grid.size());
    rep.ratios.assign(static_cast<std::size_t>(n) - 1, {});
    for (auto& [key, form] : extra_forms) rep.extra_ratios.emplace(key, std::vector<double>{});
    for (std::size_t g = 0; g < rows.size(); ++g) {
        rep.curvature_last.push_back(rows[g].curv_last);
        rep.curvature_first.push_back(rows[g].curv_first);
        for (int i = 0; i + 1 < n; ++i) rep.ratios[static_cast<std::size_t>(i)].push_back(rows[g].ratios[static_cast<std::size_t>(i)]);
        std::size_t e = 0;
        for (auto& [key, vals] : rep.extra_ratios) vals.push_back(rows[g].extras[e++]);
        if (n == 2) rep.theta12.push_back(rows[g].theta);
    }
    return rep;
}

EquivalenceVerdict decide_equivalence(const FlagOperator& A, const FlagOperator& B,
                                      const std::vector<Complex>& grid, double tol,
                                      InvariantPair pair, bool necessary_only) {
    if (!(tol > 0.0)) throw parameter_error("decide_equivalence: tolerance must be positive");
    if (grid.empty()) throw parameter_error("decide_equivalence: empty grid");
    if (A.block_count() != B.block_count())
        throw parameter_error("decide_equivalence: models must have the same number of blocks");
    if (A.block_dim() != B.block_dim())
        throw parameter_error("decide_equivalence: models must share the truncation dimension");
    const int n = A.block_count();
    const bool strict = A.strict_bidiagonal && B.strict_bidiagonal;
    if (n > 2 && !strict && !necessary_only)
        throw parameter_error(
            "decide_equivalence: completeness not established for flag models with couplings beyond "
            "the superdiagonal; pass necessary_only to compare the necessary invariants");
    if (pair == InvariantPair::curvature_and_theta && n != 2)
        throw parameter_error("decide_equivalence: the second-fundamental-form invariant needs exactly two blocks");

    const InvariantReport ra = invariant_report(A, grid);
    const InvariantReport rb = invariant_report(B, grid);

    EquivalenceVerdict v;
    v.tolerance_used = tol;
    v.necessary_only = necessary_only && !(n <= 2 || strict);
    for (std::size_t g = 0; g < grid.size(); ++g)
        v.max_curvature_gap = std::max(v.max_curvature_gap,
                                       std::abs(ra.curvature_last[g] - rb.curvature_last[g]));

    if (pair == InvariantPair::curvature_and_theta) {
        for (std::size_t g = 0; g < grid.size(); ++g)
            v.max_ratio_gap = std::max(v.max_ratio_gap, std::abs(ra.theta12[g] - rb.theta12[g]));
        v.note = "second invariant: second fundamental form";
    } else {
        for (int i = 0; i + 1 < n; ++i)
            for (std::size_t g = 0; g < grid.size(); ++g)
                v.max_ratio_gap = std::max(v.max_ratio_gap,
                                           std::abs(ra.ratios[static_cast<std::size_t>(i)][g] -
                                                    rb.ratios[static_cast<std::size_t>(i)][g]));
        // Couplings above the superdiagonal: a key missing on one side means
        // that coupling is zero there, so its ratio function is zero.
        std::map<std::pair<int, int>, bool> keys;
        for (const auto& [k, vals] : ra.extra_ratios) keys[k] = true;
        for (const auto& [k, vals] : rb.extra_ratios) keys[k] = true;
        for (const auto& [k, unused] : keys) {
            auto ita = ra.extra_ratios.find(k);
            auto itb = rb.extra_ratios.find(k);
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const double va = ita == ra.extra_ratios.end() ? 0.0 : ita->second[g];
                const double vb = itb == rb.extra_ratios.end() ? 0.0 : itb->second[g];
                v.max_ratio_gap = std::max(v.max_ratio_gap, std::abs(va - vb));
            }
        }
    }

    v.equivalent = v.max_curvature_gap < tol && v.max_ratio_gap < tol;
    if (v.necessary_only)
        v.note = v.equivalent
                     ? "necessary invariants agree; completeness is not established for this class"
                     : "necessary invariants differ; the operators are not unitarily equivalent";
    return v;
}

std::optional<double> is_homogeneous_line(const DiagonalKernel& K, const std::vector<Complex>& grid) {
    if (grid.empty()) throw parameter_error("is_homogeneous_line: empty grid");
    const double k0 = curvature_line(K, grid.front()).value;
    const double lambda = -k0 * std::pow(1.0 - std::norm(grid.front()), 2);
    if (!(lambda > 0.0)) return std::nullopt;
    for (Complex w : grid) {
        const double target = -lambda / std::pow(1.0 - std::norm(w), 2);
        const double got = curvature_line(K, w).value;
        if (std::abs(got - target) > 1e-6 * std::abs(target)) return std::nullopt;
    }
    return lambda;
}

HomogeneityVerdict is_homogeneous_flag2(const FlagOperator& T, const std::vector<Complex>& grid) {
    if (T.block_count() != 2) throw parameter_error("is_homogeneous_flag2: needs exactly two blocks");
    HomogeneityVerdict v;

    const auto l0 = is_homogeneous_line(T.blocks[0].kernel, grid);
    const auto l1 = is_homogeneous_line(T.blocks[1].kernel, grid);
    if (!l0 || !l1) {
        v.failed_condition = 1;
        v.diagnosis = std::string("condition (i): ") + (!l0 ? "first" : "second") +
                      " block kernel is not homogeneous";
        return v;
    }
    v.lambda0 = *l0;
    v.lambda1 = *l1;

    if (std::abs(v.lambda1 - v.lambda0 - 2.0) > 1e-6) {
        v.failed_condition = 2;
        v.diagnosis = "condition (ii): curvature parameters differ by " +
                      std::to_string(v.lambda1 - v.lambda0) + ", expected 2";
        return v;
    }

    const FrameFamily F = frame_family(T);
    const HermitianBiPoly t0_form = gram_form(F.t[0], F.t[0]);
    double alpha = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double rho = std::sqrt(t0_form.eval(grid[g]) / T.blocks[0].kernel.eval_diag(grid[g]));
        if (g == 0) {
            alpha = rho;
        } else if (std::abs(rho - alpha) > 1e-6 * alpha) {
            v.failed_condition = 3;
            v.diagnosis = "condition (iii): the coupled section is not a constant multiple of the "
                          "first block's kernel section";
            return v;
        }
    }
    v.homogeneous = true;
    v.alpha = alpha;
    v.diagnosis = "homogeneous";
    return v;
}

SylvesterVerdict sylvester_range_test(const ShiftBlock& T0, const ShiftBlock& T1,
                                      const Eigen::MatrixXcd& S, double tol) {
    const int N0 = T0.dim;
    const int N1 = T1.dim;
    if (S.rows() != N0 || S.cols() != N1)
        throw parameter_error("sylvester_range_test: S must map the second block space into the first");
    const Eigen::MatrixXcd A = T0.matrix();
    const Eigen::MatrixXcd B = T1.matrix();

    // Vectorized map: vec(T0 X - X T1) = (I kron T0 - T1^T kron I) vec(X).
    const int V = N0 * N1;
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(V, V);
    for (int j = 0; j < N1; ++j)
        M.block(j * N0, j * N0, N0, N0) += A;
    for (int j = 0; j < N1; ++j)
        for (int l = 0; l < N1; ++l)
            if (B(l, j) != 0.0)
                M.block(j * N0, l * N0, N0, N0) -= B(l, j) * Eigen::MatrixXcd::Identity(N0, N0);

    const Eigen::Map<const Eigen::VectorXcd> s(S.data(), V);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(M);
    const Eigen::VectorXcd x = cod.solve(s);

    SylvesterVerdict v;
    v.minimizer = Eigen::Map<const Eigen::MatrixXcd>(x.data(), N0, N1);
    v.relative_residual = (A * v.minimizer - v.minimizer * B - S).norm() / S.norm();
    v.in_range = v.relative_residual <= tol;
    return v;
}

double mobius_homogeneity_probe(const FlagOperator& T, Complex u, const std::vector<Complex>& grid) {
    if (T.block_count() != 2) throw parameter_error("mobius_homogeneity_probe: needs exactly two blocks");
    if (std::abs(u) >= 1.0) throw parameter_error("mobius_homogeneity_probe: u must lie in the open disk");
    const double radius = T.blocks.front().kernel.radius;

    const FrameFamily F = frame_family(T);
    const HermitianBiPoly t0_form = gram_form(F.t[0], F.t[0]);
    const HermitianBiPoly t1_form = gram_form(F.t[1], F.t[1]);
    const auto ratio_sq = [&](Complex w) { return t0_form.eval(w) / t1_form.eval(w); };

    double worst = 0.0;
    for (Complex w : grid) {
        // phi_u(w) = (w - u)/(1 - conj(u) w); the inverse map sends w to
        // (w + u)/(1 + conj(u) w) with derivative (1 - |u|^2)/(1 + conj(u) w)^2.
        const Complex back = (w + u) / (1.0 + std::conj(u) * w);
        if (std::abs(back) > radius + 1e-15)
            throw domain_error("mobius_homogeneity_probe: transported point leaves the model radius");
        const double deriv_sq = std::norm((1.0 - std::norm(u)) / std::pow(1.0 + std::conj(u) * w, 2));
        const double lhs = ratio_sq(back);
        const double rhs = deriv_sq * ratio_sq(w);
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
    return worst;
}

} // namespace flagshift
