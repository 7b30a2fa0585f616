#include "flagshift/flag_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace flagshift {

namespace {

constexpr double kDegenerate = 1e-12;

Eigen::VectorXcd monomials(Complex w, int count) {
    Eigen::VectorXcd m(count);
    Complex p = 1.0;
    for (int d = 0; d < count; ++d) {
        m(d) = p;
        p *= w;
    }
    return m;
}

Eigen::VectorXcd monomial_derivatives(Complex w, int count) {
    Eigen::VectorXcd m(count);
    m(0) = 0.0;
    Complex p = 1.0;
    for (int d = 1; d < count; ++d) {
        m(d) = static_cast<double>(d) * p;
        p *= w;
    }
    return m;
}

} // namespace

Eigen::VectorXcd VectorPoly::eval(Complex w) const {
    Eigen::VectorXcd v = C.col(C.cols() - 1);
    for (int d = static_cast<int>(C.cols()) - 2; d >= 0; --d) v = w * v + C.col(d);
    return v;
}

VectorPoly VectorPoly::derivative(int times) const {
    VectorPoly p = *this;
    for (int k = 0; k < times; ++k) {
        const int cols = static_cast<int>(p.C.cols());
        if (cols <= 1) {
            p.C = Eigen::MatrixXcd::Zero(p.C.rows(), 1);
            continue;
        }
        Eigen::MatrixXcd D(p.C.rows(), cols - 1);
        for (int d = 0; d + 1 < cols; ++d) D.col(d) = static_cast<double>(d + 1) * p.C.col(d + 1);
        p.C = std::move(D);
    }
    return p;
}

void VectorPoly::add_scaled(const VectorPoly& p, Complex s) {
    if (p.C.cols() > C.cols()) {
        const int old = static_cast<int>(C.cols());
        C.conservativeResize(Eigen::NoChange, p.C.cols());
        C.rightCols(C.cols() - old).setZero();
    }
    C.leftCols(p.C.cols()) += s * p.C;
}

double HermitianBiPoly::eval(Complex w) const {
    const Eigen::VectorXcd mr = monomials(w, static_cast<int>(G.rows()));
    const Eigen::VectorXcd mc = monomials(w, static_cast<int>(G.cols()));
    return (mr.adjoint() * G * mc).value().real();
}

Complex HermitianBiPoly::eval_dw(Complex w) const {
    const Eigen::VectorXcd mr = monomials(w, static_cast<int>(G.rows()));
    const Eigen::VectorXcd dc = monomial_derivatives(w, static_cast<int>(G.cols()));
    return (mr.adjoint() * G * dc).value();
}

double HermitianBiPoly::eval_dw_dwbar(Complex w) const {
    const Eigen::VectorXcd dr = monomial_derivatives(w, static_cast<int>(G.rows()));
    const Eigen::VectorXcd dc = monomial_derivatives(w, static_cast<int>(G.cols()));
    return (dr.adjoint() * G * dc).value().real();
}

double HermitianBiPoly::log_laplacian(Complex w) const {
    const double f = eval(w);
    if (f < kDegenerate)
        throw degenerate_metric_error("log_laplacian: form value below degeneracy threshold");
    const Complex fw = eval_dw(w);
    const double fww = eval_dw_dwbar(w);
    return (f * fww - std::norm(fw)) / (f * f);
}

HermitianBiPoly gram_form(const VectorPoly& p, const VectorPoly& q) {
    return {q.C.adjoint() * p.C};
}

Eigen::MatrixXcd ShiftBlock::matrix() const {
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 0; n + 1 < dim; ++n) T(n, n + 1) = weights[static_cast<std::size_t>(n)];
    return T;
}

VectorPoly ShiftBlock::section_poly() const {
    VectorPoly p;
    p.C = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) p.C(n, n) = std::sqrt(kernel.coeffs[static_cast<std::size_t>(n)]);
    return p;
}

ShiftBlock build_shift_block(const DiagonalKernel& K, int N) {
    if (N < 2) throw parameter_error("build_shift_block: N must be >= 2");
    if (N > K.truncation_degree)
        throw parameter_error("build_shift_block: N = " + std::to_string(N) +
                              " exceeds kernel truncation degree " + std::to_string(K.truncation_degree));
    ShiftBlock b;
    b.dim = N;
    b.kernel = K;
    b.weights.resize(static_cast<std::size_t>(N) - 1);
    for (int n = 0; n + 1 < N; ++n)
        b.weights[static_cast<std::size_t>(n)] =
            std::sqrt(K.coeffs[static_cast<std::size_t>(n)] / K.coeffs[static_cast<std::size_t>(n) + 1]);
    return b;
}

bool FlagOperator::has_intertwiner(int i, int j) const {
    return intertwiners.count({i, j}) > 0;
}

Eigen::MatrixXcd FlagOperator::block_matrix(int i) const {
    Eigen::MatrixXcd T = blocks[static_cast<std::size_t>(i)].matrix();
    if (!gauges.empty()) {
        const auto& g = gauges[static_cast<std::size_t>(i)];
        T = g.asDiagonal() * T * g.asDiagonal().inverse();
    }
    return T;
}

Eigen::MatrixXcd FlagOperator::intertwiner_matrix(int i, int j) const {
    auto it = intertwiners.find({i, j});
    if (it == intertwiners.end()) return Eigen::MatrixXcd::Zero(block_dim(), block_dim());
    Eigen::MatrixXcd S = it->second;
    if (!gauges.empty()) {
        S = gauges[static_cast<std::size_t>(i)].asDiagonal() * S *
            gauges[static_cast<std::size_t>(j)].asDiagonal().inverse();
    }
    return S;
}

Eigen::MatrixXcd FlagOperator::matrix() const {
    const int n = block_count();
    const int N = block_dim();
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(n * N, n * N);
    for (int i = 0; i < n; ++i) {
        T.block(i * N, i * N, N, N) = block_matrix(i);
        for (int j = i + 1; j < n; ++j)
            if (has_intertwiner(i, j)) T.block(i * N, j * N, N, N) = intertwiner_matrix(i, j);
    }
    return T;
}

FlagOperator FlagOperator::with_gauge(std::vector<Eigen::VectorXcd> g) const {
    if (static_cast<int>(g.size()) != block_count())
        throw parameter_error("with_gauge: one diagonal per block required");
    for (const auto& d : g) {
        if (d.size() != block_dim())
            throw parameter_error("with_gauge: gauge length must equal the block dimension");
        for (int m = 0; m < d.size(); ++m)
            if (std::abs(std::abs(d(m)) - 1.0) > 1e-12)
                throw parameter_error("with_gauge: gauge entries must be unimodular");
    }
    FlagOperator out = *this;
    out.gauges = std::move(g);
    return out;
}

FlagOperator build_flag2(const DiagonalKernel& K0, const DiagonalKernel& K1, double mu, int N) {
    if (!(mu > 0.0))
        throw parameter_error("build_flag2: the intertwiner scale mu must be positive (a flag model needs a non-zero intertwiner)");
    return build_flag_chain({K0, K1}, {mu}, N);
}

FlagOperator build_jet_model(const DiagonalKernel& K, const std::vector<double>& mu_super, int N) {
    const int k = static_cast<int>(mu_super.size()) + 1;
    std::vector<DiagonalKernel> kernels(static_cast<std::size_t>(k), K);
    return build_flag_chain(kernels, mu_super, N);
}

FlagOperator build_flag_chain(const std::vector<DiagonalKernel>& kernels,
                              const std::vector<double>& mu_super, int N) {
    if (kernels.empty()) throw parameter_error("build_flag_chain: no kernels given");
    if (mu_super.size() + 1 != kernels.size())
        throw parameter_error("build_flag_chain: need one mu per adjacent block pair");
    for (double mu : mu_super)
        if (!(mu > 0.0)) throw parameter_error("build_flag_chain: every mu must be positive");

    FlagOperator T;
    T.strict_bidiagonal = true;
    T.has_flag_structure = true;
    for (const auto& K : kernels) T.blocks.push_back(build_shift_block(K, N));

    for (std::size_t i = 0; i + 1 < kernels.size(); ++i) {
        // Canonical diagonal intertwiner: entry n is sqrt(a^i_n / a^{i+1}_n),
        // which maps the block-(i+1) kernel section onto the block-i one.
        Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(N, N);
        double smin = std::numeric_limits<double>::infinity();
        double smax = 0.0;
        for (int n = 0; n < N; ++n) {
            const double s = std::sqrt(kernels[i].coeffs[static_cast<std::size_t>(n)] /
                                       kernels[i + 1].coeffs[static_cast<std::size_t>(n)]);
            S(n, n) = mu_super[i] * s;
            smin = std::min(smin, s);
            smax = std::max(smax, s);
        }
        if (smax / smin > 1e6)
            T.warnings.push_back("intertwiner (" + std::to_string(i) + "," + std::to_string(i + 1) +
                                 "): diagonal entry growth exceeds 1e6; the untruncated intertwiner may be unbounded");
        T.intertwiners[{static_cast<int>(i), static_cast<int>(i) + 1}] = std::move(S);
    }
    return T;
}

FlagOperator direct_sum_model(const std::vector<DiagonalKernel>& kernels, int N) {
    if (kernels.empty()) throw parameter_error("direct_sum_model: no kernels given");
    FlagOperator T;
    T.strict_bidiagonal = false;
    T.has_flag_structure = false;
    for (const auto& K : kernels) T.blocks.push_back(build_shift_block(K, N));
    return T;
}

FlagOperator build_flag_custom(std::vector<ShiftBlock> blocks,
                               std::map<std::pair<int, int>, Eigen::MatrixXcd> intertwiners,
                               bool strict_bidiagonal) {
    if (blocks.empty()) throw parameter_error("build_flag_custom: no blocks given");
    const int n = static_cast<int>(blocks.size());
    const int N = blocks.front().dim;
    for (const auto& b : blocks)
        if (b.dim != N) throw parameter_error("build_flag_custom: blocks must share a dimension");

    FlagOperator T;
    T.blocks = std::move(blocks);
    T.strict_bidiagonal = strict_bidiagonal;
    T.has_flag_structure = true;

    for (auto& [key, S] : intertwiners) {
        const auto [i, j] = key;
        if (i < 0 || j >= n || i >= j)
            throw parameter_error("build_flag_custom: intertwiner indices must satisfy 0 <= i < j < n");
        if (S.rows() != N || S.cols() != N)
            throw parameter_error("build_flag_custom: intertwiner shape must match the block dimension");
        const double norm = S.norm();
        if (norm < kDegenerate)
            throw parameter_error("build_flag_custom: intertwiners must be non-zero");
        // Intertwining can only be checked away from the last row: compressing
        // the relation T_i S = S T_j to the top-left corner leaves a defect
        // that lives entirely in row N-1.
        const Eigen::MatrixXcd defect =
            T.blocks[static_cast<std::size_t>(i)].matrix() * S - S * T.blocks[static_cast<std::size_t>(j)].matrix();
        const double checked = defect.topRows(N - 1).norm();
        if (checked > 1e-9 * norm)
            throw parameter_error("build_flag_custom: matrix at (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") does not intertwine the corresponding blocks");
        const double last_row = defect.row(N - 1).norm();
        if (last_row > 1e-9 * norm)
            T.warnings.push_back("intertwiner (" + std::to_string(i) + "," + std::to_string(j) +
                                 "): truncation defect in the last row, relative size " +
                                 std::to_string(last_row / norm));
        T.intertwiners[key] = std::move(S);
    }
    return T;
}

FrameFamily frame_family(const FlagOperator& T) {
    const int n = T.block_count();
    const int N = T.block_dim();
    const int D = T.dim();

    FrameFamily F;
    F.t.resize(static_cast<std::size_t>(n));

    // t_{n-1} is the kernel section of the last diagonal block, embedded in
    // the last block of coordinates; t_i = S_{i,i+1} t_{i+1} walks it up the
    // superdiagonal. A missing coupling starts a fresh chain whose head is
    // that block's own kernel section, which is what a direct summand needs.
    // Everything here uses the ungauged blocks; the gauge is a block-diagonal
    // unitary applied at the end.
    {
        VectorPoly base = T.blocks[static_cast<std::size_t>(n) - 1].section_poly();
        VectorPoly t;
        t.C = Eigen::MatrixXcd::Zero(D, base.C.cols());
        t.C.middleRows((n - 1) * N, N) = base.C;
        F.t[static_cast<std::size_t>(n) - 1] = std::move(t);
    }
    for (int i = n - 2; i >= 0; --i) {
        auto it = T.intertwiners.find({i, i + 1});
        VectorPoly t;
        if (it == T.intertwiners.end()) {
            VectorPoly base = T.blocks[static_cast<std::size_t>(i)].section_poly();
            t.C = Eigen::MatrixXcd::Zero(D, base.C.cols());
            t.C.middleRows(i * N, N) = base.C;
        } else {
            const VectorPoly& up = F.t[static_cast<std::size_t>(i) + 1];
            t.C = Eigen::MatrixXcd::Zero(D, up.C.cols());
            t.C.middleRows(i * N, N) = it->second * up.C.middleRows((i + 1) * N, N);
        }
        F.t[static_cast<std::size_t>(i)] = std::move(t);
    }

    if (!T.gauges.empty()) {
        Eigen::VectorXcd G(D);
        for (int i = 0; i < n; ++i) G.segment(i * N, N) = T.gauges[static_cast<std::size_t>(i)];
        for (auto& p : F.t) p.C = G.asDiagonal() * p.C;
    }

    // gamma_k = t_k - sum_{j=1..k-start} (1/j!) d^j gamma_{k-j}, where start
    // is the head of k's chain. Within a chain (T - w) t_k = t_{k-1} by the
    // construction of the t walk, and the correction sum telescopes those
    // terms away; across a break the relation is (T - w) t_k = 0 and the sum
    // must not reach back. The recursion cancels (T - w) exactly only when
    // every coupling sits on the superdiagonal, so gamma is left empty for
    // looser flag structures. It commutes with the gauge, a constant
    // diagonal, so gauged t's are fine.
    for (const auto& [key, S] : T.intertwiners)
        if (key.second != key.first + 1) return F;

    std::vector<int> chain_start(static_cast<std::size_t>(n), 0);
    for (int k = 1; k < n; ++k)
        chain_start[static_cast<std::size_t>(k)] =
            T.has_intertwiner(k - 1, k) ? chain_start[static_cast<std::size_t>(k) - 1] : k;

    F.gamma.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        VectorPoly g = F.t[static_cast<std::size_t>(k)];
        double fact = 1.0;
        for (int j = 1; j <= k - chain_start[static_cast<std::size_t>(k)]; ++j) {
            fact *= j;
            g.add_scaled(F.gamma[static_cast<std::size_t>(k - j)].derivative(j), -1.0 / fact);
        }
        F.gamma[static_cast<std::size_t>(k)] = std::move(g);
    }
    return F;
}

SectionFrame kernel_frame(const FlagOperator& T, Complex w, double accuracy_tol) {
    return evaluate_frame(frame_family(T), T, w, accuracy_tol);
}

SectionFrame evaluate_frame(const FrameFamily& F, const FlagOperator& T, Complex w, double accuracy_tol) {
    const double radius = T.blocks.front().kernel.radius;
    if (std::abs(w) > radius + 1e-15)
        throw domain_error("kernel_frame: point lies outside the model radius");

    if (F.gamma.empty())
        throw parameter_error("kernel_frame: eigensections require couplings on the superdiagonal only");

    const int n = T.block_count();
    SectionFrame frame;
    frame.point = w;
    frame.vectors.resize(static_cast<std::size_t>(n));
    frame.residuals.resize(static_cast<std::size_t>(n));
    frame.gamma_polys = F.gamma;
    frame.t_polys = F.t;

    const Eigen::MatrixXcd M = T.matrix();
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXcd g = F.gamma[static_cast<std::size_t>(k)].eval(w);
        const double gn = g.norm();
        if (gn < kDegenerate)
            throw geometric_degeneracy_error("kernel_frame: frame vector degenerates at the requested point");
        // Every gamma_k(w) lies in ker(T - w); the frame spans the full
        // eigenspace. The only residual left is the truncation defect fed in
        // through the last coordinate of each block, of size about |w|^N.
        frame.residuals[static_cast<std::size_t>(k)] = (M * g - w * g).norm() / gn;
        frame.vectors[static_cast<std::size_t>(k)] = std::move(g);
    }
    for (double r : frame.residuals)
        if (r > accuracy_tol)
            throw accuracy_error("kernel_frame: truncation residual " + std::to_string(r) +
                                 " exceeds the requested accuracy; increase the model dimension or shrink |w|");

    // Gram-Schmidt against earlier frame vectors gives the orthogonal parts
    // whose norms feed the curvature ratios.
    frame.orthogonal_parts.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXcd v = frame.vectors[static_cast<std::size_t>(k)];
        for (int j = 0; j < k; ++j) {
            const Eigen::VectorXcd& u = frame.orthogonal_parts[static_cast<std::size_t>(j)];
            v -= u * (u.dot(v) / u.squaredNorm());
        }
        frame.orthogonal_parts[static_cast<std::size_t>(k)] = std::move(v);
    }
    return frame;
}

std::vector<Eigen::VectorXcd> random_gauge(int n, int N, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    std::vector<Eigen::VectorXcd> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXcd d(N);
        for (int m = 0; m < N; ++m) {
            const double a = ang(rng);
            d(m) = Complex(std::cos(a), std::sin(a));
        }
        g[static_cast<std::size_t>(i)] = std::move(d);
    }
    return g;
}

} // namespace flagshift
