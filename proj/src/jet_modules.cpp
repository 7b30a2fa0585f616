#include "flagshift/jet_modules.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "flagshift/flag_models.hpp"

namespace flagshift {

namespace {

// Factorials and binomials stay inside long long for orders up to 12; the
// order cap below keeps the exact rational path overflow-free as well.
constexpr int max_order = 12;

long long factorial_ll(int n) {
    long long f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

long long binom_ll(int n, int r) {
    if (r < 0 || r > n) return 0;
    long long b = 1;
    for (int i = 0; i < r; ++i) b = b * (n - i) / (i + 1);
    return b;
}

void check_order(int k) {
    if (k < 1) throw parameter_error("jet order must be at least 1");
    if (k > max_order)
        throw parameter_error("jet order " + std::to_string(k) + " exceeds the cap of " +
                              std::to_string(max_order));
}

void require_valid(const JetSpec& spec) {
    const MuValidation v = validate_spec(spec);
    if (!v.valid)
        throw parameter_error("invalid jet spec: constraint violated at (" + std::to_string(v.p) +
                              "," + std::to_string(v.l) + "," + std::to_string(v.i) +
                              ") by " + std::to_string(v.violation));
}

// Action matrix without validation; the monomial scan needs it on invalid
// specs to exhibit the violating pair.
Eigen::MatrixXcd raw_jet_action(const JetSpec& spec, const Polynomial& f, Complex w) {
    const int k = spec.k;
    std::vector<Complex> der(static_cast<std::size_t>(k));
    Polynomial d = f;
    for (int m = 0; m < k; ++m) {
        der[static_cast<std::size_t>(m)] = d.eval(w);
        d = d.derivative();
    }
    Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(k, k);
    for (int i = 1; i <= k; ++i)
        for (int j = 1; j <= i; ++j) J(i - 1, j - 1) = spec.mu(i - 1, j - 1) * der[static_cast<std::size_t>(i - j)];
    return J;
}

} // namespace

int Polynomial::degree() const {
    int d = static_cast<int>(coeffs.size()) - 1;
    while (d > 0 && coeffs[static_cast<std::size_t>(d)] == 0.0) --d;
    return d;
}

Complex Polynomial::eval(Complex w) const {
    Complex v = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) v = v * w + coeffs[i];
    return v;
}

Polynomial Polynomial::derivative() const {
    Polynomial d;
    if (coeffs.size() <= 1) {
        d.coeffs = {0.0};
        return d;
    }
    d.coeffs.resize(coeffs.size() - 1);
    for (std::size_t i = 1; i < coeffs.size(); ++i)
        d.coeffs[i - 1] = static_cast<double>(i) * coeffs[i];
    return d;
}

Polynomial operator*(const Polynomial& f, const Polynomial& g) {
    if (f.coeffs.empty() || g.coeffs.empty()) return Polynomial{{0.0}};
    const int df = static_cast<int>(f.coeffs.size()) - 1;
    const int dg = static_cast<int>(g.coeffs.size()) - 1;
    if (df + dg > Polynomial::degree_cap)
        throw parameter_error("polynomial product degree " + std::to_string(df + dg) +
                              " exceeds the cap of " + std::to_string(Polynomial::degree_cap));
    Polynomial h;
    h.coeffs.assign(static_cast<std::size_t>(df + dg) + 1, 0.0);
    for (int a = 0; a <= df; ++a)
        for (int b = 0; b <= dg; ++b)
            h.coeffs[static_cast<std::size_t>(a + b)] +=
                f.coeffs[static_cast<std::size_t>(a)] * g.coeffs[static_cast<std::size_t>(b)];
    return h;
}

Polynomial monomial(int power, Complex scale) {
    if (power < 0 || power > Polynomial::degree_cap)
        throw parameter_error("monomial power out of range");
    Polynomial m;
    m.coeffs.assign(static_cast<std::size_t>(power) + 1, 0.0);
    m.coeffs.back() = scale;
    return m;
}

std::vector<double> JetSpec::superdiagonal() const {
    std::vector<double> s;
    s.reserve(static_cast<std::size_t>(k) - 1);
    for (int i = 1; i < k; ++i) s.push_back(mu(i, i - 1));
    return s;
}

MuValidation validate_mu(const Eigen::MatrixXd& mu, double tol) {
    if (mu.rows() != mu.cols()) throw parameter_error("mu matrix must be square");
    const int k = static_cast<int>(mu.rows());
    check_order(k);
    for (int r = 0; r < k; ++r)
        for (int c = r + 1; c < k; ++c)
            if (mu(r, c) != 0.0) throw parameter_error("mu matrix must be lower triangular");

    MuValidation out;
    for (int p = 1; p <= k; ++p) {
        for (int l = 1; l <= p; ++l) {
            for (int i = 1; i <= l; ++i) {
                double gap;
                if (p == l && l == i) {
                    gap = std::abs(mu(p - 1, p - 1) - 1.0);
                } else {
                    const double lhs = mu(p - 1, l - 1) * mu(l - 1, i - 1);
                    const double rhs = static_cast<double>(binom_ll(p - i, l - i)) * mu(p - 1, i - 1);
                    gap = std::abs(lhs - rhs);
                }
                if (gap > tol) {
                    out.valid = false;
                    out.p = p;
                    out.l = l;
                    out.i = i;
                    out.violation = gap;
                    return out;
                }
            }
        }
    }
    return out;
}

MuValidation validate_mu(const std::vector<std::vector<Rational>>& mu) {
    const int k = static_cast<int>(mu.size());
    check_order(k);
    for (int p = 0; p < k; ++p)
        if (static_cast<int>(mu[static_cast<std::size_t>(p)].size()) != p + 1)
            throw parameter_error("exact mu must be given as lower-triangular rows");

    auto at = [&](int p, int l) { return mu[static_cast<std::size_t>(p - 1)][static_cast<std::size_t>(l - 1)]; };
    MuValidation out;
    out.exact = true;
    for (int p = 1; p <= k; ++p) {
        for (int l = 1; l <= p; ++l) {
            for (int i = 1; i <= l; ++i) {
                bool bad;
                if (p == l && l == i) {
                    bad = at(p, p) != Rational(1);
                } else {
                    bad = at(p, l) * at(l, i) != Rational(binom_ll(p - i, l - i)) * at(p, i);
                }
                if (bad) {
                    out.valid = false;
                    out.p = p;
                    out.l = l;
                    out.i = i;
                    out.violation = 1.0;
                    return out;
                }
            }
        }
    }
    return out;
}

MuValidation validate_spec(const JetSpec& spec, double tol) {
    check_order(spec.k);
    if (spec.mu.rows() != spec.k || spec.mu.cols() != spec.k)
        throw parameter_error("jet spec mu matrix has the wrong size");
    if (spec.mu_exact) return validate_mu(*spec.mu_exact);
    return validate_mu(spec.mu, tol);
}

JetSpec binomial_jet_spec(int k) {
    check_order(k);
    JetSpec s;
    s.k = k;
    s.mu = Eigen::MatrixXd::Zero(k, k);
    std::vector<std::vector<Rational>> exact(static_cast<std::size_t>(k));
    for (int p = 1; p <= k; ++p) {
        exact[static_cast<std::size_t>(p - 1)].resize(static_cast<std::size_t>(p));
        for (int l = 1; l <= p; ++l) {
            const long long b = binom_ll(p - 1, l - 1);
            s.mu(p - 1, l - 1) = static_cast<double>(b);
            exact[static_cast<std::size_t>(p - 1)][static_cast<std::size_t>(l - 1)] = Rational(b);
        }
    }
    s.mu_exact = std::move(exact);
    return s;
}

JetSpec inverse_factorial_jet_spec(int k) {
    check_order(k);
    JetSpec s;
    s.k = k;
    s.mu = Eigen::MatrixXd::Zero(k, k);
    std::vector<std::vector<Rational>> exact(static_cast<std::size_t>(k));
    for (int p = 1; p <= k; ++p) {
        exact[static_cast<std::size_t>(p - 1)].resize(static_cast<std::size_t>(p));
        for (int l = 1; l <= p; ++l) {
            const Rational r(1, factorial_ll(p - l));
            s.mu(p - 1, l - 1) = boost::rational_cast<double>(r);
            exact[static_cast<std::size_t>(p - 1)][static_cast<std::size_t>(l - 1)] = r;
        }
    }
    s.mu_exact = std::move(exact);
    return s;
}

JetSpec jet_spec_from_superdiagonal(const std::vector<double>& mu_super) {
    const int k = static_cast<int>(mu_super.size()) + 1;
    check_order(k);
    for (double m : mu_super)
        if (!(m > 0.0)) throw parameter_error("superdiagonal couplings must be positive");

    // mu_{p,i} = (prod_{j=i..p-1} mu_{j+1,j}) / (p-i)!; the constraint chain
    // determines everything from the superdiagonal and this closed form
    // satisfies every triple.
    JetSpec s;
    s.k = k;
    s.mu = Eigen::MatrixXd::Zero(k, k);
    for (int p = 1; p <= k; ++p) {
        s.mu(p - 1, p - 1) = 1.0;
        double prod = 1.0;
        for (int i = p - 1; i >= 1; --i) {
            prod *= mu_super[static_cast<std::size_t>(i) - 1];
            s.mu(p - 1, i - 1) = prod / static_cast<double>(factorial_ll(p - i));
        }
    }
    return s;
}

JetSpec random_valid_jet_spec(int k, unsigned long long seed) {
    check_order(k);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.6, 1.8);
    std::vector<double> super;
    super.reserve(static_cast<std::size_t>(k) - 1);
    for (int i = 1; i < k; ++i) super.push_back(unif(rng));
    return jet_spec_from_superdiagonal(super);
}

Eigen::MatrixXcd jet_action(const JetSpec& spec, const Polynomial& f, Complex w) {
    require_valid(spec);
    if (f.degree() > Polynomial::degree_cap)
        throw parameter_error("polynomial degree exceeds the cap");
    return raw_jet_action(spec, f, w);
}

Eigen::MatrixXd b_coefficients(const JetSpec& spec) {
    require_valid(spec);
    const int k = spec.k;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, k);
    for (int p = 1; p <= k; ++p) {
        b(p - 1, p - 1) = 1.0;
        for (int l = p - 1; l >= 1; --l)
            b(p - 1, l - 1) = spec.mu(l, l - 1) * b(p - 1, l) / static_cast<double>(p - l);
    }

    // The fill uses the deepest admissible step; every shallower one must
    // agree or the spec was not actually valid.
    for (int p = 1; p <= k; ++p) {
        for (int l = 1; l < p; ++l) {
            for (int j = 1; j <= p - l; ++j) {
                const double ref = spec.mu(p - j, l - 1) /
                                   static_cast<double>(binom_ll(p - l, j - 1)) * b(p - 1, p - j);
                if (std::abs(b(p - 1, l - 1) - ref) > 1e-10 * (1.0 + std::abs(ref)))
                    throw spec_error("frame coefficients disagree across recursion depths at (" +
                                     std::to_string(p) + "," + std::to_string(l) + "," +
                                     std::to_string(j) + ")");
            }
        }
    }
    return b;
}

Eigen::MatrixXcd localization_kernel(const JetSpec& spec, const DiagonalKernel& K, Complex z,
                                     Complex w) {
    const Eigen::MatrixXd b = b_coefficients(spec);
    const int k = spec.k;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(k, k);
    for (int l = 1; l <= k; ++l) {
        const int r = k - l + 1;
        const KernelJetMatrix J = eval_jet(K, z, w, r);
        // The order-r jet block sits bottom-right, rows and columns l..k.
        for (int p = l; p <= k; ++p)
            for (int q = l; q <= k; ++q)
                out(p - 1, q - 1) += b(p - 1, l - 1) * J.entries(p - l, q - l) * b(q - 1, l - 1);
    }
    return out;
}

std::optional<std::pair<int, int>> find_violating_monomials(const JetSpec& spec, double tol) {
    check_order(spec.k);
    // Two generic probe points guard against an accidental zero of a single
    // monomial combination.
    const Complex probes[2] = {Complex(0.82, 0.31), Complex(-0.47, 0.55)};
    for (int a = 0; a <= spec.k; ++a) {
        for (int b = 0; b <= spec.k; ++b) {
            const Polynomial f = monomial(a);
            const Polynomial g = monomial(b);
            const Polynomial fg = f * g;
            double worst = 0.0;
            for (const Complex& w : probes) {
                const Eigen::MatrixXcd lhs = raw_jet_action(spec, fg, w);
                const Eigen::MatrixXcd rhs = raw_jet_action(spec, f, w) * raw_jet_action(spec, g, w);
                worst = std::max(worst, (lhs - rhs).norm());
            }
            if (worst > tol) return std::make_pair(a, b);
        }
    }
    return std::nullopt;
}

LocalizationVerdict classify_localizations(const JetSpec& A, const JetSpec& B,
                                           const DiagonalKernel& K, int N) {
    if (A.k != B.k) throw parameter_error("localization comparison requires equal jet orders");
    require_valid(A);
    require_valid(B);

    LocalizationVerdict v;
    const std::vector<double> sa = A.superdiagonal();
    const std::vector<double> sb = B.superdiagonal();
    v.superdiagonals_equal = sa == sb;

    if (A.k == 1) {
        // Order one leaves a single line model; nothing varies.
        v.isomorphic = true;
        v.superdiagonals_equal = true;
        v.equivalence.equivalent = true;
        v.equivalence.note = "order-one jet specs induce the same line model";
        return v;
    }

    const FlagOperator MA = build_jet_model(K, sa, N);
    const FlagOperator MB = build_jet_model(K, sb, N);
    const std::vector<Complex> grid = polar_grid(5, 8, 0.5);
    v.equivalence = decide_equivalence(MA, MB, grid, 1e-6);
    v.isomorphic = v.equivalence.equivalent;
    return v;
}

} // namespace flagshift
