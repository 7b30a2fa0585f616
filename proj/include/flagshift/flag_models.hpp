#pragma once

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "flagshift/errors.hpp"
#include "flagshift/kernels.hpp"

namespace flagshift {

// Polynomial with vector coefficients, column d holding the coefficient of w^d.
// Exactness matters: the truncated blocks are nilpotent perturbations, so the
// eigensection identities hold coefficient-wise and are never solved for
// numerically.
struct VectorPoly {
    Eigen::MatrixXcd C;

    int dim() const { return static_cast<int>(C.rows()); }
    int degree() const { return static_cast<int>(C.cols()) - 1; }
    Eigen::VectorXcd eval(Complex w) const;
    VectorPoly derivative(int times = 1) const;
    void add_scaled(const VectorPoly& p, Complex s);
};

// Real-valued form f(w) = sum_{a,b} G(a,b) conj(w)^a w^b with G = G^*.
struct HermitianBiPoly {
    Eigen::MatrixXcd G;

    double eval(Complex w) const;
    Complex eval_dw(Complex w) const;
    double eval_dw_dwbar(Complex w) const;
    double log_laplacian(Complex w) const;
};

// Gram form <p(w), q(w)> of two vector polynomials.
HermitianBiPoly gram_form(const VectorPoly& p, const VectorPoly& q);

// Truncation of the adjoint multiplication operator attached to a diagonal
// kernel: weight n is sqrt(a_n / a_{n+1}), sitting on the superdiagonal.
struct ShiftBlock {
    int dim = 0;
    std::vector<double> weights;
    DiagonalKernel kernel;

    Eigen::MatrixXcd matrix() const;
    VectorPoly section_poly() const;
};

ShiftBlock build_shift_block(const DiagonalKernel& K, int N);

// Block upper-triangular model: shift blocks on the diagonal, intertwiners
// above it. Blocks and intertwiners are stored as constructed; the optional
// gauge (one diagonal unitary per block) is applied by the accessors, so a
// gauged copy is an exactly unitarily equivalent operator.
struct FlagOperator {
    std::vector<ShiftBlock> blocks;
    std::map<std::pair<int, int>, Eigen::MatrixXcd> intertwiners;
    bool strict_bidiagonal = false;
    bool has_flag_structure = true;
    std::vector<Eigen::VectorXcd> gauges;
    std::vector<std::string> warnings;

    int block_count() const { return static_cast<int>(blocks.size()); }
    int block_dim() const { return blocks.empty() ? 0 : blocks.front().dim; }
    int dim() const { return block_count() * block_dim(); }
    bool has_intertwiner(int i, int j) const;
    Eigen::MatrixXcd block_matrix(int i) const;
    Eigen::MatrixXcd intertwiner_matrix(int i, int j) const;
    Eigen::MatrixXcd matrix() const;
    FlagOperator with_gauge(std::vector<Eigen::VectorXcd> g) const;
};

FlagOperator build_flag2(const DiagonalKernel& K0, const DiagonalKernel& K1, double mu, int N);
FlagOperator build_jet_model(const DiagonalKernel& K, const std::vector<double>& mu_super, int N);
FlagOperator build_flag_chain(const std::vector<DiagonalKernel>& kernels,
                              const std::vector<double>& mu_super, int N);
FlagOperator direct_sum_model(const std::vector<DiagonalKernel>& kernels, int N);
FlagOperator build_flag_custom(std::vector<ShiftBlock> blocks,
                               std::map<std::pair<int, int>, Eigen::MatrixXcd> intertwiners,
                               bool strict_bidiagonal);

std::vector<Eigen::VectorXcd> random_gauge(int n, int N, unsigned long long seed);

// Polynomial eigensection frame. t_k is the lifted kernel section of block k;
// gamma_k is the derivative-corrected combination that spans ker(T - w)
// together with the earlier gamma's. The gamma recursion is only valid for
// strictly bidiagonal chains.
struct FrameFamily {
    std::vector<VectorPoly> t;
    std::vector<VectorPoly> gamma;
};

FrameFamily frame_family(const FlagOperator& T);

struct SectionFrame {
    Complex point;
    std::vector<Eigen::VectorXcd> vectors;
    std::vector<Eigen::VectorXcd> orthogonal_parts;
    std::vector<double> residuals;
    std::vector<VectorPoly> gamma_polys;
    std::vector<VectorPoly> t_polys;
};

SectionFrame kernel_frame(const FlagOperator& T, Complex w, double accuracy_tol = 1e-4);
SectionFrame evaluate_frame(const FrameFamily& F, const FlagOperator& T, Complex w,
                            double accuracy_tol = 1e-4);

} // namespace flagshift
