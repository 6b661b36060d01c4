// Copyright (c) 2026 The btmg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BTMG_FEM_HPP
#define BTMG_FEM_HPP

#include "btmg/mgm.hpp"
#include "btmg/structured.hpp"

namespace btmg {

/// Q_deg Lagrangian FEM problem on a uniform mesh with 2^t - 1 periods.
struct FemSpec {
    int deg = 2;
    int dimension = 1;
    int t = 3;

    void validate() const {
        if (deg < 1 || deg > 6) throw std::invalid_argument("FemSpec: deg must be in 1..6");
        if (dimension != 1 && dimension != 2)
            throw std::invalid_argument("FemSpec: dimension must be 1 or 2");
        if (t < 2) throw std::invalid_argument("FemSpec: t must be >= 2");
    }

    int n() const { return (1 << t) - 1; }
};

namespace detail {

/// Gauss-Legendre nodes/weights on [0,1] by Newton iteration on P_n.
/// Extended precision so the assembled coefficients are correct to the last
/// double bit.
inline void gauss_legendre_01(int npts, std::vector<long double>& x,
                              std::vector<long double>& w) {
    x.assign(npts, 0.0L);
    w.assign(npts, 0.0L);
    for (int i = 0; i < npts; ++i) {
        // Chebyshev initial guess on [-1,1]
        long double t = std::cos(static_cast<long double>(pi) * (i + 0.75L) / (npts + 0.5L));
        long double dp = 1.0L;
        for (int iter = 0; iter < 100; ++iter) {
            long double p0 = 1.0L, p1 = t;
            for (int k = 2; k <= npts; ++k) {
                long double p2 = ((2.0L * k - 1.0L) * t * p1 - (k - 1.0L) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            long double pm = (npts == 1) ? 1.0L : p0;
            dp = npts * (t * p1 - pm) / (t * t - 1.0L);
            long double dt = p1 / dp;
            t -= dt;
            if (std::abs(static_cast<double>(dt)) < 1e-19) break;
        }
        x[i] = 0.5L * (1.0L - t);  // descending t -> ascending x
        w[i] = 1.0L / ((1.0L - t * t) * dp * dp);
    }
}

/// Lagrange basis on equispaced nodes i/deg of [0,1]: values and derivatives.
inline void lagrange_eval(int deg, long double x, std::vector<long double>& val,
                          std::vector<long double>& der) {
    const int m = deg + 1;
    std::vector<long double> node(m);
    for (int i = 0; i < m; ++i) node[i] = static_cast<long double>(i) / deg;
    val.assign(m, 0.0L);
    der.assign(m, 0.0L);
    for (int i = 0; i < m; ++i) {
        long double v = 1.0L;
        for (int j = 0; j < m; ++j)
            if (j != i) v *= (x - node[j]) / (node[i] - node[j]);
        val[i] = v;
        long double dsum = 0.0L;
        for (int k = 0; k < m; ++k) {
            if (k == i) continue;
            long double prod = 1.0L / (node[i] - node[k]);
            for (int j = 0; j < m; ++j)
                if (j != i && j != k) prod *= (x - node[j]) / (node[i] - node[j]);
            dsum += prod;
        }
        der[i] = dsum;
    }
}

/// Reference-element stiffness and mass matrices, exact Gauss quadrature.
inline void reference_element(int deg, Eigen::MatrixXd& ke, Eigen::MatrixXd& me) {
    const int m = deg + 1;
    std::vector<long double> qx, qw, val, der;
    gauss_legendre_01(deg + 1, qx, qw);
    std::vector<std::vector<long double>> kacc(m, std::vector<long double>(m, 0.0L));
    std::vector<std::vector<long double>> macc(m, std::vector<long double>(m, 0.0L));
    for (std::size_t q = 0; q < qx.size(); ++q) {
        lagrange_eval(deg, qx[q], val, der);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                kacc[i][j] += qw[q] * der[i] * der[j];
                macc[i][j] += qw[q] * val[i] * val[j];
            }
    }
    ke = Eigen::MatrixXd::Zero(m, m);
    me = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            ke(i, j) = static_cast<double>(kacc[i][j]);
            me(i, j) = static_cast<double>(macc[i][j]);
        }
}

}  // namespace detail

/// Stiffness and mass symbols (f, h) of the uniform-mesh Q_deg Lagrange
/// discretization, assembled from the reference element. Unknowns per period:
/// the deg-1 interior nodes left to right, then the shared right endpoint.
inline std::pair<MatrixSymbol, MatrixSymbol> fem_symbols_1d(int deg) {
    if (deg < 1 || deg > 6) throw std::invalid_argument("fem_symbols_1d: deg must be in 1..6");
    Eigen::MatrixXd ke, me;
    detail::reference_element(deg, ke, me);
    const int d = deg;
    // local node l of an element maps to (period offset, unknown) as
    //   l = 0      -> (-1, d-1)   previous period's right endpoint
    //   0 < l < deg-> ( 0, l-1)   interior nodes
    //   l = deg    -> ( 0, d-1)   right endpoint
    auto place = [&](int l) -> std::pair<int, int> {
        if (l == 0) return {-1, d - 1};
        if (l == deg) return {0, d - 1};
        return {0, l - 1};
    };
    auto assemble = [&](const Eigen::MatrixXd& el) {
        std::map<int, Eigen::MatrixXd> blocks;
        blocks[-1] = Eigen::MatrixXd::Zero(d, d);
        blocks[0] = Eigen::MatrixXd::Zero(d, d);
        blocks[1] = Eigen::MatrixXd::Zero(d, d);
        for (int a = 0; a <= deg; ++a)
            for (int b = 0; b <= deg; ++b) {
                auto [pa, ua] = place(a);
                auto [pb, ub] = place(b);
                blocks[pa - pb](ua, ub) += el(a, b);
            }
        MatrixSymbol::CoeffMap c;
        for (const auto& [off, blk] : blocks) c[{off}] = blk.cast<cxd>();
        return MatrixSymbol(1, d, std::move(c), true);
    };
    return {assemble(ke), assemble(me)};
}

/// Cut stiffness block-Toeplitz T_n(f)_- of size deg*n - 1 (homogeneous
/// boundary conditions remove the trailing row/column).
inline StructuredOperator fem_matrix_1d(const FemSpec& spec) {
    spec.validate();
    auto [f, h] = fem_symbols_1d(spec.deg);
    return build_operator(f, spec.n(), OperatorKind::toeplitz, true);
}

/// Uncut T_n(f) of size deg*n; the variant the 1D iteration-count tables run.
inline StructuredOperator fem_matrix_1d_uncut(const FemSpec& spec) {
    spec.validate();
    auto [f, h] = fem_symbols_1d(spec.deg);
    return build_operator(f, spec.n(), OperatorKind::toeplitz, false);
}

/// 2D stiffness K kron M + M kron K from the two cut 1D factors,
/// size (deg*n - 1)^2.
inline StructuredOperator fem_matrix_2d(const FemSpec& spec) {
    spec.validate();
    auto [f, h] = fem_symbols_1d(spec.deg);
    const int n = spec.n();
    SpMat k = build_operator(f, n, OperatorKind::toeplitz, true).matrix();
    SpMat m = build_operator(h, n, OperatorKind::toeplitz, true).matrix();
    SpMat a = detail::kron_sparse(k, m);
    SpMat b = detail::kron_sparse(m, k);
    SpMat sum = a + b;
    std::vector<LevelInfo> levels = {{n, true}, {n, true}};
    return StructuredOperator(OperatorKind::general, std::move(levels), spec.deg, std::nullopt,
                              std::move(sum));
}

/// Tensor transfer for the cut 2D problem: the cut 1D transfer of p_z,
/// kron'd with itself. Reads the current n from the operator metadata, so it
/// serves every level of the hierarchy.
inline TransferFactory make_fem2d_transfer_factory(int deg, double z) {
    MatrixSymbol pz = projector_symbol_pz(deg, z);
    return [pz](const StructuredOperator& op) {
        const auto& info = op.level_info();
        if (info.size() != 2 || info[0].n != info[1].n)
            throw std::invalid_argument("fem2d transfer: expected square 2-level metadata");
        GridTransfer t1 = build_transfer(pz, {LevelInfo{info[0].n, true}}, CutVariant::toeplitz_odd);
        GridTransfer t;
        t.P = detail::kron_sparse(t1.P, t1.P);
        t.PH = SpMat(t.P.adjoint());
        t.cutters = {t1.cutters[0], t1.cutters[0]};
        t.coarse_levels = {t1.coarse_levels[0], t1.coarse_levels[0]};
        t.block = t1.block;
        return t;
    };
}

}  // namespace btmg

#endif  // BTMG_FEM_HPP
