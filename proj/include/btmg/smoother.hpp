// Copyright (c) 2026 The btmg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BTMG_SMOOTHER_HPP
#define BTMG_SMOOTHER_HPP

#include "btmg/structured.hpp"

namespace btmg {

enum class SmootherMethod { richardson, jacobi, gauss_seidel };

/// Stationary smoother configuration. Gauss-Seidel runs with unit relaxation;
/// Jacobi/Richardson may use different pre and post relaxation parameters
/// (the split-parameter configuration the iteration-count tables use).
struct SmootherConfig {
    SmootherMethod method = SmootherMethod::gauss_seidel;
    double omega_pre = 1.0;
    double omega_post = 1.0;
    int sweeps_pre = 1;
    int sweeps_post = 1;

    void validate() const {
        if (omega_pre <= 0.0 || omega_post <= 0.0)
            throw std::invalid_argument("SmootherConfig: omega must be positive");
        if (sweeps_pre < 0 || sweeps_post < 0)
            throw std::invalid_argument("SmootherConfig: sweep counts must be nonnegative");
        if (method == SmootherMethod::gauss_seidel && (omega_pre != 1.0 || omega_post != 1.0))
            throw std::invalid_argument("SmootherConfig: gauss_seidel requires omega = 1");
    }

    static SmootherConfig gauss_seidel(int pre = 1, int post = 1) {
        return {SmootherMethod::gauss_seidel, 1.0, 1.0, pre, post};
    }
    static SmootherConfig jacobi(double wpre, double wpost, int pre = 1, int post = 1) {
        return {SmootherMethod::jacobi, wpre, wpost, pre, post};
    }
    static SmootherConfig richardson(double wpre, double wpost, int pre = 1, int post = 1) {
        return {SmootherMethod::richardson, wpre, wpost, pre, post};
    }
};

namespace detail {

inline DenseVector diagonal_of(const SpMat& m) {
    DenseVector d = DenseVector::Zero(m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (SpMat::InnerIterator it(m, i); it; ++it)
            if (it.index() == i) d(i) = it.value();
    return d;
}

inline void check_diagonal(const DenseVector& d, double scale) {
    for (int i = 0; i < d.size(); ++i)
        if (std::abs(d(i)) <= 1e-300 || std::abs(d(i)) < 1e-14 * scale)
            throw std::domain_error("smoother: zero diagonal entry");
}

}  // namespace detail

/// Apply `sweeps` smoothing iterations to x for A x = b.
///  - richardson:   x <- x + omega (b - A x)
///  - jacobi:       x <- x + omega D^{-1} (b - A x)
///  - gauss_seidel: forward sweep in storage order, omega fixed at 1
inline DenseVector smooth(const StructuredOperator& op, DenseVector x, const DenseVector& b,
                          SmootherMethod method, double omega, int sweeps) {
    if (x.size() != op.rows() || b.size() != op.rows())
        throw std::invalid_argument("smooth: dimension mismatch");
    if (sweeps == 0) return x;
    const SpMat& m = op.matrix();
    if (method == SmootherMethod::richardson) {
        for (int s = 0; s < sweeps; ++s) {
            DenseVector r = b - matvec(op, x);
            x += omega * r;
        }
        return x;
    }
    DenseVector diag = detail::diagonal_of(m);
    double scale = 0.0;
    for (int i = 0; i < m.rows(); ++i)
        for (SpMat::InnerIterator it(m, i); it; ++it) scale = std::max(scale, std::abs(it.value()));
    detail::check_diagonal(diag, scale);
    if (method == SmootherMethod::jacobi) {
        for (int s = 0; s < sweeps; ++s) {
            DenseVector r = b - matvec(op, x);
            for (int i = 0; i < x.size(); ++i) x(i) += omega * r(i) / diag(i);
        }
        return x;
    }
    // gauss_seidel: in-place lower-triangular solve per sweep
    for (int s = 0; s < sweeps; ++s) {
        for (int i = 0; i < m.rows(); ++i) {
            cxd acc(0, 0);
            for (SpMat::InnerIterator it(m, i); it; ++it)
                if (it.index() != i) acc += it.value() * x(it.index());
            x(i) = (b(i) - acc) / diag(i);
        }
    }
    return x;
}

inline DenseVector smooth(const StructuredOperator& op, DenseVector x, const DenseVector& b,
                          const SmootherConfig& cfg, int sweeps) {
    return smooth(op, std::move(x), b, cfg.method, cfg.omega_pre, sweeps);
}

/// Admissible relaxed-Jacobi bound 2 min_j (a_0)_{jj} / ||f||_inf.
inline double jacobi_omega_bound(const MatrixSymbol& sym, int grid = 0) {
    DenseMatrix a0 = sym.coeff(MultiIndex(sym.levels(), 0));
    double mind = std::numeric_limits<double>::infinity();
    for (int j = 0; j < sym.block_size(); ++j) {
        cxd v = a0(j, j);
        if (std::abs(v.imag()) > 1e-12 * (1.0 + std::abs(v)) || v.real() <= 0.0)
            throw std::domain_error("jacobi_omega_bound: diagonal of a_0 must be real positive");
        mind = std::min(mind, v.real());
    }
    return 2.0 * mind / sup_spectral_norm(sym, grid);
}

/// Admissible relaxed-Richardson bound 2 / ||f||_inf.
inline double richardson_omega_bound(const MatrixSymbol& sym, int grid = 0) {
    return 2.0 / sup_spectral_norm(sym, grid);
}

}  // namespace btmg

#endif  // BTMG_SMOOTHER_HPP
