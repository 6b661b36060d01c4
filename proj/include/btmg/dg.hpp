// Copyright (c) 2026 The btmg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BTMG_DG_HPP
#define BTMG_DG_HPP

#include "btmg/mgm.hpp"
#include "btmg/symbol_io.hpp"

namespace btmg {

/// Staggered-DG pressure system ingested from a coefficient file: the 9x9
/// block coefficients a_{(0,0)}, a_{(+-1,0)}, a_{(0,+-1)} of a cross-shaped
/// 2-level symbol.
struct DgSpec {
    std::string coefficient_file;
    int t = 3;

    int n() const { return (1 << t) - 1; }
};

/// Validates everything the method requires of an ingested DG symbol:
/// 2 levels, d = 9, cross stencil, Hermitian pairing (checked by the symbol
/// loader), lambda_min >= 0 with an order-2 zero at the origin and no other
/// zeros on the sampling grid.
inline void validate_dg_symbol(const MatrixSymbol& f) {
    if (f.levels() != 2) throw std::invalid_argument("dg: symbol must have 2 levels");
    if (f.block_size() != 9) throw std::invalid_argument("dg: block size must be 9");
    if (!f.hermitian()) throw std::invalid_argument("dg: symbol must be flagged hermitian");
    for (const auto& [off, a] : f.coeffs()) {
        const int a0 = std::abs(off[0]), a1 = std::abs(off[1]);
        if (a0 + a1 > 1)
            throw std::invalid_argument("dg: stencil must be the 5-point cross (0,0),(+-1,0),(0,+-1)");
    }
    const double scale = sup_spectral_norm(f, 64);
    if (scale <= 0.0) throw std::invalid_argument("dg: zero symbol");
    if (lambda_min(f, {0.0, 0.0}) > 1e-8 * scale)
        throw std::invalid_argument("dg: lambda_min(f(0,0)) must vanish");
    // order-2 growth along the axes and diagonals
    const double h = 1e-3;
    for (auto dir : {std::pair{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {1.0, -1.0}}) {
        double lp = lambda_min(f, {h * dir.first, h * dir.second});
        double lm = lambda_min(f, {-h * dir.first, -h * dir.second});
        double l0 = lambda_min(f, {0.0, 0.0});
        if ((lp - 2.0 * l0 + lm) / (h * h) <= 1e-8 * scale)
            throw std::invalid_argument("dg: lambda_min lacks an order-2 zero at the origin");
    }
    // positive away from the origin; grid excludes the cells next to 0
    const int g = 48;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            if ((i <= 1 || i >= g - 1) && (j <= 1 || j >= g - 1)) continue;
            double th1 = 2.0 * pi * i / g, th2 = 2.0 * pi * j / g;
            if (lambda_min(f, {th1, th2}) <= 1e-10 * scale)
                throw std::invalid_argument("dg: lambda_min vanishes away from the origin");
        }
}

inline MatrixSymbol load_dg_symbol(const std::string& path) {
    MatrixSymbol f = load_symbol_file(path);
    validate_dg_symbol(f);
    return f;
}

/// T_n(f) for the ingested symbol: 2-level block-Toeplitz, N = 9 n^2.
inline StructuredOperator dg_system(const DgSpec& spec) {
    MatrixSymbol f = load_dg_symbol(spec.coefficient_file);
    const int n = spec.n();
    return build_operator(f, {n, n}, OperatorKind::toeplitz);
}

/// The tensor projector (T_n(p_z) kron T_n(p_z)) (K_n^T kron K_n^T kron I_9):
/// equivalently the 2-level transfer generated by p_z kron p_z with d = 3
/// factors.
inline MatrixSymbol dg_transfer_symbol(double z) {
    if (z <= 0.0) throw std::invalid_argument("dg_transfer: z must be positive");
    MatrixSymbol p3 = projector_symbol_pz(3, z);
    return symbol_kron(p3, p3);
}

inline GridTransfer dg_transfer(int n, double z) {
    MatrixSymbol p = dg_transfer_symbol(z);
    return build_transfer(p, {LevelInfo{n, false}, LevelInfo{n, false}}, CutVariant::toeplitz_odd);
}

}  // namespace btmg

#endif  // BTMG_DG_HPP
