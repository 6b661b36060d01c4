// Copyright (c) 2026 The btmg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BTMG_TEST_HELPERS_HPP
#define BTMG_TEST_HELPERS_HPP

#include <random>

#include "btmg/symbol.hpp"

namespace btmg::testing {

inline double uniform(std::mt19937& gen) { return 2.0 * (gen() / 4294967296.0) - 1.0; }

inline DenseMatrix random_matrix(std::mt19937& gen, int d, bool complex_entries = true) {
    DenseMatrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            m(i, j) = cxd(uniform(gen), complex_entries ? uniform(gen) : 0.0);
    return m;
}

/// Random Hermitian-flagged 1-level symbol of given block size and degree.
inline MatrixSymbol random_hermitian_symbol(std::mt19937& gen, int d, int degree) {
    MatrixSymbol::CoeffMap c;
    DenseMatrix a0 = random_matrix(gen, d);
    c[{0}] = 0.5 * (a0 + a0.adjoint().eval());
    for (int off = 1; off <= degree; ++off) {
        DenseMatrix aj = random_matrix(gen, d);
        c[{off}] = aj;
        c[{-off}] = aj.adjoint();
    }
    return MatrixSymbol(1, d, std::move(c), true);
}

inline MatrixSymbol scalar_symbol(std::initializer_list<std::pair<int, double>> coeffs,
                                  bool hermitian = true) {
    MatrixSymbol::CoeffMap c;
    for (auto [off, v] : coeffs) c[{off}] = DenseMatrix::Constant(1, 1, cxd(v, 0.0));
    return MatrixSymbol(1, 1, std::move(c), hermitian);
}

/// 2 - 2cos(theta), the P1 Laplacian symbol.
inline MatrixSymbol laplacian_symbol() {
    return scalar_symbol({{0, 2.0}, {1, -1.0}, {-1, -1.0}});
}

inline DenseVector random_vector(std::mt19937& gen, int n, bool complex_entries = true) {
    DenseVector v(n);
    for (int i = 0; i < n; ++i)
        v(i) = cxd(uniform(gen), complex_entries ? uniform(gen) : 0.0);
    return v;
}

}  // namespace btmg::testing

#endif  // BTMG_TEST_HELPERS_HPP
