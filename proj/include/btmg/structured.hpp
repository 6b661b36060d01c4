// Copyright (c) 2026 The btmg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BTMG_STRUCTURED_HPP
#define BTMG_STRUCTURED_HPP

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "btmg/symbol.hpp"

namespace btmg {

using SpMat = Eigen::SparseMatrix<cxd, Eigen::RowMajor, int>;

enum class OperatorKind { circulant, toeplitz, general };

enum class CutVariant { circulant_even, toeplitz_odd };

/// Per-level structural data of a (multilevel) structured operator.
struct LevelInfo {
    int n = 0;         // number of block periods at this level
    bool cut = false;  // last scalar row/column of this level's factor removed
};

/// Down-sampling matrix K_n: k rows, each a distinct canonical basis vector.
///  - circulant_even: n = 2k, row j selects column 2j.
///  - toeplitz_odd:   n = 2k+1, row j selects column 2j+1.
struct CuttingMatrix {
    CutVariant variant;
    int n = 0;
    int k = 0;

    static CuttingMatrix make(CutVariant v, int n) {
        CuttingMatrix c;
        c.variant = v;
        c.n = n;
        if (v == CutVariant::circulant_even) {
            if (n < 2 || n % 2 != 0)
                throw std::invalid_argument("CuttingMatrix: circulant cutting needs even n >= 2");
            c.k = n / 2;
        } else {
            if (n < 3 || n % 2 == 0)
                throw std::invalid_argument("CuttingMatrix: toeplitz cutting needs odd n >= 3");
            c.k = (n - 1) / 2;
        }
        return c;
    }

    int fine_index(int j) const {
        return variant == CutVariant::circulant_even ? 2 * j : 2 * j + 1;
    }
};

namespace detail {

/// Deterministic CSR x CSR product: per row, a sparse accumulator whose
/// touched columns are sorted before being emitted.
inline SpMat spgemm(const SpMat& a, const SpMat& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("spgemm: dimension mismatch");
    const int rows = static_cast<int>(a.rows());
    const int cols = static_cast<int>(b.cols());
    std::vector<int> outer(rows + 1, 0);
    std::vector<int> inner;
    std::vector<cxd> vals;
    std::vector<cxd> acc(cols, cxd(0, 0));
    std::vector<char> seen(cols, 0);
    std::vector<int> touched;
    touched.reserve(256);
    for (int i = 0; i < rows; ++i) {
        touched.clear();
        for (SpMat::InnerIterator ai(a, i); ai; ++ai) {
            const cxd av = ai.value();
            const int k = ai.index();
            for (SpMat::InnerIterator bi(b, k); bi; ++bi) {
                const int j = bi.index();
                if (!seen[j]) {
                    seen[j] = 1;
                    touched.push_back(j);
                    acc[j] = av * bi.value();
                } else {
                    acc[j] += av * bi.value();
                }
            }
        }
        std::sort(touched.begin(), touched.end());
        for (int j : touched) {
            inner.push_back(j);
            vals.push_back(acc[j]);
            seen[j] = 0;
        }
        outer[i + 1] = static_cast<int>(inner.size());
    }
    Eigen::Map<const SpMat> view(rows, cols, static_cast<int>(inner.size()), outer.data(),
                                 inner.data(), vals.data());
    return SpMat(view);
}

/// Kronecker product of two CSR matrices, rows emitted in sorted order.
inline SpMat kron_sparse(const SpMat& a, const SpMat& b) {
    const int ra = static_cast<int>(a.rows()), ca = static_cast<int>(a.cols());
    const int rb = static_cast<int>(b.rows()), cb = static_cast<int>(b.cols());
    std::vector<int> outer(static_cast<std::size_t>(ra) * rb + 1, 0);
    std::vector<int> inner;
    std::vector<cxd> vals;
    inner.reserve(static_cast<std::size_t>(a.nonZeros()) * b.nonZeros());
    vals.reserve(static_cast<std::size_t>(a.nonZeros()) * b.nonZeros());
    for (int i1 = 0; i1 < ra; ++i1)
        for (int i2 = 0; i2 < rb; ++i2) {
            for (SpMat::InnerIterator ai(a, i1); ai; ++ai)
                for (SpMat::InnerIterator bi(b, i2); bi; ++bi) {
                    inner.push_back(ai.index() * cb + bi.index());
                    vals.push_back(ai.value() * bi.value());
                }
            outer[static_cast<std::size_t>(i1) * rb + i2 + 1] = static_cast<int>(inner.size());
        }
    Eigen::Map<const SpMat> view(ra * rb, ca * cb, static_cast<int>(inner.size()), outer.data(),
                                 inner.data(), vals.data());
    return SpMat(view);
}

inline int product_of_n(const std::vector<LevelInfo>& levels) {
    int p = 1;
    for (const auto& l : levels) p *= l.n;
    return p;
}

}  // namespace detail

/// A materialized block-circulant / block-Toeplitz (possibly multilevel,
/// possibly boundary-cut) operator, or a general sparse operator produced by
/// Galerkin projection. Immutable after construction.
class StructuredOperator {
public:
    StructuredOperator(OperatorKind kind, std::vector<LevelInfo> levels, int block_size,
                       std::optional<MatrixSymbol> symbol, SpMat mat)
        : kind_(kind),
          levels_(std::move(levels)),
          d_(block_size),
          symbol_(std::move(symbol)),
          mat_(std::move(mat)) {
        mat_.makeCompressed();
    }

    OperatorKind kind() const { return kind_; }
    const std::vector<LevelInfo>& level_info() const { return levels_; }
    int block_size() const { return d_; }
    const std::optional<MatrixSymbol>& symbol() const { return symbol_; }
    const SpMat& matrix() const { return mat_; }
    int rows() const { return static_cast<int>(mat_.rows()); }
    int cols() const { return static_cast<int>(mat_.cols()); }
    bool small_size_warning() const { return small_size_warning_; }
    void set_small_size_warning(bool w) { small_size_warning_ = w; }

private:
    OperatorKind kind_;
    std::vector<LevelInfo> levels_;
    int d_;
    std::optional<MatrixSymbol> symbol_;
    SpMat mat_;
    bool small_size_warning_ = false;
};

/// Materialize T_n(f) or C_n(f) from a symbol. Multilevel sizes are given as
/// one n per level; `cut` removes the trailing scalar row/column (1-level
/// block-Toeplitz only, the FEM boundary cut).
inline StructuredOperator build_operator(const MatrixSymbol& sym, const std::vector<int>& n,
                                         OperatorKind kind, const std::vector<bool>& cut = {}) {
    const int lv = sym.levels();
    const int d = sym.block_size();
    if (static_cast<int>(n.size()) != lv)
        throw std::invalid_argument("build_operator: size multi-index arity mismatch");
    for (int x : n)
        if (x < 1) throw std::invalid_argument("build_operator: sizes must be positive");
    if (kind == OperatorKind::general)
        throw std::invalid_argument("build_operator: kind must be circulant or toeplitz");
    std::vector<LevelInfo> levels(lv);
    bool any_cut = false;
    for (int l = 0; l < lv; ++l) {
        levels[l].n = n[l];
        levels[l].cut = !cut.empty() && cut[l];
        any_cut = any_cut || levels[l].cut;
    }
    if (any_cut && kind == OperatorKind::circulant)
        throw std::invalid_argument("build_operator: cut is only defined for toeplitz operators");
    if (any_cut && lv != 1)
        throw std::invalid_argument("build_operator: cut supported for 1-level operators only");

    const MultiIndex deg = sym.degree();
    bool warn = false;
    if (kind == OperatorKind::toeplitz)
        for (int l = 0; l < lv; ++l)
            if (n[l] <= 2 * deg[l]) warn = true;

    const int nblocks = detail::product_of_n(levels);
    const int full = nblocks * d;
    const int size = any_cut ? full - 1 : full;

    // per block row: accumulate the block columns in sorted order
    std::vector<int> strides(lv, 1);
    for (int l = lv - 2; l >= 0; --l) strides[l] = strides[l + 1] * n[l + 1];

    SpMat mat(size, size);
    {
        // count scalar nnz per row for exact reservation
        Eigen::VectorXi per_row = Eigen::VectorXi::Zero(size);
        std::vector<int> bi(lv, 0);
        std::map<int, DenseMatrix> row_blocks;
        auto for_each_block_row = [&](auto&& fn) {
            std::fill(bi.begin(), bi.end(), 0);
            while (true) {
                fn(bi);
                int l = lv - 1;
                for (; l >= 0; --l) {
                    if (++bi[l] < n[l]) break;
                    bi[l] = 0;
                }
                if (l < 0) break;
            }
        };
        auto collect_row = [&](const std::vector<int>& i) {
            row_blocks.clear();
            for (const auto& [j, aj] : sym.coeffs()) {
                int hflat = 0;
                bool ok = true;
                for (int l = 0; l < lv; ++l) {
                    int h = i[l] - j[l];
                    if (kind == OperatorKind::circulant) {
                        h %= n[l];
                        if (h < 0) h += n[l];
                    } else if (h < 0 || h >= n[l]) {
                        ok = false;
                        break;
                    }
                    hflat += h * strides[l];
                }
                if (!ok) continue;
                auto it = row_blocks.find(hflat);
                if (it == row_blocks.end())
                    row_blocks.emplace(hflat, aj);
                else
                    it->second += aj;  // circulant wrap-around aliasing
            }
        };
        for_each_block_row([&](const std::vector<int>& i) {
            collect_row(i);
            int iflat = 0;
            for (int l = 0; l < lv; ++l) iflat += i[l] * strides[l];
            for (int r = 0; r < d; ++r) {
                const int row = iflat * d + r;
                if (row >= size) continue;
                int cnt = 0;
                for (const auto& [hflat, blk] : row_blocks)
                    for (int c = 0; c < d; ++c)
                        if (hflat * d + c < size) ++cnt;
                per_row(row) = cnt;
            }
        });
        mat.reserve(per_row);
        for_each_block_row([&](const std::vector<int>& i) {
            collect_row(i);
            int iflat = 0;
            for (int l = 0; l < lv; ++l) iflat += i[l] * strides[l];
            for (const auto& [hflat, blk] : row_blocks)
                for (int r = 0; r < d; ++r) {
                    const int row = iflat * d + r;
                    if (row >= size) continue;
                    for (int c = 0; c < d; ++c) {
                        const int col = hflat * d + c;
                        if (col >= size) continue;
                        mat.insert(row, col) = blk(r, c);
                    }
                }
        });
        mat.makeCompressed();
    }

    StructuredOperator op(kind, std::move(levels), d, sym, std::move(mat));
    op.set_small_size_warning(warn);
    return op;
}

inline StructuredOperator build_operator(const MatrixSymbol& sym, int n, OperatorKind kind,
                                         bool cut = false) {
    return build_operator(sym, std::vector<int>{n}, kind, std::vector<bool>{cut});
}

/// y = A x with a fixed accumulation order (ascending column per row).
inline DenseVector matvec(const StructuredOperator& op, const DenseVector& x) {
    if (x.size() != op.cols()) throw std::invalid_argument("matvec: length mismatch");
    const SpMat& m = op.matrix();
    DenseVector y(m.rows());
    for (int i = 0; i < m.rows(); ++i) {
        cxd s(0, 0);
        for (SpMat::InnerIterator it(m, i); it; ++it) s += it.value() * x(it.index());
        y(i) = s;
    }
    return y;
}

/// Exact dense form; guarded by a size cap (test oracles, coarse solves).
inline DenseMatrix materialize_dense(const StructuredOperator& op, int cap = 4096) {
    if (op.rows() > cap || op.cols() > cap)
        throw std::invalid_argument("materialize_dense: size exceeds cap");
    DenseMatrix out = DenseMatrix::Zero(op.rows(), op.cols());
    const SpMat& m = op.matrix();
    for (int i = 0; i < m.rows(); ++i)
        for (SpMat::InnerIterator it(m, i); it; ++it) out(i, it.index()) = it.value();
    return out;
}

/// The composed grid transfer p_n^k = Op(p) (K_n^T kron I_d), stored with its
/// adjoint; `coarse_levels` carries the structural metadata of the next level.
struct GridTransfer {
    SpMat P;   // prolongation, fine x coarse
    SpMat PH;  // restriction = P^H
    std::vector<CuttingMatrix> cutters;
    std::vector<LevelInfo> coarse_levels;
    int block = 1;

    int fine_size() const { return static_cast<int>(P.rows()); }
    int coarse_size() const { return static_cast<int>(P.cols()); }
};

/// Build the transfer for a symbol-generated chain: per-level cutting matrices
/// composed with the operator generated by p. Cut levels drop the trailing
/// scalar row/column on both fine and coarse sides (1-level only).
inline GridTransfer build_transfer(const MatrixSymbol& p, const std::vector<LevelInfo>& fine,
                                   CutVariant variant) {
    const int lv = p.levels();
    const int d = p.block_size();
    if (static_cast<int>(fine.size()) != lv)
        throw std::invalid_argument("build_transfer: level arity mismatch");
    bool any_cut = false;
    for (const auto& l : fine) any_cut = any_cut || l.cut;
    if (any_cut && lv != 1)
        throw std::invalid_argument("build_transfer: cut transfers are 1-level only");
    if (any_cut && variant != CutVariant::toeplitz_odd)
        throw std::invalid_argument("build_transfer: cut is only defined for toeplitz operators");

    std::vector<CuttingMatrix> cutters;
    std::vector<LevelInfo> coarse(lv);
    for (int l = 0; l < lv; ++l) {
        cutters.push_back(CuttingMatrix::make(variant, fine[l].n));
        coarse[l].n = cutters.back().k;
        coarse[l].cut = fine[l].cut;
    }

    std::vector<int> nf(lv), nk(lv);
    for (int l = 0; l < lv; ++l) {
        nf[l] = fine[l].n;
        nk[l] = coarse[l].n;
    }
    std::vector<int> fstr(lv, 1), kstr(lv, 1);
    for (int l = lv - 2; l >= 0; --l) {
        fstr[l] = fstr[l + 1] * nf[l + 1];
        kstr[l] = kstr[l + 1] * nk[l + 1];
    }
    const int fine_full = detail::product_of_n(fine) * d;
    const int coarse_full = detail::product_of_n(coarse) * d;
    const int fine_size = any_cut ? fine_full - 1 : fine_full;
    const int coarse_size = any_cut ? coarse_full - 1 : coarse_full;
    if (coarse_size < 1) throw std::invalid_argument("build_transfer: empty coarse grid");

    SpMat P(fine_size, coarse_size);
    {
        Eigen::VectorXi per_row = Eigen::VectorXi::Zero(fine_size);
        std::vector<int> bi(lv, 0);
        std::map<int, DenseMatrix> row_blocks;
        auto for_each_block_row = [&](auto&& fn) {
            std::fill(bi.begin(), bi.end(), 0);
            while (true) {
                fn(bi);
                int l = lv - 1;
                for (; l >= 0; --l) {
                    if (++bi[l] < nf[l]) break;
                    bi[l] = 0;
                }
                if (l < 0) break;
            }
        };
        // block row i couples coarse block j when i - m(j) is in the support
        // of p (with wrap-around accumulation in the circulant algebra)
        auto collect_row = [&](const std::vector<int>& i) {
            row_blocks.clear();
            for (const auto& [delta, pd] : p.coeffs()) {
                int jflat = 0;
                bool ok = true;
                for (int l = 0; l < lv; ++l) {
                    int target = i[l] - delta[l];
                    int j;
                    if (variant == CutVariant::circulant_even) {
                        target %= nf[l];
                        if (target < 0) target += nf[l];
                        if (target % 2 != 0) {
                            ok = false;
                            break;
                        }
                        j = target / 2;
                    } else {
                        if (target % 2 == 0 || target < 0 || target >= nf[l]) {
                            ok = false;
                            break;
                        }
                        j = (target - 1) / 2;
                    }
                    jflat += j * kstr[l];
                }
                if (!ok) continue;
                auto it = row_blocks.find(jflat);
                if (it == row_blocks.end())
                    row_blocks.emplace(jflat, pd);
                else
                    it->second += pd;
            }
        };
        for_each_block_row([&](const std::vector<int>& i) {
            collect_row(i);
            int iflat = 0;
            for (int l = 0; l < lv; ++l) iflat += i[l] * fstr[l];
            for (int r = 0; r < d; ++r) {
                const int row = iflat * d + r;
                if (row >= fine_size) continue;
                int cnt = 0;
                for (const auto& [jflat, blk] : row_blocks)
                    for (int c = 0; c < d; ++c)
                        if (jflat * d + c < coarse_size) ++cnt;
                per_row(row) = cnt;
            }
        });
        P.reserve(per_row);
        for_each_block_row([&](const std::vector<int>& i) {
            collect_row(i);
            int iflat = 0;
            for (int l = 0; l < lv; ++l) iflat += i[l] * fstr[l];
            for (const auto& [jflat, blk] : row_blocks)
                for (int r = 0; r < d; ++r) {
                    const int row = iflat * d + r;
                    if (row >= fine_size) continue;
                    for (int c = 0; c < d; ++c) {
                        const int col = jflat * d + c;
                        if (col >= coarse_size) continue;
                        P.insert(row, col) = blk(r, c);
                    }
                }
        });
        P.makeCompressed();
    }

    GridTransfer t;
    t.P = std::move(P);
    t.PH = SpMat(t.P.adjoint());
    t.cutters = std::move(cutters);
    t.coarse_levels = std::move(coarse);
    t.block = d;
    return t;
}

/// Restriction d_k = (p_n^k)^H d_n.
inline DenseVector restrict_to_coarse(const GridTransfer& t, const DenseVector& r) {
    if (r.size() != t.fine_size()) throw std::invalid_argument("restrict: length mismatch");
    DenseVector y(t.PH.rows());
    for (int i = 0; i < t.PH.rows(); ++i) {
        cxd s(0, 0);
        for (SpMat::InnerIterator it(t.PH, i); it; ++it) s += it.value() * r(it.index());
        y(i) = s;
    }
    return y;
}

/// Prolongation p_n^k y.
inline DenseVector prolong_to_fine(const GridTransfer& t, const DenseVector& y) {
    if (y.size() != t.coarse_size()) throw std::invalid_argument("prolong: length mismatch");
    DenseVector x(t.P.rows());
    for (int i = 0; i < t.P.rows(); ++i) {
        cxd s(0, 0);
        for (SpMat::InnerIterator it(t.P, i); it; ++it) s += it.value() * y(it.index());
        x(i) = s;
    }
    return x;
}

/// Galerkin coarse operator A_k = (p_n^k)^H A_n p_n^k as an explicit sparse
/// triple product.
inline StructuredOperator galerkin(const StructuredOperator& op, const GridTransfer& t) {
    if (op.cols() != t.fine_size()) throw std::invalid_argument("galerkin: size mismatch");
    if (t.coarse_size() < 1) throw std::invalid_argument("galerkin: coarse dimension < 1");
    SpMat ap = detail::spgemm(op.matrix(), t.P);
    SpMat g = detail::spgemm(t.PH, ap);
    return StructuredOperator(OperatorKind::general, t.coarse_levels, op.block_size(), std::nullopt,
                              std::move(g));
}

/// Matrix Market coordinate export (complex general), for cross-checking.
inline void write_matrix_market(const StructuredOperator& op, std::ostream& os) {
    const SpMat& m = op.matrix();
    os << "%%MatrixMarket matrix coordinate complex general\n";
    os << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
    os.precision(17);
    for (int i = 0; i < m.rows(); ++i)
        for (SpMat::InnerIterator it(m, i); it; ++it)
            os << i + 1 << " " << it.index() + 1 << " " << it.value().real() << " "
               << it.value().imag() << "\n";
}

inline void write_matrix_market(const StructuredOperator& op, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_matrix_market: cannot open " + path);
    write_matrix_market(op, os);
}

}  // namespace btmg

#endif  // BTMG_STRUCTURED_HPP
