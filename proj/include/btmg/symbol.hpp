// Copyright (c) 2026 The btmg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BTMG_SYMBOL_HPP
#define BTMG_SYMBOL_HPP

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace btmg {

inline constexpr double pi = std::numbers::pi;

using cxd = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Frequency offset of a Fourier coefficient; one entry per level.
using MultiIndex = std::vector<int>;

namespace detail {

inline bool all_finite(const DenseMatrix& m) {
    return m.allFinite();
}

inline MultiIndex add(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline MultiIndex negate(const MultiIndex& a) {
    MultiIndex r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
    return r;
}

}  // namespace detail

/// A d x d matrix-valued trigonometric polynomial stored by its Fourier
/// coefficients: f(theta) = sum_j hat_a_j e^{i<j,theta>}, j a multi-index
/// over `levels` frequency variables. Immutable after construction.
class MatrixSymbol {
public:
    using CoeffMap = std::map<MultiIndex, DenseMatrix>;

    MatrixSymbol(int levels, int block_size, CoeffMap coeffs, bool hermitian)
        : levels_(levels), d_(block_size), coeffs_(std::move(coeffs)), hermitian_(hermitian) {
        if (levels_ < 1) throw std::invalid_argument("MatrixSymbol: levels must be >= 1");
        if (d_ < 1) throw std::invalid_argument("MatrixSymbol: block size must be >= 1");
        // drop exact-zero blocks so that degree() reflects the support
        for (auto it = coeffs_.begin(); it != coeffs_.end();) {
            if (static_cast<int>(it->first.size()) != levels_)
                throw std::invalid_argument("MatrixSymbol: offset arity mismatch");
            if (it->second.rows() != d_ || it->second.cols() != d_)
                throw std::invalid_argument("MatrixSymbol: coefficient block is not d x d");
            if (!detail::all_finite(it->second))
                throw std::invalid_argument("MatrixSymbol: non-finite coefficient");
            if (it->second.cwiseAbs().maxCoeff() == 0.0)
                it = coeffs_.erase(it);
            else
                ++it;
        }
        if (hermitian_) validate_hermitian_pairs();
    }

    /// Zero symbol.
    MatrixSymbol(int levels, int block_size, bool hermitian = true)
        : MatrixSymbol(levels, block_size, CoeffMap{}, hermitian) {}

    int levels() const { return levels_; }
    int block_size() const { return d_; }
    bool hermitian() const { return hermitian_; }
    const CoeffMap& coeffs() const { return coeffs_; }

    /// Componentwise max |j| over the stored nonzero coefficients.
    MultiIndex degree() const {
        MultiIndex r(levels_, 0);
        for (const auto& [j, a] : coeffs_)
            for (int l = 0; l < levels_; ++l) r[l] = std::max(r[l], std::abs(j[l]));
        return r;
    }

    /// Coefficient at offset j; missing offsets are implicitly zero.
    DenseMatrix coeff(const MultiIndex& j) const {
        auto it = coeffs_.find(j);
        if (it != coeffs_.end()) return it->second;
        return DenseMatrix::Zero(d_, d_);
    }

    bool has_coeff(const MultiIndex& j) const { return coeffs_.count(j) > 0; }

    /// Max coefficient magnitude; a cheap scale for tolerances.
    double coeff_scale() const {
        double s = 0.0;
        for (const auto& [j, a] : coeffs_) s = std::max(s, a.cwiseAbs().maxCoeff());
        return s;
    }

private:
    void validate_hermitian_pairs() const {
        for (const auto& [j, a] : coeffs_) {
            DenseMatrix other = coeff(detail::negate(j));
            double err = (other - a.adjoint()).cwiseAbs().maxCoeff();
            double scale = a.cwiseAbs().maxCoeff();
            if (err > 1e-12 * (1.0 + scale))
                throw std::invalid_argument("MatrixSymbol: hermitian flag violated: a_{-j} != a_j^H");
        }
    }

    int levels_;
    int d_;
    CoeffMap coeffs_;
    bool hermitian_;
};

/// f(theta) = sum_j hat_a_j e^{i<j,theta>}.
inline DenseMatrix evaluate(const MatrixSymbol& sym, const std::vector<double>& theta) {
    if (static_cast<int>(theta.size()) != sym.levels())
        throw std::invalid_argument("evaluate: theta arity does not match symbol levels");
    DenseMatrix out = DenseMatrix::Zero(sym.block_size(), sym.block_size());
    for (const auto& [j, a] : sym.coeffs()) {
        double phase = 0.0;
        for (std::size_t l = 0; l < theta.size(); ++l) phase += j[l] * theta[l];
        out += a * std::exp(cxd(0.0, phase));
    }
    return out;
}

inline DenseMatrix evaluate(const MatrixSymbol& sym, double theta) {
    return evaluate(sym, std::vector<double>{theta});
}

/// Eigensystem of a Hermitian matrix: ascending eigenvalues, unitary
/// eigenvector matrix with U diag(lambda) U^H reconstructing the input.
struct EigenDecomposition {
    RealVector eigenvalues;
    DenseMatrix eigenvectors;
};

inline EigenDecomposition hermitian_eig(const DenseMatrix& m) {
    if (!detail::all_finite(m)) throw std::invalid_argument("hermitian_eig: non-finite entries");
    const double scale = m.cwiseAbs().maxCoeff();
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + scale))
        throw std::invalid_argument("hermitian_eig: input is not Hermitian");
    DenseMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
    if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eig: solver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

/// Smallest eigenvalue of the (Hermitian) symbol value at theta.
inline double lambda_min(const MatrixSymbol& sym, const std::vector<double>& theta) {
    DenseMatrix v = evaluate(sym, theta);
    DenseMatrix h = 0.5 * (v + v.adjoint());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

inline double lambda_max(const MatrixSymbol& sym, const std::vector<double>& theta) {
    DenseMatrix v = evaluate(sym, theta);
    DenseMatrix h = 0.5 * (v + v.adjoint());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

/// The projector symbol family p_z(theta) = (1+cos theta)(I + ((z-1)/d) ee^T).
/// Coefficients: a_0 = I + ((z-1)/d) ee^T, a_{+-1} = a_0 / 2.
inline MatrixSymbol projector_symbol_pz(int d, double z) {
    if (z <= 0.0) throw std::invalid_argument("projector_symbol_pz: z must be positive");
    if (d < 1) throw std::invalid_argument("projector_symbol_pz: d must be >= 1");
    DenseMatrix base = DenseMatrix::Identity(d, d);
    base.array() += (z - 1.0) / d;
    MatrixSymbol::CoeffMap c;
    c[{0}] = base;
    c[{1}] = 0.5 * base;
    c[{-1}] = 0.5 * base;
    return MatrixSymbol(1, d, std::move(c), true);
}

/// Coefficient-convolution product: (ab)(theta) = a(theta) b(theta).
inline MatrixSymbol symbol_product(const MatrixSymbol& a, const MatrixSymbol& b) {
    if (a.levels() != b.levels() || a.block_size() != b.block_size())
        throw std::invalid_argument("symbol_product: mismatched symbols");
    MatrixSymbol::CoeffMap c;
    for (const auto& [j, aj] : a.coeffs())
        for (const auto& [k, bk] : b.coeffs()) {
            MultiIndex m = detail::add(j, k);
            auto it = c.find(m);
            if (it == c.end())
                c.emplace(std::move(m), aj * bk);
            else
                it->second += aj * bk;
        }
    return MatrixSymbol(a.levels(), a.block_size(), std::move(c), false);
}

/// p^H: coefficient at j becomes (a_{-j})^H. Involutive; fixes Hermitian symbols.
inline MatrixSymbol adjoint_symbol(const MatrixSymbol& a) {
    MatrixSymbol::CoeffMap c;
    for (const auto& [j, aj] : a.coeffs()) c[detail::negate(j)] = aj.adjoint();
    return MatrixSymbol(a.levels(), a.block_size(), std::move(c), a.hermitian());
}

/// Coarse symbol of the Galerkin projection,
///   fhat(theta) = 1/2 (p^H f p(theta/2) + p^H f p(theta/2 + pi)).
/// Computed exactly on coefficients: with g = p^H f p, the frequency-halving
/// average annihilates odd frequencies and fhat_m = g_{2m}.
inline MatrixSymbol coarse_symbol(const MatrixSymbol& f, const MatrixSymbol& p) {
    if (f.levels() != 1 || p.levels() != 1)
        throw std::invalid_argument("coarse_symbol: requires 1-level symbols");
    if (f.block_size() != p.block_size())
        throw std::invalid_argument("coarse_symbol: block size mismatch");
    MatrixSymbol g = symbol_product(symbol_product(adjoint_symbol(p), f), p);
    MatrixSymbol::CoeffMap c;
    for (const auto& [j, gj] : g.coeffs()) {
        if (j[0] % 2 != 0) continue;
        c[{j[0] / 2}] = gj;
    }
    return MatrixSymbol(1, f.block_size(), std::move(c), f.hermitian());
}

/// fhat_{z,j}: iterate the coarse-symbol recursion j times with p_z.
inline MatrixSymbol coarse_symbol_level(const MatrixSymbol& f, double z, int level) {
    MatrixSymbol p = projector_symbol_pz(f.block_size(), z);
    MatrixSymbol cur = f;
    for (int j = 0; j < level; ++j) cur = coarse_symbol(cur, p);
    return cur;
}

/// Kronecker product of two 1-level symbols, giving a 2-level symbol with
/// block size d_a * d_b; used by tensor-product transfer operators.
inline MatrixSymbol symbol_kron(const MatrixSymbol& a, const MatrixSymbol& b) {
    if (a.levels() != 1 || b.levels() != 1)
        throw std::invalid_argument("symbol_kron: requires 1-level factors");
    const int da = a.block_size(), db = b.block_size();
    MatrixSymbol::CoeffMap c;
    for (const auto& [j, aj] : a.coeffs())
        for (const auto& [k, bk] : b.coeffs()) {
            DenseMatrix block(da * db, da * db);
            for (int r = 0; r < da; ++r)
                for (int s = 0; s < da; ++s)
                    block.block(r * db, s * db, db, db) = aj(r, s) * bk;
            c[{j[0], k[0]}] = std::move(block);
        }
    return MatrixSymbol(2, da * db, std::move(c), a.hermitian() && b.hermitian());
}

/// Max over a uniform theta grid of the spectral norm of f(theta).
/// Symbols here are smooth low-degree polynomials, so the grid max is a
/// tight lower bound of the true sup. grid_per_dim = 0 selects 4096 for
/// 1-level symbols and 256 per dimension otherwise.
inline double sup_spectral_norm(const MatrixSymbol& sym, int grid_per_dim = 0) {
    const int k = sym.levels();
    if (grid_per_dim <= 0) grid_per_dim = (k == 1) ? 4096 : 256;
    std::vector<double> theta(k, 0.0);
    std::vector<int> idx(k, 0);
    double best = 0.0;
    while (true) {
        for (int l = 0; l < k; ++l) theta[l] = 2.0 * pi * idx[l] / grid_per_dim;
        DenseMatrix v = evaluate(sym, theta);
        DenseMatrix h = 0.5 * (v + v.adjoint());
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
        best = std::max(best, std::max(std::abs(es.eigenvalues()(0)),
                                       std::abs(es.eigenvalues()(es.eigenvalues().size() - 1))));
        int l = 0;
        for (; l < k; ++l) {
            if (++idx[l] < grid_per_dim) break;
            idx[l] = 0;
        }
        if (l == k) break;
    }
    return best;
}

}  // namespace btmg

#endif  // BTMG_SYMBOL_HPP
