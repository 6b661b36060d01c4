// Copyright (c) 2026 The btmg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BTMG_MGM_HPP
#define BTMG_MGM_HPP

#include <functional>
#include <limits>
#include <memory>

#include <Eigen/SparseCholesky>

#include "btmg/smoother.hpp"
#include "btmg/structured.hpp"

namespace btmg {

enum class CycleType { two_grid, v_cycle };

/// ||x||_A = sqrt(x^H A x) for Hermitian nonnegative A (clamped at 0).
inline double a_norm(const StructuredOperator& op, const DenseVector& x) {
    cxd q = x.dot(matvec(op, x));
    return std::sqrt(std::max(0.0, q.real()));
}

/// Direct solver for the coarsest level: sparse LDLT with a dense
/// eigen-pseudoinverse fallback for semidefinite operators (circulant
/// symbols with zeros generate singular but consistent coarse systems).
class CoarseSolver {
public:
    void setup(const StructuredOperator& op) {
        using SpMatCol = Eigen::SparseMatrix<cxd, Eigen::ColMajor, int>;
        n_ = op.rows();
        SpMatCol m(op.matrix());
        ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SpMatCol>>();
        ldlt_->compute(m);
        bool ok = ldlt_->info() == Eigen::Success;
        if (ok) {
            double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
            auto d = ldlt_->vectorD();
            for (int i = 0; i < d.size(); ++i) {
                dmin = std::min(dmin, std::abs(d(i)));
                dmax = std::max(dmax, std::abs(d(i)));
            }
            ok = dmax > 0.0 && dmin > 1e-12 * dmax;
        }
        if (ok) return;
        ldlt_.reset();
        if (n_ > 4096)
            throw std::runtime_error(
                "CoarseSolver: coarse operator numerically singular (condition (3) failure?)");
        DenseMatrix dense = materialize_dense(op);
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (dense + dense.adjoint()));
        double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
        if (lmax == 0.0)
            throw std::runtime_error("CoarseSolver: coarse operator is zero");
        RealVector inv(n_);
        for (int i = 0; i < n_; ++i) {
            double l = es.eigenvalues()(i);
            inv(i) = std::abs(l) > 1e-12 * lmax ? 1.0 / l : 0.0;
        }
        pinv_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
    }

    DenseVector solve(const DenseVector& b) const {
        if (ldlt_) return ldlt_->solve(b);
        return pinv_ * b;
    }

    bool used_pseudoinverse() const { return !ldlt_; }

private:
    int n_ = 0;
    std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<cxd, Eigen::ColMajor, int>>> ldlt_;
    DenseMatrix pinv_;
};

/// Builds the transfer from the current level's operator; the hierarchy
/// builder calls it once per coarsening step.
using TransferFactory = std::function<GridTransfer(const StructuredOperator&)>;

inline TransferFactory make_symbol_transfer_factory(const MatrixSymbol& p, CutVariant variant) {
    return [p, variant](const StructuredOperator& op) {
        return build_transfer(p, op.level_info(), variant);
    };
}

struct MgLevel {
    StructuredOperator op;
    std::optional<GridTransfer> down;  // absent on the coarsest level
};

/// A multigrid hierarchy: per-level operator + transfer + shared smoother
/// configuration, and a factorized coarsest level.
struct MgHierarchy {
    std::vector<MgLevel> levels;
    CoarseSolver coarsest;
    SmootherConfig smoother;
    CycleType cycle = CycleType::v_cycle;

    int depth() const { return static_cast<int>(levels.size()); }
    const StructuredOperator& fine() const { return levels.front().op; }
};

/// Chain of Galerkin-coarsened operators. Coarsening continues while every
/// dimension exceeds `coarsest_threshold` (auto: 3 for toeplitz chains,
/// 2 for circulant); a two-grid hierarchy performs exactly one coarsening.
inline MgHierarchy build_hierarchy(StructuredOperator fine, const TransferFactory& make_transfer,
                                   const SmootherConfig& smoother, CycleType cycle,
                                   int coarsest_threshold = 0) {
    smoother.validate();
    int threshold = coarsest_threshold;
    if (threshold <= 0) threshold = fine.kind() == OperatorKind::circulant ? 2 : 3;
    MgHierarchy h;
    h.smoother = smoother;
    h.cycle = cycle;
    StructuredOperator current = std::move(fine);
    auto coarsenable = [&](const StructuredOperator& op) {
        for (const auto& l : op.level_info())
            if (l.n <= threshold) return false;
        return true;
    };
    while (coarsenable(current)) {
        GridTransfer t = make_transfer(current);
        StructuredOperator coarse = galerkin(current, t);
        h.levels.push_back({std::move(current), std::move(t)});
        current = std::move(coarse);
        if (cycle == CycleType::two_grid) break;
    }
    h.levels.push_back({std::move(current), std::nullopt});
    h.coarsest.setup(h.levels.back().op);
    return h;
}

inline MgHierarchy build_hierarchy(StructuredOperator fine, const MatrixSymbol& p,
                                   const SmootherConfig& smoother, CycleType cycle,
                                   int coarsest_threshold = 0) {
    CutVariant variant;
    switch (fine.kind()) {
        case OperatorKind::circulant: variant = CutVariant::circulant_even; break;
        case OperatorKind::toeplitz: variant = CutVariant::toeplitz_odd; break;
        default:
            throw std::invalid_argument(
                "build_hierarchy: general operators need an explicit transfer factory");
    }
    return build_hierarchy(std::move(fine), make_symbol_transfer_factory(p, variant), smoother,
                           cycle, coarsest_threshold);
}

/// One multigrid cycle at `level`: pre-smoothing, residual restriction,
/// direct or one-recursive-call coarse solve, prolonged correction
/// (d = A x~ - b, x^ = x~ - P y), post-smoothing. At the coarsest level the
/// iterate is replaced by the direct solution of A x = b.
inline DenseVector cycle_once(const MgHierarchy& h, int level, DenseVector x,
                              const DenseVector& b) {
    if (level < 0 || level >= h.depth()) throw std::invalid_argument("cycle_once: bad level");
    const MgLevel& lvl = h.levels[level];
    if (static_cast<int>(x.size()) != lvl.op.rows() || static_cast<int>(b.size()) != lvl.op.rows())
        throw std::invalid_argument("cycle_once: vector size mismatch");
    if (!lvl.down) return h.coarsest.solve(b);

    const SmootherConfig& s = h.smoother;
    x = smooth(lvl.op, std::move(x), b, s.method, s.omega_pre, s.sweeps_pre);
    DenseVector d = matvec(lvl.op, x) - b;
    DenseVector dk = restrict_to_coarse(*lvl.down, d);
    DenseVector y;
    if (level + 1 == h.depth() - 1 && h.cycle == CycleType::two_grid)
        y = h.coarsest.solve(dk);
    else
        y = cycle_once(h, level + 1, DenseVector::Zero(dk.size()), dk);
    x -= prolong_to_fine(*lvl.down, y);
    x = smooth(lvl.op, std::move(x), b, s.method, s.omega_post, s.sweeps_post);
    return x;
}

/// Outcome of an iterative solve; history holds the relative residual after
/// each cycle (entry 0 is the initial residual).
struct SolveReport {
    int iterations = 0;
    std::vector<double> residual_history;
    bool converged = false;
    std::optional<double> final_error_a_norm;
    std::vector<double> error_a_history;
};

/// Iterate cycles at the finest level until ||b - A x||_2 / ||b||_2 <= tol or
/// max_iter; non-convergence is a report state, not an error.
inline SolveReport solve(const MgHierarchy& h, const DenseVector& b, double tol = 1e-7,
                         int max_iter = 4000, std::optional<DenseVector> x0 = std::nullopt,
                         std::optional<DenseVector> x_true = std::nullopt) {
    if (tol <= 0.0) throw std::invalid_argument("solve: tol must be positive");
    const StructuredOperator& a = h.fine();
    DenseVector x = x0 ? *x0 : DenseVector::Zero(a.rows());
    const double bnorm = b.norm();
    const double denom = bnorm > 0.0 ? bnorm : 1.0;
    SolveReport rep;
    auto record = [&]() {
        rep.residual_history.push_back((b - matvec(a, x)).norm() / denom);
        if (x_true) rep.error_a_history.push_back(a_norm(a, x - *x_true));
    };
    record();
    if (rep.residual_history.back() <= tol) {
        rep.converged = true;
    } else {
        for (int it = 1; it <= max_iter; ++it) {
            x = cycle_once(h, 0, std::move(x), b);
            rep.iterations = it;
            record();
            if (rep.residual_history.back() <= tol) {
                rep.converged = true;
                break;
            }
        }
    }
    if (x_true) rep.final_error_a_norm = a_norm(a, x - *x_true);
    return rep;
}

/// Uniform sine sampling of the flattened unknown index: x_i = sin(pi i/(N-1))
/// and b = A x; the conventional right-hand side of the iteration-count tables.
inline std::pair<DenseVector, DenseVector> make_rhs_sine(const StructuredOperator& op) {
    const int n = op.rows();
    DenseVector x(n);
    if (n == 1)
        x(0) = 0.0;
    else
        for (int i = 0; i < n; ++i) x(i) = std::sin(pi * i / (n - 1));
    return {x, matvec(op, x)};
}

}  // namespace btmg

#endif  // BTMG_MGM_HPP
