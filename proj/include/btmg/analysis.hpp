// Copyright (c) 2026 The btmg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BTMG_ANALYSIS_HPP
#define BTMG_ANALYSIS_HPP

#include <random>

#include "btmg/fem.hpp"
#include "btmg/mgm.hpp"
#include "btmg/symbol.hpp"

namespace btmg {

/// Behaviour of lambda''_min(fhat_j)|_0 across levels (criterion for V-cycle
/// robustness): vanishing iff the recursion factor z^2/2 is below 1.
enum class LimitFlag { vanishing, bounded_away };

struct ConditioningRow {
    int j = 0;
    double lambda_pp0 = 0.0;     // lambda''_min at the origin
    double lambda_max_sup = 0.0; // sup of the largest eigenvalue function
    double kappa = 0.0;
};

struct ConditioningReport {
    double z = 0.0;
    std::vector<ConditioningRow> rows;
    LimitFlag limit_flag = LimitFlag::bounded_away;
};

struct ConditionCheckReport {
    std::vector<double> theta0;
    double cond2_sup = 0.0;         // finest grid
    double cond2_sup_coarse = 0.0;  // grid/4, for the stabilization check
    double cond3_min = 0.0;
    double cond4_max = 0.0;
    bool passed2 = false;
    bool passed3 = false;
    bool passed4 = false;

    bool all_passed() const { return passed2 && passed3 && passed4; }
};

namespace detail {

inline double matrix_one_norm(const DenseMatrix& m) {
    double best = 0.0;
    for (int c = 0; c < m.cols(); ++c) best = std::max(best, m.col(c).cwiseAbs().sum());
    return best;
}

/// f(theta)^{-1/2} with eigenvalue floor, for use outside the zero set.
inline DenseMatrix inv_sqrt(const DenseMatrix& m, double floor_value) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (m + m.adjoint()));
    RealVector lam = es.eigenvalues();
    for (int i = 0; i < lam.size(); ++i)
        lam(i) = 1.0 / std::sqrt(std::max(lam(i), floor_value));
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

inline double wrap_2pi(double x) {
    x = std::fmod(x, 2.0 * pi);
    if (x < 0) x += 2.0 * pi;
    return x;
}

}  // namespace detail

/// Grid detection of Theta_0 = { theta : lambda_min(f(theta)) = 0 }, clustered
/// into distinct zeros; verifies that f(theta0 + pi) is nonsingular for every
/// located zero (the standing assumption of the two-grid analysis).
inline std::vector<double> locate_zero_set(const MatrixSymbol& f, int grid = 4096,
                                           double tol = 1e-10) {
    if (f.levels() != 1) throw std::invalid_argument("locate_zero_set: 1-level symbols only");
    const double norm = sup_spectral_norm(f, grid);
    if (norm == 0.0) throw std::invalid_argument("locate_zero_set: zero symbol");
    std::vector<double> lam(grid);
    std::vector<int> marked;
    for (int i = 0; i < grid; ++i) {
        lam[i] = lambda_min(f, {2.0 * pi * i / grid});
        if (lam[i] <= tol * norm) marked.push_back(i);
    }
    if (marked.empty()) return {};
    // cluster marked grid points within the wrap-around radius
    const int radius_cells = std::max(1, grid / 1024);
    std::vector<std::vector<int>> clusters;
    for (int idx : marked) {
        if (!clusters.empty() && idx - clusters.back().back() <= radius_cells)
            clusters.back().push_back(idx);
        else
            clusters.push_back({idx});
    }
    // merge across the 0 / 2pi seam
    if (clusters.size() > 1) {
        int first = clusters.front().front();
        int last = clusters.back().back();
        if (first + grid - last <= radius_cells) {
            for (int idx : clusters.front()) clusters.back().push_back(idx);
            clusters.erase(clusters.begin());
        }
    }
    std::vector<double> zeros;
    for (const auto& cl : clusters) {
        int best = cl.front();
        for (int idx : cl)
            if (lam[idx] < lam[best]) best = idx;
        zeros.push_back(2.0 * pi * best / grid);
    }
    std::sort(zeros.begin(), zeros.end());
    for (double th : zeros) {
        if (lambda_min(f, {detail::wrap_2pi(th + pi)}) <= tol * norm)
            throw std::domain_error(
                "locate_zero_set: f and its pi-shift share a zero; the two-grid "
                "analysis does not apply");
    }
    return zeros;
}

/// Numeric check of the three projector admissibility conditions.
///  (2) sup over the punctured grid of |f(theta)^{-1/2} p(theta+pi)^H|_1;
///      "passed" means the sup stabilizes (<5% change) under grid refinement
///      grid/4 -> grid.
///  (3) min over the grid of lambda_min(p^H p(theta) + p^H p(theta+pi)) > 0.
///  (4) commutator p(theta) p(theta+pi) - p(theta+pi) p(theta) vanishes.
/// exclusion_radius <= 0 selects 1.5 grid cells around Theta_0 and its
/// pi-shifts, per grid.
inline ConditionCheckReport check_tgm_conditions(const MatrixSymbol& f, const MatrixSymbol& p,
                                                 int grid = 4096, double exclusion_radius = 0.0) {
    if (f.block_size() != p.block_size())
        throw std::invalid_argument("check_tgm_conditions: block size mismatch");
    if (f.levels() != 1 || p.levels() != 1)
        throw std::invalid_argument("check_tgm_conditions: 1-level symbols only");
    ConditionCheckReport rep;
    rep.theta0 = locate_zero_set(f, grid);
    std::vector<double> excluded;
    for (double th : rep.theta0) {
        excluded.push_back(th);
        excluded.push_back(detail::wrap_2pi(th + pi));
    }
    const double fnorm = sup_spectral_norm(f, grid);
    const double floor_value = 1e-14 * fnorm;

    auto cond2_on_grid = [&](int g) {
        const double rho = exclusion_radius > 0.0 ? exclusion_radius : 1.5 * (2.0 * pi / g);
        double sup = 0.0;
        for (int i = 0; i < g; ++i) {
            const double th = 2.0 * pi * i / g;
            bool skip = false;
            for (double e : excluded) {
                double dist = std::abs(th - e);
                dist = std::min(dist, 2.0 * pi - dist);
                if (dist < rho) {
                    skip = true;
                    break;
                }
            }
            if (skip) continue;
            DenseMatrix fi = detail::inv_sqrt(evaluate(f, th), floor_value);
            DenseMatrix ph = evaluate(p, detail::wrap_2pi(th + pi)).adjoint();
            sup = std::max(sup, detail::matrix_one_norm(fi * ph));
        }
        return sup;
    };
    rep.cond2_sup = cond2_on_grid(grid);
    rep.cond2_sup_coarse = cond2_on_grid(grid / 4);
    rep.passed2 = rep.cond2_sup > 0.0 &&
                  std::abs(rep.cond2_sup - rep.cond2_sup_coarse) < 0.05 * rep.cond2_sup;

    double c3 = std::numeric_limits<double>::infinity();
    double c4 = 0.0;
    double p_scale = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double th = 2.0 * pi * i / grid;
        DenseMatrix p0 = evaluate(p, th);
        DenseMatrix p1 = evaluate(p, detail::wrap_2pi(th + pi));
        DenseMatrix s = p0.adjoint() * p0 + p1.adjoint() * p1;
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (s + s.adjoint()),
                                                      Eigen::EigenvaluesOnly);
        c3 = std::min(c3, es.eigenvalues()(0));
        c4 = std::max(c4, (p0 * p1 - p1 * p0).norm());
        p_scale = std::max(p_scale, p0.norm() * p1.norm());
    }
    rep.cond3_min = c3;
    rep.cond4_max = c4;
    rep.passed3 = c3 > 0.0;
    rep.passed4 = c4 <= 1e-12 * std::max(p_scale, 1e-300);
    return rep;
}

/// lambda''_min(f)|_0 by central second differences with one Richardson
/// extrapolation step (h and h/2). Requires lambda_min(f(0)) ~ 0.
inline double lambda_min_second_derivative_at_zero(const MatrixSymbol& f, double h = 1e-3) {
    if (f.levels() != 1)
        throw std::invalid_argument("lambda_min_second_derivative_at_zero: 1-level only");
    const double norm = sup_spectral_norm(f);
    const double l0 = lambda_min(f, {0.0});
    if (std::abs(l0) > 1e-8 * norm)
        throw std::domain_error(
            "lambda_min_second_derivative_at_zero: lambda_min(f(0)) does not vanish");
    auto second_diff = [&](double step) {
        return (lambda_min(f, {step}) - 2.0 * l0 + lambda_min(f, {-step})) / (step * step);
    };
    const double d1 = second_diff(h);
    const double d2 = second_diff(0.5 * h);
    return (4.0 * d2 - d1) / 3.0;
}

/// kappa(fhat_{z,j}) per level, iterating the coarse-symbol recursion.
inline ConditioningReport conditioning_sweep(const MatrixSymbol& f, double z, int levels,
                                             int grid = 4096) {
    if (levels < 1) throw std::invalid_argument("conditioning_sweep: levels must be >= 1");
    MatrixSymbol p = projector_symbol_pz(f.block_size(), z);
    ConditioningReport rep;
    rep.z = z;
    MatrixSymbol cur = f;
    for (int j = 1; j <= levels; ++j) {
        cur = coarse_symbol(cur, p);
        ConditioningRow row;
        row.j = j;
        row.lambda_pp0 = lambda_min_second_derivative_at_zero(cur);
        double sup = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < grid; ++i)
            sup = std::max(sup, lambda_max(cur, {2.0 * pi * i / grid}));
        row.lambda_max_sup = sup;
        row.kappa = row.lambda_max_sup / row.lambda_pp0;
        rep.rows.push_back(row);
    }
    // vanishing iff lambda''|_0 decays geometrically across levels
    bool decaying = true;
    for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i)
        decaying = decaying && rep.rows[i + 1].lambda_pp0 < 0.999 * rep.rows[i].lambda_pp0;
    rep.limit_flag =
        (rep.rows.size() > 1 && decaying) ? LimitFlag::vanishing : LimitFlag::bounded_away;
    return rep;
}

/// Level-constancy probe for the conjectured law
/// lambda''_min(fhat_{z,j})|_0 = c_{z,deg} (z^2/2)^j: returns (j, ratio).
inline std::vector<std::pair<int, double>> check_conjecture(int deg, double z, int levels) {
    if (deg < 2 || deg > 6) throw std::invalid_argument("check_conjecture: deg must be in 2..6");
    auto [f, h] = fem_symbols_1d(deg);
    MatrixSymbol p = projector_symbol_pz(deg, z);
    std::vector<std::pair<int, double>> out;
    MatrixSymbol cur = f;
    double law = 1.0;
    for (int j = 1; j <= levels; ++j) {
        cur = coarse_symbol(cur, p);
        law *= 0.5 * z * z;
        out.emplace_back(j, lambda_min_second_derivative_at_zero(cur) / law);
    }
    return out;
}

/// Measured asymptotic A-norm contraction factor of one cycle: power-style
/// iteration on the error equation A e = 0 from seeded random starts. Each
/// trial iterates past a burn-in until the per-cycle ratio stabilizes, with
/// periodic renormalization against underflow.
inline double estimate_contraction(const MgHierarchy& h, int trials = 3) {
    const StructuredOperator& a = h.fine();
    const int n = a.rows();
    const DenseVector zero = DenseVector::Zero(n);
    double factor = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        std::mt19937 gen(12345u + 977u * static_cast<unsigned>(trial));
        DenseVector x(n);
        for (int i = 0; i < n; ++i)
            x(i) = 2.0 * (gen() / 4294967296.0) - 1.0;
        double prev = a_norm(a, x);
        if (prev == 0.0) continue;
        double ratio = 0.0, last_ratio = -1.0;
        for (int it = 0; it < 200; ++it) {
            x = cycle_once(h, 0, std::move(x), zero);
            double cur = a_norm(a, x);
            if (prev == 0.0) {
                ratio = 0.0;
                break;
            }
            ratio = cur / prev;
            if (it >= 5 && std::abs(ratio - last_ratio) <= 1e-3 * std::max(ratio, 1e-30)) break;
            last_ratio = ratio;
            prev = cur;
            if (cur < 1e-200) break;
            if (cur < 1e-100) {
                x /= cur;
                prev = a_norm(a, x);
            }
        }
        factor = std::max(factor, ratio);
    }
    return factor;
}

}  // namespace btmg

#endif  // BTMG_ANALYSIS_HPP
