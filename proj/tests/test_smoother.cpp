// Copyright (c) 2026 The btmg authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch.hpp>

#include "btmg/fem.hpp"
#include "btmg/mgm.hpp"
#include "btmg/smoother.hpp"
#include "test_helpers.hpp"

using namespace btmg;
using namespace btmg::testing;

namespace {

StructuredOperator identity_operator(int d, int n) {
    MatrixSymbol::CoeffMap c;
    c[{0}] = DenseMatrix::Identity(d, d);
    return build_operator(MatrixSymbol(1, d, std::move(c), true), n, OperatorKind::toeplitz);
}

}  // namespace

TEST_CASE("smooth basics") {
    SECTION("one jacobi sweep with omega=1 on A=I solves exactly") {
        auto op = identity_operator(2, 4);
        std::mt19937 gen(61);
        DenseVector b = random_vector(gen, op.rows());
        DenseVector x = smooth(op, DenseVector::Zero(op.rows()), b, SmootherMethod::jacobi, 1.0, 1);
        REQUIRE((x - b).norm() == 0.0);
    }
    SECTION("zero sweeps leave the iterate unchanged") {
        auto op = identity_operator(1, 5);
        std::mt19937 gen(62);
        DenseVector x = random_vector(gen, 5), b = random_vector(gen, 5);
        for (auto m : {SmootherMethod::richardson, SmootherMethod::jacobi,
                       SmootherMethod::gauss_seidel})
            REQUIRE((smooth(op, x, b, m, 1.0, 0) - x).norm() == 0.0);
    }
    SECTION("dimension mismatch") {
        auto op = identity_operator(1, 5);
        REQUIRE_THROWS_AS(
            smooth(op, DenseVector::Zero(4), DenseVector::Zero(5), SmootherMethod::jacobi, 1.0, 1),
            std::invalid_argument);
    }
    SECTION("zero diagonal is rejected for jacobi and gauss_seidel") {
        MatrixSymbol offdiag = scalar_symbol({{1, 1.0}, {-1, 1.0}});
        auto op = build_operator(offdiag, 5, OperatorKind::toeplitz);
        DenseVector v = DenseVector::Zero(5);
        REQUIRE_THROWS_AS(smooth(op, v, v, SmootherMethod::jacobi, 1.0, 1), std::domain_error);
        REQUIRE_THROWS_AS(smooth(op, v, v, SmootherMethod::gauss_seidel, 1.0, 1),
                          std::domain_error);
        // richardson does not touch the diagonal
        REQUIRE_NOTHROW(smooth(op, v, v, SmootherMethod::richardson, 0.5, 1));
    }
}

TEST_CASE("jacobi with the admissible omega contracts the A-norm error") {
    auto [f, h] = fem_symbols_1d(2);

    SECTION("Q2 n=15, omega=7/8: error non-increasing over 10 sweeps") {
        auto op = build_operator(f, 15, OperatorKind::toeplitz);
        auto [xt, b] = make_rhs_sine(op);
        DenseVector x = DenseVector::Zero(op.rows());
        double prev = a_norm(op, x - xt);
        for (int s = 0; s < 10; ++s) {
            x = smooth(op, std::move(x), b, SmootherMethod::jacobi, 7.0 / 8.0, 1);
            double cur = a_norm(op, x - xt);
            REQUIRE(cur <= prev * (1.0 + 1e-12));
            prev = cur;
        }
    }
    SECTION("single sweeps never increase the error A-norm, n up to 31") {
        std::mt19937 gen(63);
        for (int n : {7, 15, 31}) {
            auto op = build_operator(f, n, OperatorKind::toeplitz);
            DenseVector xt = random_vector(gen, op.rows(), false);
            DenseVector b = matvec(op, xt);
            DenseVector x = random_vector(gen, op.rows(), false);
            double before = a_norm(op, x - xt);
            x = smooth(op, std::move(x), b, SmootherMethod::jacobi, 7.0 / 8.0, 1);
            REQUIRE(a_norm(op, x - xt) <= before * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("gauss-seidel error monotonicity on SPD operators") {
    auto [f, h] = fem_symbols_1d(2);
    auto op = build_operator(f, 15, OperatorKind::toeplitz);
    auto [xt, b] = make_rhs_sine(op);
    DenseVector x = DenseVector::Zero(op.rows());
    double prev = a_norm(op, x - xt);
    for (int s = 0; s < 20; ++s) {
        x = smooth(op, std::move(x), b, SmootherMethod::gauss_seidel, 1.0, 1);
        double cur = a_norm(op, x - xt);
        REQUIRE(cur <= prev * (1.0 + 1e-12));
        prev = cur;
    }
}

TEST_CASE("relaxation parameter bounds") {
    auto [f, h] = fem_symbols_1d(2);

    SECTION("jacobi bound for the Q2 symbol is 7/8") {
        REQUIRE(std::abs(jacobi_omega_bound(f) - 7.0 / 8.0) <= 1e-12);
    }
    SECTION("jacobi bound for the scalar Laplacian is 1") {
        REQUIRE(jacobi_omega_bound(laplacian_symbol()) == Approx(1.0).margin(1e-12));
    }
    SECTION("jacobi bound for a constant c I symbol is 2") {
        MatrixSymbol::CoeffMap c;
        c[{0}] = 3.7 * DenseMatrix::Identity(3, 3);
        MatrixSymbol cid(1, 3, std::move(c), true);
        REQUIRE(jacobi_omega_bound(cid) == Approx(2.0).margin(1e-12));
    }
    SECTION("richardson bounds") {
        REQUIRE(std::abs(richardson_omega_bound(f) - 3.0 / 16.0) <= 1e-12);
        REQUIRE(richardson_omega_bound(laplacian_symbol()) == Approx(0.5).margin(1e-12));
        MatrixSymbol::CoeffMap c;
        c[{0}] = 4.0 * DenseMatrix::Identity(2, 2);
        MatrixSymbol cid(1, 2, std::move(c), true);
        REQUIRE(richardson_omega_bound(cid) == Approx(0.5).margin(1e-12));
    }
    SECTION("nonpositive diagonal is rejected") {
        MatrixSymbol::CoeffMap c;
        DenseMatrix a0(1, 1);
        a0(0, 0) = -1.0;
        c[{0}] = a0;
        MatrixSymbol bad(1, 1, std::move(c), true);
        REQUIRE_THROWS_AS(jacobi_omega_bound(bad), std::domain_error);
    }
}

TEST_CASE("smoother config validation") {
    SmootherConfig bad_omega{SmootherMethod::jacobi, -0.5, 1.0, 1, 1};
    REQUIRE_THROWS_AS(bad_omega.validate(), std::invalid_argument);
    SmootherConfig relaxed_gs{SmootherMethod::gauss_seidel, 0.9, 1.0, 1, 1};
    REQUIRE_THROWS_AS(relaxed_gs.validate(), std::invalid_argument);
    REQUIRE_NOTHROW(SmootherConfig::jacobi(7.0 / 8.0, 7.0 / 12.0).validate());
    REQUIRE_NOTHROW(SmootherConfig::gauss_seidel().validate());
}

TEST_CASE("smoothing property: alpha > 0 exists for Q2 with omega = 7/8") {
    auto [f, h] = fem_symbols_1d(2);
    const double w = 7.0 / 8.0;
    for (int n : {7, 15}) {
        auto opr = build_operator(f, n, OperatorKind::toeplitz);
        DenseMatrix A = materialize_dense(opr);
        DenseMatrix Dinv = A.diagonal().cwiseInverse().asDiagonal();
        DenseMatrix V = DenseMatrix::Identity(A.rows(), A.cols()) - w * Dinv * A;
        DenseMatrix lhs = V.adjoint() * A * V;
        double scale = A.cwiseAbs().maxCoeff();
        auto feasible = [&](double alpha) {
            DenseMatrix S = (A - alpha * A * A) - lhs;
            Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (S + S.adjoint()),
                                                          Eigen::EigenvaluesOnly);
            return es.eigenvalues()(0) >= -1e-10 * scale;
        };
        REQUIRE(feasible(0.0));
        double lo = 0.0, hi = 1.0;
        while (feasible(hi) && hi < 1e6) hi *= 2.0;
        for (int it = 0; it < 50; ++it) {
            double mid = 0.5 * (lo + hi);
            (feasible(mid) ? lo : hi) = mid;
        }
        REQUIRE(lo > 0.0);
    }
}
