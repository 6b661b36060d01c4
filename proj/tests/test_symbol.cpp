// Copyright (c) 2026 The btmg authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch.hpp>

#include "btmg/fem.hpp"
#include "btmg/symbol.hpp"
#include "test_helpers.hpp"

using namespace btmg;
using namespace btmg::testing;

TEST_CASE("evaluate sums Fourier coefficients") {
    auto [f, h] = fem_symbols_1d(2);

    SECTION("Q2 stiffness symbol at theta = 0") {
        DenseMatrix v = evaluate(f, 0.0);
        DenseMatrix want(2, 2);
        want << 16.0 / 3.0, -16.0 / 3.0, -16.0 / 3.0, 16.0 / 3.0;
        REQUIRE((v - want).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("zero symbol evaluates to zero") {
        MatrixSymbol zero(1, 3);
        REQUIRE(evaluate(zero, 1.234).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("scalar 2 - 2cos(theta) at pi") {
        REQUIRE(evaluate(laplacian_symbol(), pi)(0, 0).real() == Approx(4.0).margin(1e-14));
    }
    SECTION("theta arity must match levels") {
        REQUIRE_THROWS_AS(evaluate(f, std::vector<double>{0.0, 0.0}), std::invalid_argument);
    }
}

TEST_CASE("hermitian symbols evaluate to hermitian matrices on a grid") {
    std::mt19937 gen(11);
    for (int trial = 0; trial < 4; ++trial) {
        MatrixSymbol f = random_hermitian_symbol(gen, 1 + trial % 3, 1 + trial % 2);
        for (int i = 0; i < 1024; ++i) {
            DenseMatrix v = evaluate(f, 2.0 * pi * i / 1024);
            double scale = 1.0 + v.cwiseAbs().maxCoeff();
            REQUIRE((v - v.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
        }
    }
}

TEST_CASE("hermitian_eig") {
    SECTION("Q2 eigenvalues at theta = pi/2") {
        auto [f, h] = fem_symbols_1d(2);
        auto eig = hermitian_eig(evaluate(f, pi / 2.0));
        REQUIRE(eig.eigenvalues(0) == Approx(5.0 - std::sqrt(129.0) / 3.0).epsilon(1e-12));
        REQUIRE(eig.eigenvalues(1) == Approx(5.0 + std::sqrt(129.0) / 3.0).epsilon(1e-12));
    }
    SECTION("identity") {
        auto eig = hermitian_eig(DenseMatrix::Identity(2, 2));
        REQUIRE(eig.eigenvalues(0) == Approx(1.0));
        REQUIRE(eig.eigenvalues(1) == Approx(1.0));
        REQUIRE((eig.eigenvectors * eig.eigenvectors.adjoint() - DenseMatrix::Identity(2, 2))
                    .cwiseAbs()
                    .maxCoeff() < 1e-13);
    }
    SECTION("diagonal matrix, ascending order") {
        DenseMatrix m = DenseMatrix::Zero(2, 2);
        m(0, 0) = 3.0;
        m(1, 1) = 2.0;
        auto eig = hermitian_eig(m);
        REQUIRE(eig.eigenvalues(0) == Approx(2.0));
        REQUIRE(eig.eigenvalues(1) == Approx(3.0));
        // eigenvectors are a permutation of the identity columns
        REQUIRE(std::abs(eig.eigenvectors.col(0)(1)) == Approx(1.0));
        REQUIRE(std::abs(eig.eigenvectors.col(1)(0)) == Approx(1.0));
    }
    SECTION("reconstruction and unitarity on random hermitian input") {
        std::mt19937 gen(5);
        for (int trial = 0; trial < 8; ++trial) {
            int d = 2 + trial % 3;
            DenseMatrix a = random_matrix(gen, d);
            DenseMatrix m = 0.5 * (a + a.adjoint().eval());
            auto eig = hermitian_eig(m);
            DenseMatrix rec = eig.eigenvectors *
                              eig.eigenvalues.cast<cxd>().asDiagonal() *
                              eig.eigenvectors.adjoint();
            double scale = m.norm();
            REQUIRE((rec - m).norm() <= 1e-12 * (1.0 + scale));
            REQUIRE((eig.eigenvectors.adjoint() * eig.eigenvectors -
                     DenseMatrix::Identity(d, d))
                        .norm() <= 1e-12);
            for (int i = 0; i + 1 < d; ++i)
                REQUIRE(eig.eigenvalues(i) <= eig.eigenvalues(i + 1));
        }
    }
    SECTION("rejects non-finite and non-hermitian input") {
        DenseMatrix bad = DenseMatrix::Zero(2, 2);
        bad(0, 1) = cxd(std::numeric_limits<double>::quiet_NaN(), 0.0);
        REQUIRE_THROWS_AS(hermitian_eig(bad), std::invalid_argument);
        DenseMatrix skew = DenseMatrix::Zero(2, 2);
        skew(0, 1) = 1.0;
        skew(1, 0) = -1.0;
        REQUIRE_THROWS_AS(hermitian_eig(skew), std::invalid_argument);
    }
}

TEST_CASE("projector symbol p_z") {
    SECTION("d=1, z=1 is 1 + cos(theta)") {
        MatrixSymbol p = projector_symbol_pz(1, 1.0);
        REQUIRE(p.coeff({0})(0, 0).real() == Approx(1.0));
        REQUIRE(p.coeff({1})(0, 0).real() == Approx(0.5));
        REQUIRE(p.coeff({-1})(0, 0).real() == Approx(0.5));
    }
    SECTION("d=2, z=1 at theta=0 is 2I") {
        DenseMatrix v = evaluate(projector_symbol_pz(2, 1.0), 0.0);
        REQUIRE((v - 2.0 * DenseMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("d=2, z=3 at theta=0") {
        DenseMatrix v = evaluate(projector_symbol_pz(2, 3.0), 0.0);
        DenseMatrix want(2, 2);
        want << 4.0, 2.0, 2.0, 4.0;
        REQUIRE((v - want).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("rejects z <= 0") {
        REQUIRE_THROWS_AS(projector_symbol_pz(2, 0.0), std::invalid_argument);
        REQUIRE_THROWS_AS(projector_symbol_pz(2, -1.0), std::invalid_argument);
    }
    SECTION("commutativity condition p(theta) p(theta+pi) = p(theta+pi) p(theta)") {
        for (double z : {1.0, 2.0, 3.0, 4.0, 5.0}) {
            MatrixSymbol p = projector_symbol_pz(3, z);
            for (int i = 0; i < 256; ++i) {
                double th = 2.0 * pi * i / 256;
                DenseMatrix p0 = evaluate(p, th);
                DenseMatrix p1 = evaluate(p, th + pi);
                REQUIRE((p0 * p1 - p1 * p0).cwiseAbs().maxCoeff() <= 1e-13);
            }
        }
    }
}

TEST_CASE("symbol_product convolves coefficients") {
    SECTION("(1 + cos)^2 = 3/2 + 2cos + cos(2)/2") {
        MatrixSymbol p = scalar_symbol({{0, 1.0}, {1, 0.5}, {-1, 0.5}});
        MatrixSymbol q = symbol_product(p, p);
        REQUIRE(q.coeff({0})(0, 0).real() == Approx(1.5));
        REQUIRE(q.coeff({1})(0, 0).real() == Approx(1.0));
        REQUIRE(q.coeff({-1})(0, 0).real() == Approx(1.0));
        REQUIRE(q.coeff({2})(0, 0).real() == Approx(0.25));
        REQUIRE(q.coeff({-2})(0, 0).real() == Approx(0.25));
        REQUIRE(q.degree()[0] == 2);
    }
    SECTION("identity-constant symbol is neutral") {
        std::mt19937 gen(2);
        MatrixSymbol b = random_hermitian_symbol(gen, 2, 2);
        MatrixSymbol::CoeffMap c;
        c[{0}] = DenseMatrix::Identity(2, 2);
        MatrixSymbol id(1, 2, std::move(c), true);
        MatrixSymbol prod = symbol_product(id, b);
        for (const auto& [j, bj] : b.coeffs())
            REQUIRE((prod.coeff(j) - bj).cwiseAbs().maxCoeff() < 1e-15);
    }
    SECTION("p_z^H p_z vanishes at pi") {
        MatrixSymbol p = projector_symbol_pz(2, 2.0);
        MatrixSymbol q = symbol_product(adjoint_symbol(p), p);
        REQUIRE(evaluate(q, pi).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("rejects mismatched operands") {
        REQUIRE_THROWS_AS(
            symbol_product(projector_symbol_pz(2, 1.0), projector_symbol_pz(3, 1.0)),
            std::invalid_argument);
    }
}

TEST_CASE("adjoint_symbol") {
    SECTION("fixes the real symmetric p_z") {
        MatrixSymbol p = projector_symbol_pz(3, 2.0);
        MatrixSymbol pa = adjoint_symbol(p);
        for (const auto& [j, pj] : p.coeffs())
            REQUIRE((pa.coeff(j) - pj).cwiseAbs().maxCoeff() < 1e-15);
    }
    SECTION("moves a one-sided coefficient to the mirrored offset") {
        std::mt19937 gen(3);
        DenseMatrix a = random_matrix(gen, 2);
        MatrixSymbol::CoeffMap c;
        c[{1}] = a;
        MatrixSymbol s(1, 2, std::move(c), false);
        MatrixSymbol sa = adjoint_symbol(s);
        REQUIRE(sa.has_coeff({-1}));
        REQUIRE_FALSE(sa.has_coeff({1}));
        REQUIRE((sa.coeff({-1}) - a.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    }
    SECTION("involution on random symbols") {
        std::mt19937 gen(4);
        for (int trial = 0; trial < 5; ++trial) {
            MatrixSymbol s = random_hermitian_symbol(gen, 2, 2);
            MatrixSymbol ss = adjoint_symbol(adjoint_symbol(s));
            for (const auto& [j, sj] : s.coeffs())
                REQUIRE((ss.coeff(j) - sj).cwiseAbs().maxCoeff() < 1e-15);
        }
    }
}

TEST_CASE("coarse_symbol") {
    SECTION("scalar Laplacian with p = 1 + cos gives 1 - cos") {
        MatrixSymbol p = scalar_symbol({{0, 1.0}, {1, 0.5}, {-1, 0.5}});
        MatrixSymbol fh = coarse_symbol(laplacian_symbol(), p);
        REQUIRE(fh.coeff({0})(0, 0).real() == Approx(1.0));
        REQUIRE(fh.coeff({1})(0, 0).real() == Approx(-0.5));
        REQUIRE(fh.coeff({-1})(0, 0).real() == Approx(-0.5));
        REQUIRE(fh.degree()[0] == 1);
    }
    SECTION("f = I gives the phat of the transfer rank argument, phat > 0") {
        MatrixSymbol p = projector_symbol_pz(2, 2.0);
        MatrixSymbol::CoeffMap c;
        c[{0}] = DenseMatrix::Identity(2, 2);
        MatrixSymbol id(1, 2, std::move(c), true);
        MatrixSymbol ph = coarse_symbol(id, p);
        for (int i = 0; i < 64; ++i) {
            double th = 2.0 * pi * i / 64;
            DenseMatrix direct =
                0.5 * (evaluate(p, th / 2).adjoint() * evaluate(p, th / 2) +
                       evaluate(p, th / 2 + pi).adjoint() * evaluate(p, th / 2 + pi));
            REQUIRE((evaluate(ph, th) - direct).cwiseAbs().maxCoeff() < 1e-12);
            REQUIRE(lambda_min(ph, {th}) > 0.0);
        }
    }
    SECTION("consistency with the frequency-halving average on random symbols") {
        std::mt19937 gen(6);
        for (int trial = 0; trial < 10; ++trial) {
            int d = 1 + trial % 3;
            MatrixSymbol f = random_hermitian_symbol(gen, d, 1 + trial % 2);
            MatrixSymbol p = projector_symbol_pz(d, 1.0 + trial % 3);
            MatrixSymbol fh = coarse_symbol(f, p);
            double scale = 1.0 + sup_spectral_norm(fh, 256);
            for (int i = 0; i < 256; ++i) {
                double th = 2.0 * pi * i / 256;
                DenseMatrix direct =
                    0.5 *
                    (evaluate(p, th / 2).adjoint() * evaluate(f, th / 2) * evaluate(p, th / 2) +
                     evaluate(p, th / 2 + pi).adjoint() * evaluate(f, th / 2 + pi) *
                         evaluate(p, th / 2 + pi));
                REQUIRE((evaluate(fh, th) - direct).cwiseAbs().maxCoeff() <= 1e-11 * scale);
            }
        }
    }
    SECTION("preserves nonnegative definiteness") {
        auto [f, h] = fem_symbols_1d(2);
        MatrixSymbol fh = coarse_symbol_level(f, 2.0, 2);
        for (int i = 0; i < 128; ++i)
            REQUIRE(lambda_min(fh, {2.0 * pi * i / 128}) > -1e-12);
    }
    SECTION("rejects mismatched or multilevel operands") {
        auto [f, h] = fem_symbols_1d(2);
        REQUIRE_THROWS_AS(coarse_symbol(f, projector_symbol_pz(3, 1.0)), std::invalid_argument);
        MatrixSymbol two = symbol_kron(projector_symbol_pz(2, 1.0), projector_symbol_pz(2, 1.0));
        REQUIRE_THROWS_AS(coarse_symbol(two, two), std::invalid_argument);
    }
}

TEST_CASE("symbol constructor invariants") {
    SECTION("hermitian flag requires paired coefficients") {
        std::mt19937 gen(7);
        MatrixSymbol::CoeffMap c;
        c[{1}] = random_matrix(gen, 2);
        REQUIRE_THROWS_AS(MatrixSymbol(1, 2, std::move(c), true), std::invalid_argument);
    }
    SECTION("degree tracks the stored support") {
        MatrixSymbol p = projector_symbol_pz(2, 2.0);
        REQUIRE(p.degree()[0] == 1);
        MatrixSymbol q = symbol_product(p, p);
        REQUIRE(q.degree()[0] == 2);
    }
    SECTION("symbol_kron produces the 2-level tensor symbol") {
        MatrixSymbol p = projector_symbol_pz(2, 2.0);
        MatrixSymbol pp = symbol_kron(p, p);
        REQUIRE(pp.levels() == 2);
        REQUIRE(pp.block_size() == 4);
        std::vector<double> th = {0.7, -1.3};
        DenseMatrix a = evaluate(p, th[0]);
        DenseMatrix b = evaluate(p, th[1]);
        DenseMatrix want(4, 4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) want.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
        REQUIRE((evaluate(pp, th) - want).cwiseAbs().maxCoeff() < 1e-13);
    }
}
