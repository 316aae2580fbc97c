#include <doctest.h>

#include <cmath>

#include "nlra/matrix.hpp"
#include "nlra/rng.hpp"
#include "nlra/svd.hpp"

using namespace nlra;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Matrix m(rows, cols);
    Rng(seed).fill_gaussian(m, 0.0, 1.0);
    return m;
}

Matrix reconstruct(const SvdResult &s) {
    Matrix us = s.u;
    for (std::size_t j = 0; j < s.sigma.size(); ++j) {
        for (std::size_t i = 0; i < us.rows(); ++i) {
            us(i, j) *= s.sigma[j];
        }
    }
    return matmul(us, transpose(s.v));
}

double orthonormality_defect(const Matrix &q) {
    return frobenius_norm(matmul(transpose(q), q) - Matrix::identity(q.cols()));
}

// Independent inverse oracle: Gauss-Jordan with partial pivoting.
Matrix invert_oracle(Matrix a) {
    const std::size_t n = a.rows();
    Matrix inv = Matrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t i = col + 1; i < n; ++i) {
            if (std::abs(a(i, col)) > std::abs(a(pivot, col))) {
                pivot = i;
            }
        }
        REQUIRE(std::abs(a(pivot, col)) > 1e-12);
        for (std::size_t j = 0; j < n; ++j) {
            std::swap(a(col, j), a(pivot, j));
            std::swap(inv(col, j), inv(pivot, j));
        }
        const double d = a(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            a(col, j) /= d;
            inv(col, j) /= d;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col) {
                continue;
            }
            const double f = a(i, col);
            if (f == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) -= f * a(col, j);
                inv(i, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

} // namespace

TEST_CASE("svd_square: diagonal matrix") {
    const SvdResult s = svd_square(Matrix::from_rows({{3, 0}, {0, 1}}));
    CHECK(s.sigma[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(s.sigma[1] == doctest::Approx(1.0).epsilon(1e-14));
    // Sign convention pins both factors to the identity exactly here.
    CHECK(max_abs_diff(s.u, Matrix::identity(2)) < 1e-14);
    CHECK(max_abs_diff(s.v, Matrix::identity(2)) < 1e-14);
}

TEST_CASE("svd_square: zero matrix has zero spectrum and orthonormal factors") {
    const SvdResult s = svd_square(Matrix(2, 2));
    CHECK(s.sigma[0] == 0.0);
    CHECK(s.sigma[1] == 0.0);
    CHECK(orthonormality_defect(s.u) < 1e-14);
    CHECK(orthonormality_defect(s.v) < 1e-14);
}

TEST_CASE("svd_square: random 8x8 reconstructs") {
    const Matrix a = random_matrix(8, 8, 3);
    const SvdResult s = svd_square(a);
    CHECK(static_cast<double>(frobenius_norm(reconstruct(s) - a)) < 1e-10);
}

TEST_CASE("svd: reconstruction and orthonormality up to 32x32") {
    for (std::uint64_t trial = 0; trial < 25; ++trial) {
        Rng rng(500 + trial);
        const std::size_t n = 2 + rng.below(31);
        const Matrix a = random_matrix(n, n, 9000 + trial);
        const SvdResult s = svd_square(a);
        CHECK(static_cast<double>(frobenius_norm(reconstruct(s) - a)) < 1e-10);
        CHECK(orthonormality_defect(s.u) < 1e-12);
        CHECK(orthonormality_defect(s.v) < 1e-12);
        for (std::size_t j = 1; j < s.sigma.size(); ++j) {
            CHECK(s.sigma[j - 1] >= s.sigma[j]);
            CHECK(s.sigma[j] >= 0.0);
        }
    }
}

TEST_CASE("svd: rank-deficient input still yields orthonormal factors") {
    // Outer product -> rank 1 with two exact zero singular values.
    Matrix a(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            a(i, j) = static_cast<double>((i + 1) * (j + 1));
        }
    }
    const SvdResult s = svd_square(a);
    CHECK(s.sigma[1] < 1e-12 * s.sigma[0]);
    CHECK(orthonormality_defect(s.u) < 1e-10);
    CHECK(static_cast<double>(frobenius_norm(reconstruct(s) - a)) < 1e-10);
}

TEST_CASE("svd: non-square input via svd_square raises ShapeError") {
    CHECK_THROWS_AS(svd_square(Matrix(2, 3)), ShapeError);
}

TEST_CASE("svd: exhausted sweep budget raises ConvergenceError with residual") {
    const Matrix a = random_matrix(6, 6, 17);
    try {
        svd(a, /*max_sweeps=*/0);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError &e) {
        CHECK(e.residual() >= 0.0);
    }
}

TEST_CASE("svd: non-finite input raises NumericError") {
    Matrix a = Matrix::identity(2);
    a(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(svd_square(a), NumericError);
}

TEST_CASE("svd: bit-identical across repeated calls") {
    const Matrix a = random_matrix(12, 12, 23);
    const SvdResult s1 = svd_square(a);
    const SvdResult s2 = svd_square(a);
    CHECK(s1.u == s2.u);
    CHECK(s1.v == s2.v);
    CHECK(s1.sigma == s2.sigma);
}

TEST_CASE("svd: thin decomposition of tall and wide inputs") {
    const Matrix tall = random_matrix(10, 4, 31);
    const SvdResult st = svd(tall);
    CHECK(st.u.rows() == 10);
    CHECK(st.u.cols() == 4);
    CHECK(static_cast<double>(frobenius_norm(reconstruct(st) - tall)) < 1e-10);

    const Matrix wide = random_matrix(4, 10, 32);
    const SvdResult sw = svd(wide);
    CHECK(sw.u.rows() == 4);
    CHECK(static_cast<double>(frobenius_norm(reconstruct(sw) - wide)) < 1e-10);
}

TEST_CASE("pseudoinverse: identity") {
    CHECK(max_abs_diff(pseudoinverse(Matrix::identity(4)), Matrix::identity(4)) < 1e-14);
}

TEST_CASE("pseudoinverse: rank-deficient diagonal") {
    const Matrix p = pseudoinverse(Matrix::from_rows({{2, 0}, {0, 0}}), 1e-12);
    CHECK(max_abs_diff(p, Matrix::from_rows({{0.5, 0}, {0, 0}})) < 1e-14);
}

TEST_CASE("pseudoinverse: matches the Gauss-Jordan inverse oracle") {
    const Matrix a = random_matrix(6, 6, 41); // Gaussian squares are invertible in practice
    const Matrix p = pseudoinverse(a);
    CHECK(static_cast<double>(frobenius_norm(p - invert_oracle(a))) < 1e-9);
}

TEST_CASE("pseudoinverse: Moore-Penrose axioms over random sizes 2..16") {
    for (std::uint64_t trial = 0; trial < 30; ++trial) {
        Rng rng(700 + trial);
        const std::size_t n = 2 + rng.below(15);
        const Matrix a = random_matrix(n, n, 4000 + trial);
        const Matrix p = pseudoinverse(a);
        const Matrix ap = matmul(a, p);
        const Matrix pa = matmul(p, a);
        CHECK(static_cast<double>(frobenius_norm(matmul(ap, a) - a)) < 1e-8);
        CHECK(static_cast<double>(frobenius_norm(matmul(pa, p) - p)) < 1e-8);
        CHECK(static_cast<double>(frobenius_norm(transpose(ap) - ap)) < 1e-8);
        CHECK(static_cast<double>(frobenius_norm(transpose(pa) - pa)) < 1e-8);
    }
}

TEST_CASE("pseudoinverse: negative rank_tol rejected") {
    CHECK_THROWS_AS(pseudoinverse(Matrix::identity(2), -1.0), ConfigError);
}
