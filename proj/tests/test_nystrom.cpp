#include <doctest.h>

#include <cmath>

#include "nlra/matrix.hpp"
#include "nlra/nystrom.hpp"
#include "nlra/rng.hpp"
#include "nlra/svd.hpp"

using namespace nlra;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Matrix m(rows, cols);
    Rng(seed).fill_gaussian(m, 0.0, 1.0);
    return m;
}

// Rank-r oracle: W = L R with the leading r x r block kept invertible
// (retry seeds until its smallest singular value is comfortable).
Matrix random_rank_r(std::size_t m, std::size_t n, std::size_t r, std::uint64_t seed) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        const Matrix w =
            matmul(random_matrix(m, r, seed + 1000 * attempt),
                   random_matrix(r, n, seed + 1000 * attempt + 1));
        const auto s = svd_square(block(w, 0, 0, r, r));
        if (s.sigma.back() > 1e-3 * s.sigma.front() && s.sigma.back() > 1e-6) {
            return w;
        }
    }
}

Matrix factors_product(const NystromFactors &f) {
    Matrix us = f.u_hat;
    for (std::size_t j = 0; j < f.sigma.size(); ++j) {
        for (std::size_t i = 0; i < us.rows(); ++i) {
            us(i, j) *= f.sigma[j];
        }
    }
    return matmul(us, transpose(f.v_hat));
}

} // namespace

TEST_CASE("partition: identity splits into identity blocks") {
    const MatrixBlocks blocks = partition(Matrix::identity(4), 2);
    CHECK(blocks.a_w == Matrix::identity(2));
    CHECK(blocks.b_w == Matrix(2, 2));
    CHECK(blocks.f_w == Matrix(2, 2));
    CHECK(blocks.c_w == Matrix::identity(2));
}

TEST_CASE("partition/assemble is a bit-exact inverse pair") {
    const Matrix w = random_matrix(7, 5, 13);
    CHECK(assemble(partition(w, 3)) == w);
    CHECK(assemble(partition(w, 2, Sampling::random, 99)) == w);
}

TEST_CASE("partition: random sampling is seed-deterministic") {
    const Matrix w = random_matrix(6, 5, 7);
    const MatrixBlocks b1 = partition(w, 2, Sampling::random, 7);
    const MatrixBlocks b2 = partition(w, 2, Sampling::random, 7);
    CHECK(b1.a_w == b2.a_w);
    CHECK(b1.b_w == b2.b_w);
    CHECK(b1.f_w == b2.f_w);
    CHECK(b1.c_w == b2.c_w);
    CHECK(b1.row_perm == b2.row_perm);
    const MatrixBlocks b3 = partition(w, 2, Sampling::random, 8);
    CHECK(b1.row_perm != b3.row_perm); // different seed, different permutation
}

TEST_CASE("partition: rank out of range raises ShapeError") {
    const Matrix w = random_matrix(4, 6, 3);
    CHECK_THROWS_AS(partition(w, 0), ShapeError);
    CHECK_THROWS_AS(partition(w, 4), ShapeError);
}

TEST_CASE("extend_singular_vectors: factor product reconstructs a rank-r matrix") {
    const Matrix w = random_rank_r(12, 9, 3, 101);
    const NystromFactors f = extend_singular_vectors(partition(w, 3));
    CHECK(approximation_error(w, factors_product(f)).absolute < 1e-8);
}

TEST_CASE("extend_singular_vectors: isolated identity block") {
    Matrix w(5, 5);
    w(0, 0) = w(1, 1) = 1.0; // a_w = I2, all strips zero
    const NystromFactors f = extend_singular_vectors(partition(w, 2));
    CHECK(f.u_hat == vstack(Matrix::identity(2), Matrix(3, 2)));
    CHECK(f.v_hat == vstack(Matrix::identity(2), Matrix(3, 2)));
    CHECK(f.sigma[0] == 1.0);
    CHECK(f.sigma[1] == 1.0);
}

TEST_CASE("extend_singular_vectors: blocks agree with the sample-block SVD") {
    const Matrix w = random_matrix(10, 8, 55);
    const MatrixBlocks blocks = partition(w, 4);
    const SvdResult core = svd_square(blocks.a_w);
    const NystromFactors f = extend_singular_vectors(blocks);
    CHECK(max_abs_diff(block(f.u_hat, 0, 0, 4, 4), core.u) == 0.0);
    CHECK(max_abs_diff(block(f.v_hat, 0, 0, 4, 4), core.v) == 0.0);

    // Bottom blocks: f_w V sigma^-1 and b_w^T U sigma^-1.
    Matrix v_inv = core.v;
    Matrix u_inv = core.u;
    for (std::size_t j = 0; j < 4; ++j) {
        for (std::size_t i = 0; i < 4; ++i) {
            v_inv(i, j) /= core.sigma[j];
            u_inv(i, j) /= core.sigma[j];
        }
    }
    CHECK(max_abs_diff(block(f.u_hat, 4, 0, 6, 4), matmul(blocks.f_w, v_inv)) < 1e-12);
    CHECK(max_abs_diff(block(f.v_hat, 4, 0, 4, 4), matmul(transpose(blocks.b_w), u_inv)) < 1e-12);
}

TEST_CASE("extend_singular_vectors: degenerate sample names the offending index") {
    Matrix w(4, 4);
    w(0, 0) = 1.0;
    w(1, 1) = 1e-18;
    w(2, 2) = w(3, 3) = 1.0;
    try {
        extend_singular_vectors(partition(w, 2), 1e-12);
        FAIL("expected DegenerateSampleError");
    } catch (const DegenerateSampleError &e) {
        CHECK(e.index() == 2);
    }
}

TEST_CASE("nystrom_approximate: exact on rank-r matrices with invertible sample block") {
    const Matrix w = random_rank_r(16, 11, 4, 300);
    const Matrix w_hat = nystrom_approximate(partition(w, 4));
    CHECK(approximation_error(w, w_hat).relative < 1e-8);
}

TEST_CASE("nystrom_approximate: identity input only recovers the sampled blocks") {
    const Matrix w_hat = nystrom_approximate(partition(Matrix::identity(4), 2));
    Matrix expected(4, 4);
    expected(0, 0) = expected(1, 1) = 1.0;
    CHECK(max_abs_diff(w_hat, expected) < 1e-12);
    CHECK(approximation_error(Matrix::identity(4), w_hat).absolute ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("nystrom_approximate: raw core equals pseudoinverse core when a_w = I") {
    Matrix w = random_matrix(6, 6, 31);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            w(i, j) = (i == j) ? 1.0 : 0.0;
        }
    }
    const MatrixBlocks blocks = partition(w, 2);
    const Matrix pinv_core = nystrom_approximate(blocks, CoreKind::pseudoinverse);
    const Matrix raw_core = nystrom_approximate(blocks, CoreKind::raw_sample);
    CHECK(max_abs_diff(pinv_core, raw_core) < 1e-12);
}

TEST_CASE("nystrom_approximate: sampled blocks are preserved under the pinv core") {
    const Matrix w = random_matrix(9, 7, 47);
    const MatrixBlocks blocks = partition(w, 3);
    const Matrix w_hat = nystrom_approximate(blocks);
    CHECK(max_abs_diff(block(w_hat, 0, 0, 3, 3), blocks.a_w) < 1e-10);
    CHECK(max_abs_diff(block(w_hat, 0, 3, 3, 4), blocks.b_w) < 1e-10);
    CHECK(max_abs_diff(block(w_hat, 3, 0, 6, 3), blocks.f_w) < 1e-10);
    // Remaining block is f_w a_w+ b_w.
    const Matrix fill = matmul(matmul(blocks.f_w, pseudoinverse(blocks.a_w)), blocks.b_w);
    CHECK(max_abs_diff(block(w_hat, 3, 3, 6, 4), fill) < 1e-10);
}

TEST_CASE("nystrom_approximate: random sampling reconstructs in original coordinates") {
    const Matrix w = random_rank_r(14, 10, 3, 500);
    const MatrixBlocks blocks = partition(w, 3, Sampling::random, 12);
    const SvdResult s = svd_square(blocks.a_w);
    REQUIRE(s.sigma.back() > 1e-6 * s.sigma.front()); // holds for this seed
    CHECK(approximation_error(w, nystrom_approximate(blocks)).relative < 1e-8);
}

TEST_CASE("factor product and three-factor product agree (nonsingular sample)") {
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        Rng rng(600 + trial);
        const std::size_t m = 8 + rng.below(20);
        const std::size_t n = 8 + rng.below(20);
        const std::size_t r = 2 + rng.below(4);
        const Matrix w = random_matrix(m, n, 8000 + trial);
        const MatrixBlocks blocks = partition(w, r);
        const SvdResult s = svd_square(blocks.a_w);
        if (s.sigma.back() <= 1e-6 * s.sigma.front()) {
            continue;
        }
        const Matrix from_factors = factors_product(extend_singular_vectors(blocks));
        const Matrix from_product = nystrom_approximate(blocks);
        CHECK(static_cast<double>(frobenius_norm(from_factors - from_product)) <
              1e-8 * std::max(1.0, static_cast<double>(frobenius_norm(from_product))));
    }
}

TEST_CASE("approximation_error: trivial and oracle-checked values") {
    const Matrix w = random_matrix(5, 4, 71);
    const ApproxError self = approximation_error(w, w);
    CHECK(self.absolute == 0.0);
    CHECK(self.relative == 0.0);

    const ApproxError id = approximation_error(Matrix::identity(2), Matrix(2, 2));
    CHECK(id.absolute == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(id.relative == doctest::Approx(1.0).epsilon(1e-15));

    const Matrix w_hat = random_matrix(5, 4, 72);
    double sq = 0.0;
    double wsq = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double d = w.data()[i] - w_hat.data()[i];
        sq += d * d;
        wsq += w.data()[i] * w.data()[i];
    }
    const ApproxError err = approximation_error(w, w_hat);
    CHECK(err.absolute == doctest::Approx(std::sqrt(sq)).epsilon(1e-12));
    CHECK(err.relative == doctest::Approx(std::sqrt(sq) / std::sqrt(wsq)).epsilon(1e-12));

    CHECK_THROWS_AS(approximation_error(w, Matrix(4, 5)), ShapeError);
}

TEST_CASE("flop_estimate: spec arithmetic") {
    CHECK(flop_estimate(4096, 4096, 128, FlopMethod::nystrom) == 1064960);
    CHECK(flop_estimate(4096, 4096, 128, FlopMethod::full_svd) == 68719476736ULL);
    CHECK(flop_estimate(2, 2, 1, FlopMethod::nystrom) == 5);
    CHECK_THROWS_AS(flop_estimate(4, 4, 4, FlopMethod::nystrom), ShapeError);
}

TEST_CASE("flop_estimate: monotone in each dimension, nystrom beats full svd") {
    for (std::uint64_t m = 4; m <= 64; m *= 2) {
        for (std::uint64_t n = 4; n <= 64; n *= 2) {
            for (std::uint64_t r = 1; r <= std::min(m, n) / 2; ++r) {
                const auto ny = flop_estimate(m, n, r, FlopMethod::nystrom);
                const auto fs = flop_estimate(m, n, r, FlopMethod::full_svd);
                CHECK(ny < fs);
                CHECK(flop_estimate(m + 1, n, r, FlopMethod::nystrom) >= ny);
                CHECK(flop_estimate(m, n + 1, r, FlopMethod::nystrom) >= ny);
                CHECK(flop_estimate(m, n, r + 1, FlopMethod::nystrom) > ny);
            }
        }
    }
}
