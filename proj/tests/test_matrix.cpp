#include <doctest.h>

#include <cmath>

#include "nlra/matrix.hpp"
#include "nlra/rng.hpp"

using namespace nlra;

namespace {

// Independent product oracle: plain i-j-k triple loop.
Matrix matmul_oracle(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) {
                acc += a(i, k) * b(k, j);
            }
            out(i, j) = acc;
        }
    }
    return out;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Matrix m(rows, cols);
    Rng(seed).fill_gaussian(m, 0.0, 1.0);
    return m;
}

} // namespace

TEST_CASE("matmul: identity leaves the operand unchanged") {
    const Matrix m = random_matrix(3, 3, 11);
    const Matrix out = matmul(Matrix::identity(3), m);
    CHECK(out == m);
}

TEST_CASE("matmul: permutation matrix swaps columns") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    const Matrix p = Matrix::from_rows({{0, 1}, {1, 0}});
    const Matrix out = matmul(a, p);
    CHECK(out == Matrix::from_rows({{2, 1}, {4, 3}}));
}

TEST_CASE("matmul: matches the triple-loop oracle") {
    const Matrix a = random_matrix(5, 3, 21);
    const Matrix b = random_matrix(3, 4, 22);
    CHECK(max_abs_diff(matmul(a, b), matmul_oracle(a, b)) < 1e-12);
}

TEST_CASE("matmul: associativity over random conformable triples") {
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        Rng rng(1000 + trial);
        const std::size_t p = 1 + rng.below(8);
        const std::size_t q = 1 + rng.below(8);
        const std::size_t r = 1 + rng.below(8);
        const std::size_t s = 1 + rng.below(8);
        const Matrix a = random_matrix(p, q, 3 * trial);
        const Matrix b = random_matrix(q, r, 3 * trial + 1);
        const Matrix c = random_matrix(r, s, 3 * trial + 2);
        const Matrix left = matmul(matmul(a, b), c);
        const Matrix right = matmul(a, matmul(b, c));
        const double scale = static_cast<double>(frobenius_norm(left));
        CHECK(static_cast<double>(frobenius_norm(left - right)) <=
              1e-10 * std::max(scale, 1.0));
    }
}

TEST_CASE("matmul: dimension mismatch raises ShapeError") {
    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
}

TEST_CASE("matmul: bit-identical across repeated calls") {
    const Matrix a = random_matrix(7, 9, 77);
    const Matrix b = random_matrix(9, 5, 78);
    CHECK(matmul(a, b) == matmul(a, b));
}

TEST_CASE("frobenius_norm basics") {
    CHECK(frobenius_norm(Matrix(4, 5)) == 0.0);
    CHECK(frobenius_norm(Matrix::identity(3)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    CHECK(frobenius_norm(Matrix::from_rows({{3, 4}})) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("block / hstack / vstack partition round trip") {
    const Matrix w = random_matrix(6, 5, 5);
    const Matrix tl = block(w, 0, 0, 2, 2);
    const Matrix tr = block(w, 0, 2, 2, 3);
    const Matrix bl = block(w, 2, 0, 4, 2);
    const Matrix br = block(w, 2, 2, 4, 3);
    CHECK(vstack(hstack(tl, tr), hstack(bl, br)) == w);
    CHECK_THROWS_AS(block(w, 4, 0, 4, 2), ShapeError);
}

TEST_CASE("transpose is an involution") {
    const Matrix a = random_matrix(4, 7, 9);
    CHECK(transpose(transpose(a)) == a);
}

TEST_CASE("matrix_cast f64 -> f32 -> f64 keeps f32-representable values") {
    Matrix a = Matrix::from_rows({{0.5, -1.25}, {3.0, 1024.0}});
    const auto f = matrix_cast<float>(a);
    CHECK(matrix_cast<double>(f) == a);
}

TEST_CASE("rng streams: same label same seed agree, labels diverge") {
    Rng s1 = Rng::stream(42, "base");
    Rng s2 = Rng::stream(42, "base");
    Rng s3 = Rng::stream(42, "perturb");
    const auto a = s1.next_u64();
    CHECK(a == s2.next_u64());
    CHECK(a != s3.next_u64());
}

TEST_CASE("rng gaussian fill is deterministic and roughly standardized") {
    Matrix a(40, 40);
    Matrix b(40, 40);
    Rng(7).fill_gaussian(a, 0.0, 1.0);
    Rng(7).fill_gaussian(b, 0.0, 1.0);
    CHECK(a == b);
    double mean = 0.0;
    for (double v : a.data()) {
        mean += v;
    }
    mean /= static_cast<double>(a.size());
    double var = 0.0;
    for (double v : a.data()) {
        var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(a.size());
    CHECK(std::abs(mean) < 0.05);
    CHECK(var == doctest::Approx(1.0).epsilon(0.1));
}
