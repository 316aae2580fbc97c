#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nlra/errors.hpp"
#include "nlra/matrix.hpp"
#include "nlra/rng.hpp"
#include "nlra/svd.hpp"

namespace nlra {

/// Four-block partition of an m x n matrix around its r x r sample block:
///
///     W = [ a_w  b_w ]      a_w: r x r        b_w: r x (n-r)
///         [ f_w  c_w ]      f_w: (m-r) x r    c_w: (m-r) x (n-r)
///
/// With random sampling the recorded row/column permutations map partition
/// coordinates back to the original matrix; empty vectors mean identity
/// (leading-block sampling).
template <typename T>
struct MatrixBlocksT {
    MatrixT<T> a_w, b_w, f_w, c_w;
    std::size_t r = 0, m = 0, n = 0;
    std::vector<std::size_t> row_perm, col_perm;
};

using MatrixBlocks = MatrixBlocksT<double>;

/// Out-of-sample extension of the sample block's singular vectors:
/// u_hat = [U; f_w V diag(1/sigma)], v_hat = [V; b_w^T U diag(1/sigma)].
template <typename T>
struct NystromFactorsT {
    MatrixT<T> u_hat;     // m x r
    std::vector<T> sigma; // r
    MatrixT<T> v_hat;     // n x r
};

using NystromFactors = NystromFactorsT<double>;

enum class Sampling { leading, random };
enum class CoreKind { pseudoinverse, raw_sample };

template <typename T>
MatrixBlocksT<T> partition(const MatrixT<T> &w, std::size_t r,
                           Sampling sampling = Sampling::leading, std::uint64_t seed = 0) {
    if (r == 0 || r >= w.rows() || r >= w.cols()) {
        throw ShapeError("partition: rank " + std::to_string(r) + " out of range for " +
                         detail::shape_str(w.rows(), w.cols()));
    }
    MatrixBlocksT<T> blocks;
    blocks.r = r;
    blocks.m = w.rows();
    blocks.n = w.cols();

    const MatrixT<T> *src = &w;
    MatrixT<T> permuted;
    if (sampling == Sampling::random) {
        Rng rows_rng = Rng::stream(seed, "partition.rows");
        Rng cols_rng = Rng::stream(seed, "partition.cols");
        blocks.row_perm = rows_rng.permutation(w.rows());
        blocks.col_perm = cols_rng.permutation(w.cols());
        permuted = MatrixT<T>(w.rows(), w.cols());
        for (std::size_t i = 0; i < w.rows(); ++i) {
            for (std::size_t j = 0; j < w.cols(); ++j) {
                permuted(i, j) = w(blocks.row_perm[i], blocks.col_perm[j]);
            }
        }
        src = &permuted;
    }

    blocks.a_w = block(*src, 0, 0, r, r);
    blocks.b_w = block(*src, 0, r, r, w.cols() - r);
    blocks.f_w = block(*src, r, 0, w.rows() - r, r);
    blocks.c_w = block(*src, r, r, w.rows() - r, w.cols() - r);
    return blocks;
}

/// Inverse of partition, bit-exact: re-places every entry, undoing the
/// sampling permutation if one was recorded.
template <typename T>
MatrixT<T> assemble(const MatrixBlocksT<T> &blocks) {
    MatrixT<T> joined = vstack(hstack(blocks.a_w, blocks.b_w), hstack(blocks.f_w, blocks.c_w));
    if (blocks.row_perm.empty()) {
        return joined;
    }
    MatrixT<T> w(blocks.m, blocks.n);
    for (std::size_t i = 0; i < blocks.m; ++i) {
        for (std::size_t j = 0; j < blocks.n; ++j) {
            w(blocks.row_perm[i], blocks.col_perm[j]) = joined(i, j);
        }
    }
    return w;
}

/// Extends the sample block's singular vectors across all rows and columns
/// using f_w and b_w as interpolation weights. sv_floor < 0 selects the
/// default guard, 1e-12 x the largest singular value of a_w.
template <typename T>
NystromFactorsT<T> extend_singular_vectors(const MatrixBlocksT<T> &blocks, T sv_floor = T{-1}) {
    SvdResultT<T> core = svd_square(blocks.a_w);
    const std::size_t r = blocks.r;
    const T floor = sv_floor < T{0} ? T(1e-12) * core.sigma.front() : sv_floor;
    for (std::size_t i = 0; i < r; ++i) {
        if (core.sigma[i] <= floor) {
            throw DegenerateSampleError("extend_singular_vectors: singular value " +
                                            std::to_string(i + 1) + " of the sample block (" +
                                            std::to_string(static_cast<double>(core.sigma[i])) +
                                            ") is at or below the floor " +
                                            std::to_string(static_cast<double>(floor)),
                                        i + 1);
        }
    }

    // V diag(1/sigma) and U diag(1/sigma), column-scaled copies.
    MatrixT<T> v_inv = core.v;
    MatrixT<T> u_inv = core.u;
    for (std::size_t j = 0; j < r; ++j) {
        const T inv = T{1} / core.sigma[j];
        for (std::size_t i = 0; i < r; ++i) {
            v_inv(i, j) *= inv;
            u_inv(i, j) *= inv;
        }
    }

    NystromFactorsT<T> out;
    out.sigma = core.sigma;
    out.u_hat = vstack(core.u, matmul(blocks.f_w, v_inv));
    out.v_hat = vstack(core.v, matmul(transpose(blocks.b_w), u_inv));
    return out;
}

/// Three-factor reconstruction [a_w; f_w] * core * [a_w b_w], returned in
/// the original index space (sampling permutation undone). The
/// pseudoinverse core reproduces a_w, b_w, f_w exactly and fills the
/// remaining block with f_w a_w+ b_w; raw_sample uses a_w itself, the
/// cheaper core the adapter initialization builds on.
template <typename T>
MatrixT<T> nystrom_approximate(const MatrixBlocksT<T> &blocks,
                               CoreKind core = CoreKind::pseudoinverse,
                               T rank_tol = T(1e-10)) {
    const MatrixT<T> core_mat =
        core == CoreKind::pseudoinverse ? pseudoinverse(blocks.a_w, rank_tol) : blocks.a_w;
    const MatrixT<T> left = vstack(blocks.a_w, blocks.f_w);       // m x r
    const MatrixT<T> right = hstack(blocks.a_w, blocks.b_w);      // r x n
    MatrixT<T> approx = matmul(matmul(left, core_mat), right);

    if (blocks.row_perm.empty()) {
        return approx;
    }
    MatrixT<T> unpermuted(blocks.m, blocks.n);
    for (std::size_t i = 0; i < blocks.m; ++i) {
        for (std::size_t j = 0; j < blocks.n; ++j) {
            unpermuted(blocks.row_perm[i], blocks.col_perm[j]) = approx(i, j);
        }
    }
    return unpermuted;
}

struct ApproxError {
    double absolute = 0.0;
    double relative = 0.0;
};

template <typename T>
ApproxError approximation_error(const MatrixT<T> &w, const MatrixT<T> &w_hat) {
    if (!w.same_shape(w_hat)) {
        throw ShapeError("approximation_error: shapes " + detail::shape_str(w.rows(), w.cols()) +
                         " vs " + detail::shape_str(w_hat.rows(), w_hat.cols()));
    }
    ApproxError err;
    err.absolute = static_cast<double>(frobenius_norm(w - w_hat));
    const double denom =
        std::max(static_cast<double>(frobenius_norm(w)), std::numeric_limits<double>::min());
    err.relative = err.absolute / denom;
    return err;
}

enum class FlopMethod { nystrom, full_svd };

/// Work estimates behind the O(mr + r^2 + rn) vs O(mn^2) comparison.
/// Both constants are 1: only the ratio is meaningful.
inline std::uint64_t flop_estimate(std::uint64_t m, std::uint64_t n, std::uint64_t r,
                                   FlopMethod method) {
    if (r >= std::min(m, n)) {
        throw ShapeError("flop_estimate: rank " + std::to_string(r) + " out of range for " +
                         detail::shape_str(m, n));
    }
    if (method == FlopMethod::nystrom) {
        return m * r + r * r + r * n;
    }
    const std::uint64_t big = std::max(m, n);
    const std::uint64_t small = std::min(m, n);
    return big * small * small;
}

} // namespace nlra
