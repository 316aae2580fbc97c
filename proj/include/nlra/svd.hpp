#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "nlra/errors.hpp"
#include "nlra/matrix.hpp"

namespace nlra {

/// Thin SVD of an m x n matrix (m >= n after an internal transpose if
/// needed): u (m x n) and v (n x n) have orthonormal columns, sigma holds n
/// non-negative values in non-increasing order, and u * diag(sigma) * v^T
/// reconstructs the input within precision.
template <typename T>
struct SvdResultT {
    MatrixT<T> u;
    std::vector<T> sigma;
    MatrixT<T> v;
};

using SvdResult = SvdResultT<double>;

namespace detail {

/// Dot of two contiguous columns. Four independent accumulator chains: the
/// summation order is fixed (deterministic) and the chains vectorize.
template <typename T>
T column_dot(const T *x, const T *y, std::size_t m) {
    T acc0{0}, acc1{0}, acc2{0}, acc3{0};
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        acc0 += x[i] * y[i];
        acc1 += x[i + 1] * y[i + 1];
        acc2 += x[i + 2] * y[i + 2];
        acc3 += x[i + 3] * y[i + 3];
    }
    for (; i < m; ++i) {
        acc0 += x[i] * y[i];
    }
    return (acc0 + acc1) + (acc2 + acc3);
}

/// One-sided Jacobi on the columns of a column-major working copy.
///
/// A pair (p, q) is rotated while |a_p . a_q| > 4 eps sqrt(m) |a_p| |a_q|;
/// a sweep with no rotations means every off-diagonal Gram entry is below
/// that bound, which for the r x r sample matrices this library decomposes
/// sits under 1e-14 x ||A||_F^2 (f64). The dimension factor keeps the
/// criterion above the dot-product noise floor for large inputs.
template <typename T>
struct JacobiOutcome {
    bool converged = false;
    int sweeps = 0;
    double residual = 0.0; // max |a_p . a_q| seen in the last sweep, / ||A||_F^2
};

template <typename T>
JacobiOutcome<T> jacobi_orthogonalize(std::vector<T> &w, std::vector<T> &v,
                                      std::size_t m, std::size_t n, int max_sweeps) {
    const T eps = std::numeric_limits<T>::epsilon();
    const T tol = T{4} * eps * static_cast<T>(std::sqrt(static_cast<double>(m)));

    double fro2 = 0.0;
    for (T x : w) {
        fro2 += static_cast<double>(x) * static_cast<double>(x);
    }

    JacobiOutcome<T> out;
    if (fro2 == 0.0 || n < 2) {
        out.converged = true;
        return out;
    }

    std::vector<T> colsq(n);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        // Rotations preserve column-norm sums only pairwise; refresh the
        // cached squares each sweep to stop rounding drift.
        for (std::size_t j = 0; j < n; ++j) {
            const T *cj = &w[j * m];
            colsq[j] = column_dot(cj, cj, m);
        }

        bool rotated = false;
        double worst = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                T *cp = &w[p * m];
                T *cq = &w[q * m];
                const T apq = column_dot(cp, cq, m);
                const T app = colsq[p];
                const T aqq = colsq[q];
                worst = std::max(worst, static_cast<double>(std::abs(apq)));
                if (app == T{0} || aqq == T{0} ||
                    std::abs(apq) <= tol * std::sqrt(app) * std::sqrt(aqq)) {
                    continue;
                }
                rotated = true;

                const T zeta = (aqq - app) / (T{2} * apq);
                const T t = (zeta >= T{0} ? T{1} : T{-1}) /
                            (std::abs(zeta) + std::sqrt(T{1} + zeta * zeta));
                const T c = T{1} / std::sqrt(T{1} + t * t);
                const T s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const T wp = cp[i];
                    const T wq = cq[i];
                    cp[i] = c * wp - s * wq;
                    cq[i] = s * wp + c * wq;
                }
                T *vp = &v[p * n];
                T *vq = &v[q * n];
                for (std::size_t i = 0; i < n; ++i) {
                    const T xp = vp[i];
                    const T xq = vq[i];
                    vp[i] = c * xp - s * xq;
                    vq[i] = s * xp + c * xq;
                }
                colsq[p] = app - t * apq;
                colsq[q] = aqq + t * apq;
            }
        }
        out.sweeps = sweep + 1;
        out.residual = worst / fro2;
        if (!rotated) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

/// Replace zero columns of the column-major m x n block with unit vectors
/// orthogonal to every other column (canonical basis + Gram-Schmidt).
template <typename T>
void complete_orthonormal(std::vector<T> &u, std::size_t m, std::size_t n,
                          const std::vector<bool> &is_zero) {
    for (std::size_t j = 0; j < n; ++j) {
        if (!is_zero[j]) {
            continue;
        }
        T *cj = &u[j * m];
        for (std::size_t cand = 0; cand < m; ++cand) {
            for (std::size_t i = 0; i < m; ++i) {
                cj[i] = (i == cand) ? T{1} : T{0};
            }
            for (std::size_t k = 0; k < n; ++k) {
                if (k == j || (is_zero[k] && k > j)) {
                    continue; // later zero columns are still unset
                }
                const T *ck = &u[k * m];
                T dot{0};
                for (std::size_t i = 0; i < m; ++i) {
                    dot += cj[i] * ck[i];
                }
                for (std::size_t i = 0; i < m; ++i) {
                    cj[i] -= dot * ck[i];
                }
            }
            T norm{0};
            for (std::size_t i = 0; i < m; ++i) {
                norm += cj[i] * cj[i];
            }
            norm = std::sqrt(norm);
            if (norm > T{0.5}) {
                for (std::size_t i = 0; i < m; ++i) {
                    cj[i] /= norm;
                }
                break;
            }
        }
    }
}

} // namespace detail

/// Thin SVD via one-sided Jacobi. Column signs follow a fixed convention
/// (largest-magnitude entry of each u column is non-negative) so repeated
/// calls on identical inputs are bit-identical and comparable.
///
/// Throws ConvergenceError (with the final residual) if the sweep budget is
/// exhausted, NumericError on non-finite input.
template <typename T>
SvdResultT<T> svd(const MatrixT<T> &a, int max_sweeps = 30) {
    if (a.rows() == 0 || a.cols() == 0) {
        throw ShapeError("svd: empty matrix");
    }
    if (!all_finite(a)) {
        throw NumericError("svd: input has non-finite entries");
    }
    if (a.rows() < a.cols()) {
        // Decompose the transpose and swap the factor roles.
        SvdResultT<T> t = svd(transpose(a), max_sweeps);
        return SvdResultT<T>{t.v, std::move(t.sigma), t.u};
    }

    const std::size_t m = a.rows();
    const std::size_t n = a.cols();

    // Column-major working copies: columns are contiguous for the dots.
    std::vector<T> w(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            w[j * m + i] = a(i, j);
        }
    }
    std::vector<T> v(n * n, T{0});
    for (std::size_t j = 0; j < n; ++j) {
        v[j * n + j] = T{1};
    }

    auto outcome = detail::jacobi_orthogonalize(w, v, m, n, max_sweeps);
    if (!outcome.converged) {
        throw ConvergenceError("svd: no convergence after " + std::to_string(max_sweeps) +
                                   " sweeps (residual " + std::to_string(outcome.residual) + ")",
                               outcome.residual);
    }

    std::vector<T> sig(n);
    for (std::size_t j = 0; j < n; ++j) {
        T acc{0};
        const T *cj = &w[j * m];
        for (std::size_t i = 0; i < m; ++i) {
            acc += cj[i] * cj[i];
        }
        sig[j] = std::sqrt(acc);
    }

    // Stable order: by singular value descending, index ascending on ties.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

    SvdResultT<T> res;
    res.u = MatrixT<T>(m, n);
    res.v = MatrixT<T>(n, n);
    res.sigma.resize(n);

    std::vector<T> ucols(m * n);
    std::vector<bool> u_zero(n, false);
    for (std::size_t jj = 0; jj < n; ++jj) {
        const std::size_t j = order[jj];
        res.sigma[jj] = sig[j];
        if (sig[j] > T{0}) {
            for (std::size_t i = 0; i < m; ++i) {
                ucols[jj * m + i] = w[j * m + i] / sig[j];
            }
        } else {
            u_zero[jj] = true;
        }
        for (std::size_t i = 0; i < n; ++i) {
            res.v(i, jj) = v[j * n + i];
        }
    }
    detail::complete_orthonormal(ucols, m, n, u_zero);

    for (std::size_t j = 0; j < n; ++j) {
        // Sign convention: first largest-|.| entry of the u column made
        // non-negative; v flips with it so the product is unchanged.
        std::size_t arg = 0;
        T best = std::abs(ucols[j * m]);
        for (std::size_t i = 1; i < m; ++i) {
            const T mag = std::abs(ucols[j * m + i]);
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        const T flip = (ucols[j * m + arg] < T{0}) ? T{-1} : T{1};
        for (std::size_t i = 0; i < m; ++i) {
            res.u(i, j) = flip * ucols[j * m + i];
        }
        if (flip < T{0}) {
            for (std::size_t i = 0; i < n; ++i) {
                res.v(i, j) = -res.v(i, j);
            }
        }
    }
    return res;
}

/// SVD restricted to square input, as used on the r x r sample block.
template <typename T>
SvdResultT<T> svd_square(const MatrixT<T> &a, int max_sweeps = 30) {
    if (a.rows() != a.cols()) {
        throw ShapeError("svd_square: matrix is " + detail::shape_str(a.rows(), a.cols()) +
                         ", expected square");
    }
    return svd(a, max_sweeps);
}

/// Moore-Penrose pseudoinverse via SVD truncation: singular values at or
/// below rank_tol x sigma_max are treated as zero.
template <typename T>
MatrixT<T> pseudoinverse(const MatrixT<T> &a, T rank_tol = T(1e-10)) {
    if (rank_tol < T{0}) {
        throw ConfigError("pseudoinverse: rank_tol must be >= 0");
    }
    SvdResultT<T> s = svd(a);
    const T cutoff = rank_tol * (s.sigma.empty() ? T{0} : s.sigma.front());

    // A+ = V * diag(1/sigma_i above cutoff) * U^T
    MatrixT<T> v_scaled = s.v;
    for (std::size_t j = 0; j < s.sigma.size(); ++j) {
        const T inv = (s.sigma[j] > cutoff && s.sigma[j] > T{0}) ? T{1} / s.sigma[j] : T{0};
        for (std::size_t i = 0; i < v_scaled.rows(); ++i) {
            v_scaled(i, j) *= inv;
        }
    }
    return matmul(v_scaled, transpose(s.u));
}

} // namespace nlra
