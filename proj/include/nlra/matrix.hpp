#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <type_traits>
#include <vector>

#include "nlra/errors.hpp"

namespace nlra {

/// Dense real matrix, row-major. The universal value type of the library.
/// Instantiated for float (f32) and double (f64); all operations are pure
/// functions, values are safe to share read-only across threads.
template <typename T>
class MatrixT {
    static_assert(std::is_floating_point_v<T>, "MatrixT requires float or double");

  public:
    using value_type = T;

    MatrixT() = default;

    MatrixT(std::size_t rows, std::size_t cols, T fill = T{0})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static MatrixT identity(std::size_t n) {
        MatrixT eye(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            eye(i, i) = T{1};
        }
        return eye;
    }

    static MatrixT from_rows(std::initializer_list<std::initializer_list<T>> rows) {
        MatrixT out(rows.size(), rows.size() ? rows.begin()->size() : 0);
        std::size_t i = 0;
        for (const auto &row : rows) {
            if (row.size() != out.cols_) {
                throw ShapeError("from_rows: ragged initializer");
            }
            std::size_t j = 0;
            for (T v : row) {
                out(i, j++) = v;
            }
            ++i;
        }
        return out;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T &operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<T> &data() { return data_; }
    const std::vector<T> &data() const { return data_; }

    bool same_shape(const MatrixT &o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool operator==(const MatrixT &o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using Matrix = MatrixT<double>;
using Matrix32 = MatrixT<float>;

namespace detail {

inline std::string shape_str(std::size_t r, std::size_t c) {
    return "(" + std::to_string(r) + ", " + std::to_string(c) + ")";
}

} // namespace detail

template <typename T>
MatrixT<T> matmul(const MatrixT<T> &a, const MatrixT<T> &b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ, " +
                         detail::shape_str(a.rows(), a.cols()) + " x " +
                         detail::shape_str(b.rows(), b.cols()));
    }
    MatrixT<T> out(a.rows(), b.cols());
    // i-k-j order: both inner accesses run along contiguous rows.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const T aik = a(i, k);
            if (aik == T{0}) {
                continue;
            }
            const T *brow = &b.data()[k * b.cols()];
            T *orow = &out.data()[i * out.cols()];
            for (std::size_t j = 0; j < b.cols(); ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    return out;
}

template <typename T>
MatrixT<T> transpose(const MatrixT<T> &a) {
    MatrixT<T> out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(j, i) = a(i, j);
        }
    }
    return out;
}

template <typename T>
T frobenius_norm(const MatrixT<T> &a) {
    // Accumulate in double regardless of T; the cast back is exact for the
    // magnitudes this library works at.
    double acc = 0.0;
    for (T v : a.data()) {
        acc += static_cast<double>(v) * static_cast<double>(v);
    }
    return static_cast<T>(std::sqrt(acc));
}

template <typename T>
bool all_finite(const MatrixT<T> &a) {
    return std::all_of(a.data().begin(), a.data().end(),
                       [](T v) { return std::isfinite(v); });
}

template <typename T>
MatrixT<T> operator+(const MatrixT<T> &a, const MatrixT<T> &b) {
    if (!a.same_shape(b)) {
        throw ShapeError("operator+: shape mismatch " + detail::shape_str(a.rows(), a.cols()) +
                         " vs " + detail::shape_str(b.rows(), b.cols()));
    }
    MatrixT<T> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] += b.data()[i];
    }
    return out;
}

template <typename T>
MatrixT<T> operator-(const MatrixT<T> &a, const MatrixT<T> &b) {
    if (!a.same_shape(b)) {
        throw ShapeError("operator-: shape mismatch " + detail::shape_str(a.rows(), a.cols()) +
                         " vs " + detail::shape_str(b.rows(), b.cols()));
    }
    MatrixT<T> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] -= b.data()[i];
    }
    return out;
}

template <typename T>
MatrixT<T> operator*(T s, const MatrixT<T> &a) {
    MatrixT<T> out = a;
    for (T &v : out.data()) {
        v *= s;
    }
    return out;
}

/// Copy of the nrows x ncols submatrix anchored at (row0, col0).
template <typename T>
MatrixT<T> block(const MatrixT<T> &a, std::size_t row0, std::size_t col0,
                 std::size_t nrows, std::size_t ncols) {
    if (row0 + nrows > a.rows() || col0 + ncols > a.cols()) {
        throw ShapeError("block: window " + detail::shape_str(nrows, ncols) + " at (" +
                         std::to_string(row0) + ", " + std::to_string(col0) +
                         ") exceeds matrix " + detail::shape_str(a.rows(), a.cols()));
    }
    MatrixT<T> out(nrows, ncols);
    for (std::size_t i = 0; i < nrows; ++i) {
        for (std::size_t j = 0; j < ncols; ++j) {
            out(i, j) = a(row0 + i, col0 + j);
        }
    }
    return out;
}

template <typename T>
MatrixT<T> hstack(const MatrixT<T> &left, const MatrixT<T> &right) {
    if (left.rows() != right.rows()) {
        throw ShapeError("hstack: row counts differ, " + std::to_string(left.rows()) + " vs " +
                         std::to_string(right.rows()));
    }
    MatrixT<T> out(left.rows(), left.cols() + right.cols());
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < left.cols(); ++j) {
            out(i, j) = left(i, j);
        }
        for (std::size_t j = 0; j < right.cols(); ++j) {
            out(i, left.cols() + j) = right(i, j);
        }
    }
    return out;
}

template <typename T>
MatrixT<T> vstack(const MatrixT<T> &top, const MatrixT<T> &bottom) {
    if (top.cols() != bottom.cols()) {
        throw ShapeError("vstack: column counts differ, " + std::to_string(top.cols()) + " vs " +
                         std::to_string(bottom.cols()));
    }
    MatrixT<T> out(top.rows() + bottom.rows(), top.cols());
    for (std::size_t i = 0; i < top.rows(); ++i) {
        for (std::size_t j = 0; j < top.cols(); ++j) {
            out(i, j) = top(i, j);
        }
    }
    for (std::size_t i = 0; i < bottom.rows(); ++i) {
        for (std::size_t j = 0; j < bottom.cols(); ++j) {
            out(top.rows() + i, j) = bottom(i, j);
        }
    }
    return out;
}

template <typename T>
T max_abs_diff(const MatrixT<T> &a, const MatrixT<T> &b) {
    if (!a.same_shape(b)) {
        throw ShapeError("max_abs_diff: shape mismatch");
    }
    T worst = T{0};
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    }
    return worst;
}

template <typename To, typename From>
MatrixT<To> matrix_cast(const MatrixT<From> &a) {
    MatrixT<To> out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.data()[i] = static_cast<To>(a.data()[i]);
    }
    return out;
}

} // namespace nlra
