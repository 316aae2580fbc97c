#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "nlra/matrix.hpp"

namespace nlra {

/// Scalar width selector used across file formats and the trainer.
enum class Precision { f32, f64 };

inline const char *to_string(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

/// Binary matrix format, shared by every tool in this repo:
///   magic "NLRA" | version u8 (=1) | precision u8 (4 or 8)
///   rows u64 LE  | cols u64 LE
///   rows*cols IEEE-754 scalars, little-endian, row-major
/// Round-trips are bit-exact.
using AnyMatrix = std::variant<MatrixT<float>, MatrixT<double>>;

void save_matrix(std::ostream &out, const MatrixT<float> &m);
void save_matrix(std::ostream &out, const MatrixT<double> &m);
void save_matrix(const std::string &path, const MatrixT<float> &m);
void save_matrix(const std::string &path, const MatrixT<double> &m);

AnyMatrix load_matrix(std::istream &in);
AnyMatrix load_matrix(const std::string &path);

inline Precision precision_of(const AnyMatrix &m) {
    return std::holds_alternative<MatrixT<float>>(m) ? Precision::f32 : Precision::f64;
}

/// Loaded matrix converted to the requested scalar type.
template <typename T>
MatrixT<T> as_matrix(const AnyMatrix &m) {
    if (const auto *f = std::get_if<MatrixT<float>>(&m)) {
        return matrix_cast<T>(*f);
    }
    return matrix_cast<T>(std::get<MatrixT<double>>(m));
}

} // namespace nlra
