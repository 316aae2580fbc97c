#include "nlra/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "nlra/errors.hpp"

namespace nlra {

namespace {

constexpr char kMagic[4] = {'N', 'L', 'R', 'A'};
constexpr std::uint8_t kVersion = 1;

void put_u64_le(std::ostream &out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char *>(b), 8);
}

std::uint64_t get_u64_le(std::istream &in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char *>(b), 8);
    if (!in) {
        throw FormatError("matrix file: truncated header");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    return v;
}

template <typename T, typename Bits>
void write_scalars(std::ostream &out, const std::vector<T> &data) {
    static_assert(sizeof(T) == sizeof(Bits));
    std::vector<unsigned char> buf(data.size() * sizeof(T));
    for (std::size_t k = 0; k < data.size(); ++k) {
        Bits bits;
        std::memcpy(&bits, &data[k], sizeof(T));
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            buf[k * sizeof(T) + i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
        }
    }
    out.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

template <typename T, typename Bits>
void read_scalars(std::istream &in, std::vector<T> &data) {
    static_assert(sizeof(T) == sizeof(Bits));
    std::vector<unsigned char> buf(data.size() * sizeof(T));
    in.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) {
        throw FormatError("matrix file: truncated payload");
    }
    for (std::size_t k = 0; k < data.size(); ++k) {
        Bits bits = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            bits |= static_cast<Bits>(buf[k * sizeof(T) + i]) << (8 * i);
        }
        std::memcpy(&data[k], &bits, sizeof(T));
    }
}

template <typename T>
void save_impl(std::ostream &out, const MatrixT<T> &m) {
    out.write(kMagic, 4);
    const std::uint8_t ver = kVersion;
    const std::uint8_t prec = sizeof(T);
    out.write(reinterpret_cast<const char *>(&ver), 1);
    out.write(reinterpret_cast<const char *>(&prec), 1);
    put_u64_le(out, m.rows());
    put_u64_le(out, m.cols());
    if constexpr (sizeof(T) == 4) {
        write_scalars<T, std::uint32_t>(out, m.data());
    } else {
        write_scalars<T, std::uint64_t>(out, m.data());
    }
    if (!out) {
        throw FormatError("matrix file: write failed");
    }
}

std::ofstream open_out(const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot open '" + path + "' for writing");
    }
    return out;
}

} // namespace

void save_matrix(std::ostream &out, const MatrixT<float> &m) { save_impl(out, m); }
void save_matrix(std::ostream &out, const MatrixT<double> &m) { save_impl(out, m); }

void save_matrix(const std::string &path, const MatrixT<float> &m) {
    auto out = open_out(path);
    save_impl(out, m);
}

void save_matrix(const std::string &path, const MatrixT<double> &m) {
    auto out = open_out(path);
    save_impl(out, m);
}

AnyMatrix load_matrix(std::istream &in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("matrix file: bad magic, expected \"NLRA\"");
    }
    std::uint8_t ver = 0;
    std::uint8_t prec = 0;
    in.read(reinterpret_cast<char *>(&ver), 1);
    in.read(reinterpret_cast<char *>(&prec), 1);
    if (!in) {
        throw FormatError("matrix file: truncated header");
    }
    if (ver != kVersion) {
        throw FormatError("matrix file: unsupported version " + std::to_string(ver));
    }
    if (prec != 4 && prec != 8) {
        throw FormatError("matrix file: precision code must be 4 or 8, got " +
                          std::to_string(prec));
    }
    const std::uint64_t rows = get_u64_le(in);
    const std::uint64_t cols = get_u64_le(in);
    if (rows == 0 || cols == 0) {
        throw FormatError("matrix file: zero dimension");
    }
    if (prec == 4) {
        MatrixT<float> m(rows, cols);
        read_scalars<float, std::uint32_t>(in, m.data());
        return m;
    }
    MatrixT<double> m(rows, cols);
    read_scalars<double, std::uint64_t>(in, m.data());
    return m;
}

AnyMatrix load_matrix(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open '" + path + "' for reading");
    }
    return load_matrix(in);
}

} // namespace nlra
