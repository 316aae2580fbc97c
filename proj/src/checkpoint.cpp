#include "nlra/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include <json.hpp>

#include "nlra/errors.hpp"

namespace nlra {

namespace {

constexpr char kMagic[4] = {'N', 'L', 'R', 'C'};
constexpr std::uint8_t kVersion = 1;

void put_u32_le(std::ostream &out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char *>(b), 4);
}

std::uint32_t get_u32_le(std::istream &in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char *>(b), 4);
    if (!in) {
        throw FormatError("checkpoint: truncated field");
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    }
    return v;
}

void put_u16_le(std::ostream &out, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff)};
    out.write(reinterpret_cast<const char *>(b), 2);
}

std::uint16_t get_u16_le(std::istream &in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char *>(b), 2);
    if (!in) {
        throw FormatError("checkpoint: truncated field");
    }
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

Variant variant_from_string(const std::string &s) {
    if (s == "lora") {
        return Variant::lora;
    }
    if (s == "slora") {
        return Variant::slora;
    }
    if (s == "nlora") {
        return Variant::nlora;
    }
    throw FormatError("checkpoint: unknown variant '" + s + "'");
}

TrainMask mask_from_string(const std::string &s) {
    if (s == "all") {
        return TrainMask::all;
    }
    if (s == "intermediate_only") {
        return TrainMask::intermediate_only;
    }
    throw FormatError("checkpoint: unknown train_mask '" + s + "'");
}

template <typename T>
void save_impl(const std::string &path, const AdapterT<T> &adapter, std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot open '" + path + "' for writing");
    }
    nlohmann::json header = {
        {"variant", to_string(adapter.config.variant)},
        {"rank", adapter.config.rank},
        {"alpha", adapter.config.alpha},
        {"train_mask", to_string(adapter.config.train_mask)},
        {"subtract_at_init", adapter.config.subtract_at_init},
        {"seed", seed},
    };
    const std::string header_str = header.dump();

    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char *>(&kVersion), 1);
    put_u32_le(out, static_cast<std::uint32_t>(header_str.size()));
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

    std::vector<std::pair<std::string, const MatrixT<T> *>> entries = {
        {"base", &adapter.base}, {"A", &adapter.a}, {"B", &adapter.b}};
    if (adapter.has_intermediate()) {
        entries.insert(entries.begin() + 2, {"N", &adapter.n});
    }
    put_u32_le(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto &[name, matrix] : entries) {
        put_u16_le(out, static_cast<std::uint16_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        save_matrix(out, *matrix);
    }
    if (!out) {
        throw FormatError("checkpoint: write to '" + path + "' failed");
    }
}

struct RawCheckpoint {
    nlohmann::json header;
    std::map<std::string, AnyMatrix> matrices;
};

RawCheckpoint load_raw(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open '" + path + "' for reading");
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("checkpoint: bad magic, expected \"NLRC\"");
    }
    std::uint8_t ver = 0;
    in.read(reinterpret_cast<char *>(&ver), 1);
    if (!in || ver != kVersion) {
        throw FormatError("checkpoint: unsupported version");
    }
    const std::uint32_t header_len = get_u32_le(in);
    std::string header_str(header_len, '\0');
    in.read(header_str.data(), header_len);
    if (!in) {
        throw FormatError("checkpoint: truncated header");
    }
    RawCheckpoint raw;
    raw.header = nlohmann::json::parse(header_str, nullptr, false);
    if (raw.header.is_discarded()) {
        throw FormatError("checkpoint: header is not valid JSON");
    }
    const std::uint32_t count = get_u32_le(in);
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint16_t name_len = get_u16_le(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in) {
            throw FormatError("checkpoint: truncated entry name");
        }
        raw.matrices.emplace(name, load_matrix(in));
    }
    return raw;
}

template <typename T>
LoadedCheckpoint<T> load_impl(const std::string &path) {
    RawCheckpoint raw = load_raw(path);

    LoadedCheckpoint<T> loaded;
    AdapterConfig config;
    config.variant = variant_from_string(raw.header.at("variant").get<std::string>());
    config.rank = raw.header.at("rank").get<std::size_t>();
    config.alpha = raw.header.at("alpha").get<double>();
    config.train_mask = mask_from_string(raw.header.at("train_mask").get<std::string>());
    config.subtract_at_init = raw.header.at("subtract_at_init").get<bool>();
    loaded.seed = raw.header.at("seed").get<std::uint64_t>();

    auto take = [&](const char *name) -> MatrixT<T> {
        auto it = raw.matrices.find(name);
        if (it == raw.matrices.end()) {
            throw FormatError("checkpoint: missing matrix '" + std::string(name) + "'");
        }
        return as_matrix<T>(it->second);
    };
    AdapterT<T> ad;
    ad.config = config;
    ad.base = take("base");
    ad.a = take("A");
    ad.b = take("B");
    if (config.variant != Variant::lora) {
        ad.n = take("N");
    }
    if (config.train_mask == TrainMask::intermediate_only) {
        ad.frozen = FreezeMask{true, false, true};
    }
    loaded.adapter = std::move(ad);
    return loaded;
}

} // namespace

void save_checkpoint(const std::string &path, const AdapterT<float> &adapter,
                     std::uint64_t seed) {
    save_impl(path, adapter, seed);
}

void save_checkpoint(const std::string &path, const AdapterT<double> &adapter,
                     std::uint64_t seed) {
    save_impl(path, adapter, seed);
}

LoadedCheckpoint<float> load_checkpoint_f32(const std::string &path) {
    return load_impl<float>(path);
}

LoadedCheckpoint<double> load_checkpoint_f64(const std::string &path) {
    return load_impl<double>(path);
}

Precision checkpoint_precision(const std::string &path) {
    RawCheckpoint raw = load_raw(path);
    if (raw.matrices.empty()) {
        throw FormatError("checkpoint: no matrices");
    }
    return precision_of(raw.matrices.begin()->second);
}

} // namespace nlra
