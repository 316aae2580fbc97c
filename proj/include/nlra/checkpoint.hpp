#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "nlra/adapters.hpp"
#include "nlra/matrix_io.hpp"

namespace nlra {

/// Adapter checkpoint container:
///   magic "NLRC" | version u8 (=1) | header_len u32 LE | JSON header
///   entry_count u32 LE | entries: name_len u16 LE, name, matrix blob
/// The JSON header carries {variant, rank, alpha, train_mask,
/// subtract_at_init, seed}; each matrix blob is the standard "NLRA" matrix
/// format, so the container round-trips bit-exactly.
void save_checkpoint(const std::string &path, const AdapterT<float> &adapter,
                     std::uint64_t seed);
void save_checkpoint(const std::string &path, const AdapterT<double> &adapter,
                     std::uint64_t seed);

template <typename T>
struct LoadedCheckpoint {
    AdapterT<T> adapter;
    std::uint64_t seed = 0;
};

LoadedCheckpoint<float> load_checkpoint_f32(const std::string &path);
LoadedCheckpoint<double> load_checkpoint_f64(const std::string &path);

/// Precision recorded in the checkpoint's matrices.
Precision checkpoint_precision(const std::string &path);

} // namespace nlra
