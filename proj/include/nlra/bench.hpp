#pragma once

#include <cstdint>

#include "nlra/matrix_io.hpp"

namespace nlra {

/// Init-time benchmark over one synthetic base matrix: what does each
/// adapter initialization strategy cost at a given size?
///   lora       seeded Gaussian A, zero B
///   nlora_raw  leading-block partition, intermediate = a_w
///   nlora_pinv leading-block partition, intermediate = a_w+
///   svd_full   full SVD of the base truncated to rank (the cost profile of
///              principal-component initializers, which decompose the whole
///              weight)
struct BenchConfig {
    std::size_t m = 2048;
    std::size_t n = 2048;
    std::size_t rank = 16;
    std::size_t reps = 3;
    std::uint64_t seed = 0;
    Precision precision = Precision::f32;
};

struct BenchResult {
    BenchConfig config;
    // Median wall-clock milliseconds over reps.
    double lora_ms = 0.0;
    double nlora_raw_ms = 0.0;
    double nlora_pinv_ms = 0.0;
    double svd_full_ms = 0.0;
};

BenchResult bench_init_times(const BenchConfig &config);

} // namespace nlra
