#include "nlra/bench.hpp"

#include <algorithm>
#include <chrono>
#include <vector>

#include "nlra/adapters.hpp"
#include "nlra/errors.hpp"
#include "nlra/nystrom.hpp"
#include "nlra/rng.hpp"
#include "nlra/svd.hpp"

namespace nlra {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    const std::size_t k = samples.size();
    return k % 2 ? samples[k / 2] : 0.5 * (samples[k / 2 - 1] + samples[k / 2]);
}

template <typename F>
double timed_ms(F &&body) {
    const auto t0 = Clock::now();
    body();
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// The factors of each strategy are accumulated into a sink so the work
// cannot be optimized away.
template <typename T>
void consume(double &sink, const MatrixT<T> &m) {
    sink += static_cast<double>(m.data().front()) + static_cast<double>(m.data().back());
}

template <typename T>
BenchResult run(const BenchConfig &config) {
    if (config.rank == 0 || config.rank >= std::min(config.m, config.n) || config.reps == 0) {
        throw ConfigError("bench: need 0 < rank < min(m, n) and reps >= 1");
    }
    MatrixT<T> base(config.m, config.n);
    Rng::stream(config.seed, "bench.base").fill_gaussian(base, T{0}, T{1});
    const std::size_t r = config.rank;

    std::vector<double> lora_ms, nlora_raw_ms, nlora_pinv_ms, svd_ms;
    double sink = 0.0;
    for (std::size_t rep = 0; rep < config.reps; ++rep) {
        lora_ms.push_back(timed_ms([&] {
            MatrixT<T> a(config.m, r);
            Rng::stream(config.seed + rep, "bench.lora").fill_gaussian(a, T{0}, T{0.02});
            MatrixT<T> b(r, config.n, T{0});
            consume(sink, a);
            consume(sink, b);
        }));

        nlora_raw_ms.push_back(timed_ms([&] {
            MatrixBlocksT<T> blocks = partition(base, r);
            MatrixT<T> a = vstack(blocks.a_w, blocks.f_w);
            MatrixT<T> n = blocks.a_w;
            MatrixT<T> b = hstack(blocks.a_w, blocks.b_w);
            consume(sink, a);
            consume(sink, n);
            consume(sink, b);
        }));

        nlora_pinv_ms.push_back(timed_ms([&] {
            MatrixBlocksT<T> blocks = partition(base, r);
            MatrixT<T> a = vstack(blocks.a_w, blocks.f_w);
            MatrixT<T> n = pseudoinverse(blocks.a_w);
            MatrixT<T> b = hstack(blocks.a_w, blocks.b_w);
            consume(sink, a);
            consume(sink, n);
            consume(sink, b);
        }));

        svd_ms.push_back(timed_ms([&] {
            SvdResultT<T> full = svd(base);
            // Truncate to the leading r singular triplets, split the scale
            // across the two factors.
            MatrixT<T> a(config.m, r);
            MatrixT<T> b(r, config.n);
            for (std::size_t j = 0; j < r; ++j) {
                const T root = std::sqrt(full.sigma[j]);
                for (std::size_t i = 0; i < config.m; ++i) {
                    a(i, j) = full.u(i, j) * root;
                }
                for (std::size_t i = 0; i < config.n; ++i) {
                    b(j, i) = full.v(i, j) * root;
                }
            }
            consume(sink, a);
            consume(sink, b);
        }));
    }

    static volatile double observable;
    observable = sink;

    BenchResult result;
    result.config = config;
    result.lora_ms = median(std::move(lora_ms));
    result.nlora_raw_ms = median(std::move(nlora_raw_ms));
    result.nlora_pinv_ms = median(std::move(nlora_pinv_ms));
    result.svd_full_ms = median(std::move(svd_ms));
    return result;
}

} // namespace

BenchResult bench_init_times(const BenchConfig &config) {
    return config.precision == Precision::f32 ? run<float>(config) : run<double>(config);
}

} // namespace nlra
