#pragma once

#include <cstdint>
#include <string>

#include "nlra/errors.hpp"
#include "nlra/matrix.hpp"
#include "nlra/nystrom.hpp"
#include "nlra/rng.hpp"
#include "nlra/svd.hpp"

namespace nlra {

enum class Variant { lora, slora, nlora };
enum class NInit { kaiming, gaussian };
enum class TrainMask { all, intermediate_only };

inline const char *to_string(Variant v) {
    switch (v) {
    case Variant::lora:
        return "lora";
    case Variant::slora:
        return "slora";
    default:
        return "nlora";
    }
}

inline const char *to_string(TrainMask m) {
    return m == TrainMask::all ? "all" : "intermediate_only";
}

struct AdapterConfig {
    std::size_t rank = 8;
    double alpha = 8.0; // scaling numerator; the reference setting keeps alpha == rank
    double dropout = 0.0;
    Variant variant = Variant::lora;
    NInit n_init = NInit::kaiming;      // slora only
    CoreKind nlora_core = CoreKind::raw_sample;
    bool subtract_at_init = true;       // nlora: replace base by base - delta at init
    TrainMask train_mask = TrainMask::all;

    double scaling() const { return alpha / static_cast<double>(rank); }
};

/// Which of the three factors are excluded from optimizer updates. The base
/// matrix is always frozen.
struct FreezeMask {
    bool a = false;
    bool n = false;
    bool b = false;
};

/// Low-rank adapter over a frozen base weight:
///   delta = s * a * n * b   (slora / nlora; n is r x r)
///   delta = s * a * b       (lora; n is absent)
/// with s = alpha / rank.
template <typename T>
struct AdapterT {
    MatrixT<T> base; // m x n, frozen
    MatrixT<T> a;    // m x r
    MatrixT<T> n;    // r x r; empty for lora
    MatrixT<T> b;    // r x n
    AdapterConfig config;
    FreezeMask frozen;

    std::size_t in_dim() const { return base.rows(); }
    std::size_t out_dim() const { return base.cols(); }
    bool has_intermediate() const { return config.variant != Variant::lora; }
    T scaling() const { return static_cast<T>(config.scaling()); }
};

using Adapter = AdapterT<double>;

namespace detail {

inline constexpr double kLoraGaussianStd = 0.02; // conventional adapter init scale

inline void check_rank(std::size_t rank, std::size_t m, std::size_t n) {
    if (rank == 0 || rank >= std::min(m, n)) {
        throw ShapeError("adapter init: rank " + std::to_string(rank) +
                         " out of range for base " + shape_str(m, n));
    }
}

inline FreezeMask freeze_mask_for(const AdapterConfig &config) {
    if (config.train_mask == TrainMask::intermediate_only) {
        if (config.variant == Variant::lora) {
            throw ConfigError("train_mask intermediate_only requires a variant with an "
                              "intermediate matrix (slora or nlora)");
        }
        return FreezeMask{true, false, true};
    }
    return FreezeMask{};
}

} // namespace detail

/// A ~ Gaussian(0, 0.02^2), B = 0: the adapted forward equals the base
/// forward exactly at initialization.
template <typename T>
AdapterT<T> init_lora(const MatrixT<T> &base, const AdapterConfig &config, std::uint64_t seed) {
    if (config.variant != Variant::lora) {
        throw ConfigError("init_lora: config.variant is not lora");
    }
    detail::check_rank(config.rank, base.rows(), base.cols());
    AdapterT<T> ad;
    ad.base = base;
    ad.config = config;
    ad.frozen = detail::freeze_mask_for(config);
    ad.a = MatrixT<T>(base.rows(), config.rank);
    Rng::stream(seed, "adapter.a").fill_gaussian(ad.a, T{0}, static_cast<T>(detail::kLoraGaussianStd));
    ad.b = MatrixT<T>(config.rank, base.cols(), T{0});
    return ad;
}

/// LoRA factors plus an r x r intermediate: Kaiming-uniform in
/// [-sqrt(1/r), sqrt(1/r)] (fan-in r) or Gaussian(0, 0.02^2) per n_init.
/// B stays zero, so the initial forward is unchanged.
template <typename T>
AdapterT<T> init_slora(const MatrixT<T> &base, const AdapterConfig &config, std::uint64_t seed) {
    if (config.variant != Variant::slora) {
        throw ConfigError("init_slora: config.variant is not slora");
    }
    detail::check_rank(config.rank, base.rows(), base.cols());
    AdapterT<T> ad;
    ad.base = base;
    ad.config = config;
    ad.frozen = detail::freeze_mask_for(config);
    ad.a = MatrixT<T>(base.rows(), config.rank);
    Rng::stream(seed, "adapter.a").fill_gaussian(ad.a, T{0}, static_cast<T>(detail::kLoraGaussianStd));
    ad.n = MatrixT<T>(config.rank, config.rank);
    Rng n_rng = Rng::stream(seed, "adapter.n");
    if (config.n_init == NInit::kaiming) {
        const T bound = static_cast<T>(std::sqrt(1.0 / static_cast<double>(config.rank)));
        n_rng.fill_uniform(ad.n, -bound, bound);
    } else {
        n_rng.fill_gaussian(ad.n, T{0}, static_cast<T>(detail::kLoraGaussianStd));
    }
    ad.b = MatrixT<T>(config.rank, base.cols(), T{0});
    return ad;
}

/// Factors taken from the leading-block partition of the base:
///   a = [a_w; f_w]   (the sampled columns)
///   n = a_w, or a_w+ under the pseudoinverse core
///   b = [a_w  b_w]   (the sampled rows)
/// With subtract_at_init the stored base becomes base - s*a*n*b, so the
/// initial forward output equals the original base forward.
template <typename T>
AdapterT<T> init_nlora(const MatrixT<T> &base, const AdapterConfig &config) {
    if (config.variant != Variant::nlora) {
        throw ConfigError("init_nlora: config.variant is not nlora");
    }
    detail::check_rank(config.rank, base.rows(), base.cols());
    MatrixBlocksT<T> blocks = partition(base, config.rank);

    AdapterT<T> ad;
    ad.config = config;
    ad.frozen = detail::freeze_mask_for(config);
    ad.a = vstack(blocks.a_w, blocks.f_w);
    ad.b = hstack(blocks.a_w, blocks.b_w);
    if (config.nlora_core == CoreKind::pseudoinverse) {
        SvdResultT<T> core = svd_square(blocks.a_w);
        const T floor = T(1e-12) * core.sigma.front();
        for (std::size_t i = 0; i < core.sigma.size(); ++i) {
            if (core.sigma[i] <= floor) {
                throw DegenerateSampleError(
                    "init_nlora: singular value " + std::to_string(i + 1) +
                        " of the sample block is degenerate under the pseudoinverse core",
                    i + 1);
            }
        }
        ad.n = pseudoinverse(blocks.a_w);
    } else {
        ad.n = blocks.a_w;
    }
    if (config.subtract_at_init) {
        const T s = ad.scaling();
        ad.base = base - s * matmul(matmul(ad.a, ad.n), ad.b);
    } else {
        ad.base = base;
    }
    return ad;
}

/// Training-time input dropout for the adapter branch, applied to x before
/// the projection onto a. Inverted scaling keeps the expectation unchanged;
/// evaluation uses x as-is (the reference setting fixes dropout at 0).
template <typename T>
MatrixT<T> apply_dropout(const MatrixT<T> &x, double p, Rng &rng) {
    if (p <= 0.0) {
        return x;
    }
    if (p >= 1.0) {
        throw ConfigError("apply_dropout: p must be in [0, 1)");
    }
    MatrixT<T> out = x;
    const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
    for (T &v : out.data()) {
        v = (rng.uniform() < p) ? T{0} : v * keep_scale;
    }
    return out;
}

/// Y = X base + s ((X a) n) b, associated left-to-right so no m x n
/// intermediate is ever formed.
template <typename T>
MatrixT<T> forward(const AdapterT<T> &ad, const MatrixT<T> &x) {
    if (x.cols() != ad.in_dim()) {
        throw ShapeError("forward: input has " + std::to_string(x.cols()) +
                         " columns, base expects " + std::to_string(ad.in_dim()));
    }
    MatrixT<T> y = matmul(x, ad.base);
    MatrixT<T> low = matmul(x, ad.a);
    if (ad.has_intermediate()) {
        low = matmul(low, ad.n);
    }
    return y + ad.scaling() * matmul(low, ad.b);
}

template <typename T>
struct AdapterGradsT {
    MatrixT<T> a; // m x r
    MatrixT<T> n; // r x r; empty for lora
    MatrixT<T> b; // r x n
};

/// Analytic gradients of the adapter factors for upstream gradient g = dL/dY:
///   grad_b = s (x a n)^T g
///   grad_n = s (x a)^T g b^T
///   grad_a = s x^T g (n b)^T
/// Frozen factors come back as exact zeros.
template <typename T>
AdapterGradsT<T> backward(const AdapterT<T> &ad, const MatrixT<T> &x, const MatrixT<T> &grad_y) {
    if (x.cols() != ad.in_dim()) {
        throw ShapeError("backward: input has " + std::to_string(x.cols()) +
                         " columns, base expects " + std::to_string(ad.in_dim()));
    }
    if (grad_y.rows() != x.rows() || grad_y.cols() != ad.out_dim()) {
        throw ShapeError("backward: grad_y is " + detail::shape_str(grad_y.rows(), grad_y.cols()) +
                         ", expected " + detail::shape_str(x.rows(), ad.out_dim()));
    }
    const T s = ad.scaling();
    const MatrixT<T> xa = matmul(x, ad.a); // b x r
    AdapterGradsT<T> g;
    if (ad.has_intermediate()) {
        const MatrixT<T> xan = matmul(xa, ad.n); // b x r
        g.b = ad.frozen.b ? MatrixT<T>(ad.config.rank, ad.out_dim(), T{0})
                          : s * matmul(transpose(xan), grad_y);
        g.n = ad.frozen.n ? MatrixT<T>(ad.config.rank, ad.config.rank, T{0})
                          : s * matmul(matmul(transpose(xa), grad_y), transpose(ad.b));
        g.a = ad.frozen.a ? MatrixT<T>(ad.in_dim(), ad.config.rank, T{0})
                          : s * matmul(matmul(transpose(x), grad_y),
                                       transpose(matmul(ad.n, ad.b)));
    } else {
        g.b = ad.frozen.b ? MatrixT<T>(ad.config.rank, ad.out_dim(), T{0})
                          : s * matmul(transpose(xa), grad_y);
        g.a = ad.frozen.a ? MatrixT<T>(ad.in_dim(), ad.config.rank, T{0})
                          : s * matmul(matmul(transpose(x), grad_y), transpose(ad.b));
    }
    return g;
}

/// base + s a n b (or s a b): the zero-overhead deployment form. Forward
/// with the merged matrix equals the adapter forward within precision.
template <typename T>
MatrixT<T> merge(const AdapterT<T> &ad) {
    MatrixT<T> low = ad.has_intermediate() ? matmul(ad.a, ad.n) : ad.a;
    return ad.base + ad.scaling() * matmul(low, ad.b);
}

/// Trainable scalars in one adapter under its freeze mask.
template <typename T>
std::uint64_t trainable_params(const AdapterT<T> &ad) {
    std::uint64_t count = 0;
    if (!ad.frozen.a) {
        count += ad.a.size();
    }
    if (ad.has_intermediate() && !ad.frozen.n) {
        count += ad.n.size();
    }
    if (!ad.frozen.b) {
        count += ad.b.size();
    }
    return count;
}

} // namespace nlra
