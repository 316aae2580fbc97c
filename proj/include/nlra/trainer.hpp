#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "nlra/adapters.hpp"
#include "nlra/errors.hpp"
#include "nlra/matrix.hpp"
#include "nlra/matrix_io.hpp"
#include "nlra/rng.hpp"

namespace nlra {

enum class OptimizerKind { adamw, rmsprop };

inline const char *to_string(OptimizerKind o) {
    return o == OptimizerKind::adamw ? "adamw" : "rmsprop";
}

struct TrainConfig {
    OptimizerKind optimizer = OptimizerKind::adamw;
    double learning_rate = 2e-4;
    std::size_t batch_size = 4;
    double warmup_ratio = 0.03;
    std::size_t total_steps = 1000;
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
    Precision precision = Precision::f64;
    // Optimizer constants; the reference runs never vary these.
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double rho = 0.99;
    double rms_eps = 1e-8;
    std::size_t log_interval = 10;
};

/// Linear ramp 0 -> peak over ceil(warmup_ratio * total) steps, then cosine
/// decay to 0 at total_steps.
inline double lr_schedule(std::size_t step, std::size_t total_steps, double warmup_ratio,
                          double peak_lr) {
    if (total_steps == 0 || step > total_steps) {
        throw ConfigError("lr_schedule: step " + std::to_string(step) + " outside [0, " +
                          std::to_string(total_steps) + "]");
    }
    const auto warmup_steps =
        static_cast<std::size_t>(std::ceil(warmup_ratio * static_cast<double>(total_steps)));
    if (step < warmup_steps) {
        return peak_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
    }
    if (total_steps == warmup_steps) {
        return peak_lr;
    }
    const double progress = static_cast<double>(step - warmup_steps) /
                            static_cast<double>(total_steps - warmup_steps);
    return peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

struct MetricRow {
    std::size_t step = 0;
    double loss = 0.0;
    double lr = 0.0;
    double wall_ms = 0.0;
};

/// First/second moment buffers for one trainable matrix. RMSProp uses only
/// the second moment; the first stays empty.
template <typename T>
struct OptimSlot {
    MatrixT<T> m1;
    MatrixT<T> m2;
};

/// Optimizer state plus the metric history of a run. Slots exist only for
/// matrices the freeze mask leaves trainable.
template <typename T>
struct TrainStateT {
    OptimizerKind optimizer = OptimizerKind::adamw;
    std::size_t step = 0;
    std::map<std::string, OptimSlot<T>> slots;
    std::vector<MetricRow> log;
    bool diverged = false;
};

using TrainState = TrainStateT<double>;

template <typename T>
void register_adapter(TrainStateT<T> &state, const AdapterT<T> &ad,
                      const std::string &prefix = "") {
    if (!ad.frozen.a) {
        state.slots.emplace(prefix + "a", OptimSlot<T>{});
    }
    if (ad.has_intermediate() && !ad.frozen.n) {
        state.slots.emplace(prefix + "n", OptimSlot<T>{});
    }
    if (!ad.frozen.b) {
        state.slots.emplace(prefix + "b", OptimSlot<T>{});
    }
}

template <typename T>
TrainStateT<T> make_train_state(const AdapterT<T> &ad, OptimizerKind optimizer) {
    TrainStateT<T> state;
    state.optimizer = optimizer;
    register_adapter(state, ad);
    return state;
}

namespace detail {

template <typename T>
void check_grad_finite(const MatrixT<T> &grad, const std::string &name) {
    if (!all_finite(grad)) {
        throw NumericError("optimizer: non-finite gradient for matrix '" + name + "'");
    }
}

/// Decoupled-weight-decay Adam on one matrix. t is the 1-based step used
/// for bias correction.
template <typename T>
void adamw_update(MatrixT<T> &param, OptimSlot<T> &slot, const MatrixT<T> &grad, std::size_t t,
                  double lr, const TrainConfig &cfg, const std::string &name) {
    check_grad_finite(grad, name);
    if (slot.m1.empty()) {
        slot.m1 = MatrixT<T>(param.rows(), param.cols(), T{0});
        slot.m2 = MatrixT<T>(param.rows(), param.cols(), T{0});
    }
    const T b1 = static_cast<T>(cfg.beta1);
    const T b2 = static_cast<T>(cfg.beta2);
    const T corr1 = static_cast<T>(1.0 - std::pow(cfg.beta1, static_cast<double>(t)));
    const T corr2 = static_cast<T>(1.0 - std::pow(cfg.beta2, static_cast<double>(t)));
    const T step_lr = static_cast<T>(lr);
    const T eps = static_cast<T>(cfg.adam_eps);
    const T wd = static_cast<T>(cfg.weight_decay);
    for (std::size_t i = 0; i < param.size(); ++i) {
        const T g = grad.data()[i];
        T &m = slot.m1.data()[i];
        T &v = slot.m2.data()[i];
        m = b1 * m + (T{1} - b1) * g;
        v = b2 * v + (T{1} - b2) * g * g;
        const T m_hat = m / corr1;
        const T v_hat = v / corr2;
        T &p = param.data()[i];
        p -= step_lr * (m_hat / (std::sqrt(v_hat) + eps) + wd * p);
    }
}

/// Running-mean-square update on one matrix.
template <typename T>
void rmsprop_update(MatrixT<T> &param, OptimSlot<T> &slot, const MatrixT<T> &grad, double lr,
                    const TrainConfig &cfg, const std::string &name) {
    check_grad_finite(grad, name);
    if (slot.m2.empty()) {
        slot.m2 = MatrixT<T>(param.rows(), param.cols(), T{0});
    }
    const T rho = static_cast<T>(cfg.rho);
    const T eps = static_cast<T>(cfg.rms_eps);
    const T step_lr = static_cast<T>(lr);
    for (std::size_t i = 0; i < param.size(); ++i) {
        const T g = grad.data()[i];
        T &v = slot.m2.data()[i];
        v = rho * v + (T{1} - rho) * g * g;
        param.data()[i] -= step_lr * g / (std::sqrt(v) + eps);
    }
}

} // namespace detail

/// One AdamW step over an adapter's trainable factors. Frozen factors and
/// the base matrix are untouched; the caller advances state.step once per
/// training step after all adapters are updated.
template <typename T>
void adamw_step(TrainStateT<T> &state, AdapterT<T> &ad, const AdapterGradsT<T> &grads, double lr,
                const TrainConfig &cfg, const std::string &prefix = "") {
    if (state.optimizer != OptimizerKind::adamw) {
        throw ConfigError("adamw_step: state was created for " + std::string(to_string(state.optimizer)) +
                          "; switching optimizers mid-run is not supported");
    }
    const std::size_t t = state.step + 1;
    if (!ad.frozen.a) {
        detail::adamw_update(ad.a, state.slots.at(prefix + "a"), grads.a, t, lr, cfg, prefix + "a");
    }
    if (ad.has_intermediate() && !ad.frozen.n) {
        detail::adamw_update(ad.n, state.slots.at(prefix + "n"), grads.n, t, lr, cfg, prefix + "n");
    }
    if (!ad.frozen.b) {
        detail::adamw_update(ad.b, state.slots.at(prefix + "b"), grads.b, t, lr, cfg, prefix + "b");
    }
}

template <typename T>
void rmsprop_step(TrainStateT<T> &state, AdapterT<T> &ad, const AdapterGradsT<T> &grads, double lr,
                  const TrainConfig &cfg, const std::string &prefix = "") {
    if (state.optimizer != OptimizerKind::rmsprop) {
        throw ConfigError("rmsprop_step: state was created for " + std::string(to_string(state.optimizer)) +
                          "; switching optimizers mid-run is not supported");
    }
    if (!ad.frozen.a) {
        detail::rmsprop_update(ad.a, state.slots.at(prefix + "a"), grads.a, lr, cfg, prefix + "a");
    }
    if (ad.has_intermediate() && !ad.frozen.n) {
        detail::rmsprop_update(ad.n, state.slots.at(prefix + "n"), grads.n, lr, cfg, prefix + "n");
    }
    if (!ad.frozen.b) {
        detail::rmsprop_update(ad.b, state.slots.at(prefix + "b"), grads.b, lr, cfg, prefix + "b");
    }
}

template <typename T>
void optimizer_step(TrainStateT<T> &state, AdapterT<T> &ad, const AdapterGradsT<T> &grads,
                    double lr, const TrainConfig &cfg, const std::string &prefix = "") {
    if (cfg.optimizer == OptimizerKind::adamw) {
        adamw_step(state, ad, grads, lr, cfg, prefix);
    } else {
        rmsprop_step(state, ad, grads, lr, cfg, prefix);
    }
}

// ============================================================================
// Synthetic tasks
// ============================================================================

enum class TaskKind { matrix_recovery, student_mlp };

inline const char *to_string(TaskKind k) {
    return k == TaskKind::matrix_recovery ? "matrix_recovery" : "student_mlp";
}

/// Desk-scale stand-ins for fine-tuning runs. matrix_recovery trains the
/// adapter to absorb a random rank-k shift of its own base weight;
/// student_mlp matches a frozen two-layer teacher through adapters on both
/// layers. Base entries are Gaussian with std 1/sqrt(m); the perturbation
/// is perturb_scale * P Q / sqrt(k) so its entries share that order of
/// magnitude regardless of k.
struct TaskConfig {
    TaskKind kind = TaskKind::matrix_recovery;
    std::size_t m = 64;
    std::size_t n = 64;
    std::size_t perturb_rank = 8; // k
    double perturb_scale = 0.02;
    std::size_t hidden = 32; // student_mlp only
};

inline constexpr double kDivergenceThreshold = 1e6;

template <typename T>
struct RunResultT {
    TrainStateT<T> state;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<AdapterT<T>> adapters;
};

namespace detail {

template <typename T>
AdapterT<T> init_adapter_for_task(const MatrixT<T> &base, const AdapterConfig &config,
                                  std::uint64_t seed) {
    switch (config.variant) {
    case Variant::lora:
        return init_lora(base, config, seed);
    case Variant::slora:
        return init_slora(base, config, seed);
    default:
        return init_nlora(base, config);
    }
}

template <typename T>
double half_sq_frobenius(const MatrixT<T> &r) {
    double acc = 0.0;
    for (T v : r.data()) {
        acc += static_cast<double>(v) * static_cast<double>(v);
    }
    return 0.5 * acc;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

template <typename T>
MatrixT<T> tanh_map(const MatrixT<T> &x) {
    MatrixT<T> out = x;
    for (T &v : out.data()) {
        v = std::tanh(v);
    }
    return out;
}

} // namespace detail

/// Runs one seeded, single-threaded training task. The metric log records
/// the loss on a fixed evaluation batch (drawn once per run), so with
/// learning rate zero the logged loss is constant; the per-step training
/// batches only drive gradients and the divergence guard. Logged rows carry
/// step, eval loss, the lr used at that step, and wall-clock ms; everything
/// except wall_ms is reproducible bit-for-bit from the seed.
template <typename T>
RunResultT<T> run_task(const TaskConfig &task, const AdapterConfig &adapter_config,
                       const TrainConfig &train) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng batch_rng = Rng::stream(train.seed, "task.batch");

    RunResultT<T> result;
    result.state.optimizer = train.optimizer;

    // Task setup: bases, targets, adapters.
    const T base_std = static_cast<T>(1.0 / std::sqrt(static_cast<double>(task.m)));
    MatrixT<T> eval_x(train.batch_size, task.m);
    Rng::stream(train.seed, "task.eval").fill_gaussian(eval_x, T{0}, T{1});

    MatrixT<T> target;                    // matrix_recovery
    MatrixT<T> teacher_h1, teacher_h2;    // student_mlp
    if (task.kind == TaskKind::matrix_recovery) {
        MatrixT<T> base(task.m, task.n);
        Rng::stream(train.seed, "task.base").fill_gaussian(base, T{0}, base_std);

        MatrixT<T> p(task.m, task.perturb_rank);
        MatrixT<T> q(task.perturb_rank, task.n);
        Rng perturb_rng = Rng::stream(train.seed, "task.perturb");
        perturb_rng.fill_gaussian(p, T{0}, T{1});
        perturb_rng.fill_gaussian(q, T{0}, T{1});
        const T shift_scale = static_cast<T>(
            task.perturb_scale / std::sqrt(static_cast<double>(task.perturb_rank)));
        target = base + shift_scale * matmul(p, q);

        result.adapters.push_back(detail::init_adapter_for_task(base, adapter_config, train.seed));
        register_adapter(result.state, result.adapters[0]);
    } else {
        MatrixT<T> w1(task.m, task.hidden);
        MatrixT<T> w2(task.hidden, task.n);
        Rng::stream(train.seed, "task.w1").fill_gaussian(w1, T{0}, base_std);
        Rng::stream(train.seed, "task.w2")
            .fill_gaussian(w2, T{0}, static_cast<T>(1.0 / std::sqrt(static_cast<double>(task.hidden))));
        teacher_h1 = MatrixT<T>(task.m, task.hidden);
        teacher_h2 = MatrixT<T>(task.hidden, task.n);
        Rng::stream(train.seed, "task.t1").fill_gaussian(teacher_h1, T{0}, base_std);
        Rng::stream(train.seed, "task.t2")
            .fill_gaussian(teacher_h2, T{0},
                           static_cast<T>(1.0 / std::sqrt(static_cast<double>(task.hidden))));

        result.adapters.push_back(detail::init_adapter_for_task(w1, adapter_config, train.seed));
        result.adapters.push_back(
            detail::init_adapter_for_task(w2, adapter_config, train.seed + 1));
        register_adapter(result.state, result.adapters[0], "layer1.");
        register_adapter(result.state, result.adapters[1], "layer2.");
    }

    Rng dropout_rng = Rng::stream(train.seed, "task.dropout");

    auto eval_loss = [&]() -> double {
        if (task.kind == TaskKind::matrix_recovery) {
            const MatrixT<T> y = forward(result.adapters[0], eval_x);
            return detail::half_sq_frobenius(y - matmul(eval_x, target));
        }
        const MatrixT<T> h = detail::tanh_map(forward(result.adapters[0], eval_x));
        const MatrixT<T> y = forward(result.adapters[1], h);
        const MatrixT<T> yt = matmul(detail::tanh_map(matmul(eval_x, teacher_h1)), teacher_h2);
        return detail::half_sq_frobenius(y - yt);
    };

    result.initial_loss = eval_loss();

    for (std::size_t step = 0; step < train.total_steps; ++step) {
        const double lr =
            lr_schedule(step, train.total_steps, train.warmup_ratio, train.learning_rate);
        if (step % train.log_interval == 0) {
            result.state.log.push_back(MetricRow{step, eval_loss(), lr, detail::elapsed_ms(t0)});
        }

        MatrixT<T> x(train.batch_size, task.m);
        batch_rng.fill_gaussian(x, T{0}, T{1});

        double train_loss = 0.0;
        if (task.kind == TaskKind::matrix_recovery) {
            AdapterT<T> &ad = result.adapters[0];
            const MatrixT<T> x_adapter =
                adapter_config.dropout > 0.0
                    ? apply_dropout(x, adapter_config.dropout, dropout_rng)
                    : x;
            // Forward with the (possibly dropped) adapter branch input.
            MatrixT<T> y = matmul(x, ad.base);
            MatrixT<T> low = matmul(x_adapter, ad.a);
            if (ad.has_intermediate()) {
                low = matmul(low, ad.n);
            }
            y = y + ad.scaling() * matmul(low, ad.b);

            const MatrixT<T> residual = y - matmul(x, target);
            train_loss = detail::half_sq_frobenius(residual);
            if (!std::isfinite(train_loss) || train_loss > kDivergenceThreshold) {
                result.state.diverged = true;
                break;
            }
            const AdapterGradsT<T> grads = backward(ad, x_adapter, residual);
            optimizer_step(result.state, ad, grads, lr, train);
        } else {
            AdapterT<T> &ad1 = result.adapters[0];
            AdapterT<T> &ad2 = result.adapters[1];
            const MatrixT<T> h_pre = forward(ad1, x);
            const MatrixT<T> h = detail::tanh_map(h_pre);
            const MatrixT<T> y = forward(ad2, h);
            const MatrixT<T> yt =
                matmul(detail::tanh_map(matmul(x, teacher_h1)), teacher_h2);
            const MatrixT<T> residual = y - yt;
            train_loss = detail::half_sq_frobenius(residual);
            if (!std::isfinite(train_loss) || train_loss > kDivergenceThreshold) {
                result.state.diverged = true;
                break;
            }
            const AdapterGradsT<T> g2 = backward(ad2, h, residual);
            // dL/dh through the merged layer-2 weight, then the tanh.
            MatrixT<T> gh = matmul(residual, transpose(merge(ad2)));
            for (std::size_t i = 0; i < gh.size(); ++i) {
                const T hv = h.data()[i];
                gh.data()[i] *= (T{1} - hv * hv);
            }
            const AdapterGradsT<T> g1 = backward(ad1, x, gh);
            optimizer_step(result.state, ad2, g2, lr, train, "layer2.");
            optimizer_step(result.state, ad1, g1, lr, train, "layer1.");
        }
        result.state.step += 1;
    }

    result.final_loss = eval_loss();
    result.state.log.push_back(MetricRow{result.state.step, result.final_loss,
                                         lr_schedule(result.state.step, train.total_steps,
                                                     train.warmup_ratio, train.learning_rate),
                                         detail::elapsed_ms(t0)});
    return result;
}

/// CSV rendering of a metric log: header step,loss,lr,wall_ms. Loss and lr
/// print with 17 significant digits so equal values compare equal as text.
std::string metric_csv(const std::vector<MetricRow> &log, bool include_wall = true);

/// Writes metric_csv(log) to path.
void write_metric_csv(const std::string &path, const std::vector<MetricRow> &log);

} // namespace nlra
