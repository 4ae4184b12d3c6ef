#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlsmc/parallel.hpp"
#include "dlsmc/rng.hpp"
#include "dlsmc/stats.hpp"

namespace dlsmc {

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Feedforward network with tanh hidden layers and a linear scalar readout.
// Inputs are standardized with the per-feature mean/scale stored alongside
// the weights, so a trained net is a plain function of raw inputs.
struct Mlp {
    std::vector<int> sizes;        // e.g. {11, 32, 32, 1}
    std::vector<double> params;    // per layer: row-major weights, then biases
    std::vector<double> in_mean;
    std::vector<double> in_scale;

    int input_dim() const { return sizes.front(); }
    int layer_count() const { return static_cast<int>(sizes.size()) - 1; }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (int l = 0; l + 1 < static_cast<int>(sizes.size()); ++l)
            n += static_cast<std::size_t>(sizes[l + 1]) * (sizes[l] + 1);
        return n;
    }

    std::size_t weight_offset(int layer) const {
        std::size_t off = 0;
        for (int l = 0; l < layer; ++l)
            off += static_cast<std::size_t>(sizes[l + 1]) * (sizes[l] + 1);
        return off;
    }
    std::size_t bias_offset(int layer) const {
        return weight_offset(layer) +
               static_cast<std::size_t>(sizes[layer + 1]) * sizes[layer];
    }

    // Reusable buffers so hot-path evaluations never allocate.
    struct Scratch {
        std::vector<double> activations;  // concatenated per layer
        std::vector<double> delta;
        std::vector<std::size_t> layer_off;
    };

    Scratch make_scratch() const {
        Scratch s;
        std::size_t total = 0;
        s.layer_off.resize(sizes.size());
        for (std::size_t l = 0; l < sizes.size(); ++l) {
            s.layer_off[l] = total;
            total += sizes[l];
        }
        s.activations.resize(total);
        s.delta.resize(total);
        return s;
    }

    static Mlp make(std::vector<int> layer_sizes, std::uint64_t seed) {
        Mlp net;
        net.sizes = std::move(layer_sizes);
        if (net.sizes.size() < 2 || net.sizes.back() != 1)
            throw std::invalid_argument("Mlp: need at least input and a scalar output layer");
        net.params.assign(net.param_count(), 0.0);
        net.in_mean.assign(net.sizes.front(), 0.0);
        net.in_scale.assign(net.sizes.front(), 1.0);
        Rng gen(seed);
        for (int l = 0; l + 1 < static_cast<int>(net.sizes.size()); ++l) {
            double bound = std::sqrt(1.0 / net.sizes[l]);  // fan-in scaled uniform
            std::uniform_real_distribution<double> u(-bound, bound);
            std::size_t w = net.weight_offset(l);
            std::size_t count = static_cast<std::size_t>(net.sizes[l + 1]) * net.sizes[l];
            for (std::size_t i = 0; i < count; ++i) net.params[w + i] = u(gen);
        }
        return net;
    }

    // Forward pass; leaves activations in the scratch for a later backward.
    double eval(std::span<const double> x, Scratch& s) const {
        double* act = s.activations.data();
        for (int j = 0; j < sizes[0]; ++j)
            act[j] = (x[j] - in_mean[j]) / in_scale[j];
        for (int l = 0; l + 1 < static_cast<int>(sizes.size()); ++l) {
            const int in = sizes[l], out = sizes[l + 1];
            const double* w = params.data() + weight_offset(l);
            const double* b = params.data() + bias_offset(l);
            const double* a = act + s.layer_off[l];
            double* o = act + s.layer_off[l + 1];
            const bool hidden = l + 2 < static_cast<int>(sizes.size());
            for (int i = 0; i < out; ++i) {
                const double* wi = w + static_cast<std::size_t>(i) * in;
                double acc = b[i];
                for (int j = 0; j < in; ++j) acc += wi[j] * a[j];
                o[i] = hidden ? std::tanh(acc) : acc;
            }
        }
        return s.activations[s.layer_off.back()];
    }

    // Forward plus gradient with respect to the raw inputs.
    double eval_grad_input(std::span<const double> x, std::span<double> gx, Scratch& s) const {
        double value = eval(x, s);
        double* delta = s.delta.data();
        delta[s.layer_off.back()] = 1.0;
        for (int l = static_cast<int>(sizes.size()) - 2; l >= 0; --l) {
            const int in = sizes[l], out = sizes[l + 1];
            const double* w = params.data() + weight_offset(l);
            const double* a = s.activations.data() + s.layer_off[l];
            const double* dl = delta + s.layer_off[l + 1];
            double* dp = delta + s.layer_off[l];
            const bool input_layer_is_hidden = l > 0;
            for (int j = 0; j < in; ++j) dp[j] = 0.0;
            for (int i = 0; i < out; ++i) {
                const double* wi = w + static_cast<std::size_t>(i) * in;
                double di = dl[i];
                for (int j = 0; j < in; ++j) dp[j] += wi[j] * di;
            }
            if (input_layer_is_hidden)
                for (int j = 0; j < in; ++j) dp[j] *= 1.0 - a[j] * a[j];
        }
        for (int j = 0; j < sizes[0]; ++j)
            gx[j] = delta[s.layer_off[0] + j] / in_scale[j];
        return value;
    }

    // Accumulates d(0.5 (f(x) - y)^2)/dparams into grad; returns f(x) - y.
    double accumulate_sample_gradient(std::span<const double> x, double target,
                                      std::span<double> grad, Scratch& s) const {
        double value = eval(x, s);
        double residual = value - target;
        double* delta = s.delta.data();
        delta[s.layer_off.back()] = residual;
        for (int l = static_cast<int>(sizes.size()) - 2; l >= 0; --l) {
            const int in = sizes[l], out = sizes[l + 1];
            const double* w = params.data() + weight_offset(l);
            const double* a = s.activations.data() + s.layer_off[l];
            const double* dl = delta + s.layer_off[l + 1];
            double* dp = delta + s.layer_off[l];
            double* gw = grad.data() + weight_offset(l);
            double* gb = grad.data() + bias_offset(l);
            for (int j = 0; j < in; ++j) dp[j] = 0.0;
            for (int i = 0; i < out; ++i) {
                const double* wi = w + static_cast<std::size_t>(i) * in;
                double* gwi = gw + static_cast<std::size_t>(i) * in;
                double di = dl[i];
                gb[i] += di;
                for (int j = 0; j < in; ++j) {
                    gwi[j] += di * a[j];
                    dp[j] += wi[j] * di;
                }
            }
            if (l > 0)
                for (int j = 0; j < in; ++j) dp[j] *= 1.0 - a[j] * a[j];
        }
        return residual;
    }
};

struct TrainConfig {
    double lr_init = 1e-3;
    double lr_floor = 1e-5;
    int minibatch = 0;        // 0: proportional rule max(32, n / 2048), capped at 4096
    int max_epochs = 300;
    int patience = 20;        // early-stopping epochs without validation improvement
    int lr_patience = 5;      // plateau epochs before halving the learning rate
    double val_fraction = 0.1;
    std::uint64_t seed = 1;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const {
        if (!(lr_floor > 0.0 && lr_floor <= lr_init))
            throw std::invalid_argument("TrainConfig: need 0 < lr_floor <= lr_init");
        if (!(val_fraction > 0.0 && val_fraction <= 0.5))
            throw std::invalid_argument("TrainConfig: val_fraction must lie in (0, 0.5]");
    }

    int resolve_minibatch(std::size_t n) const {
        if (minibatch > 0) return minibatch;
        return static_cast<int>(std::clamp<std::size_t>(n / 2048, 32, 4096));
    }
};

struct FitDiagnostics {
    int epochs = 0;
    double val_mse = 0.0;
    double heldout_r2 = 1.0;
    bool degenerate = false;
};

namespace detail {

inline double batch_mse(const Mlp& net, const std::vector<double>& inputs,
                        const std::vector<double>& targets,
                        const std::vector<std::uint32_t>& rows, ThreadPool* pool) {
    const int d = net.input_dim();
    constexpr int kChunks = 64;
    std::array<double, kChunks> partial{};
    parallel_for(pool, rows.size(), kChunks, [&](std::size_t begin, std::size_t end, int chunk) {
        Mlp::Scratch scratch = net.make_scratch();
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            std::uint32_t r = rows[i];
            double f = net.eval({inputs.data() + static_cast<std::size_t>(r) * d,
                                 static_cast<std::size_t>(d)}, scratch);
            double e = f - targets[r];
            acc += e * e;
        }
        partial[chunk] = acc;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total / static_cast<double>(rows.size());
}

}  // namespace detail

// Least-squares fit by minibatch Adam with early stopping on a validation
// split and learning-rate halving on plateau. A warm-start net (same layer
// sizes) is remapped onto the new input/target standardization, so warm
// weights stay meaningful when the sampling envelope drifts between steps.
inline Mlp fit_mlp(const std::vector<double>& inputs, const std::vector<double>& targets,
                   const std::vector<int>& layer_sizes, const TrainConfig& cfg,
                   const Mlp* warm = nullptr, ThreadPool* pool = nullptr,
                   FitDiagnostics* diag = nullptr) {
    cfg.validate();
    const int d = layer_sizes.front();
    const std::size_t n = targets.size();
    if (inputs.size() != n * static_cast<std::size_t>(d))
        throw std::invalid_argument("fit_mlp: input/target batch sizes differ");
    if (n < 8) throw std::invalid_argument("fit_mlp: batch too small");
    for (double y : targets)
        if (!std::isfinite(y)) throw TrainingError("fit_mlp: non-finite target");

    // Input standardization over the batch.
    std::vector<double> in_mu(d, 0.0), in_sig(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) in_mu[j] += inputs[i * d + j];
    for (int j = 0; j < d; ++j) in_mu[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            double c = inputs[i * d + j] - in_mu[j];
            in_sig[j] += c * c;
        }
    for (int j = 0; j < d; ++j) {
        in_sig[j] = std::sqrt(in_sig[j] / static_cast<double>(n));
        if (in_sig[j] < 1e-12) in_sig[j] = 1.0;  // constant feature
    }

    double y_mean = mean(targets);
    double y_sd = 0.0;
    for (double y : targets) y_sd += (y - y_mean) * (y - y_mean);
    y_sd = std::sqrt(y_sd / static_cast<double>(n));

    // Degenerate targets: constant predictor.
    if (y_sd <= 1e-10 * (1.0 + std::abs(y_mean))) {
        Mlp net = Mlp::make(layer_sizes, cfg.seed);
        std::fill(net.params.begin(), net.params.end(), 0.0);
        net.params[net.bias_offset(net.layer_count() - 1)] = y_mean;
        net.in_mean = mean;
        net.in_scale = scale;
        if (diag) {
            diag->degenerate = true;
            diag->val_mse = 0.0;
            diag->heldout_r2 = 1.0;
            diag->epochs = 0;
        }
        return net;
    }

    Mlp net;
    if (warm != nullptr && warm->sizes == layer_sizes) {
        net = *warm;
        // Remap the first layer onto the new input standardization ...
        {
            std::size_t w0 = net.weight_offset(0), b0 = net.bias_offset(0);
            for (int i = 0; i < net.sizes[1]; ++i) {
                double shift = 0.0;
                for (int j = 0; j < d; ++j) {
                    double& wij = net.params[w0 + static_cast<std::size_t>(i) * d + j];
                    shift += wij * (mean[j] - net.in_mean[j]) / net.in_scale[j];
                    wij *= scale[j] / net.in_scale[j];
                }
                net.params[b0 + i] += shift;
            }
        }
        // ... and the readout into standardized target space.
        {
            int last = net.layer_count() - 1;
            std::size_t wl = net.weight_offset(last), bl = net.bias_offset(last);
            for (int j = 0; j < net.sizes[last]; ++j) net.params[wl + j] /= y_sd;
            net.params[bl] = (net.params[bl] - y_mean) / y_sd;
        }
    } else {
        net = Mlp::make(layer_sizes, cfg.seed);
    }
    net.in_mean = mean;
    net.in_scale = scale;

    // Validation split from a deterministic shuffle.
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    Rng gen(cfg.seed ^ 0x5eedf17u);
    std::shuffle(order.begin(), order.end(), gen);
    std::size_t n_val = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                     std::floor(cfg.val_fraction * n)));
    std::vector<std::uint32_t> val_rows(order.begin(), order.begin() + n_val);
    std::vector<std::uint32_t> train_rows(order.begin() + n_val, order.end());

    std::vector<double> targets_std(n);
    for (std::size_t i = 0; i < n; ++i) targets_std[i] = (targets[i] - y_mean) / y_sd;

    const std::size_t pcount = net.param_count();
    std::vector<double> adam_m(pcount, 0.0), adam_v(pcount, 0.0);
    constexpr int kGradChunks = 8;
    std::vector<std::vector<double>> grad_chunk(kGradChunks, std::vector<double>(pcount, 0.0));
    std::vector<double> grad(pcount);

    const int batch = cfg.resolve_minibatch(train_rows.size());
    double lr = cfg.lr_init;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_params = net.params;
    int stale = 0, lr_stale = 0, adam_step = 0, epoch = 0;

    for (epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::shuffle(train_rows.begin(), train_rows.end(), gen);
        for (std::size_t start = 0; start < train_rows.size(); start += batch) {
            std::size_t stop = std::min(train_rows.size(), start + batch);
            std::size_t bsize = stop - start;
            parallel_for(pool, bsize, kGradChunks,
                         [&](std::size_t begin, std::size_t end, int chunk) {
                std::vector<double>& g = grad_chunk[chunk];
                std::fill(g.begin(), g.end(), 0.0);
                Mlp::Scratch scratch = net.make_scratch();
                for (std::size_t i = begin; i < end; ++i) {
                    std::uint32_t r = train_rows[start + i];
                    net.accumulate_sample_gradient(
                        {inputs.data() + static_cast<std::size_t>(r) * d,
                         static_cast<std::size_t>(d)},
                        targets_std[r], g, scratch);
                }
            });
            std::fill(grad.begin(), grad.end(), 0.0);
            for (int c = 0; c < kGradChunks; ++c)
                for (std::size_t p = 0; p < pcount; ++p) grad[p] += grad_chunk[c][p];
            double inv = 1.0 / static_cast<double>(bsize);
            ++adam_step;
            double bc1 = 1.0 - std::pow(cfg.adam_beta1, adam_step);
            double bc2 = 1.0 - std::pow(cfg.adam_beta2, adam_step);
            for (std::size_t p = 0; p < pcount; ++p) {
                double g = grad[p] * inv;
                adam_m[p] = cfg.adam_beta1 * adam_m[p] + (1.0 - cfg.adam_beta1) * g;
                adam_v[p] = cfg.adam_beta2 * adam_v[p] + (1.0 - cfg.adam_beta2) * g * g;
                net.params[p] -= lr * (adam_m[p] / bc1) /
                                 (std::sqrt(adam_v[p] / bc2) + cfg.adam_eps);
            }
        }

        double val = detail::batch_mse(net, inputs, targets_std, val_rows, pool);
        if (!std::isfinite(val))
            throw TrainingError("fit_mlp: non-finite validation loss at epoch " +
                                std::to_string(epoch) + " (lr=" + std::to_string(lr) + ")");
        if (val < best_val * (1.0 - 1e-10)) {
            best_val = val;
            best_params = net.params;
            stale = 0;
            lr_stale = 0;
        } else {
            ++stale;
            ++lr_stale;
            if (lr_stale >= cfg.lr_patience && lr > cfg.lr_floor) {
                lr = std::max(cfg.lr_floor, 0.5 * lr);
                lr_stale = 0;
            }
            if (stale >= cfg.patience) break;
        }
    }

    net.params = std::move(best_params);

    // Fold the target standardization back into the readout layer.
    {
        int last = net.layer_count() - 1;
        std::size_t wl = net.weight_offset(last), bl = net.bias_offset(last);
        for (int j = 0; j < net.sizes[last]; ++j) net.params[wl + j] *= y_sd;
        net.params[bl] = net.params[bl] * y_sd + y_mean;
    }

    if (diag) {
        diag->epochs = std::min(epoch, cfg.max_epochs);
        diag->val_mse = best_val * y_sd * y_sd;
        double var_val = 0.0;
        for (std::uint32_t r : val_rows) {
            double c = targets[r] - y_mean;
            var_val += c * c;
        }
        var_val /= static_cast<double>(val_rows.size());
        diag->heldout_r2 = var_val > 0.0 ? 1.0 - diag->val_mse / var_val : 1.0;
        diag->degenerate = false;
    }
    return net;
}

// Predictions over a row-major batch, deterministic chunked execution.
inline std::vector<double> predict_batch(const Mlp& net, const std::vector<double>& inputs,
                                         ThreadPool* pool = nullptr) {
    const int d = net.input_dim();
    const std::size_t n = inputs.size() / static_cast<std::size_t>(d);
    std::vector<double> out(n);
    parallel_for(pool, n, 64, [&](std::size_t begin, std::size_t end, int) {
        Mlp::Scratch scratch = net.make_scratch();
        for (std::size_t i = begin; i < end; ++i)
            out[i] = net.eval({inputs.data() + i * d, static_cast<std::size_t>(d)}, scratch);
    });
    return out;
}

}  // namespace dlsmc
