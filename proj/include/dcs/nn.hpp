#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "dcs/constellation.hpp"
#include "dcs/rng.hpp"

namespace dcs {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    std::vector<double> first_moment;  // same shape as the flat parameter vector
    std::vector<double> second_moment;
    long long step_count = 0;

    explicit AdamState(std::size_t n, AdamConfig c = {})
        : cfg(c), first_moment(n, 0.0), second_moment(n, 0.0) {}
};

// Bias-corrected Adam update; increments state.step_count by exactly one.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

// Time-conditioned denoiser MLP. Three hidden layers whose pre-activations
// are gated element-wise by a learnable per-time-step embedding row, then
// passed through softplus; the output layer is affine. All parameters live
// in one flat vector (live weights plus an EMA shadow of identical layout),
// which keeps the optimizer, the EMA update, serialization and the
// finite-difference tests uniform.
class DenoiserModel {
public:
    static constexpr int kHiddenLayers = 3;

    DenoiserModel(int time_steps, int hidden_dim = 128, int io_dim = 2);

    // Uniform +/- sqrt(1/fan_in) weights, zero biases, all-ones embeddings;
    // the EMA shadow starts as a copy of the live weights.
    void init_weights(Rng& rng);

    int time_steps() const { return time_steps_; }
    int hidden_dim() const { return hidden_dim_; }
    int io_dim() const { return io_dim_; }
    std::size_t param_count() const { return live_.size(); }

    std::vector<double>& params() { return live_; }
    const std::vector<double>& params() const { return live_; }
    std::vector<double>& ema_shadow() { return ema_; }
    const std::vector<double>& ema_shadow() const { return ema_; }

    // Flat-layout offsets. Hidden layer k owns W (hidden x in), b (hidden)
    // and an embedding table (T x hidden); the output layer owns W and b.
    int hidden_in(int k) const { return k == 0 ? io_dim_ : hidden_dim_; }
    std::size_t hidden_w_off(int k) const { return layer_off_[k]; }
    std::size_t hidden_b_off(int k) const {
        return layer_off_[k] + static_cast<std::size_t>(hidden_dim_) * hidden_in(k);
    }
    std::size_t embed_off(int k) const {
        return hidden_b_off(k) + static_cast<std::size_t>(hidden_dim_);
    }
    std::size_t out_w_off() const { return out_off_; }
    std::size_t out_b_off() const {
        return out_off_ + static_cast<std::size_t>(io_dim_) * hidden_dim_;
    }

    double ema_decay = 0.9;
    long long epochs_trained = 0;

private:
    int time_steps_;
    int hidden_dim_;
    int io_dim_;
    std::array<std::size_t, kHiddenLayers> layer_off_{};
    std::size_t out_off_ = 0;
    std::vector<double> live_;
    std::vector<double> ema_;
};

// Scratch buffers for one network evaluation; reused across calls so the
// sampling loops do not allocate.
struct DenoiserWorkspace {
    std::vector<double> a; // affine output of the current layer
    std::vector<double> h; // activated output of the previous layer
};

// Single-sample evaluation against an explicit flat parameter vector
// (live or EMA). t is 1-based and must be in [1, T]; not range-checked here.
IQ denoiser_eval_one(const DenoiserModel& model, const double* theta, IQ x, int t,
                     DenoiserWorkspace& ws);

// Batch forward pass, live weights. Validates t range and input finiteness.
Batch denoiser_forward(const DenoiserModel& model, std::span<const IQ> x,
                       std::span<const int> t);
// Same but reading the EMA shadow (the weights used in the sampling phase).
Batch denoiser_forward_ema(const DenoiserModel& model, std::span<const IQ> x,
                           std::span<const int> t);

// Gradient of J = sum_b upstream_b . f(x_b, t_b) with respect to every
// parameter, in flat layout. Embedding rows never indexed by any t in the
// batch receive exactly zero gradient.
std::vector<double> denoiser_backward(const DenoiserModel& model, std::span<const IQ> x,
                                      std::span<const int> t, std::span<const IQ> upstream);

// shadow <- decay * shadow + (1 - decay) * live
void ema_update(DenoiserModel& model);

} // namespace dcs
