#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcs/channel.hpp"
#include "dcs/constellation.hpp"
#include "dcs/nn.hpp"

namespace dcs {

ShapingDistribution uniform_shaping(int order);

// Benchmark system with a trainable 2-D constellation and a ReLU MLP
// demapper (2 -> hidden -> hidden -> M logits). Parameters are stored flat:
// constellation first, then the three dense layers.
class DnnBaseline {
public:
    static constexpr int kLayers = 3;

    explicit DnnBaseline(int order, int hidden_dim = 64);

    // Constellation starts at the QAM grid; dense weights are uniform
    // +/- sqrt(1/fan_in) with zero biases.
    void init_weights(Rng& rng);

    int order() const { return order_; }
    int hidden_dim() const { return hidden_dim_; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    std::size_t constellation_off() const { return 0; }
    int layer_in(int k) const { return k == 0 ? 2 : hidden_dim_; }
    int layer_out(int k) const { return k == kLayers - 1 ? order_ : hidden_dim_; }
    std::size_t w_off(int k) const { return layer_off_[k]; }
    std::size_t b_off(int k) const {
        return layer_off_[k] + static_cast<std::size_t>(layer_out(k)) * layer_in(k);
    }

    IQ point(int symbol) const {
        return {params_[2 * static_cast<std::size_t>(symbol)],
                params_[2 * static_cast<std::size_t>(symbol) + 1]};
    }

    // Rescales the constellation to unit average power (applied after every
    // optimizer step during training).
    void renormalize_constellation();

    // Training provenance, kept so the harness can retrain for OOD runs.
    double train_snr_db = 0.0;
    long long iterations_trained = 0;
    NoiseFamily trained_noise = NoiseFamily::gaussian;
    std::uint64_t train_seed = 0;

private:
    int order_;
    int hidden_dim_;
    std::vector<std::size_t> layer_off_;
    std::vector<double> params_;
};

std::vector<double> baseline_logits(const DnnBaseline& baseline, IQ y);

// Mean cross-entropy of the demapper on y_n = constellation[symbols_n] +
// noise_n. When grads is non-null it receives dL/dtheta for every parameter,
// including the constellation entries. Pure in (params, symbols, noise), so
// it is directly checkable against finite differences.
double baseline_batch_loss(const DnnBaseline& baseline, std::span<const int> symbols,
                           std::span<const IQ> noise, std::vector<double>* grads);

struct BaselineTrainOptions {
    long long iterations = 5000;
    int batch_size = 128;
    AdamConfig adam{};
    NoiseFamily noise = NoiseFamily::gaussian;
};

DnnBaseline train_dnn_baseline(int order, double snr_db, const BaselineTrainOptions& opt,
                               std::uint64_t seed);

// argmax of the demapper logits per received point.
std::vector<int> dnn_demap(const DnnBaseline& baseline, std::span<const IQ> received);

} // namespace dcs
