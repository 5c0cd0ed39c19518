#include "dcs/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "dcs/errors.hpp"

namespace dcs {

ShapingDistribution uniform_shaping(int order) {
    if (order < 2) throw std::invalid_argument("uniform_shaping: order must be >= 2");
    ShapingDistribution dist;
    dist.probs.assign(order, 1.0 / order);
    return dist;
}

DnnBaseline::DnnBaseline(int order, int hidden_dim) : order_(order), hidden_dim_(hidden_dim) {
    if (order != 16 && order != 64)
        throw std::invalid_argument("DnnBaseline: unsupported modulation order");
    std::size_t off = 2 * static_cast<std::size_t>(order_);
    layer_off_.resize(kLayers);
    for (int k = 0; k < kLayers; ++k) {
        layer_off_[k] = off;
        off += static_cast<std::size_t>(layer_out(k)) * layer_in(k) + layer_out(k);
    }
    params_.assign(off, 0.0);
}

void DnnBaseline::init_weights(Rng& rng) {
    const ConstellationGeometry geo = qam_geometry(order_);
    for (int s = 0; s < order_; ++s) {
        params_[2 * static_cast<std::size_t>(s)] = geo.points[s].i;
        params_[2 * static_cast<std::size_t>(s) + 1] = geo.points[s].q;
    }
    for (int k = 0; k < kLayers; ++k) {
        const double bound = std::sqrt(1.0 / layer_in(k));
        double* w = params_.data() + w_off(k);
        const std::size_t nw = static_cast<std::size_t>(layer_out(k)) * layer_in(k);
        for (std::size_t j = 0; j < nw; ++j) w[j] = bound * (2.0 * rng.uniform() - 1.0);
        double* b = params_.data() + b_off(k);
        for (int j = 0; j < layer_out(k); ++j) b[j] = 0.0;
    }
}

void DnnBaseline::renormalize_constellation() {
    double energy = 0.0;
    for (int s = 0; s < order_; ++s) {
        const IQ p = point(s);
        energy += p.i * p.i + p.q * p.q;
    }
    energy /= order_;
    if (!(energy > 0.0)) throw NumericError("DnnBaseline: degenerate constellation power");
    const double scale = 1.0 / std::sqrt(energy);
    for (int j = 0; j < 2 * order_; ++j) params_[j] *= scale;
}

namespace {

void baseline_affine(const double* w, const double* b, const double* x, double* y, int out,
                     int in) {
    for (int o = 0; o < out; ++o) {
        const double* row = w + static_cast<std::size_t>(o) * in;
        double s = b[o];
        for (int j = 0; j < in; ++j) s += row[j] * x[j];
        y[o] = s;
    }
}

} // namespace

std::vector<double> baseline_logits(const DnnBaseline& baseline, IQ y) {
    const double* theta = baseline.params().data();
    std::vector<double> cur = {y.i, y.q};
    std::vector<double> next;
    for (int k = 0; k < DnnBaseline::kLayers; ++k) {
        next.assign(baseline.layer_out(k), 0.0);
        baseline_affine(theta + baseline.w_off(k), theta + baseline.b_off(k), cur.data(),
                        next.data(), baseline.layer_out(k), baseline.layer_in(k));
        if (k < DnnBaseline::kLayers - 1)
            for (double& v : next) v = v > 0.0 ? v : 0.0;
        cur = std::move(next);
    }
    return cur;
}

double baseline_batch_loss(const DnnBaseline& baseline, std::span<const int> symbols,
                           std::span<const IQ> noise, std::vector<double>* grads) {
    if (symbols.size() != noise.size())
        throw std::invalid_argument("baseline_batch_loss: batch size mismatch");
    if (symbols.empty()) throw std::invalid_argument("baseline_batch_loss: empty batch");
    const int m = baseline.order();
    const int hd = baseline.hidden_dim();
    const double* theta = baseline.params().data();
    const double inv_batch = 1.0 / static_cast<double>(symbols.size());
    if (grads) grads->assign(baseline.param_count(), 0.0);

    std::vector<double> a1(hd), h1(hd), a2(hd), h2(hd), logits(m), prob(m);
    std::vector<double> dlogits(m), dh2(hd), dh1(hd), dy(2);
    double loss = 0.0;

    for (std::size_t n = 0; n < symbols.size(); ++n) {
        const int s = symbols[n];
        if (s < 0 || s >= m)
            throw std::out_of_range("baseline_batch_loss: symbol index out of range");
        const IQ c = baseline.point(s);
        const double y[2] = {c.i + noise[n].i, c.q + noise[n].q};

        baseline_affine(theta + baseline.w_off(0), theta + baseline.b_off(0), y, a1.data(), hd, 2);
        for (int j = 0; j < hd; ++j) h1[j] = a1[j] > 0.0 ? a1[j] : 0.0;
        baseline_affine(theta + baseline.w_off(1), theta + baseline.b_off(1), h1.data(),
                        a2.data(), hd, hd);
        for (int j = 0; j < hd; ++j) h2[j] = a2[j] > 0.0 ? a2[j] : 0.0;
        baseline_affine(theta + baseline.w_off(2), theta + baseline.b_off(2), h2.data(),
                        logits.data(), m, hd);

        double max_logit = logits[0];
        for (int j = 1; j < m; ++j) max_logit = std::max(max_logit, logits[j]);
        double z = 0.0;
        for (int j = 0; j < m; ++j) {
            prob[j] = std::exp(logits[j] - max_logit);
            z += prob[j];
        }
        for (int j = 0; j < m; ++j) prob[j] /= z;
        loss += -(logits[s] - max_logit - std::log(z)) * inv_batch;
        if (!grads) continue;

        for (int j = 0; j < m; ++j) dlogits[j] = (prob[j] - (j == s ? 1.0 : 0.0)) * inv_batch;
        double* g = grads->data();
        // layer 2 (logits)
        for (int o = 0; o < m; ++o) {
            double* row = g + baseline.w_off(2) + static_cast<std::size_t>(o) * hd;
            for (int j = 0; j < hd; ++j) row[j] += dlogits[o] * h2[j];
            g[baseline.b_off(2) + o] += dlogits[o];
        }
        for (int j = 0; j < hd; ++j) {
            double acc = 0.0;
            for (int o = 0; o < m; ++o)
                acc += theta[baseline.w_off(2) + static_cast<std::size_t>(o) * hd + j] *
                       dlogits[o];
            dh2[j] = a2[j] > 0.0 ? acc : 0.0;
        }
        // layer 1
        for (int o = 0; o < hd; ++o) {
            double* row = g + baseline.w_off(1) + static_cast<std::size_t>(o) * hd;
            for (int j = 0; j < hd; ++j) row[j] += dh2[o] * h1[j];
            g[baseline.b_off(1) + o] += dh2[o];
        }
        for (int j = 0; j < hd; ++j) {
            double acc = 0.0;
            for (int o = 0; o < hd; ++o)
                acc += theta[baseline.w_off(1) + static_cast<std::size_t>(o) * hd + j] * dh2[o];
            dh1[j] = a1[j] > 0.0 ? acc : 0.0;
        }
        // layer 0 and the constellation entry
        for (int o = 0; o < hd; ++o) {
            double* row = g + baseline.w_off(0) + static_cast<std::size_t>(o) * 2;
            row[0] += dh1[o] * y[0];
            row[1] += dh1[o] * y[1];
            g[baseline.b_off(0) + o] += dh1[o];
        }
        dy[0] = dy[1] = 0.0;
        for (int o = 0; o < hd; ++o) {
            dy[0] += theta[baseline.w_off(0) + static_cast<std::size_t>(o) * 2] * dh1[o];
            dy[1] += theta[baseline.w_off(0) + static_cast<std::size_t>(o) * 2 + 1] * dh1[o];
        }
        g[2 * static_cast<std::size_t>(s)] += dy[0];
        g[2 * static_cast<std::size_t>(s) + 1] += dy[1];
    }
    return loss;
}

DnnBaseline train_dnn_baseline(int order, double snr_db, const BaselineTrainOptions& opt,
                               std::uint64_t seed) {
    DnnBaseline baseline(order);
    Rng init_rng = substream(seed, "baseline-init");
    baseline.init_weights(init_rng);
    baseline.train_snr_db = snr_db;
    baseline.trained_noise = opt.noise;
    baseline.train_seed = seed;

    const double delta_sq = snr_to_noise_power(snr_db, 1.0);
    Rng rng = substream(seed, "baseline-train");
    const int bs = opt.batch_size;
    std::vector<int> symbols(bs);
    Batch noise(bs);
    std::vector<double> grads;
    AdamState adam(baseline.param_count(), opt.adam);
    const Batch origin(bs, IQ{0.0, 0.0});

    for (long long it = 0; it < opt.iterations; ++it) {
        for (int n = 0; n < bs; ++n) symbols[n] = static_cast<int>(rng.below(order));
        noise = add_noise(origin, opt.noise, delta_sq, rng);
        const double loss = baseline_batch_loss(baseline, symbols, noise, &grads);
        if (!std::isfinite(loss)) throw NumericError("train_dnn_baseline: non-finite loss");
        adam_step(baseline.params(), grads, adam);
        baseline.renormalize_constellation();
        ++baseline.iterations_trained;
    }
    return baseline;
}

std::vector<int> dnn_demap(const DnnBaseline& baseline, std::span<const IQ> received) {
    std::vector<int> out(received.size());
    for (std::size_t n = 0; n < received.size(); ++n) {
        const std::vector<double> logits = baseline_logits(baseline, received[n]);
        int best = 0;
        for (int j = 1; j < baseline.order(); ++j)
            if (logits[j] > logits[best]) best = j;
        out[n] = best;
    }
    return out;
}

} // namespace dcs
