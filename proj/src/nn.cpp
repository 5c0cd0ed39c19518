#include "dcs/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "dcs/vecmath.hpp"

namespace dcs {

namespace {

// y = W x + b, W row-major (out x in). Four accumulators keep the FMA
// pipeline busy; `in` is a multiple of 4 only for hidden-to-hidden layers,
// so the remainder is handled explicitly.
void affine(const double* w, const double* b, const double* x, double* y, int out, int in) {
    const int in4 = in & ~3;
    for (int o = 0; o < out; ++o) {
        const double* row = w + static_cast<std::size_t>(o) * in;
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        for (int j = 0; j < in4; j += 4) {
            s0 += row[j] * x[j];
            s1 += row[j + 1] * x[j + 1];
            s2 += row[j + 2] * x[j + 2];
            s3 += row[j + 3] * x[j + 3];
        }
        double s = (s0 + s1) + (s2 + s3);
        for (int j = in4; j < in; ++j) s += row[j] * x[j];
        y[o] = s + b[o];
    }
}

// dx = W^T dy
void matvec_transposed(const double* w, const double* dy, double* dx, int out, int in) {
    for (int j = 0; j < in; ++j) dx[j] = 0.0;
    for (int o = 0; o < out; ++o) {
        const double* row = w + static_cast<std::size_t>(o) * in;
        const double g = dy[o];
        for (int j = 0; j < in; ++j) dx[j] += g * row[j];
    }
}

void check_inputs(const DenoiserModel& model, std::span<const IQ> x, std::span<const int> t) {
    if (x.size() != t.size())
        throw std::invalid_argument("denoiser: point and time-step batches differ in length");
    for (const int ti : t)
        if (ti < 1 || ti > model.time_steps())
            throw std::out_of_range("denoiser: time-step " + std::to_string(ti) +
                                    " outside [1, " + std::to_string(model.time_steps()) + "]");
    for (const IQ& p : x)
        if (!std::isfinite(p.i) || !std::isfinite(p.q))
            throw std::invalid_argument("denoiser: non-finite input point");
}

} // namespace

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size())
        throw std::invalid_argument("adam_step: parameter/gradient/state size mismatch");
    ++state.step_count;
    const double b1 = state.cfg.beta1;
    const double b2 = state.cfg.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
    const double lr = state.cfg.learning_rate;
    const double eps = state.cfg.epsilon;
    double* m = state.first_moment.data();
    double* v = state.second_moment.data();
    for (std::size_t k = 0; k < params.size(); ++k) {
        m[k] = b1 * m[k] + (1.0 - b1) * grads[k];
        v[k] = b2 * v[k] + (1.0 - b2) * grads[k] * grads[k];
        params[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
    }
}

DenoiserModel::DenoiserModel(int time_steps, int hidden_dim, int io_dim)
    : time_steps_(time_steps), hidden_dim_(hidden_dim), io_dim_(io_dim) {
    if (time_steps < 1) throw std::invalid_argument("DenoiserModel: time_steps must be >= 1");
    if (hidden_dim < 1 || io_dim < 1)
        throw std::invalid_argument("DenoiserModel: dimensions must be positive");
    std::size_t off = 0;
    for (int k = 0; k < kHiddenLayers; ++k) {
        layer_off_[k] = off;
        off += static_cast<std::size_t>(hidden_dim_) * hidden_in(k); // W
        off += hidden_dim_;                                          // b
        off += static_cast<std::size_t>(time_steps_) * hidden_dim_;  // embedding table
    }
    out_off_ = off;
    off += static_cast<std::size_t>(io_dim_) * hidden_dim_ + io_dim_;
    live_.assign(off, 0.0);
    ema_.assign(off, 0.0);
}

void DenoiserModel::init_weights(Rng& rng) {
    for (int k = 0; k < kHiddenLayers; ++k) {
        const double bound = std::sqrt(1.0 / hidden_in(k));
        double* w = live_.data() + hidden_w_off(k);
        const std::size_t nw = static_cast<std::size_t>(hidden_dim_) * hidden_in(k);
        for (std::size_t j = 0; j < nw; ++j) w[j] = bound * (2.0 * rng.uniform() - 1.0);
        double* b = live_.data() + hidden_b_off(k);
        for (int j = 0; j < hidden_dim_; ++j) b[j] = 0.0;
        double* e = live_.data() + embed_off(k);
        const std::size_t ne = static_cast<std::size_t>(time_steps_) * hidden_dim_;
        for (std::size_t j = 0; j < ne; ++j) e[j] = 1.0;
    }
    const double bound = std::sqrt(1.0 / hidden_dim_);
    double* w = live_.data() + out_w_off();
    const std::size_t nw = static_cast<std::size_t>(io_dim_) * hidden_dim_;
    for (std::size_t j = 0; j < nw; ++j) w[j] = bound * (2.0 * rng.uniform() - 1.0);
    double* b = live_.data() + out_b_off();
    for (int j = 0; j < io_dim_; ++j) b[j] = 0.0;
    ema_ = live_;
}

IQ denoiser_eval_one(const DenoiserModel& model, const double* theta, IQ x, int t,
                     DenoiserWorkspace& ws) {
    const int hd = model.hidden_dim();
    ws.a.resize(hd);
    ws.h.resize(hd);
    double in2[2] = {x.i, x.q};
    const double* cur = in2;
    for (int k = 0; k < DenoiserModel::kHiddenLayers; ++k) {
        const int in_dim = model.hidden_in(k);
        affine(theta + model.hidden_w_off(k), theta + model.hidden_b_off(k), cur, ws.a.data(),
               hd, in_dim);
        const double* emb =
            theta + model.embed_off(k) + static_cast<std::size_t>(t - 1) * hd;
        double* h = ws.h.data();
        const double* a = ws.a.data();
        for (int j = 0; j < hd; ++j) h[j] = vm::softplus(a[j] * emb[j]);
        cur = h;
    }
    double out2[2];
    affine(theta + model.out_w_off(), theta + model.out_b_off(), cur, out2, model.io_dim(), hd);
    return {out2[0], out2[1]};
}

namespace {

Batch forward_impl(const DenoiserModel& model, const double* theta, std::span<const IQ> x,
                   std::span<const int> t) {
    check_inputs(model, x, t);
    Batch out(x.size());
    DenoiserWorkspace ws;
    for (std::size_t n = 0; n < x.size(); ++n)
        out[n] = denoiser_eval_one(model, theta, x[n], t[n], ws);
    return out;
}

} // namespace

Batch denoiser_forward(const DenoiserModel& model, std::span<const IQ> x,
                       std::span<const int> t) {
    return forward_impl(model, model.params().data(), x, t);
}

Batch denoiser_forward_ema(const DenoiserModel& model, std::span<const IQ> x,
                           std::span<const int> t) {
    return forward_impl(model, model.ema_shadow().data(), x, t);
}

std::vector<double> denoiser_backward(const DenoiserModel& model, std::span<const IQ> x,
                                      std::span<const int> t, std::span<const IQ> upstream) {
    check_inputs(model, x, t);
    if (upstream.size() != x.size())
        throw std::invalid_argument("denoiser_backward: upstream batch size mismatch");

    const int hd = model.hidden_dim();
    const double* theta = model.params().data();
    std::vector<double> grads(model.param_count(), 0.0);

    // Per-layer traces for one sample, recomputed forward then walked back.
    constexpr int L = DenoiserModel::kHiddenLayers;
    std::vector<double> a(L * hd), g(L * hd), h(L * hd);
    std::vector<double> dh(hd), da(hd), dprev(hd);

    for (std::size_t n = 0; n < x.size(); ++n) {
        const int ti = t[n];
        double in2[2] = {x[n].i, x[n].q};
        const double* cur = in2;
        for (int k = 0; k < L; ++k) {
            double* ak = a.data() + k * hd;
            double* gk = g.data() + k * hd;
            double* hk = h.data() + k * hd;
            affine(theta + model.hidden_w_off(k), theta + model.hidden_b_off(k), cur, ak, hd,
                   model.hidden_in(k));
            const double* emb =
                theta + model.embed_off(k) + static_cast<std::size_t>(ti - 1) * hd;
            for (int j = 0; j < hd; ++j) {
                gk[j] = ak[j] * emb[j];
                hk[j] = vm::softplus(gk[j]);
            }
            cur = hk;
        }

        // Output layer: dW_out = u h^T, db_out = u, dh = W_out^T u.
        const double u[2] = {upstream[n].i, upstream[n].q};
        double* gw = grads.data() + model.out_w_off();
        double* gb = grads.data() + model.out_b_off();
        const double* wout = theta + model.out_w_off();
        const double* h_last = h.data() + (L - 1) * hd;
        for (int o = 0; o < model.io_dim(); ++o) {
            double* row = gw + static_cast<std::size_t>(o) * hd;
            for (int j = 0; j < hd; ++j) row[j] += u[o] * h_last[j];
            gb[o] += u[o];
        }
        for (int j = 0; j < hd; ++j) dh[j] = wout[j] * u[0] + wout[hd + j] * u[1];

        for (int k = L - 1; k >= 0; --k) {
            const double* ak = a.data() + k * hd;
            const double* gk = g.data() + k * hd;
            const double* emb =
                theta + model.embed_off(k) + static_cast<std::size_t>(ti - 1) * hd;
            double* gemb =
                grads.data() + model.embed_off(k) + static_cast<std::size_t>(ti - 1) * hd;
            for (int j = 0; j < hd; ++j) {
                const double dg = dh[j] * vm::logistic(gk[j]);
                gemb[j] += dg * ak[j];
                da[j] = dg * emb[j];
            }
            const int in_dim = model.hidden_in(k);
            const double* prev = k == 0 ? in2 : h.data() + (k - 1) * hd;
            double* gwk = grads.data() + model.hidden_w_off(k);
            double* gbk = grads.data() + model.hidden_b_off(k);
            for (int o = 0; o < hd; ++o) {
                double* row = gwk + static_cast<std::size_t>(o) * in_dim;
                for (int j = 0; j < in_dim; ++j) row[j] += da[o] * prev[j];
                gbk[o] += da[o];
            }
            if (k > 0) {
                matvec_transposed(theta + model.hidden_w_off(k), da.data(), dprev.data(), hd,
                                  in_dim);
                std::swap(dh, dprev);
            }
        }
    }
    return grads;
}

void ema_update(DenoiserModel& model) {
    const double d = model.ema_decay;
    const double* live = model.params().data();
    double* shadow = model.ema_shadow().data();
    const std::size_t n = model.param_count();
    for (std::size_t k = 0; k < n; ++k) shadow[k] = d * shadow[k] + (1.0 - d) * live[k];
}

} // namespace dcs
