#include "dcs/diffusion.hpp"

#include <cmath>
#include <stdexcept>

#include "dcs/errors.hpp"

namespace dcs {

DiffusionSchedule build_schedule(int steps, double alpha_first, double alpha_last) {
    if (steps < 2) throw std::invalid_argument("build_schedule: need at least 2 steps");
    if (!(alpha_first > alpha_last) || !(alpha_last > 0.0) || !(alpha_first < 1.0))
        throw std::invalid_argument("build_schedule: require 0 < alpha_last < alpha_first < 1");
    const double beta_min = 1.0 - alpha_first;
    const double beta_max = 1.0 - alpha_last;
    DiffusionSchedule s;
    s.alpha_first = alpha_first;
    s.alpha_last = alpha_last;
    s.beta.resize(steps);
    s.alpha.resize(steps);
    s.alpha_bar.resize(steps);
    double prod = 1.0;
    for (int t = 1; t <= steps; ++t) {
        const double st = -6.0 + 12.0 * (t - 1) / (steps - 1);
        const double sig = 1.0 / (1.0 + std::exp(-st));
        const double b = beta_min + (beta_max - beta_min) * sig;
        s.beta[t - 1] = b;
        s.alpha[t - 1] = 1.0 - b;
        prod *= s.alpha[t - 1];
        s.alpha_bar[t - 1] = prod;
    }
    return s;
}

IQ forward_diffuse(IQ x0, int t, IQ eps, const DiffusionSchedule& sched) {
    if (t < 1 || t > sched.steps())
        throw std::out_of_range("forward_diffuse: time-step out of range");
    const double ab = sched.alpha_bar_t(t);
    const double c0 = std::sqrt(ab);
    const double ce = std::sqrt(1.0 - ab);
    return {c0 * x0.i + ce * eps.i, c0 * x0.q + ce * eps.q};
}

std::vector<double> train(DenoiserModel& model, const ConstellationGeometry& geo,
                          const DiffusionSchedule& sched, const TrainOptions& opt, Rng& rng) {
    if (sched.steps() != model.time_steps())
        throw std::invalid_argument("train: schedule step count does not match the model");
    if (opt.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (opt.samples_per_epoch < opt.batch_size)
        throw std::invalid_argument("train: samples_per_epoch must cover one batch");

    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(opt.epochs > 0 ? opt.epochs : 0));
    const int bs = opt.batch_size;
    const int batches_per_epoch = (opt.samples_per_epoch + bs - 1) / bs;
    AdamState adam(model.param_count(), opt.adam);
    Batch x_t(bs), eps(bs), upstream(bs);
    std::vector<int> ts(bs);

    for (long long epoch = 0; epoch < opt.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (int step = 0; step < batches_per_epoch; ++step) {
            for (int n = 0; n < bs; ++n) {
                const IQ x0 = geo.points[rng.below(geo.points.size())];
                ts[n] = 1 + static_cast<int>(rng.below(sched.steps()));
                eps[n] = {rng.normal(), rng.normal()};
                x_t[n] = forward_diffuse(x0, ts[n], eps[n], sched);
            }
            const Batch pred = denoiser_forward(model, x_t, ts);
            // L = sum |pred - eps|^2 / (2 bs); upstream = dL/dpred.
            double loss = 0.0;
            for (int n = 0; n < bs; ++n) {
                const double di = pred[n].i - eps[n].i;
                const double dq = pred[n].q - eps[n].q;
                loss += di * di + dq * dq;
                upstream[n] = {di / bs, dq / bs};
            }
            loss /= 2.0 * bs;
            if (!std::isfinite(loss)) throw NumericError("train: non-finite loss encountered");
            const std::vector<double> grads = denoiser_backward(model, x_t, ts, upstream);
            adam_step(model.params(), grads, adam);
            ema_update(model);
            epoch_loss += loss;
        }
        trace.push_back(epoch_loss / batches_per_epoch);
        ++model.epochs_trained;
        if (opt.snapshot && opt.snapshot_every > 0 &&
            ((epoch + 1) % opt.snapshot_every == 0 || epoch + 1 == opt.epochs))
            opt.snapshot(epoch + 1, model);
    }
    return trace;
}

IQ reverse_step_mean(IQ x_t, int t, IQ eps_hat, const DiffusionSchedule& sched) {
    if (t < 1 || t > sched.steps())
        throw std::out_of_range("reverse_step: time-step out of range");
    const double a = sched.alpha_t(t);
    const double c = (1.0 - a) / std::sqrt(1.0 - sched.alpha_bar_t(t));
    const double inv = 1.0 / std::sqrt(a);
    return {inv * (x_t.i - c * eps_hat.i), inv * (x_t.q - c * eps_hat.q)};
}

IQ reverse_step(IQ x_t, int t, IQ z, const DenoiserModel& model,
                const DiffusionSchedule& sched) {
    DenoiserWorkspace ws;
    const IQ eps_hat = denoiser_eval_one(model, model.ema_shadow().data(), x_t, t, ws);
    IQ mean = reverse_step_mean(x_t, t, eps_hat, sched);
    const double sd = std::sqrt(1.0 - sched.alpha_t(t));
    return {mean.i + sd * z.i, mean.q + sd * z.q};
}

namespace {

// One element's whole trajectory; draws 2(t_start-1) normals from its
// substream in step order so serial and parallel paths produce identical
// values.
IQ reverse_trajectory(IQ x, int t_start, const DenoiserModel& model,
                      const DiffusionSchedule& sched, std::uint64_t elem_seed,
                      DenoiserWorkspace& ws) {
    Rng rng(elem_seed);
    const double* theta = model.ema_shadow().data();
    for (int t = t_start; t >= 1; --t) {
        const IQ eps_hat = denoiser_eval_one(model, theta, x, t, ws);
        const double a = sched.alpha_t(t);
        const double c = (1.0 - a) / std::sqrt(1.0 - sched.alpha_bar_t(t));
        const double inv = 1.0 / std::sqrt(a);
        x = {inv * (x.i - c * eps_hat.i), inv * (x.q - c * eps_hat.q)};
        if (t > 1) {
            const double sd = std::sqrt(1.0 - a);
            const double zi = rng.normal();
            const double zq = rng.normal();
            x.i += sd * zi;
            x.q += sd * zq;
        }
    }
    return x;
}

void check_start(const DenoiserModel& model, const DiffusionSchedule& sched, int t_start,
                 std::span<const IQ> x_start) {
    if (sched.steps() != model.time_steps())
        throw std::invalid_argument("reverse_sample: schedule does not match the model");
    if (t_start < 1 || t_start > sched.steps())
        throw std::out_of_range("reverse_sample: start step out of range");
    for (const IQ& p : x_start)
        if (!std::isfinite(p.i) || !std::isfinite(p.q))
            throw std::invalid_argument("reverse_sample: non-finite start point");
}

void check_finite(const Batch& out) {
    for (const IQ& p : out)
        if (!std::isfinite(p.i) || !std::isfinite(p.q))
            throw NumericError("reverse_sample: non-finite sample produced");
}

} // namespace

Batch reverse_sample_from(std::span<const IQ> x_start, int t_start, const DenoiserModel& model,
                          const DiffusionSchedule& sched, std::uint64_t seed) {
    check_start(model, sched, t_start, x_start);
    Batch out(x_start.size());
    const auto n = static_cast<std::int64_t>(x_start.size());
#pragma omp parallel
    {
        DenoiserWorkspace ws;
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < n; ++i)
            out[i] = reverse_trajectory(x_start[i], t_start, model, sched,
                                        mix_seed(seed, "elem", static_cast<std::uint64_t>(i)),
                                        ws);
    }
    check_finite(out);
    return out;
}

Batch reverse_sample_from_serial(std::span<const IQ> x_start, int t_start,
                                 const DenoiserModel& model, const DiffusionSchedule& sched,
                                 std::uint64_t seed) {
    check_start(model, sched, t_start, x_start);
    Batch out(x_start.size());
    DenoiserWorkspace ws;
    for (std::size_t i = 0; i < x_start.size(); ++i)
        out[i] = reverse_trajectory(x_start[i], t_start, model, sched, mix_seed(seed, "elem", i),
                                    ws);
    check_finite(out);
    return out;
}

Batch reverse_sample(std::span<const IQ> x_start, const DenoiserModel& model,
                     const DiffusionSchedule& sched, std::uint64_t seed) {
    return reverse_sample_from(x_start, sched.steps(), model, sched, seed);
}

Batch reverse_sample_serial(std::span<const IQ> x_start, const DenoiserModel& model,
                            const DiffusionSchedule& sched, std::uint64_t seed) {
    return reverse_sample_from_serial(x_start, sched.steps(), model, sched, seed);
}

std::pair<IQ, double> posterior_params(IQ x_t, IQ x0, int t, const DiffusionSchedule& sched) {
    if (t < 1 || t > sched.steps())
        throw std::out_of_range("posterior_params: time-step out of range");
    const double ab = sched.alpha_bar_t(t);
    const double ab_prev = sched.alpha_bar_t(t - 1);
    const double b = sched.beta_t(t);
    const double a = sched.alpha_t(t);
    const double cx = std::sqrt(a) * (1.0 - ab_prev) / (1.0 - ab);
    const double c0 = std::sqrt(ab_prev) * b / (1.0 - ab);
    const double beta_tilde = (1.0 - ab_prev) / (1.0 - ab) * b;
    return {{cx * x_t.i + c0 * x0.i, cx * x_t.q + c0 * x0.q}, beta_tilde};
}

} // namespace dcs
