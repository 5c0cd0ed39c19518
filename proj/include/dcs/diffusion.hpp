#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "dcs/constellation.hpp"
#include "dcs/nn.hpp"
#include "dcs/rng.hpp"

namespace dcs {

// Sigmoid variance schedule. Index accessors are 1-based to match the usual
// step numbering t = 1..T; alpha_bar_t(0) is defined as 1.
struct DiffusionSchedule {
    std::vector<double> beta;
    std::vector<double> alpha;
    std::vector<double> alpha_bar;
    double alpha_first = 0.0;
    double alpha_last = 0.0;

    int steps() const { return static_cast<int>(beta.size()); }
    double beta_t(int t) const { return beta[t - 1]; }
    double alpha_t(int t) const { return alpha[t - 1]; }
    double alpha_bar_t(int t) const { return t == 0 ? 1.0 : alpha_bar[t - 1]; }
};

// beta_t = beta_min + (beta_max - beta_min) * logistic(s_t), with s_t spanning
// [-6, 6] linearly over t = 1..T, beta_min = 1 - alpha_first and
// beta_max = 1 - alpha_last.
DiffusionSchedule build_schedule(int steps, double alpha_first = 0.99999,
                                 double alpha_last = 0.99);

// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps
IQ forward_diffuse(IQ x0, int t, IQ eps, const DiffusionSchedule& sched);

struct TrainOptions {
    long long epochs = 0;
    int batch_size = 128;
    // One epoch walks a freshly drawn sample set of this size in minibatches;
    // samples_per_epoch == batch_size reduces to one gradient step per epoch.
    int samples_per_epoch = 10000;
    AdamConfig adam{};
    // Invoked every snapshot_every epochs (and at the final epoch) when set.
    int snapshot_every = 0;
    std::function<void(long long epoch, const DenoiserModel&)> snapshot;
};

// Per minibatch: x0 uniform over the constellation, t uniform over [1, T],
// eps standard normal; gradient step on the Eq.-style noise-prediction MSE,
// Adam update, EMA update. Returns the per-epoch loss trace (mean squared
// error per coordinate, averaged over the epoch's minibatches).
std::vector<double> train(DenoiserModel& model, const ConstellationGeometry& geo,
                          const DiffusionSchedule& sched, const TrainOptions& opt, Rng& rng);

// x_{t-1} = (x_t - (1 - alpha_t)/sqrt(1 - alpha_bar_t) * eps_hat) / sqrt(alpha_t)
//           + sqrt(1 - alpha_t) * z
IQ reverse_step_mean(IQ x_t, int t, IQ eps_hat, const DiffusionSchedule& sched);
// Same update with eps_hat produced by the model's EMA weights.
IQ reverse_step(IQ x_t, int t, IQ z, const DenoiserModel& model,
                const DiffusionSchedule& sched);

// Reverse loop from t = t_start down to 1, z ~ N(0, I) per step except z = 0
// at t = 1, reading EMA weights. Each batch element draws from its own
// substream of `seed` ("elem", index), so the result is independent of the
// worker count. The parallel kernels run the elements under OpenMP;
// the _serial variants are the plain loops kept as the reference.
Batch reverse_sample_from(std::span<const IQ> x_start, int t_start, const DenoiserModel& model,
                          const DiffusionSchedule& sched, std::uint64_t seed);
Batch reverse_sample_from_serial(std::span<const IQ> x_start, int t_start,
                                 const DenoiserModel& model, const DiffusionSchedule& sched,
                                 std::uint64_t seed);
// Full loop from t = T.
Batch reverse_sample(std::span<const IQ> x_start, const DenoiserModel& model,
                     const DiffusionSchedule& sched, std::uint64_t seed);
Batch reverse_sample_serial(std::span<const IQ> x_start, const DenoiserModel& model,
                            const DiffusionSchedule& sched, std::uint64_t seed);

// Closed-form posterior q(x_{t-1} | x_t, x0): mean and variance.
std::pair<IQ, double> posterior_params(IQ x_t, IQ x0, int t, const DiffusionSchedule& sched);

} // namespace dcs
