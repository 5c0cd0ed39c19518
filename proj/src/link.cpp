#include "dcs/link.hpp"

#include <cmath>
#include <stdexcept>

namespace dcs {

int matched_entry_step(const DiffusionSchedule& sched, double snr_db, double avg_power) {
    const double delta_sq = snr_to_noise_power(snr_db, avg_power);
    const double threshold = 2.0 / (2.0 + delta_sq);
    for (int t = 1; t <= sched.steps(); ++t)
        if (sched.alpha_bar_t(t) <= threshold) return t;
    return sched.steps();
}

namespace {

// Scaled entry x_{t*} = sqrt(alpha_bar_{t*}) y followed by the reverse loop.
Batch denoise_matched(std::span<const IQ> observed, const DenoiserModel& model,
                      const DiffusionSchedule& sched, double snr_db, std::uint64_t seed,
                      int& entry_step_out) {
    const int t_start = matched_entry_step(sched, snr_db);
    const double scale = std::sqrt(sched.alpha_bar_t(t_start));
    Batch entry(observed.size());
    for (std::size_t k = 0; k < observed.size(); ++k)
        entry[k] = {scale * observed[k].i, scale * observed[k].q};
    entry_step_out = t_start;
    return reverse_sample_from(entry, t_start, model, sched, seed);
}

} // namespace

ShapingResult shape_constellation(const DenoiserModel& model, const ConstellationGeometry& geo,
                                  const DiffusionSchedule& sched, double snr_db,
                                  std::size_t n_samples, std::uint64_t seed) {
    if (n_samples == 0)
        throw std::invalid_argument("shape_constellation: need at least one sample");
    Rng synth_rng = substream(seed, "synth");
    const SyntheticSamples synth =
        synthesize_noisy_symbols(geo, snr_db, 1.0, n_samples, synth_rng);
    ShapingResult result;
    result.snr_db = snr_db;
    result.model_untrained = model.epochs_trained == 0;
    result.raw_outputs = denoise_matched(synth.noisy, model, sched, snr_db,
                                         mix_seed(seed, "reverse"), result.entry_step);
    const std::vector<int> projected = project(result.raw_outputs, geo);
    result.distribution = empirical_distribution(count_occurrences(projected, geo.order),
                                                 static_cast<std::int64_t>(n_samples));
    return result;
}

std::vector<int> reconstruct(std::span<const IQ> received, const DenoiserModel& model,
                             const DiffusionSchedule& sched, const ConstellationGeometry& geo,
                             double snr_db, std::uint64_t seed) {
    int entry_step = 0;
    const Batch denoised =
        denoise_matched(received, model, sched, snr_db, mix_seed(seed, "reverse"), entry_step);
    return project(denoised, geo);
}

TransmissionRecord transmit_round(const DenoiserModel& model, const ConstellationGeometry& geo,
                                  const DiffusionSchedule& sched, const ChannelSpec& spec,
                                  std::size_t n_symbols, std::size_t shaping_samples,
                                  std::uint64_t seed, ShapingResult* shaping_out) {
    if (n_symbols == 0) throw std::invalid_argument("transmit_round: need at least one symbol");
    const ShapingResult shaping = shape_constellation(model, geo, sched, spec.snr_db,
                                                      shaping_samples, mix_seed(seed, "shape"));
    if (shaping_out) *shaping_out = shaping;
    TransmissionRecord rec;
    Rng sym_rng = substream(seed, "txsym");
    rec.tx_indices = sample_symbols(shaping.distribution, n_symbols, sym_rng);
    rec.tx_points.reserve(n_symbols);
    for (const int s : rec.tx_indices) rec.tx_points.push_back(geo.points[s]);
    Rng chan_rng = substream(seed, "chan");
    rec.rx_points = apply_channel(rec.tx_points, spec, chan_rng);
    rec.rx_indices =
        reconstruct(rec.rx_points, model, sched, geo, spec.snr_db, mix_seed(seed, "rx"));
    return rec;
}

} // namespace dcs
