#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcs/channel.hpp"
#include "dcs/constellation.hpp"
#include "dcs/diffusion.hpp"
#include "dcs/nn.hpp"

namespace dcs {

// Entry step for SNR-matched reverse sampling: the smallest t whose marginal
// noise level, after scaling the observation by sqrt(alpha_bar_t), is at
// least the channel noise, i.e. alpha_bar_t <= 2 / (2 + delta^2). Clean
// channels enter near t = 1 (barely any denoising); once the channel noise
// exceeds what the schedule can express the full chain from t = T runs.
// Entering the chain at x_T = y regardless of SNR would make the sampler
// treat every observation as maximally noisy and re-draw the symbol from the
// terminal posterior, which destroys the transmitted information at high SNR.
int matched_entry_step(const DiffusionSchedule& sched, double snr_db, double avg_power = 1.0);

struct ShapingResult {
    ShapingDistribution distribution;
    Batch raw_outputs;           // denoised points before projection
    double snr_db = 0.0;
    int entry_step = 0;          // reverse chain entry t*
    bool model_untrained = false;
};

// Transmitter-side shaping: synthesize uniform symbols plus Gaussian noise
// at the channel SNR, run the SNR-matched reverse loop on them, project onto
// the constellation and normalize the occurrence counts.
ShapingResult shape_constellation(const DenoiserModel& model, const ConstellationGeometry& geo,
                                  const DiffusionSchedule& sched, double snr_db,
                                  std::size_t n_samples, std::uint64_t seed);

// Receiver-side reconstruction: the same SNR-matched reverse loop applied to
// the received batch, projected onto the constellation. The receiver shares
// the transmitter's channel-SNR knowledge within a transmission slot.
std::vector<int> reconstruct(std::span<const IQ> received, const DenoiserModel& model,
                             const DiffusionSchedule& sched, const ConstellationGeometry& geo,
                             double snr_db, std::uint64_t seed);

struct TransmissionRecord {
    std::vector<int> tx_indices;
    Batch tx_points;
    Batch rx_points;             // channel outputs
    std::vector<int> rx_indices; // reconstructed symbols
};

// One end-to-end round: shape at spec.snr_db, draw symbols from the shaped
// distribution, push them through the channel, reconstruct. The same SNR
// drives the shaping, the channel and the receiver. The intermediate shaping
// result is copied to shaping_out when non-null.
TransmissionRecord transmit_round(const DenoiserModel& model, const ConstellationGeometry& geo,
                                  const DiffusionSchedule& sched, const ChannelSpec& spec,
                                  std::size_t n_symbols, std::size_t shaping_samples,
                                  std::uint64_t seed, ShapingResult* shaping_out = nullptr);

} // namespace dcs
