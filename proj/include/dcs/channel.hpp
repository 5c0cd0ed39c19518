#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dcs/constellation.hpp"
#include "dcs/rng.hpp"

namespace dcs {

enum class NoiseFamily { gaussian, laplacian, exponential };

const char* family_name(NoiseFamily family);
NoiseFamily family_from_name(std::string_view name); // throws ConfigError on unknown names

struct ChannelSpec {
    NoiseFamily family = NoiseFamily::gaussian;
    double snr_db = 0.0;     // Gamma
    double avg_power = 1.0;  // P
};

// Total complex noise power delta^2 = P * 10^(-Gamma/10). SNRs above +60 dB
// are clamped so downstream variances never underflow to zero.
double snr_to_noise_power(double snr_db, double avg_power);

// y = x + n with per-coordinate noise variance delta_sq / 2 for every family.
// Gaussian and Laplacian noise are zero-mean; exponential noise is one-sided
// and added without mean-centering. delta_sq == 0 returns x unchanged.
Batch add_noise(std::span<const IQ> x, NoiseFamily family, double delta_sq, Rng& rng);
Batch apply_channel(std::span<const IQ> x, const ChannelSpec& spec, Rng& rng);

struct SyntheticSamples {
    std::vector<int> symbols; // uniformly drawn symbol indices
    Batch clean;              // their constellation points
    Batch noisy;              // points plus Gaussian noise of power delta^2
};

// The transmitter-side synthetic receive samples: N_s uniform constellation
// draws plus Gaussian noise at the power implied by snr_db.
SyntheticSamples synthesize_noisy_symbols(const ConstellationGeometry& geo, double snr_db,
                                          double avg_power, std::size_t n_samples, Rng& rng);

} // namespace dcs
