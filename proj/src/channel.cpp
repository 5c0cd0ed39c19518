#include "dcs/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dcs/errors.hpp"

namespace dcs {

const char* family_name(NoiseFamily family) {
    switch (family) {
        case NoiseFamily::gaussian: return "gaussian";
        case NoiseFamily::laplacian: return "laplacian";
        case NoiseFamily::exponential: return "exponential";
    }
    return "?";
}

NoiseFamily family_from_name(std::string_view name) {
    if (name == "gaussian") return NoiseFamily::gaussian;
    if (name == "laplacian") return NoiseFamily::laplacian;
    if (name == "exponential") return NoiseFamily::exponential;
    throw ConfigError("unknown noise family '" + std::string(name) +
                      "' (expected gaussian, laplacian or exponential)");
}

double snr_to_noise_power(double snr_db, double avg_power) {
    if (!(avg_power > 0.0))
        throw std::invalid_argument("snr_to_noise_power: average power must be positive");
    if (!std::isfinite(snr_db))
        throw std::invalid_argument("snr_to_noise_power: SNR must be finite");
    const double clamped = snr_db > 60.0 ? 60.0 : snr_db;
    return avg_power * std::pow(10.0, -clamped / 10.0);
}

Batch add_noise(std::span<const IQ> x, NoiseFamily family, double delta_sq, Rng& rng) {
    if (delta_sq < 0.0) throw std::invalid_argument("add_noise: negative noise power");
    Batch y(x.begin(), x.end());
    if (delta_sq == 0.0) return y;
    const double coord_var = delta_sq / 2.0;
    switch (family) {
        case NoiseFamily::gaussian: {
            const double sd = std::sqrt(coord_var);
            for (IQ& p : y) {
                p.i += sd * rng.normal();
                p.q += sd * rng.normal();
            }
            break;
        }
        case NoiseFamily::laplacian: {
            // variance of Laplace(b) is 2 b^2, so b = sqrt(delta_sq / 4)
            const double b = std::sqrt(delta_sq / 4.0);
            for (IQ& p : y) {
                p.i += rng.laplace(b);
                p.q += rng.laplace(b);
            }
            break;
        }
        case NoiseFamily::exponential: {
            // variance of Exp(rate) is 1/rate^2; one-sided, not centered
            const double rate = std::sqrt(1.0 / coord_var);
            for (IQ& p : y) {
                p.i += rng.exponential(rate);
                p.q += rng.exponential(rate);
            }
            break;
        }
    }
    return y;
}

Batch apply_channel(std::span<const IQ> x, const ChannelSpec& spec, Rng& rng) {
    return add_noise(x, spec.family, snr_to_noise_power(spec.snr_db, spec.avg_power), rng);
}

SyntheticSamples synthesize_noisy_symbols(const ConstellationGeometry& geo, double snr_db,
                                          double avg_power, std::size_t n_samples, Rng& rng) {
    if (n_samples == 0)
        throw std::invalid_argument("synthesize_noisy_symbols: need at least one sample");
    const double delta_sq = snr_to_noise_power(snr_db, avg_power);
    const double sd = std::sqrt(delta_sq / 2.0);
    SyntheticSamples out;
    out.symbols.resize(n_samples);
    out.clean.resize(n_samples);
    out.noisy.resize(n_samples);
    for (std::size_t n = 0; n < n_samples; ++n) {
        const int s = static_cast<int>(rng.below(geo.points.size()));
        out.symbols[n] = s;
        out.clean[n] = geo.points[s];
        out.noisy[n] = {out.clean[n].i + sd * rng.normal(), out.clean[n].q + sd * rng.normal()};
    }
    return out;
}

} // namespace dcs
