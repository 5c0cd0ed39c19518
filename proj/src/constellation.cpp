#include "dcs/constellation.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace dcs {

namespace {

int gray_encode(int v) { return v ^ (v >> 1); }

int gray_decode(int g) {
    int v = 0;
    for (; g; g >>= 1) v ^= g;
    return v;
}

std::string axis_bits(int gray, int nbits) {
    std::string s(nbits, '0');
    for (int b = 0; b < nbits; ++b)
        if (gray >> (nbits - 1 - b) & 1) s[b] = '1';
    return s;
}

} // namespace

ConstellationGeometry qam_geometry(int order) {
    if (order != 16 && order != 64)
        throw std::invalid_argument("qam_geometry: unsupported modulation order " +
                                    std::to_string(order));
    const int bits = order == 16 ? 4 : 6;
    const int per_axis = bits / 2;
    const int levels = 1 << per_axis; // 4 or 8

    // Unnormalized grid levels are +/-1, +/-3, ...; mean energy over the grid
    // is 10 for 16-QAM and 42 for 64-QAM.
    double energy = 0.0;
    for (int a = 0; a < levels; ++a) {
        const double l = 2.0 * a - (levels - 1);
        energy += 2.0 * l * l; // both axes
    }
    energy /= levels;
    const double scale = 1.0 / std::sqrt(energy);

    ConstellationGeometry geo;
    geo.order = order;
    geo.bits_per_symbol = bits;
    geo.points.reserve(order);
    geo.labels.reserve(order);
    for (int ai = 0; ai < levels; ++ai) {
        for (int aq = 0; aq < levels; ++aq) {
            const double li = 2.0 * ai - (levels - 1);
            const double lq = 2.0 * aq - (levels - 1);
            geo.points.push_back({li * scale, lq * scale});
            geo.labels.push_back(axis_bits(gray_encode(ai), per_axis) +
                                 axis_bits(gray_encode(aq), per_axis));
        }
    }
    return geo;
}

int project_one(IQ p, const ConstellationGeometry& geo) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < geo.order; ++k) {
        const double di = p.i - geo.points[k].i;
        const double dq = p.q - geo.points[k].q;
        const double d = di * di + dq * dq;
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

std::vector<int> project(std::span<const IQ> pts, const ConstellationGeometry& geo) {
    std::vector<int> out(pts.size());
    for (std::size_t n = 0; n < pts.size(); ++n) out[n] = project_one(pts[n], geo);
    return out;
}

std::vector<std::int64_t> count_occurrences(std::span<const int> indices, int order) {
    std::vector<std::int64_t> counts(order, 0);
    for (const int s : indices) {
        if (s < 0 || s >= order)
            throw std::out_of_range("count_occurrences: symbol index " + std::to_string(s) +
                                    " outside [0, " + std::to_string(order) + ")");
        ++counts[s];
    }
    return counts;
}

bool ShapingDistribution::valid() const {
    double sum = 0.0;
    for (const double p : probs) {
        if (!(p >= 0.0)) return false;
        sum += p;
    }
    return std::fabs(sum - 1.0) <= 1e-9;
}

ShapingDistribution empirical_distribution(const std::vector<std::int64_t>& counts,
                                           std::int64_t n_samples) {
    if (n_samples <= 0)
        throw std::invalid_argument("empirical_distribution: sample count must be positive");
    ShapingDistribution dist;
    dist.probs.reserve(counts.size());
    for (const auto c : counts) dist.probs.push_back(static_cast<double>(c) / n_samples);
    return dist;
}

std::vector<int> sample_symbols(const ShapingDistribution& dist, std::size_t n, Rng& rng) {
    if (!dist.valid())
        throw std::invalid_argument("sample_symbols: invalid shaping distribution");
    const int m = static_cast<int>(dist.probs.size());
    std::vector<double> cdf(dist.probs.size());
    double acc = 0.0;
    for (int k = 0; k < m; ++k) {
        acc += dist.probs[k];
        cdf[k] = acc;
    }
    cdf[m - 1] = 1.0;

    std::vector<int> out(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double u = rng.uniform();
        int lo = 0, hi = m - 1;
        while (lo < hi) {
            const int mid = (lo + hi) / 2;
            if (u < cdf[mid])
                hi = mid;
            else
                lo = mid + 1;
        }
        out[s] = lo;
    }
    return out;
}

std::vector<int> bits_to_symbols(std::span<const std::uint8_t> bits,
                                 const ConstellationGeometry& geo) {
    const int k = geo.bits_per_symbol;
    if (bits.size() % k != 0)
        throw std::invalid_argument("bits_to_symbols: bit length not divisible by " +
                                    std::to_string(k));
    const int per_axis = k / 2;
    const int levels = 1 << per_axis;
    std::vector<int> out;
    out.reserve(bits.size() / k);
    for (std::size_t off = 0; off < bits.size(); off += k) {
        int gi = 0, gq = 0;
        for (int b = 0; b < per_axis; ++b) gi = gi << 1 | (bits[off + b] & 1);
        for (int b = 0; b < per_axis; ++b) gq = gq << 1 | (bits[off + per_axis + b] & 1);
        out.push_back(gray_decode(gi) * levels + gray_decode(gq));
    }
    return out;
}

std::vector<std::uint8_t> symbols_to_bits(std::span<const int> symbols,
                                          const ConstellationGeometry& geo) {
    std::vector<std::uint8_t> out;
    out.reserve(symbols.size() * geo.bits_per_symbol);
    for (const int s : symbols) {
        if (s < 0 || s >= geo.order)
            throw std::out_of_range("symbols_to_bits: symbol index out of range");
        for (const char c : geo.labels[s]) out.push_back(c == '1' ? 1 : 0);
    }
    return out;
}

void write_geometry_csv(const ConstellationGeometry& geo, std::ostream& out) {
    out << "index,i,q,bits\n";
    char buf[128];
    for (int k = 0; k < geo.order; ++k) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%s\n", k, geo.points[k].i,
                      geo.points[k].q, geo.labels[k].c_str());
        out << buf;
    }
}

} // namespace dcs
