#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dcs/rng.hpp"

namespace dcs {

struct IQ {
    double i = 0.0;
    double q = 0.0;
};

using Batch = std::vector<IQ>;

// Square QAM grid normalized to unit average symbol energy, with per-axis
// Gray labels concatenated I-then-Q. Immutable once built.
struct ConstellationGeometry {
    int order = 0;                   // M
    int bits_per_symbol = 0;         // log2(M)
    std::vector<IQ> points;          // size M
    std::vector<std::string> labels; // '0'/'1' strings, size M
};

ConstellationGeometry qam_geometry(int order);

// Euclidean nearest constellation point; ties resolve to the lowest index.
int project_one(IQ p, const ConstellationGeometry& geo);
std::vector<int> project(std::span<const IQ> pts, const ConstellationGeometry& geo);

std::vector<std::int64_t> count_occurrences(std::span<const int> indices, int order);

struct ShapingDistribution {
    std::vector<double> probs;

    // entries >= 0 and summing to 1 within 1e-9
    bool valid() const;
};

ShapingDistribution empirical_distribution(const std::vector<std::int64_t>& counts,
                                           std::int64_t n_samples);

std::vector<int> sample_symbols(const ShapingDistribution& dist, std::size_t n, Rng& rng);

// Gray bit mapping and its inverse; bit streams are MSB-first per symbol.
std::vector<int> bits_to_symbols(std::span<const std::uint8_t> bits,
                                 const ConstellationGeometry& geo);
std::vector<std::uint8_t> symbols_to_bits(std::span<const int> symbols,
                                          const ConstellationGeometry& geo);

// CSV dump with header "index,i,q,bits" for plotting scripts.
void write_geometry_csv(const ConstellationGeometry& geo, std::ostream& out);

} // namespace dcs
