#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcs/constellation.hpp"

namespace dcs {

struct JointHistogram {
    int order = 0;
    std::vector<std::int64_t> counts; // order x order, tx-major
    std::int64_t total = 0;

    std::int64_t at(int tx, int rx) const { return counts[static_cast<std::size_t>(tx) * order + rx]; }
};

JointHistogram joint_histogram(std::span<const int> tx, std::span<const int> rx, int order);

// Plug-in estimator over the empirical joint, in bits; 0 log 0 terms are 0.
double mutual_information(const JointHistogram& hist);
double mutual_information(std::span<const int> tx, std::span<const int> rx, int order);

// Mean of the I-component and Q-component cosine similarities.
double cosine_similarity(std::span<const IQ> tx, std::span<const IQ> rx);

double symbol_error_rate(std::span<const int> tx, std::span<const int> rx);

double entropy_bits(const ShapingDistribution& dist);

} // namespace dcs
