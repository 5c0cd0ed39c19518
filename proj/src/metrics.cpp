#include "dcs/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace dcs {

JointHistogram joint_histogram(std::span<const int> tx, std::span<const int> rx, int order) {
    if (tx.size() != rx.size())
        throw std::invalid_argument("joint_histogram: index batches differ in length");
    if (tx.empty()) throw std::invalid_argument("joint_histogram: empty input");
    JointHistogram hist;
    hist.order = order;
    hist.counts.assign(static_cast<std::size_t>(order) * order, 0);
    for (std::size_t n = 0; n < tx.size(); ++n) {
        if (tx[n] < 0 || tx[n] >= order || rx[n] < 0 || rx[n] >= order)
            throw std::out_of_range("joint_histogram: symbol index out of range");
        ++hist.counts[static_cast<std::size_t>(tx[n]) * order + rx[n]];
    }
    hist.total = static_cast<std::int64_t>(tx.size());
    return hist;
}

double mutual_information(const JointHistogram& hist) {
    const int m = hist.order;
    const double total = static_cast<double>(hist.total);
    std::vector<double> p_tx(m, 0.0), p_rx(m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double p = hist.at(i, j) / total;
            p_tx[i] += p;
            p_rx[j] += p;
        }
    double mi = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double p = hist.at(i, j) / total;
            if (p > 0.0) mi += p * std::log2(p / (p_tx[i] * p_rx[j]));
        }
    return mi < 0.0 ? 0.0 : mi;
}

double mutual_information(std::span<const int> tx, std::span<const int> rx, int order) {
    return mutual_information(joint_histogram(tx, rx, order));
}

double cosine_similarity(std::span<const IQ> tx, std::span<const IQ> rx) {
    if (tx.size() != rx.size())
        throw std::invalid_argument("cosine_similarity: point batches differ in length");
    if (tx.empty()) throw std::invalid_argument("cosine_similarity: empty input");
    double dot_i = 0.0, dot_q = 0.0, ni_tx = 0.0, ni_rx = 0.0, nq_tx = 0.0, nq_rx = 0.0;
    for (std::size_t n = 0; n < tx.size(); ++n) {
        dot_i += tx[n].i * rx[n].i;
        dot_q += tx[n].q * rx[n].q;
        ni_tx += tx[n].i * tx[n].i;
        ni_rx += rx[n].i * rx[n].i;
        nq_tx += tx[n].q * tx[n].q;
        nq_rx += rx[n].q * rx[n].q;
    }
    if (ni_tx == 0.0 || ni_rx == 0.0 || nq_tx == 0.0 || nq_rx == 0.0)
        throw std::invalid_argument("cosine_similarity: zero-norm component vector");
    const double cos_i = dot_i / std::sqrt(ni_tx * ni_rx);
    const double cos_q = dot_q / std::sqrt(nq_tx * nq_rx);
    return 0.5 * (cos_i + cos_q);
}

double symbol_error_rate(std::span<const int> tx, std::span<const int> rx) {
    if (tx.size() != rx.size())
        throw std::invalid_argument("symbol_error_rate: index batches differ in length");
    if (tx.empty()) throw std::invalid_argument("symbol_error_rate: empty input");
    std::size_t errors = 0;
    for (std::size_t n = 0; n < tx.size(); ++n) errors += tx[n] != rx[n];
    return static_cast<double>(errors) / static_cast<double>(tx.size());
}

double entropy_bits(const ShapingDistribution& dist) {
    double h = 0.0;
    for (const double p : dist.probs)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

} // namespace dcs
