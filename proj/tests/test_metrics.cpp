#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dcs/metrics.hpp"
#include "dcs/rng.hpp"

using namespace dcs;

TEST_CASE("mutual information on an identity channel") {
    std::vector<int> tx;
    for (int rep = 0; rep < 100; ++rep)
        for (int s = 0; s < 16; ++s) tx.push_back(s);
    CHECK(mutual_information(tx, tx, 16) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("mutual information of independent uniform streams is near zero") {
    Rng rng(77);
    const int n = 100000;
    std::vector<int> a(n), b(n);
    for (int k = 0; k < n; ++k) {
        a[k] = static_cast<int>(rng.below(16));
        b[k] = static_cast<int>(rng.below(16));
    }
    const double mi = mutual_information(a, b, 16);
    CHECK(mi >= 0.0);
    CHECK(mi < 0.02); // plug-in bias is about (M-1)^2 / (2 n ln 2)
}

TEST_CASE("mutual information of a hand-evaluated joint") {
    // joint [[0.4, 0.1], [0.1, 0.4]] realized as exact counts
    std::vector<int> tx, rx;
    auto add = [&](int a, int b, int count) {
        for (int k = 0; k < count; ++k) {
            tx.push_back(a);
            rx.push_back(b);
        }
    };
    add(0, 0, 40);
    add(0, 1, 10);
    add(1, 0, 10);
    add(1, 1, 40);
    const double want = 1.0 + 0.8 * std::log2(0.8) + 0.2 * std::log2(0.2);
    CHECK(mutual_information(tx, rx, 2) == doctest::Approx(want).epsilon(1e-12));
    CHECK(want == doctest::Approx(0.278072).epsilon(1e-5));
}

TEST_CASE("mutual information properties on random joints") {
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const int m = 8;
        const int n = 2000;
        std::vector<int> tx(n), rx(n);
        for (int k = 0; k < n; ++k) {
            tx[k] = static_cast<int>(rng.below(m));
            // correlated output: keep tx half the time, otherwise re-draw
            rx[k] = rng.uniform() < 0.5 ? tx[k] : static_cast<int>(rng.below(m));
        }
        const double mi = mutual_information(tx, rx, m);
        CHECK(mi >= 0.0);
        CHECK(mi == doctest::Approx(mutual_information(rx, tx, m)).epsilon(1e-12));

        const auto hist = joint_histogram(tx, rx, m);
        double h_tx = 0.0, h_rx = 0.0;
        for (int i = 0; i < m; ++i) {
            double pi = 0.0, pj = 0.0;
            for (int j = 0; j < m; ++j) {
                pi += hist.at(i, j);
                pj += hist.at(j, i);
            }
            if (pi > 0) h_tx -= pi / n * std::log2(pi / n);
            if (pj > 0) h_rx -= pj / n * std::log2(pj / n);
        }
        CHECK(mi <= std::min(h_tx, h_rx) + 1e-12);
    }
}

TEST_CASE("coarser discretization of the channel output never gains information") {
    // tx through a noisy channel; quantize y on a fine 8x8 grid vs projecting
    // onto the 16 constellation points. The finer alphabet keeps at least as
    // much information about tx.
    const ConstellationGeometry geo = qam_geometry(16);
    Rng rng(44);
    const int n = 40000;
    std::vector<int> tx(n), fine(n);
    Batch y(n);
    for (int k = 0; k < n; ++k) {
        tx[k] = static_cast<int>(rng.below(16));
        y[k] = {geo.points[tx[k]].i + 0.4 * rng.normal(),
                geo.points[tx[k]].q + 0.4 * rng.normal()};
        const int qi = std::min(7, std::max(0, static_cast<int>((y[k].i + 1.6) / 0.4)));
        const int qq = std::min(7, std::max(0, static_cast<int>((y[k].q + 1.6) / 0.4)));
        fine[k] = qi * 8 + qq;
    }
    const std::vector<int> coarse = project(y, geo);
    // MI over the fine alphabet needs a common order; reuse 64 for both
    std::vector<int> coarse64 = coarse;
    const double mi_fine = mutual_information(tx, fine, 64);
    const double mi_coarse = mutual_information(tx, coarse64, 64);
    CHECK(mi_fine >= mi_coarse - 1e-9);
}

TEST_CASE("mutual information rejects empty and mismatched input") {
    const std::vector<int> empty;
    CHECK_THROWS_AS(mutual_information(empty, empty, 4), std::invalid_argument);
    const std::vector<int> one{0};
    CHECK_THROWS_AS(mutual_information(one, empty, 4), std::invalid_argument);
}

TEST_CASE("cosine similarity endpoints") {
    const Batch tx{{1.0, 0.5}, {-0.3, 0.7}, {0.2, -0.9}};
    Batch neg;
    for (const IQ& p : tx) neg.push_back({-p.i, -p.q});
    CHECK(cosine_similarity(tx, tx) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine_similarity(tx, neg) == doctest::Approx(-1.0).epsilon(1e-12));

    // orthogonal component vectors
    const Batch a{{1.0, 1.0}, {0.0, 0.0}, {1.0, -1.0}};
    const Batch b{{0.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}};
    CHECK(cosine_similarity(a, b) == doctest::Approx(0.0));
}

TEST_CASE("cosine similarity is invariant under common positive scaling") {
    Rng rng(8);
    Batch tx(50), rx(50);
    for (int k = 0; k < 50; ++k) {
        tx[k] = {rng.normal(), rng.normal()};
        rx[k] = {rng.normal(), rng.normal()};
    }
    const double base = cosine_similarity(tx, rx);
    Batch tx3, rx7;
    for (const IQ& p : tx) tx3.push_back({3.0 * p.i, 3.0 * p.q});
    for (const IQ& p : rx) rx7.push_back({7.0 * p.i, 7.0 * p.q});
    CHECK(cosine_similarity(tx3, rx7) == doctest::Approx(base).epsilon(1e-12));
    CHECK(base >= -1.0);
    CHECK(base <= 1.0);
}

TEST_CASE("cosine similarity rejects zero-norm components") {
    const Batch tx{{0.0, 1.0}};
    const Batch rx{{1.0, 1.0}};
    CHECK_THROWS_AS(cosine_similarity(tx, rx), std::invalid_argument);
}

TEST_CASE("symbol error rate") {
    const std::vector<int> a{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(symbol_error_rate(a, a) == 0.0);
    std::vector<int> b = a;
    for (int& s : b) s += 1;
    CHECK(symbol_error_rate(a, b) == 1.0);
    b = a;
    b[3] = 99;
    CHECK(symbol_error_rate(a, b) == doctest::Approx(0.1));
    const std::vector<int> empty;
    CHECK_THROWS_AS(symbol_error_rate(empty, empty), std::invalid_argument);
}

TEST_CASE("entropy") {
    ShapingDistribution uniform;
    uniform.probs.assign(16, 1.0 / 16.0);
    CHECK(entropy_bits(uniform) == doctest::Approx(4.0).epsilon(1e-12));

    ShapingDistribution hot;
    hot.probs = {0.0, 1.0, 0.0};
    CHECK(entropy_bits(hot) == 0.0);

    ShapingDistribution half;
    half.probs = {0.5, 0.5, 0.0, 0.0};
    CHECK(entropy_bits(half) == doctest::Approx(1.0).epsilon(1e-12));
}
