#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dcs/rng.hpp"

using namespace dcs;

TEST_CASE("streams are deterministic and tag/index separated") {
    Rng a = substream(42, "train");
    Rng b = substream(42, "train");
    Rng c = substream(42, "eval");
    Rng d = substream(42, "train", 1);
    bool same = true, diff_tag = false, diff_idx = false;
    for (int k = 0; k < 64; ++k) {
        const std::uint64_t va = a.next();
        same = same && va == b.next();
        diff_tag = diff_tag || va != c.next();
        diff_idx = diff_idx || va != d.next();
    }
    CHECK(same);
    CHECK(diff_tag);
    CHECK(diff_idx);
}

TEST_CASE("uniform lies in [0,1) and below() respects its bound") {
    Rng rng(7);
    for (int k = 0; k < 10000; ++k) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(rng.below(17) < 17);
    }
    Rng one(9);
    for (int k = 0; k < 100; ++k) CHECK(one.below(1) == 0);
}

TEST_CASE("normal moments") {
    Rng rng(100);
    const int n = 400000;
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double z = rng.normal();
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::fabs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::fabs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("laplace and exponential moments") {
    Rng rng(101);
    const int n = 400000;
    const double b = 0.7;
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double v = rng.laplace(b);
        sum += v;
        sum2 += v * v;
    }
    CHECK(std::fabs(sum / n) < 0.01);
    CHECK(sum2 / n == doctest::Approx(2.0 * b * b).epsilon(0.03));

    const double rate = 2.5;
    sum = 0.0;
    sum2 = 0.0;
    double minv = 1e300;
    for (int k = 0; k < n; ++k) {
        const double v = rng.exponential(rate);
        sum += v;
        sum2 += v * v;
        minv = std::min(minv, v);
    }
    const double mean = sum / n;
    CHECK(minv >= 0.0);
    CHECK(mean == doctest::Approx(1.0 / rate).epsilon(0.02));
    CHECK(sum2 / n - mean * mean == doctest::Approx(1.0 / (rate * rate)).epsilon(0.05));
}
