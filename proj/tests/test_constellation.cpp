#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "dcs/constellation.hpp"
#include "dcs/rng.hpp"

using namespace dcs;

namespace {

int hamming(const std::string& a, const std::string& b) {
    int d = 0;
    for (std::size_t k = 0; k < a.size(); ++k) d += a[k] != b[k];
    return d;
}

double mean_energy(const ConstellationGeometry& geo) {
    double e = 0.0;
    for (const IQ& p : geo.points) e += p.i * p.i + p.q * p.q;
    return e / geo.order;
}

} // namespace

TEST_CASE("16-QAM geometry basics") {
    const ConstellationGeometry geo = qam_geometry(16);
    CHECK(geo.order == 16);
    CHECK(geo.points.size() == 16);
    CHECK(geo.bits_per_symbol == 4);
    for (const auto& label : geo.labels) CHECK(label.size() == 4);
    CHECK(mean_energy(geo) == doctest::Approx(1.0).epsilon(1e-12));

    // corner point (3, 3)/sqrt(10) has squared magnitude 18/10
    const double c = 3.0 / std::sqrt(10.0);
    bool found = false;
    for (const IQ& p : geo.points)
        if (p.i == doctest::Approx(c).epsilon(1e-15) && p.q == doctest::Approx(c).epsilon(1e-15)) {
            found = true;
            CHECK(p.i * p.i + p.q * p.q == doctest::Approx(1.8).epsilon(1e-14));
        }
    CHECK(found);
}

TEST_CASE("64-QAM geometry scale") {
    const ConstellationGeometry geo = qam_geometry(64);
    CHECK(geo.order == 64);
    CHECK(mean_energy(geo) == doctest::Approx(1.0).epsilon(1e-12));
    // outermost level is 7/sqrt(42)
    double max_i = 0.0;
    for (const IQ& p : geo.points) max_i = std::max(max_i, p.i);
    CHECK(max_i == doctest::Approx(7.0 / std::sqrt(42.0)).epsilon(1e-14));
}

TEST_CASE("unsupported order is rejected") {
    CHECK_THROWS_AS(qam_geometry(32), std::invalid_argument);
    CHECK_THROWS_AS(qam_geometry(4), std::invalid_argument);
}

TEST_CASE("points and labels are distinct; axis neighbors differ in one bit") {
    for (const int m : {16, 64}) {
        const ConstellationGeometry geo = qam_geometry(m);
        std::set<std::pair<double, double>> pts;
        std::set<std::string> labels;
        for (int k = 0; k < m; ++k) {
            pts.insert({geo.points[k].i, geo.points[k].q});
            labels.insert(geo.labels[k]);
        }
        CHECK(pts.size() == static_cast<std::size_t>(m));
        CHECK(labels.size() == static_cast<std::size_t>(m));

        // neighbors along one axis (minimum spacing) must be Gray-adjacent
        double spacing = 1e300;
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b) {
                const double di = std::fabs(geo.points[a].i - geo.points[b].i);
                const double dq = std::fabs(geo.points[a].q - geo.points[b].q);
                if (dq < 1e-12 && di > 1e-12) spacing = std::min(spacing, di);
            }
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                if (a == b) continue;
                const double di = std::fabs(geo.points[a].i - geo.points[b].i);
                const double dq = std::fabs(geo.points[a].q - geo.points[b].q);
                const bool i_neighbor = dq < 1e-12 && std::fabs(di - spacing) < 1e-12;
                const bool q_neighbor = di < 1e-12 && std::fabs(dq - spacing) < 1e-12;
                if (i_neighbor || q_neighbor) CHECK(hamming(geo.labels[a], geo.labels[b]) == 1);
            }
    }
}

TEST_CASE("projection basics") {
    const ConstellationGeometry geo = qam_geometry(16);
    for (int k = 0; k < 16; ++k) CHECK(project_one(geo.points[k], geo) == k);

    // far outside the grid, the nearest point is the matching corner
    const int corner = project_one({10.0, 10.0}, geo);
    const double c = 3.0 / std::sqrt(10.0);
    CHECK(geo.points[corner].i == doctest::Approx(c));
    CHECK(geo.points[corner].q == doctest::Approx(c));
}

TEST_CASE("projection tie-break goes to the lowest index") {
    // synthetic two-point geometry where the midpoint distance is exactly equal
    ConstellationGeometry geo;
    geo.order = 2;
    geo.bits_per_symbol = 1;
    geo.points = {{-1.0, 0.0}, {1.0, 0.0}};
    geo.labels = {"0", "1"};
    CHECK(project_one({0.0, 0.0}, geo) == 0);
    CHECK(project_one({0.0, 5.0}, geo) == 0);

    // grid midpoint between two axis neighbors of the real geometry
    const ConstellationGeometry qam = qam_geometry(16);
    int a = 0, b = 0;
    for (int k = 0; k < 16 && b == 0; ++k)
        for (int l = k + 1; l < 16; ++l) {
            if (std::fabs(qam.points[k].q - qam.points[l].q) < 1e-12 &&
                std::fabs(qam.points[k].i - qam.points[l].i) > 1e-12) {
                a = std::min(k, l);
                b = std::max(k, l);
                break;
            }
        }
    const IQ mid{qam.points[a].i + 0.5 * (qam.points[b].i - qam.points[a].i), qam.points[a].q};
    const double da = std::hypot(mid.i - qam.points[a].i, mid.q - qam.points[a].q);
    const double db = std::hypot(mid.i - qam.points[b].i, mid.q - qam.points[b].q);
    if (da == db) CHECK(project_one(mid, qam) == a);
}

TEST_CASE("projection is idempotent") {
    const ConstellationGeometry geo = qam_geometry(64);
    Rng rng(5);
    Batch pts(500);
    for (IQ& p : pts) p = {3.0 * rng.normal(), 3.0 * rng.normal()};
    const std::vector<int> first = project(pts, geo);
    Batch mapped;
    for (const int k : first) mapped.push_back(geo.points[k]);
    CHECK(project(mapped, geo) == first);
}

TEST_CASE("count_occurrences") {
    CHECK(count_occurrences(std::vector<int>{}, 4) == std::vector<std::int64_t>{0, 0, 0, 0});
    const std::vector<int> idx = {0, 0, 1};
    CHECK(count_occurrences(idx, 4) == std::vector<std::int64_t>{2, 1, 0, 0});
    const std::vector<int> bad = {0, 4};
    CHECK_THROWS_AS(count_occurrences(bad, 4), std::out_of_range);

    // binomial 5-sigma sanity on uniform draws
    Rng rng(17);
    const int n = 10000, m = 16;
    std::vector<int> draws(n);
    for (int& s : draws) s = static_cast<int>(rng.below(m));
    const auto counts = count_occurrences(draws, m);
    const double expected = static_cast<double>(n) / m;
    const double sigma = std::sqrt(n * (1.0 / m) * (1.0 - 1.0 / m));
    for (const auto c : counts) CHECK(std::fabs(c - expected) < 5.0 * sigma);
}

TEST_CASE("empirical_distribution") {
    const ShapingDistribution half = empirical_distribution({5, 5}, 10);
    CHECK(half.probs == std::vector<double>{0.5, 0.5});
    CHECK(half.valid());

    const ShapingDistribution hot = empirical_distribution({0, 0, 7, 0}, 7);
    CHECK(hot.probs[2] == 1.0);
    CHECK(hot.valid());

    CHECK_THROWS_AS(empirical_distribution({0, 0}, 0), std::invalid_argument);
}

TEST_CASE("sample_symbols") {
    ShapingDistribution hot;
    hot.probs = {0.0, 0.0, 1.0, 0.0};
    Rng rng(23);
    for (const int s : sample_symbols(hot, 1000, rng)) CHECK(s == 2);

    ShapingDistribution uniform;
    uniform.probs.assign(16, 1.0 / 16.0);
    const auto draws = sample_symbols(uniform, 100000, rng);
    const auto counts = count_occurrences(draws, 16);
    for (const auto c : counts)
        CHECK(std::fabs(c / 100000.0 - 1.0 / 16.0) < 0.01);

    CHECK(sample_symbols(uniform, 0, rng).empty());
}

TEST_CASE("bit mapping round-trips and conventions") {
    for (const int m : {16, 64}) {
        const ConstellationGeometry geo = qam_geometry(m);
        Rng rng(31);
        std::vector<std::uint8_t> bits(geo.bits_per_symbol * 50);
        for (auto& b : bits) b = static_cast<std::uint8_t>(rng.below(2));
        const std::vector<int> symbols = bits_to_symbols(bits, geo);
        CHECK(symbols_to_bits(symbols, geo) == bits);

        const std::vector<std::uint8_t> zeros(geo.bits_per_symbol, 0);
        const int s0 = bits_to_symbols(zeros, geo)[0];
        CHECK(geo.labels[s0] == std::string(geo.bits_per_symbol, '0'));
    }
    const ConstellationGeometry geo = qam_geometry(16);
    const std::vector<std::uint8_t> bad(5, 0);
    CHECK_THROWS_AS(bits_to_symbols(bad, geo), std::invalid_argument);
}

TEST_CASE("geometry CSV header") {
    const ConstellationGeometry geo = qam_geometry(16);
    std::ostringstream out;
    write_geometry_csv(geo, out);
    CHECK(out.str().substr(0, 15) == "index,i,q,bits\n");
}
