#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "dcs/nn.hpp"
#include "dcs/serialize.hpp"
#include "reference.hpp"

using namespace dcs;

namespace {

DenoiserModel small_model(std::uint64_t seed, int steps = 5, int hidden = 6) {
    DenoiserModel m(steps, hidden);
    Rng rng = substream(seed, "init");
    m.init_weights(rng);
    return m;
}

} // namespace

TEST_CASE("all-zero weights: output equals the output bias") {
    DenoiserModel m(4, 8); // constructed zeroed, never initialized
    const Batch out = denoiser_forward(m, Batch{{0.7, -0.2}, {3.0, 4.0}}, std::vector<int>{1, 4});
    for (const IQ& p : out) {
        CHECK(p.i == 0.0);
        CHECK(p.q == 0.0);
    }
}

TEST_CASE("forward matches the scalar-by-scalar reference") {
    for (int seed = 0; seed < 5; ++seed) {
        const DenoiserModel m = small_model(seed, 7, 10);
        Rng rng = substream(seed, "pts");
        for (int k = 0; k < 20; ++k) {
            const IQ x{rng.normal(), rng.normal()};
            const int t = 1 + static_cast<int>(rng.below(7));
            const Batch got = denoiser_forward(m, Batch{x}, std::vector<int>{t});
            const IQ want = ref::denoiser_forward_one(m, x, t);
            CHECK(got[0].i == doctest::Approx(want.i).epsilon(1e-12));
            CHECK(got[0].q == doctest::Approx(want.q).epsilon(1e-12));
        }
    }
    // the [DERIVED] pinned case: x = (1, 0), t = 1
    const DenoiserModel m = small_model(99, 5, 6);
    const Batch got = denoiser_forward(m, Batch{{1.0, 0.0}}, std::vector<int>{1});
    const IQ want = ref::denoiser_forward_one(m, {1.0, 0.0}, 1);
    CHECK(got[0].i == doctest::Approx(want.i).epsilon(1e-13));
    CHECK(got[0].q == doctest::Approx(want.q).epsilon(1e-13));
}

TEST_CASE("forward validates inputs") {
    const DenoiserModel m = small_model(1);
    const Batch x{{0.0, 0.0}};
    CHECK_THROWS_AS(denoiser_forward(m, x, std::vector<int>{0}), std::out_of_range);
    CHECK_THROWS_AS(denoiser_forward(m, x, std::vector<int>{6}), std::out_of_range);
    const Batch bad{{std::nan(""), 0.0}};
    CHECK_THROWS_AS(denoiser_forward(m, bad, std::vector<int>{1}), std::invalid_argument);
}

TEST_CASE("forward is bit-deterministic") {
    const DenoiserModel m = small_model(3, 9, 32);
    Rng rng(55);
    Batch x(40);
    std::vector<int> t(40);
    for (int k = 0; k < 40; ++k) {
        x[k] = {rng.normal(), rng.normal()};
        t[k] = 1 + static_cast<int>(rng.below(9));
    }
    const Batch a = denoiser_forward(m, x, t);
    const Batch b = denoiser_forward(m, x, t);
    for (int k = 0; k < 40; ++k) {
        CHECK(a[k].i == b[k].i);
        CHECK(a[k].q == b[k].q);
    }
}

TEST_CASE("backward: zero upstream and untouched embedding rows give zero gradient") {
    const DenoiserModel m = small_model(4, 6, 8);
    const Batch x{{0.4, -1.0}, {0.1, 0.2}};
    const std::vector<int> t{2, 2};
    const Batch zero_up{{0.0, 0.0}, {0.0, 0.0}};
    const std::vector<double> zeros = denoiser_backward(m, x, t, zero_up);
    for (const double g : zeros) CHECK(g == 0.0);

    const Batch up{{1.0, -0.5}, {0.3, 0.8}};
    const std::vector<double> grads = denoiser_backward(m, x, t, up);
    // only t = 2 was used: rows for every other t stay exactly zero
    for (int k = 0; k < DenoiserModel::kHiddenLayers; ++k)
        for (int step = 1; step <= 6; ++step) {
            if (step == 2) continue;
            const std::size_t off =
                m.embed_off(k) + static_cast<std::size_t>(step - 1) * m.hidden_dim();
            for (int j = 0; j < m.hidden_dim(); ++j) CHECK(grads[off + j] == 0.0);
        }
}

TEST_CASE("backward matches central finite differences") {
    for (int seed = 0; seed < 5; ++seed) {
        DenoiserModel m = small_model(200 + seed, 5, 6);
        Rng rng = substream(seed, "fd");
        const int batch = 3;
        Batch x(batch), up(batch);
        std::vector<int> t(batch);
        for (int k = 0; k < batch; ++k) {
            x[k] = {rng.normal(), rng.normal()};
            t[k] = 1 + static_cast<int>(rng.below(5));
            up[k] = {rng.normal(), rng.normal()};
        }
        const std::vector<double> analytic = denoiser_backward(m, x, t, up);
        auto j_of_theta = [&]() {
            const Batch out = denoiser_forward(m, x, t);
            double j = 0.0;
            for (int k = 0; k < batch; ++k) j += up[k].i * out[k].i + up[k].q * out[k].q;
            return j;
        };
        CHECK(ref::max_grad_err(j_of_theta, m.params(), analytic) < 1e-4);
    }
}

TEST_CASE("backward rejects shape mismatches") {
    const DenoiserModel m = small_model(5);
    const Batch x{{0.0, 0.0}};
    const std::vector<int> t{1};
    const Batch up2{{1.0, 0.0}, {0.0, 1.0}};
    CHECK_THROWS_AS(denoiser_backward(m, x, t, up2), std::invalid_argument);
}

TEST_CASE("adam single-step and two-step behavior") {
    // zero gradient with zero moments leaves parameters unchanged
    std::vector<double> w{0.5, -0.25};
    AdamState state(2);
    adam_step(w, std::vector<double>{0.0, 0.0}, state);
    CHECK(w[0] == 0.5);
    CHECK(w[1] == -0.25);
    CHECK(state.step_count == 1);

    // hand-evaluated first step: w -= lr * 1/(1 + eps)
    std::vector<double> p{0.0};
    AdamState s1(1);
    adam_step(p, std::vector<double>{1.0}, s1);
    CHECK(p[0] == doctest::Approx(-1e-3).epsilon(1e-6));

    // constant gradient keeps moving the parameter in the same direction
    const double after_one = p[0];
    adam_step(p, std::vector<double>{1.0}, s1);
    CHECK(s1.step_count == 2);
    CHECK(p[0] < after_one);
}

TEST_CASE("adam rejects mismatched shapes") {
    std::vector<double> p{0.0, 1.0};
    AdamState s(2);
    CHECK_THROWS_AS(adam_step(p, std::vector<double>{1.0}, s), std::invalid_argument);
}

TEST_CASE("ema_update convex combination") {
    DenoiserModel m(3, 4);
    std::fill(m.params().begin(), m.params().end(), 0.0);
    std::fill(m.ema_shadow().begin(), m.ema_shadow().end(), 1.0);

    m.ema_decay = 0.9;
    ema_update(m);
    for (const double v : m.ema_shadow()) CHECK(v == doctest::Approx(0.9));
    for (const double v : m.params()) CHECK(v == 0.0);

    m.ema_decay = 0.0;
    ema_update(m);
    for (const double v : m.ema_shadow()) CHECK(v == 0.0);

    std::fill(m.ema_shadow().begin(), m.ema_shadow().end(), 0.3);
    m.ema_decay = 1.0;
    ema_update(m);
    for (const double v : m.ema_shadow()) CHECK(v == 0.3);
}

TEST_CASE("ema shadow stays between previous shadow and live value") {
    DenoiserModel m = small_model(77, 4, 8);
    Rng rng(7);
    std::vector<double> prev = m.ema_shadow();
    for (int it = 0; it < 5; ++it) {
        for (double& v : m.params()) v += 0.1 * rng.normal();
        m.ema_decay = 0.7;
        ema_update(m);
        for (std::size_t k = 0; k < prev.size(); ++k) {
            const double lo = std::min(prev[k], m.params()[k]);
            const double hi = std::max(prev[k], m.params()[k]);
            CHECK(m.ema_shadow()[k] >= lo - 1e-15);
            CHECK(m.ema_shadow()[k] <= hi + 1e-15);
        }
        prev = m.ema_shadow();
    }
}

TEST_CASE("model serialization round-trips exactly") {
    const DenoiserModel m = small_model(31, 6, 10);
    const DiffusionSchedule sched = build_schedule(6);
    const std::string path =
        (std::filesystem::temp_directory_path() / "dcs_model_test.json").string();
    save_model(m, sched, 16, path);
    const TrainedModel loaded = load_model(path);
    CHECK(loaded.modulation_order == 16);
    CHECK(loaded.model.time_steps() == 6);
    CHECK(loaded.model.hidden_dim() == 10);
    CHECK(loaded.model.params() == m.params());
    CHECK(loaded.model.ema_shadow() == m.ema_shadow());
    CHECK(loaded.schedule.beta == sched.beta);
    std::filesystem::remove(path);
}
