#include <doctest.h>

#include <cmath>

#include "memnav/core/errors.hpp"
#include "memnav/core/rng.hpp"
#include "memnav/reward/reward.hpp"

using namespace memnav;
using namespace memnav::reward;
using dynamics::Action;
using dynamics::FeatureVector;

namespace {

FeatureVector feat(double d_hor, double v_hor, double beta_p, double d_z, double v_z,
                   double chi_p, double psi) {
    return {d_hor, v_hor, beta_p, d_z, v_z, chi_p, psi};
}

// independent scalar recomputation of Eq-style shaping (different code path)
double oracle_progress(const FeatureVector& x, const Action& a, const Action& pa,
                       const RewardWeights& w) {
    double r = 0;
    r += w.lambda_d * x[0];
    double mis = x[5] + x[6] - x[2];
    while (mis > 3.14159265358979323846) mis -= 2 * 3.14159265358979323846;
    while (mis <= -3.14159265358979323846) mis += 2 * 3.14159265358979323846;
    r += w.lambda_b * std::fabs(mis);
    if (w.mode == SpeedMode::varying) {
        if (x[1] > w.v_max) r += w.lambda_v * x[1];
    } else {
        r += w.lambda_v * std::fabs(x[1] - w.v_desire);
    }
    r += w.lambda_z * std::fabs(x[3]);
    r += w.lambda_f * std::fabs(x[5]);
    const double dx = pa.accel.x - a.accel.x, dy = pa.accel.y - a.accel.y,
                 dz = pa.accel.z - a.accel.z;
    r += w.lambda_a * std::sqrt(dx * dx + dy * dy + dz * dz);
    if (r < -0.2) r = -0.2;
    if (r > 0.0) r = 0.0;
    return r;
}

} // namespace

TEST_CASE("progress reward vanishes at the goal with aligned zero motion") {
    RewardWeights w;
    CHECK(progress_reward(feat(0, 0, 0, 0, 0, 0, 0), Action{}, Action{}, w) == 0.0);
}

TEST_CASE("speed term is gated off below v_max in varying mode") {
    RewardWeights w;
    w.lambda_d = w.lambda_b = w.lambda_z = w.lambda_f = w.lambda_a = 0.0;
    w.lambda_v = -0.02;
    CHECK(progress_reward(feat(0, w.v_max / 2, 0, 0, 0, 0, 0), Action{}, Action{}, w) == 0.0);
    CHECK(progress_reward(feat(0, w.v_max + 1.0, 0, 0, 0, 0, 0), Action{}, Action{}, w) ==
          doctest::Approx(-0.02 * (w.v_max + 1.0)));
}

TEST_CASE("distance term evaluates exactly") {
    RewardWeights w;
    w.lambda_d = -0.001;
    w.lambda_b = w.lambda_v = w.lambda_z = w.lambda_f = w.lambda_a = 0.0;
    const double r = progress_reward(feat(2.0, 0, 0, 0, 0, 0, 0), Action{}, Action{}, w);
    CHECK(r == doctest::Approx(-0.002).epsilon(1e-12));
}

TEST_CASE("progress reward stays in [-0.2, 0] and matches the oracle over 1e6 samples") {
    Rng rng(12345);
    RewardWeights w;
    for (int i = 0; i < 1000000; ++i) {
        if (i % 2 == 0) {
            w.mode = SpeedMode::varying;
        } else {
            w.mode = SpeedMode::fixed;
            w.v_desire = 2.5;
        }
        const FeatureVector x =
            feat(rng.uniform(0, 5), rng.uniform(0, 8), rng.uniform(-3.14, 3.14),
                 rng.uniform(-6, 6), rng.uniform(-3, 3), rng.uniform(-3.14, 3.14),
                 rng.uniform(-3.14, 3.14));
        Action a, pa;
        a.accel = {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
        pa.accel = {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
        const double r = progress_reward(x, a, pa, w);
        REQUIRE(r >= -0.2);
        REQUIRE(r <= 0.0);
        REQUIRE(r == oracle_progress(x, a, pa, w));
    }
}

TEST_CASE("progress reward is monotone non-increasing in d_hor") {
    Rng rng(777);
    RewardWeights w;
    for (int i = 0; i < 20000; ++i) {
        const double d1 = rng.uniform(0, 4);
        const double d2 = d1 + rng.uniform(0, 2);
        FeatureVector x = feat(d1, rng.uniform(0, 6), rng.uniform(-3, 3), rng.uniform(-5, 5),
                               0, rng.uniform(-3, 3), rng.uniform(-3, 3));
        const double r1 = progress_reward(x, Action{}, Action{}, w);
        x[0] = d2;
        const double r2 = progress_reward(x, Action{}, Action{}, w);
        CHECK(r2 <= r1 + 1e-15);
    }
}

TEST_CASE("fixed mode peaks at v_desire") {
    RewardWeights w;
    w.mode = SpeedMode::fixed;
    w.v_desire = 2.5;
    const double at_desire =
        progress_reward(feat(1, 2.5, 0, 0, 0, 0, 0), Action{}, Action{}, w);
    for (double v = 0; v <= 6.0; v += 0.25) {
        const double r = progress_reward(feat(1, v, 0, 0, 0, 0, 0), Action{}, Action{}, w);
        CHECK(r <= at_desire + 1e-15);
    }
}

TEST_CASE("terminal rewards are the configured constants") {
    RewardWeights w;
    TerminalConstants c;
    const FeatureVector x = feat(1, 1, 0, 0, 0, 0, 0);

    auto [rc, tc] = total_reward({EventKind::collision, 13.0}, x, Action{}, Action{}, w, c);
    CHECK(rc == -2.0);
    CHECK(tc);

    auto [re, te] = total_reward({EventKind::exceed, 13.0}, x, Action{}, Action{}, w, c);
    CHECK(re == -2.0);
    CHECK(te);

    auto [ra, ta] = total_reward({EventKind::arrive, 10.0}, x, Action{}, Action{}, w, c);
    CHECK(ra == doctest::Approx(1.0));
    CHECK(ta);

    auto [r13, _t1] = total_reward({EventKind::arrive, 13.0}, x, Action{}, Action{}, w, c);
    auto [r3, _t2] = total_reward({EventKind::arrive, 3.0}, x, Action{}, Action{}, w, c);
    CHECK(r13 < r3); // harder maps pay more
    CHECK(r13 == doctest::Approx(10.0 / 13.0));
    CHECK(r3 == doctest::Approx(10.0 / 3.0));

    auto [rp, tp] = total_reward({EventKind::progress, 13.0}, x, Action{}, Action{}, w, c);
    CHECK(rp == progress_reward(x, Action{}, Action{}, w));
    CHECK_FALSE(tp);
}

TEST_CASE("arrive with out-of-range trav is a contract violation") {
    RewardWeights w;
    TerminalConstants c;
    const FeatureVector x = feat(0, 0, 0, 0, 0, 0, 0);
    CHECK_THROWS_AS(total_reward({EventKind::arrive, 2.0}, x, Action{}, Action{}, w, c),
                    RuntimeError);
    CHECK_THROWS_AS(total_reward({EventKind::arrive, 14.0}, x, Action{}, Action{}, w, c),
                    RuntimeError);
}

TEST_CASE("weights validation") {
    RewardWeights w;
    w.lambda_d = 0.5;
    CHECK_THROWS_AS(w.validate(), ConfigError);
    w = RewardWeights{};
    w.v_max = -1;
    CHECK_THROWS_AS(w.validate(), ConfigError);
}
