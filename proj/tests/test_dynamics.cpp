#include <doctest.h>

#include <cmath>

#include "memnav/core/rng.hpp"
#include "memnav/dynamics/dynamics.hpp"

using namespace memnav;
using namespace memnav::dynamics;

TEST_CASE("zero action advances position only") {
    DroneState s;
    s.p = {1, 2, 3};
    s.v = {0.5, 0.0, -0.1};
    s.yaw = 0.3;
    const DroneState n = step(s, Action{}, 0.1);
    CHECK(n.v.x == s.v.x);
    CHECK(n.v.y == s.v.y);
    CHECK(n.v.z == s.v.z);
    CHECK(n.yaw == doctest::Approx(0.3));
    const Vec3 expect = s.p + body_to_world(s.v, s.yaw) * 0.1;
    CHECK(n.p.x == doctest::Approx(expect.x).epsilon(1e-15));
    CHECK(n.p.y == doctest::Approx(expect.y).epsilon(1e-15));
}

TEST_CASE("pure yaw rotation leaves position fixed") {
    DroneState s;
    s.p = {1, 1, 1};
    Action a;
    a.yaw_rate = 0.7;
    const DroneState n = step(s, a, 0.1);
    CHECK(n.p.x == 1.0);
    CHECK(n.p.y == 1.0);
    CHECK(n.yaw == doctest::Approx(0.07));
}

TEST_CASE("constant body-x acceleration matches the closed-form recurrence") {
    // semi-implicit Euler: v_k = k*a*dt, p_n = sum_k v_k*dt = a*dt^2*n(n+1)/2
    const double a = 1.7, dt = 0.1;
    DroneState s;
    Action act;
    act.accel = {a, 0, 0};
    const int n = 50;
    for (int k = 0; k < n; ++k) s = step(s, act, dt);
    const double want = a * dt * dt * n * (n + 1) / 2.0;
    CHECK(s.p.x == doctest::Approx(want).epsilon(1e-12));
    CHECK(s.v.x == doctest::Approx(a * dt * n).epsilon(1e-12));
}

TEST_CASE("featurize at the goal") {
    DroneState s;
    s.p = {3, 4, 2};
    const FeatureVector x = featurize(s, {3, 4, 2});
    CHECK(x[0] == 0.0); // ln(1)
    CHECK(x[3] == 0.0);
}

TEST_CASE("featurize log distance") {
    DroneState s;
    const FeatureVector x = featurize(s, {std::exp(1.0) - 1.0, 0, 0});
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("velocity along body x gives chi' = 0") {
    DroneState s;
    s.v = {2.0, 0.0, 0.0};
    s.yaw = 1.1;
    const FeatureVector x = featurize(s, {10, 0, 0});
    CHECK(x[5] == 0.0);
    CHECK(x[1] == doctest::Approx(2.0));
}

TEST_CASE("wrap_angle is idempotent and lands in (-pi, pi]") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(-50, 50);
        const double w = wrap_angle(a);
        CHECK(w > -3.14159265358979323846 - 1e-12);
        CHECK(w <= 3.14159265358979323846 + 1e-12);
        CHECK(wrap_angle(w) == doctest::Approx(w).epsilon(1e-14));
    }
}

TEST_CASE("featurize is invariant to joint horizontal translation") {
    Rng rng(13);
    for (int i = 0; i < 100; ++i) {
        DroneState s;
        s.p = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 3)};
        s.v = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-1, 1)};
        s.yaw = rng.uniform(-3, 3);
        const Vec3 goal{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 3)};
        const Vec3 shift{rng.uniform(-10, 10), rng.uniform(-10, 10), 0};

        const FeatureVector a = featurize(s, goal);
        DroneState s2 = s;
        s2.p += shift;
        const FeatureVector b = featurize(s2, goal + shift);
        for (int k = 0; k < kFeatureCount; ++k) CHECK(a[static_cast<std::size_t>(k)] ==
                                                      doctest::Approx(b[static_cast<std::size_t>(k)]).epsilon(1e-12));
    }
}

TEST_CASE("speed is conserved under zero action") {
    DroneState s;
    s.v = {1.0, -0.5, 0.25};
    const double speed0 = s.v.norm();
    Action a;
    a.yaw_rate = 0.9;
    for (int i = 0; i < 200; ++i) s = step(s, a, 0.1);
    CHECK(s.v.norm() == doctest::Approx(speed0).epsilon(1e-12));
}

TEST_CASE("action clamping") {
    ActionLimits lim;
    Action a;
    a.accel = {5.0, -7.0, 1.0};
    a.yaw_rate = 9.0;
    const Action c = a.clamped(lim);
    CHECK(c.accel.x == 3.0);
    CHECK(c.accel.y == -3.0);
    CHECK(c.accel.z == 1.0);
    CHECK(c.yaw_rate == 1.5);
}
