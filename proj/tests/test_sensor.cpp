#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "memnav/core/errors.hpp"
#include "memnav/core/rng.hpp"
#include "memnav/sensor/sensor.hpp"

using namespace memnav;
using namespace memnav::sensor;

namespace {

world::WorldSpec big_spec() {
    world::WorldSpec s;
    s.bounds_min = {-60, -60, 0};
    s.bounds_max = {60, 60, 6};
    s.poisson_radius = 5.0;
    return s;
}

// independent route: quadratic-formula circle intersection + per-axis box
// exit, composed with explicit min
double oracle_ray(const world::World& w, double ox, double oy, double ang,
                  const CameraModel& cam) {
    const double dx = std::cos(ang), dy = std::sin(ang);
    double best = cam.max_range;
    const auto& s = w.spec;
    if (dx != 0.0)
        best = std::min(best, ((dx > 0 ? s.bounds_max.x : s.bounds_min.x) - ox) / dx);
    if (dy != 0.0)
        best = std::min(best, ((dy > 0 ? s.bounds_max.y : s.bounds_min.y) - oy) / dy);
    for (const world::Obstacle& o : w.obstacles) {
        const double ex = o.cx - ox, ey = o.cy - oy;
        const double b = ex * dx + ey * dy;
        const double c = ex * ex + ey * ey - o.radius * o.radius;
        const double disc = b * b - c;
        if (disc < 0) continue;
        const double t0 = b - std::sqrt(disc);
        if (t0 >= 0) best = std::min(best, t0);
    }
    return best;
}

} // namespace

TEST_CASE("empty world scans are all ones") {
    const world::World w = world::World::empty(big_spec());
    CameraModel cam;
    const DepthScan scan = render_depth(w, {{0, 0, 3}, 0.7}, cam);
    REQUIRE(static_cast<int>(scan.values.size()) == cam.ray_count);
    for (const double v : scan.values) CHECK(v == 1.0);
}

TEST_CASE("obstacle dead ahead reads (d - r) / max_range on the center ray") {
    world::World w = world::World::empty(big_spec());
    w.obstacles.push_back({10.0, 0.0, 1.5});
    CameraModel cam;
    cam.ray_count = 65; // odd: ray 32 points along yaw exactly
    const DepthScan scan = render_depth(w, {{0, 0, 3}, 0.0}, cam);
    CHECK(scan.values[32] == doctest::Approx((10.0 - 1.5) / cam.max_range).epsilon(1e-12));
}

TEST_CASE("obstacle behind the camera is invisible") {
    world::World w = world::World::empty(big_spec());
    w.obstacles.push_back({-5.0, 0.0, 1.0});
    CameraModel cam;
    const DepthScan scan = render_depth(w, {{0, 0, 3}, 0.0}, cam);
    for (const double v : scan.values) CHECK(v == 1.0);
}

TEST_CASE("rendering agrees with a brute-force intersector to 1e-9 relative") {
    world::WorldSpec spec = big_spec();
    spec.bounds_min = {-20, -20, 0};
    spec.bounds_max = {20, 20, 6};
    Rng rng(321);
    for (int trial = 0; trial < 20; ++trial) {
        spec.seed = 5000 + static_cast<std::uint64_t>(trial);
        const world::World w = world::generate_world(spec);
        CameraModel cam;
        const double px = rng.uniform(-15, 15), py = rng.uniform(-15, 15);
        const double yaw = rng.uniform(-3.14, 3.14);
        const DepthScan scan = render_depth(w, {{px, py, 3}, yaw}, cam);
        const double base = yaw - cam.fov / 2;
        const double step = cam.fov / (cam.ray_count - 1);
        for (int i = 0; i < cam.ray_count; ++i) {
            const double want = oracle_ray(w, px, py, base + step * i, cam) / cam.max_range;
            CHECK(scan.values[static_cast<std::size_t>(i)] ==
                  doctest::Approx(want).epsilon(1e-9));
        }
    }
}

TEST_CASE("noise: identity settings leave the scan unchanged") {
    DepthScan scan;
    scan.values = {0.1, 0.5, 0.9, 1.0};
    NoiseParams p;
    p.multiplicative_sigma = 0;
    p.dropout_probability = 0;
    p.quantization_levels = 0; // sentinel: no quantization
    const DepthScan out = apply_depth_noise(scan, p, 5);
    CHECK(out.values == scan.values);
}

TEST_CASE("noise: full dropout maps everything to 1") {
    DepthScan scan;
    scan.values = std::vector<double>(64, 1.0);
    NoiseParams p;
    p.dropout_probability = 1.0;
    const DepthScan out = apply_depth_noise(scan, p, 5);
    for (const double v : out.values) CHECK(v == 1.0);
}

TEST_CASE("noise: empirical std within 10% of sigma over 1e4 draws") {
    NoiseParams p;
    p.multiplicative_sigma = 0.05;
    p.dropout_probability = 0;
    p.quantization_levels = 0;
    DepthScan scan;
    scan.values = std::vector<double>(1, 0.5);
    const int n = 10000;
    double acc = 0, acc2 = 0;
    for (int i = 0; i < n; ++i) {
        const DepthScan out = apply_depth_noise(scan, p, 70000 + static_cast<std::uint64_t>(i));
        const double rel = out.values[0] / 0.5 - 1.0;
        acc += rel;
        acc2 += rel * rel;
    }
    const double std = std::sqrt(acc2 / n - (acc / n) * (acc / n));
    CHECK(std == doctest::Approx(0.05).epsilon(0.10));
}

TEST_CASE("noise output is always in [0, 1]") {
    Rng rng(99);
    NoiseParams p;
    p.multiplicative_sigma = 0.5; // exaggerated
    p.dropout_probability = 0.3;
    p.quantization_levels = 16;
    for (int trial = 0; trial < 200; ++trial) {
        DepthScan scan;
        for (int i = 0; i < 32; ++i) scan.values.push_back(rng.uniform());
        const DepthScan out = apply_depth_noise(scan, p, static_cast<std::uint64_t>(trial));
        for (const double v : out.values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("noise is deterministic per seed") {
    DepthScan scan;
    scan.values = {0.2, 0.6, 0.8};
    NoiseParams p;
    const DepthScan a = apply_depth_noise(scan, p, 42);
    const DepthScan b = apply_depth_noise(scan, p, 42);
    CHECK(a.values == b.values);
}

TEST_CASE("scan dataset round-trips bit-exactly") {
    ScanDataset ds(4, 0.1);
    ds.set_config_hash(0xabcdef);
    Rng rng(5);
    for (int e = 0; e < 3; ++e) {
        ds.begin_episode();
        for (int i = 0; i < 5 + e; ++i) {
            DepthScan s;
            for (int r = 0; r < 4; ++r) s.values.push_back(rng.uniform());
            ds.append_frame(s);
        }
    }
    const std::string path = "/tmp/memnav_ds_test.bin";
    ds.save(path);
    const ScanDataset back = ScanDataset::load(path);
    CHECK(back.ray_count() == 4);
    CHECK(back.frame_period_s() == 0.1);
    CHECK(back.config_hash() == 0xabcdef);
    REQUIRE(back.episode_count() == 3);
    for (std::size_t e = 0; e < 3; ++e) {
        REQUIRE(back.episode_length(e) == ds.episode_length(e));
        for (std::size_t i = 0; i < back.episode_length(e); ++i)
            CHECK(back.frame(e, i) == ds.frame(e, i));
    }
    // saving the loaded dataset reproduces the file byte for byte
    const std::string path2 = "/tmp/memnav_ds_test2.bin";
    back.save(path2);
    auto slurp = [](const std::string& p) {
        std::ifstream f(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(f), {});
    };
    CHECK(slurp(path) == slurp(path2));
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("dataset subset keeps selected episodes") {
    ScanDataset ds(2, 0.1);
    for (int e = 0; e < 4; ++e) {
        ds.begin_episode();
        DepthScan s;
        s.values = {0.1 * e, 0.2 * e};
        ds.append_frame(s);
    }
    const ScanDataset sub = ds.subset({2, 0});
    REQUIRE(sub.episode_count() == 2);
    CHECK(sub.frame(0, 0) == ds.frame(2, 0));
    CHECK(sub.frame(1, 0) == ds.frame(0, 0));
}
