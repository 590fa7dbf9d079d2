#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "memnav/core/errors.hpp"
#include "memnav/core/rng.hpp"
#include "memnav/world/world.hpp"

using namespace memnav;
using namespace memnav::world;

namespace {

WorldSpec default_spec(double poisson_radius, std::uint64_t seed) {
    WorldSpec s;
    s.poisson_radius = poisson_radius;
    s.seed = seed;
    return s;
}

// independent ray-circle route: solve the quadratic t^2 - 2(e.u)t + (e.e - r^2) = 0
double oracle_ray_circle(double ox, double oy, double dx, double dy, const Obstacle& o,
                         double inflate) {
    const double r = o.radius + inflate;
    const double ex = o.cx - ox, ey = o.cy - oy;
    const double b = ex * dx + ey * dy;
    const double c = ex * ex + ey * ey - r * r;
    const double disc = b * b - c;
    if (disc < 0) return -1.0;
    const double s = std::sqrt(disc);
    const double t0 = b - s, t1 = b + s;
    if (t0 >= 0) return t0;
    if (t1 > 0) return 0.0; // inside
    return -1.0;
}

double oracle_free_path(const World& w, double ox, double oy, double ang, double inflate,
                        double cap) {
    const auto& s = w.spec;
    const double dx = std::cos(ang), dy = std::sin(ang);
    if (ox < s.bounds_min.x + inflate || ox > s.bounds_max.x - inflate ||
        oy < s.bounds_min.y + inflate || oy > s.bounds_max.y - inflate)
        return 0.0;
    double best = cap;
    const double tx = dx > 0   ? (s.bounds_max.x - inflate - ox) / dx
                     : dx < 0 ? (s.bounds_min.x + inflate - ox) / dx
                              : cap;
    const double ty = dy > 0   ? (s.bounds_max.y - inflate - oy) / dy
                     : dy < 0 ? (s.bounds_min.y + inflate - oy) / dy
                              : cap;
    best = std::min({best, tx, ty});
    for (const Obstacle& o : w.obstacles) {
        const double t = oracle_ray_circle(ox, oy, dx, dy, o, inflate);
        if (t >= 0) best = std::min(best, t);
    }
    return best;
}

} // namespace

TEST_CASE("generated worlds satisfy the poisson-disk spacing property") {
    for (const std::uint64_t seed : {1u, 2u, 3u}) {
        const World w = generate_world(default_spec(5.0, seed));
        REQUIRE(w.obstacles.size() > 4);
        for (std::size_t i = 0; i < w.obstacles.size(); ++i) {
            for (std::size_t j = i + 1; j < w.obstacles.size(); ++j) {
                const double dx = w.obstacles[i].cx - w.obstacles[j].cx;
                const double dy = w.obstacles[i].cy - w.obstacles[j].cy;
                CHECK(std::sqrt(dx * dx + dy * dy) >= 5.0 * (1.0 - 1e-12));
            }
        }
        for (const Obstacle& o : w.obstacles) {
            CHECK(o.cx - o.radius >= w.spec.bounds_min.x);
            CHECK(o.cx + o.radius <= w.spec.bounds_max.x);
            CHECK(o.radius >= w.spec.obstacle_radius_min);
            CHECK(o.radius <= w.spec.obstacle_radius_max);
        }
    }
}

TEST_CASE("generation is deterministic per seed, bit-exact") {
    const World a = generate_world(default_spec(4.0, 99));
    const World b = generate_world(default_spec(4.0, 99));
    REQUIRE(a.obstacles.size() == b.obstacles.size());
    for (std::size_t i = 0; i < a.obstacles.size(); ++i) {
        CHECK(a.obstacles[i].cx == b.obstacles[i].cx);
        CHECK(a.obstacles[i].cy == b.obstacles[i].cy);
        CHECK(a.obstacles[i].radius == b.obstacles[i].radius);
    }
    const World c = generate_world(default_spec(4.0, 100));
    CHECK(a.obstacles.size() != c.obstacles.size());
}

TEST_CASE("poisson radius controls density") {
    const World sparse = generate_world(default_spec(12.0, 5));
    const World dense = generate_world(default_spec(3.0, 5));
    CHECK(dense.obstacles.size() > 4 * sparse.obstacles.size());

    // radius beyond the box diagonal leaves at most one sample
    WorldSpec tiny = default_spec(100.0, 5);
    tiny.obstacle_radius_min = 0.5;
    tiny.obstacle_radius_max = 1.5;
    CHECK(generate_world(tiny).obstacles.size() <= 1);
}

TEST_CASE("invalid specs are rejected") {
    WorldSpec s = default_spec(5.0, 1);
    s.poisson_radius = -1;
    CHECK_THROWS_AS(generate_world(s), ConfigError);
    s = default_spec(5.0, 1);
    s.bounds_min = {10, 10, 0};
    s.bounds_max = {-10, -10, 6};
    CHECK_THROWS_AS(generate_world(s), ConfigError);
    s = default_spec(2.0, 1); // radii 1.5 > poisson/2
    CHECK_THROWS_AS(generate_world(s), ConfigError);
}

TEST_CASE("collision_check basics") {
    const World empty = World::empty(default_spec(5.0, 1));
    CHECK_FALSE(collision_check(empty, {0, 0, 3}, 0.3));
    CHECK(collision_check(empty, {19.9, 0, 3}, 0.3)); // inside wall margin
    CHECK(collision_check(empty, {0, 0, 0.1}, 0.3));  // floor margin

    World w = empty;
    w.obstacles.push_back({2.0, 0.0, 1.0});
    CHECK(collision_check(w, {2.0, 0.0, 3.0}, 0.3));
    // exactly radius + drone + 0.01 away: free
    CHECK_FALSE(collision_check(w, {2.0 + 1.0 + 0.3 + 0.01, 0.0, 3.0}, 0.3));
    CHECK(collision_check(w, {2.0 + 1.0 + 0.3 - 0.01, 0.0, 3.0}, 0.3));
}

TEST_CASE("traversability: empty world clips to 13") {
    const World w = World::empty(default_spec(5.0, 3));
    const TraversabilityReport rep = traversability(w, 2000, 7);
    CHECK(rep.trav == 13.0);
    CHECK(rep.raw_mean_free_path > 13.0);
    CHECK(rep.sample_count == 2000);
}

TEST_CASE("traversability matches an independent monte-carlo oracle within 2%") {
    World w = World::empty(default_spec(6.0, 3));
    w.obstacles.push_back({0.0, 0.0, 2.5});
    w.obstacles.push_back({8.0, -5.0, 1.5});

    const int n = 20000;
    const TraversabilityReport rep = traversability(w, n, 123);

    Rng rng(987654);
    const double diag = w.spec.diagonal_xy();
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        const double ox = rng.uniform(w.spec.bounds_min.x, w.spec.bounds_max.x);
        const double oy = rng.uniform(w.spec.bounds_min.y, w.spec.bounds_max.y);
        const double ang = rng.uniform() * 6.283185307179586;
        acc += oracle_free_path(w, ox, oy, ang, w.spec.drone_radius, diag);
    }
    const double oracle_mean = acc / n;
    CHECK(rep.raw_mean_free_path ==
          doctest::Approx(oracle_mean).epsilon(0.02));
}

TEST_CASE("traversability is monotone in clutter over seeds") {
    double mean_dense = 0, mean_sparse = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        const World dense = generate_world(default_spec(3.0, 1000 + s));
        const World sparse = generate_world(default_spec(5.4, 1000 + s));
        mean_dense += traversability(dense, 1500, 55).trav;
        mean_sparse += traversability(sparse, 1500, 55).trav;
    }
    CHECK(mean_dense / seeds <= mean_sparse / seeds);
}

TEST_CASE("sample_start_goal honors collision and separation") {
    const World w = generate_world(default_spec(5.0, 77));
    for (int k = 0; k < 100; ++k) {
        const auto [a, b] = sample_start_goal(w, 15.0, 900 + k);
        CHECK_FALSE(collision_check(w, a, w.spec.drone_radius));
        CHECK_FALSE(collision_check(w, b, w.spec.drone_radius));
        CHECK((b - a).norm_xy() >= 15.0);
    }
}

TEST_CASE("sample_start_goal fails on a fully blocked world") {
    World w = World::empty(default_spec(5.0, 1));
    // tile the whole field with overlapping discs
    for (double x = -20; x <= 20; x += 1.5)
        for (double y = -20; y <= 20; y += 1.5) w.obstacles.push_back({x, y, 1.2});
    CHECK_THROWS_AS(sample_start_goal(w, 10.0, 3), RuntimeError);
}

TEST_CASE("sample_start_goal rejects impossible separation") {
    const World w = World::empty(default_spec(5.0, 1));
    CHECK_THROWS_AS(sample_start_goal(w, 1e9, 3), ConfigError);
}

TEST_CASE("world JSON round-trips bit-exactly") {
    const World w = generate_world(default_spec(4.5, 31337));
    const std::string j1 = to_json(w);
    const World w2 = world_from_json(j1);
    CHECK(to_json(w2) == j1);
    REQUIRE(w2.obstacles.size() == w.obstacles.size());
    for (std::size_t i = 0; i < w.obstacles.size(); ++i) {
        CHECK(w2.obstacles[i].cx == w.obstacles[i].cx);
        CHECK(w2.obstacles[i].radius == w.obstacles[i].radius);
    }

    const std::string path = "/tmp/memnav_world_test.json";
    save_world(w, path);
    const World w3 = load_world(path);
    CHECK(to_json(w3) == j1);
    std::remove(path.c_str());
}
