#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "memnav/core/vec.hpp"

namespace memnav::world {

struct WorldSpec {
    Vec3 bounds_min{-20.0, -20.0, 0.0};
    Vec3 bounds_max{20.0, 20.0, 6.0};
    double poisson_radius = 5.0;           // min spacing between obstacle centers, m
    double obstacle_radius_min = 0.5;      // m
    double obstacle_radius_max = 1.5;      // m
    double drone_radius = 0.3;             // m
    std::uint64_t seed = 0;

    void validate() const; // throws ConfigError on violated invariants
    double diagonal_xy() const;
};

struct Obstacle {
    double cx = 0.0, cy = 0.0; // center, world xy
    double radius = 0.0;
};

// Immutable after generation; safe to share across rollout workers.
struct World {
    WorldSpec spec;
    std::vector<Obstacle> obstacles;

    static World empty(const WorldSpec& spec);
};

struct TraversabilityReport {
    double trav = 13.0;            // clipped to [3, 13]
    double raw_mean_free_path = 0; // m, uncapped mean
    int sample_count = 0;
};

// Bridson dart throwing over the xy bounds (k = 30 candidates per active
// point). Deterministic for a given spec + seed.
World generate_world(const WorldSpec& spec);

// True iff the drone disc at `position` overlaps an obstacle or pokes out of
// the bounds box inflated inward by drone_radius.
bool collision_check(const World& world, const Vec3& position, double drone_radius);

// Clipped mean free path of drone-inflated random rays (clutter score;
// higher = easier). Cast from uniform interior origins with uniform headings.
TraversabilityReport traversability(const World& world, int n_samples, std::uint64_t rng_seed);

// Collision-free start/goal with horizontal separation >= min_separation.
// Throws RuntimeError if rejection sampling exceeds its retry budget.
std::pair<Vec3, Vec3> sample_start_goal(const World& world, double min_separation,
                                        std::uint64_t rng_seed);

// Distance along a 2-D ray to the first obstacle (inflated by `inflate`) or
// to the inflated bounds box, capped at `max_dist`. Origin assumed inside
// bounds; returns 0 when already colliding.
double first_hit_distance(const World& world, double ox, double oy, double dx, double dy,
                          double inflate, double max_dist);

// Versioned JSON {spec, obstacles[]}; identical content round-trips
// bit-exactly.
std::string to_json(const World& world);
World world_from_json(const std::string& text);
void save_world(const World& world, const std::string& path);
World load_world(const std::string& path);

} // namespace memnav::world
