#pragma once

#include <string>
#include <vector>

#include "memnav/policy/pipeline.hpp"

namespace memnav::bench {

struct PolicyBundle {
    latent::VaeModel vae;
    memory::MemoryModel mem;
    policy::ActorCritic actor;
};

// Loads and cross-checks the three checkpoints; throws ConfigError on
// dimension mismatches.
PolicyBundle load_bundle(const std::string& vae_path, const std::string& memory_path,
                         const std::string& actor_path);

struct TrialResult {
    int map_id = 0;
    std::uint64_t seed = 0;
    policy::Outcome outcome = policy::Outcome::timeout;
    double flight_time_s = 0;
    double path_length_m = 0;
    double straight_dist_m = 0;
    double mean_v_hor = 0;
    double trav = 13.0;
    // aligned per-frame streams for speed-vs-density analysis
    std::vector<double> frame_speeds;
    std::vector<double> frame_brightness; // mean scan value
};

// Deterministic per (map, seed): runs the policy in deterministic mode until
// a terminal event or timeout.
std::vector<TrialResult> evaluate(const PolicyBundle& bundle, const cli::RunConfig& cfg,
                                  const std::vector<world::World>& maps, int trials_per_map,
                                  std::uint64_t seed);

// Average goal velocity: straight-line start-goal distance over flight time.
// Contract error when called on a failed trial.
double agv(const TrialResult& trial);

world::World make_clutter_map(const cli::RunConfig& cfg, double poisson_radius,
                              std::uint64_t seed);

// Crafted evaluation map: a wall of large overlapping cylinders across the
// middle of the field plus a sparse clutter ring, the regime where latent
// memory should matter.
world::World make_large_obstacle_map(const cli::RunConfig& cfg, std::uint64_t seed);

} // namespace memnav::bench
