#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "memnav/latent/vae.hpp"
#include "memnav/memory/memory.hpp"
#include "memnav/policy/ppo.hpp"

namespace memnav::cli {

// Declarative run configuration: one human-readable key-value file
// ([section] / key = value), overridable per key via MEMNAV_SECTION_KEY
// environment variables.
struct RunConfig {
    std::uint64_t seed = 7;
    std::string out_dir = "out";

    world::WorldSpec world_base; // poisson_radius is set per curriculum stage
    sensor::CameraModel camera;
    sensor::NoiseParams noise;
    bool noise_enabled = true;

    reward::RewardWeights weights;
    reward::TerminalConstants terminal;
    dynamics::ActionLimits limits;
    double dt = 0.1;
    int max_steps = 600;
    double min_separation = 15.0;
    int trav_samples = 1200;

    latent::VaeConfig vae;
    memory::MemoryConfig memory_cfg; // flags set from latent_variant
    std::string latent_variant = "cur+past20";

    policy::PpoConfig ppo;
    policy::PolicyNetConfig policy_net;

    // pipeline stages
    int stage1_iterations = 120;           // initial policy, obstacle-free
    int collect_episodes = 240;            // dataset collection
    std::vector<double> collect_radii = {3.0, 4.0, 5.0};
    double holdout_fraction = 0.1;         // dataset episodes held out of training
    double warmup_radius = 12.0;           // stage-5 curriculum warm-up
    int warmup_iterations = 60;            // iterations of the warm-up stage
    double clutter_radius_min = 3.0;
    double clutter_radius_max = 5.4;

    // evaluation defaults
    int eval_trials = 25;
    int eval_maps = 4;

    void validate() const;
};

// Parse the file (empty path = defaults) and apply MEMNAV_* overrides.
RunConfig load_config(const std::string& path);
RunConfig config_from_text(const std::string& text); // for tests

nlohmann::json to_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg); // 16 hex chars

} // namespace memnav::cli
