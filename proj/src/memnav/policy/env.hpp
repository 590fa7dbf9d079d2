#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "memnav/memory/memory.hpp"
#include "memnav/policy/rollout.hpp"

namespace memnav::policy {

// Where each episode's world comes from.
struct WorldSource {
    enum class Kind { empty, poisson, fixed_maps };
    Kind kind = Kind::poisson;
    world::WorldSpec base;   // bounds, obstacle radii, drone radius
    double radius_min = 3.0; // poisson radius range (poisson kind)
    double radius_max = 5.4;
    std::vector<world::World> maps; // fixed_maps kind
};

struct EnvConfig {
    WorldSource source;
    sensor::CameraModel camera;
    sensor::NoiseParams noise;
    bool noise_enabled = true;
    reward::RewardWeights weights;
    reward::TerminalConstants terminal;
    dynamics::ActionLimits limits;
    double dt = 0.1;
    int max_steps = 600; // 60 s episode cap
    double min_separation = 15.0;
    int trav_samples = 1200;
    // pin start/goal instead of sampling (controlled evaluations)
    std::optional<std::pair<Vec3, Vec3>> fixed_start_goal;
    std::optional<double> fixed_yaw;
};

// One drone in one world; observation is [z_t || x_t] with z_t from the
// frozen VAE+LSTM and x_t from featurize. The models are shared read-only
// across workers.
class Env {
public:
    Env(EnvConfig cfg, const latent::VaeModel* vae, const memory::MemoryModel* mem,
        std::uint64_t master_seed, std::uint64_t worker_index);

    const std::vector<double>& reset();
    const std::vector<double>& observation() const { return obs_; }
    int obs_dim() const;

    struct StepResult {
        double reward = 0;
        bool done = false;    // terminal event fired
        bool timeout = false; // episode cap reached without a terminal event
        reward::EventKind event = reward::EventKind::progress;
    };
    StepResult step(const dynamics::Action& raw_action);

    double trav() const { return trav_; }
    const dynamics::DroneState& state() const { return state_; }
    const Vec3& goal() const { return goal_; }
    int steps_in_episode() const { return step_count_; }
    double episode_return() const { return episode_return_; }
    const sensor::DepthScan& last_scan() const { return last_scan_; }
    double v_hor() const { return state_.v.norm_xy(); }
    const world::World& current_world() const { return *world_; }
    const EnvConfig& config() const { return cfg_; }

private:
    void next_world();
    void refresh_observation();

    EnvConfig cfg_;
    const latent::VaeModel* vae_;
    const memory::MemoryModel* mem_;
    Rng seed_stream_;  // per-episode world / start-goal / yaw seeds
    Rng noise_stream_; // per-frame noise seeds

    std::shared_ptr<const world::World> world_;
    std::vector<std::shared_ptr<const world::World>> map_cache_;
    std::vector<double> map_trav_cache_;
    std::size_t episode_index_ = 0;

    double trav_ = 13.0;
    dynamics::DroneState state_;
    Vec3 goal_;
    dynamics::Action prev_action_;
    memory::MemoryState lstm_;
    sensor::DepthScan last_scan_;
    std::vector<double> obs_;
    int step_count_ = 0;
    double episode_return_ = 0;
};

} // namespace memnav::policy
