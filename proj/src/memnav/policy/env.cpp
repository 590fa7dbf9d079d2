#include "memnav/policy/env.hpp"

#include <cmath>

#include "memnav/core/errors.hpp"

namespace memnav::policy {

Env::Env(EnvConfig cfg, const latent::VaeModel* vae, const memory::MemoryModel* mem,
         std::uint64_t master_seed, std::uint64_t worker_index)
    : cfg_(std::move(cfg)),
      vae_(vae),
      mem_(mem),
      seed_stream_(substream(master_seed, "env.seeds", worker_index)),
      noise_stream_(substream(master_seed, "env.noise", worker_index)) {
    if (vae_ == nullptr || mem_ == nullptr) throw ConfigError("env: missing latent models");
    cfg_.camera.validate();
    cfg_.noise.validate();
    cfg_.weights.validate();
    if (cfg_.source.kind == WorldSource::Kind::fixed_maps && cfg_.source.maps.empty())
        throw ConfigError("env: fixed_maps source without maps");
    lstm_ = memory::MemoryState::zero(mem_->cfg.n_l);
}

int Env::obs_dim() const { return mem_->cfg.n_l + dynamics::kFeatureCount; }

void Env::next_world() {
    switch (cfg_.source.kind) {
    case WorldSource::Kind::empty: {
        world_ = std::make_shared<world::World>(world::World::empty(cfg_.source.base));
        trav_ = cfg_.terminal.trav_max; // no obstacles: mean free path beyond the cap
        break;
    }
    case WorldSource::Kind::poisson: {
        world::WorldSpec spec = cfg_.source.base;
        spec.poisson_radius =
            seed_stream_.uniform(cfg_.source.radius_min, cfg_.source.radius_max);
        spec.seed = seed_stream_.next();
        world_ = std::make_shared<world::World>(world::generate_world(spec));
        trav_ = world::traversability(*world_, cfg_.trav_samples, seed_stream_.next()).trav;
        break;
    }
    case WorldSource::Kind::fixed_maps: {
        if (map_cache_.empty()) {
            for (const auto& mp : cfg_.source.maps) {
                map_cache_.push_back(std::make_shared<world::World>(mp));
                map_trav_cache_.push_back(
                    world::traversability(mp, cfg_.trav_samples,
                                          substream_seed(mp.spec.seed, "map.trav"))
                        .trav);
            }
        }
        const std::size_t idx = episode_index_ % map_cache_.size();
        world_ = map_cache_[idx];
        trav_ = map_trav_cache_[idx];
        break;
    }
    }
}

const std::vector<double>& Env::reset() {
    next_world();
    ++episode_index_;
    const auto [start, goal] =
        cfg_.fixed_start_goal
            ? *cfg_.fixed_start_goal
            : world::sample_start_goal(*world_, cfg_.min_separation, seed_stream_.next());
    state_ = dynamics::DroneState{};
    state_.p = start;
    state_.v = {0, 0, 0};
    state_.yaw = cfg_.fixed_yaw ? wrap_angle(*cfg_.fixed_yaw)
                                : wrap_angle(seed_stream_.uniform(-3.14159265358979323846,
                                                                  3.14159265358979323846));
    goal_ = goal;
    prev_action_ = dynamics::Action{};
    lstm_ = memory::MemoryState::zero(mem_->cfg.n_l);
    step_count_ = 0;
    episode_return_ = 0;
    refresh_observation();
    return obs_;
}

void Env::refresh_observation() {
    sensor::Pose pose{state_.p, state_.yaw};
    sensor::DepthScan scan = sensor::render_depth(*world_, pose, cfg_.camera);
    scan.timestamp_index = step_count_;
    if (cfg_.noise_enabled)
        scan = sensor::apply_depth_noise(scan, cfg_.noise, noise_stream_.next());
    last_scan_ = scan;

    const latent::EncodeResult enc = latent::encode(*vae_, scan, /*sample=*/false);
    const std::vector<double> z_t = memory::step_state(*mem_, enc.z, lstm_);
    const dynamics::FeatureVector x = dynamics::featurize(state_, goal_);

    obs_.resize(z_t.size() + x.size());
    std::copy(z_t.begin(), z_t.end(), obs_.begin());
    std::copy(x.begin(), x.end(), obs_.begin() + static_cast<long>(z_t.size()));
}

Env::StepResult Env::step(const dynamics::Action& raw_action) {
    const dynamics::Action action = raw_action.clamped(cfg_.limits);
    state_ = dynamics::step(state_, action, cfg_.dt);
    ++step_count_;

    const dynamics::FeatureVector x = dynamics::featurize(state_, goal_);
    const world::WorldSpec& ws = world_->spec;

    reward::StepEvent event;
    if (state_.p.x < ws.bounds_min.x || state_.p.x > ws.bounds_max.x ||
        state_.p.y < ws.bounds_min.y || state_.p.y > ws.bounds_max.y ||
        state_.p.z < ws.bounds_min.z || state_.p.z > ws.bounds_max.z) {
        event.kind = reward::EventKind::exceed;
    } else if (world::collision_check(*world_, state_.p, ws.drone_radius)) {
        event.kind = reward::EventKind::collision;
    } else if ((goal_ - state_.p).norm() < cfg_.terminal.d_min) {
        event.kind = reward::EventKind::arrive;
        event.trav = trav_;
    }

    const auto [r, terminate] =
        reward::total_reward(event, x, action, prev_action_, cfg_.weights, cfg_.terminal);
    prev_action_ = action;
    episode_return_ += r;

    StepResult out;
    out.reward = r;
    out.done = terminate;
    out.event = event.kind;
    out.timeout = !terminate && step_count_ >= cfg_.max_steps;
    if (!terminate) refresh_observation();
    return out;
}

} // namespace memnav::policy
