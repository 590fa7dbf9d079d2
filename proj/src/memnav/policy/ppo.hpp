#pragma once

#include <functional>
#include <memory>
#include <string>

#include "memnav/policy/env.hpp"

namespace memnav::policy {

struct PpoConfig {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_eps = 0.2;
    int update_epochs = 4;
    int minibatch = 512;
    int horizon = 512; // steps per worker per iteration
    int workers = 4;
    double ent_coef = 1e-3;
    double vf_coef = 0.5;
    double learning_rate = 3e-4;
    int iterations = 600;
    int checkpoint_interval = 20;

    void validate() const;
};

struct UpdateStats {
    double policy_loss = 0;
    double value_loss = 0;
    double entropy = 0;
};

struct IterationMetrics {
    int iteration = 0;
    std::string stage;
    double mean_return = 0;
    double success_rate = 0;
    double mean_v_hor = 0;
    int episodes = 0;
    UpdateStats losses;
};

// Clipped-surrogate update over the buffer; advantages are normalized here
// (mean 0, std 1, eps guard). Throws NumericalError on NaN losses.
UpdateStats ppo_update(ActorCritic& ac, const RolloutBuffer& buffer, const PpoConfig& cfg,
                       Rng& rng);

// N workers step independent environments against the shared policy; worker
// buffers are merged in worker order, so results do not depend on thread
// scheduling. on_iteration may return false to stop early.
void train_ppo(ActorCritic& ac, std::vector<std::unique_ptr<Env>>& envs, const PpoConfig& cfg,
               std::uint64_t master_seed, const std::string& stage_name,
               const std::function<bool(const IterationMetrics&)>& on_iteration = nullptr);

// One worker's segment: steps the env for `horizon` steps, bootstrapping
// value at truncation points.
void collect_segment(const ActorCritic& ac, Env& env, int horizon, Rng& act_rng,
                     RolloutBuffer& out, bool& env_needs_reset);

double value_of(const ActorCritic& ac, const std::vector<double>& obs);

} // namespace memnav::policy
