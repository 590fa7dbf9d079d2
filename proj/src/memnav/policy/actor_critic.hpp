#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "memnav/dynamics/dynamics.hpp"
#include "memnav/neural/graph.hpp"
#include "memnav/neural/params.hpp"

namespace memnav::policy {

inline constexpr int kActionDim = 4; // body accel xyz + yaw rate

struct PolicyNetConfig {
    std::vector<int> trunk_widths = {128, 128};
    double logstd_init = -0.5;
    dynamics::ActionLimits limits;
};

// Shared tanh trunk over [z_t || x_t]; actor head emits a tanh-squashed mean
// inside the action limits plus a state-independent log-std; critic head
// emits a scalar value.
struct ActorCritic {
    PolicyNetConfig cfg;
    int obs_dim = 0;
    neural::ParameterSet params;

    static ActorCritic init(const PolicyNetConfig& cfg, int obs_dim, std::uint64_t seed);

    std::array<double, kActionDim> action_limits() const;
};

struct PolicyHeads {
    neural::TensorPtr mean;   // [B, 4], squashed
    neural::TensorPtr value;  // [B]
    neural::TensorPtr logstd; // [4] parameter tensor
};

PolicyHeads policy_graph(neural::Graph& g, const ActorCritic& ac, const neural::TensorPtr& obs);

// log N(actions | mean, diag exp(2*logstd)) per row
neural::TensorPtr gaussian_logp(neural::Graph& g, const neural::TensorPtr& mean,
                                const neural::TensorPtr& logstd,
                                const neural::TensorPtr& actions);

// entropy of the diagonal Gaussian (state independent)
neural::TensorPtr entropy_node(neural::Graph& g, const neural::TensorPtr& logstd);

struct ActOut {
    std::array<double, kActionDim> raw{}; // unclipped sample (mean in deterministic mode)
    dynamics::Action action;              // same values, as an Action
    double logp = 0;
    double value = 0;
};

// Samples a diagonal-Gaussian action around the squashed mean. The
// environment clips to limits when integrating; log-probs refer to the raw
// sample.
ActOut act(const ActorCritic& ac, const std::vector<double>& obs, Rng& rng,
           bool deterministic = false);

void save_actor(const ActorCritic& ac, const std::string& path,
                const nlohmann::json& extra = {});
ActorCritic load_actor(const std::string& path);

} // namespace memnav::policy
