#pragma once

#include <array>
#include <vector>

#include "memnav/policy/actor_critic.hpp"
#include "memnav/reward/reward.hpp"

namespace memnav::policy {

enum class Outcome { success, collision, exceed, timeout };

struct StepRecord {
    std::vector<double> obs;
    std::array<double, kActionDim> action{};
    double logp = 0;
    double value = 0;
    double reward = 0;
    double v_hor = 0;
    bool terminal = false;   // true episode end (arrive/collision/exceed)
    bool truncated = false;  // horizon or timeout cut; bootstrap next_value
    double next_value = 0;   // V(s') at a truncation point
};

struct EpisodeTag {
    Outcome outcome = Outcome::timeout;
    double trav = 13.0;
    int steps = 0;
    double total_reward = 0;
};

struct RolloutBuffer {
    std::vector<StepRecord> steps;    // worker segments concatenated in order
    std::vector<EpisodeTag> episodes; // episodes completed during collection
    std::vector<double> advantages;   // filled by compute_gae (unnormalized)
    std::vector<double> returns;

    void clear();
};

// Standard GAE recursion over the buffer. Segment ends must be terminal or
// truncated. Advantages are left unnormalized; ppo_update normalizes its own
// copy.
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda);

} // namespace memnav::policy
