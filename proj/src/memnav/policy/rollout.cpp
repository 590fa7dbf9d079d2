#include "memnav/policy/rollout.hpp"

#include "memnav/core/errors.hpp"

namespace memnav::policy {

void RolloutBuffer::clear() {
    steps.clear();
    episodes.clear();
    advantages.clear();
    returns.clear();
}

void compute_gae(RolloutBuffer& buffer, double gamma, double lambda) {
    const std::size_t n = buffer.steps.size();
    buffer.advantages.assign(n, 0.0);
    buffer.returns.assign(n, 0.0);
    if (n == 0) return;
    if (!buffer.steps.back().terminal && !buffer.steps.back().truncated)
        throw RuntimeError("compute_gae: buffer must end on a terminal or truncated step");

    double adv = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        const StepRecord& s = buffer.steps[i];
        double delta;
        if (s.terminal) {
            delta = s.reward - s.value;
            adv = delta;
        } else if (s.truncated) {
            delta = s.reward + gamma * s.next_value - s.value;
            adv = delta;
        } else {
            delta = s.reward + gamma * buffer.steps[i + 1].value - s.value;
            adv = delta + gamma * lambda * adv;
        }
        buffer.advantages[i] = adv;
        buffer.returns[i] = adv + s.value;
    }
}

} // namespace memnav::policy
