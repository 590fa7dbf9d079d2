#include "memnav/reward/reward.hpp"

#include <algorithm>
#include <cmath>

#include "memnav/core/errors.hpp"

namespace memnav::reward {

void RewardWeights::validate() const {
    if (lambda_d > 0 || lambda_b > 0 || lambda_v > 0 || lambda_z > 0 || lambda_f > 0 ||
        lambda_a > 0)
        throw ConfigError("reward: all lambda weights must be <= 0");
    if (!(v_max > 0.0)) throw ConfigError("reward: v_max must be > 0");
    if (mode == SpeedMode::fixed && !(v_desire > 0.0))
        throw ConfigError("reward: v_desire must be > 0 in fixed mode");
}

double progress_reward(const dynamics::FeatureVector& x, const dynamics::Action& action,
                       const dynamics::Action& prev_action, const RewardWeights& w) {
    const double d_hor = x[0];
    const double v_hor = x[1];
    const double beta_p = x[2];
    const double d_z = x[3];
    const double chi_p = x[5];
    const double psi = x[6];

    double speed_term = 0.0;
    if (w.mode == SpeedMode::varying) {
        if (v_hor > w.v_max) speed_term = v_hor;
    } else {
        speed_term = std::abs(v_hor - w.v_desire);
    }

    const Vec3 da = prev_action.accel - action.accel;
    const double r = w.lambda_d * d_hor +
                     w.lambda_b * std::abs(wrap_angle(chi_p + psi - beta_p)) +
                     w.lambda_v * speed_term + w.lambda_z * std::abs(d_z) +
                     w.lambda_f * std::abs(chi_p) + w.lambda_a * da.norm();
    return std::clamp(r, -0.2, 0.0);
}

std::pair<double, bool> total_reward(const StepEvent& event, const dynamics::FeatureVector& x,
                                     const dynamics::Action& action,
                                     const dynamics::Action& prev_action, const RewardWeights& w,
                                     const TerminalConstants& c) {
    switch (event.kind) {
    case EventKind::exceed:
        return {c.r_exceed, true};
    case EventKind::arrive:
        if (event.trav < c.trav_min || event.trav > c.trav_max)
            throw RuntimeError("total_reward: arrive event with trav outside range");
        return {c.r_arrive / event.trav, true};
    case EventKind::collision:
        return {c.r_collision, true};
    case EventKind::progress:
        return {progress_reward(x, action, prev_action, w), false};
    }
    throw RuntimeError("total_reward: unreachable event kind");
}

} // namespace memnav::reward
