#pragma once

#include <utility>

#include "memnav/dynamics/dynamics.hpp"

namespace memnav::reward {

enum class SpeedMode { varying, fixed };

struct RewardWeights {
    double lambda_d = -0.01;  // horizontal distance
    double lambda_b = -0.01;  // track-to-bearing misalignment
    double lambda_v = -0.02;  // speed term (gated in varying mode)
    double lambda_z = -0.02;  // vertical distance
    double lambda_f = -0.005; // sideways flight
    double lambda_a = -0.005; // jerk (acceleration change)
    double v_max = 4.5;       // m/s, gate threshold in varying mode
    double v_desire = 2.5;    // m/s, target speed in fixed mode
    SpeedMode mode = SpeedMode::varying;

    void validate() const; // all lambdas <= 0, v_max > 0
};

struct TerminalConstants {
    double r_exceed = -2.0;
    double r_arrive = 10.0;
    double r_collision = -2.0;
    double d_min = 1.0;      // m, arrival radius (3-D)
    double trav_min = 3.0;
    double trav_max = 13.0;
};

enum class EventKind { exceed, arrive, collision, progress };

struct StepEvent {
    EventKind kind = EventKind::progress;
    double trav = 13.0; // used only on arrive
};

// Dense shaping reward, clipped to [-0.2, 0]. In varying mode the speed term
// is active only when v_hor > v_max; in fixed mode it is |v_hor - v_desire|,
// always active.
double progress_reward(const dynamics::FeatureVector& x, const dynamics::Action& action,
                       const dynamics::Action& prev_action, const RewardWeights& w);

// Terminal/total reward: (reward, terminate). Arrival pays r_arrive / trav.
std::pair<double, bool> total_reward(const StepEvent& event, const dynamics::FeatureVector& x,
                                     const dynamics::Action& action,
                                     const dynamics::Action& prev_action, const RewardWeights& w,
                                     const TerminalConstants& c);

} // namespace memnav::reward
