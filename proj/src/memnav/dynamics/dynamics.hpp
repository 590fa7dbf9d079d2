#pragma once

#include <array>

#include "memnav/core/vec.hpp"

namespace memnav::dynamics {

struct DroneState {
    Vec3 p;           // position, world frame, m
    Vec3 v;           // velocity, body frame, m/s
    double yaw = 0.0; // rad, wrapped to (-pi, pi]
};

struct ActionLimits {
    double accel_max = 3.0;    // m/s^2, per axis
    double yaw_rate_max = 1.5; // rad/s
};

struct Action {
    Vec3 accel;            // body frame, m/s^2
    double yaw_rate = 0.0; // rad/s

    Action clamped(const ActionLimits& lim) const;
};

// [d_hor, v_hor, beta', d_z, v_z, chi', psi] of the drone/target summary.
inline constexpr int kFeatureCount = 7;
using FeatureVector = std::array<double, kFeatureCount>;

// Semi-implicit Euler: v += a*dt, yaw += yaw_rate*dt (wrapped), then
// p += R_body_to_world(yaw) * v * dt. Rotation is about the vertical axis.
DroneState step(const DroneState& state, const Action& action, double dt);

// d = goal - p (world frame); d_hor = ln(|d_xy| + 1); beta' from world-frame
// d, chi' from body-frame v; angles wrapped to (-pi, pi].
FeatureVector featurize(const DroneState& state, const Vec3& goal);

// body-frame vector rotated into the world frame by yaw
Vec3 body_to_world(const Vec3& v, double yaw);

} // namespace memnav::dynamics
