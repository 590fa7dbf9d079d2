#include "memnav/dynamics/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace memnav::dynamics {

Action Action::clamped(const ActionLimits& lim) const {
    Action c;
    c.accel.x = std::clamp(accel.x, -lim.accel_max, lim.accel_max);
    c.accel.y = std::clamp(accel.y, -lim.accel_max, lim.accel_max);
    c.accel.z = std::clamp(accel.z, -lim.accel_max, lim.accel_max);
    c.yaw_rate = std::clamp(yaw_rate, -lim.yaw_rate_max, lim.yaw_rate_max);
    return c;
}

Vec3 body_to_world(const Vec3& v, double yaw) {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

DroneState step(const DroneState& state, const Action& action, double dt) {
    DroneState next;
    next.v = state.v + action.accel * dt;
    next.yaw = wrap_angle(state.yaw + action.yaw_rate * dt);
    next.p = state.p + body_to_world(next.v, next.yaw) * dt;
    return next;
}

FeatureVector featurize(const DroneState& state, const Vec3& goal) {
    const Vec3 d = goal - state.p;
    FeatureVector x;
    x[0] = std::log(d.norm_xy() + 1.0);              // d_hor
    x[1] = state.v.norm_xy();                        // v_hor
    x[2] = wrap_angle(std::atan2(d.y, d.x));         // beta' (world frame)
    x[3] = d.z;                                      // d_z
    x[4] = state.v.z;                                // v_z
    x[5] = wrap_angle(std::atan2(state.v.y, state.v.x)); // chi' (body frame)
    x[6] = wrap_angle(state.yaw);                    // psi
    return x;
}

} // namespace memnav::dynamics
