#include "telecell/hand.hpp"

#include <algorithm>
#include <cmath>

namespace telecell {

void finger_params::validate() const {
    if (!(torque_constant > 0.0)) {
        throw config_error("hand.torque_constant", "must be > 0");
    }
    if (!(finger_inertia > 0.0)) {
        throw config_error("hand.finger_inertia", "must be > 0");
    }
    if (!(glove_inertia > 0.0)) {
        throw config_error("hand.glove_inertia", "must be > 0");
    }
    if (servo_kp < 0.0 || servo_kd < 0.0 || operator_k < 0.0 || operator_b < 0.0) {
        throw config_error("hand", "servo and operator gains must be >= 0");
    }
    if (render_scale < 0.0) {
        throw config_error("hand.render_scale", "must be >= 0");
    }
    if (!(render_cap > 0.0)) {
        throw config_error("hand.render_cap", "must be > 0");
    }
}

void grasp_object::validate() const {
    if (stiffness < 0.0) {
        throw config_error("hand.object.stiffness", "must be >= 0");
    }
}

servo_output hand_servo(const finger_params &params, const finger_state &state, double glove_angle_rx) {
    servo_output out;
    out.torque = params.servo_kp * (glove_angle_rx - state.hand_angle) - params.servo_kd * state.hand_velocity;
    out.current = out.torque / params.torque_constant;
    return out;
}

double object_torque(const grasp_object &object, double hand_angle, double /*hand_velocity*/) {
    const double depth = std::max(0.0, hand_angle - object.surface_angle);
    return -object.stiffness * depth;
}

double estimate_force(const finger_params &params, const finger_state &state) {
    return params.torque_constant * state.motor_current;
}

render_output glove_render(double tau_est_rx, double render_scale, double cap) {
    render_output out;
    const double raw = render_scale * tau_est_rx;
    out.torque = std::clamp(raw, -cap, cap);
    out.saturated = std::abs(raw) > cap;
    return out;
}

finger_state step_finger(const finger_params &params, const std::optional<grasp_object> &object,
                         const finger_state &state, const servo_output &servo, double glove_target,
                         double rendered, double dt) {
    finger_state next = state;
    next.motor_current = servo.current;

    double hand_torque = servo.torque;
    if (object) {
        hand_torque += object_torque(*object, state.hand_angle, state.hand_velocity);
    }
    next.hand_velocity = state.hand_velocity + hand_torque / params.finger_inertia * dt;
    next.hand_angle = state.hand_angle + next.hand_velocity * dt;

    const double glove_torque = params.operator_k * (glove_target - state.glove_angle) -
                                params.operator_b * state.glove_velocity - rendered;
    next.glove_velocity = state.glove_velocity + glove_torque / params.glove_inertia * dt;
    next.glove_angle = state.glove_angle + next.glove_velocity * dt;
    return next;
}

} // namespace telecell
