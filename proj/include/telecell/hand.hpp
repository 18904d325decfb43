#ifndef TELECELL_HAND_HPP
#define TELECELL_HAND_HPP

#include <optional>

#include "telecell/plants.hpp"

namespace telecell {

/// One finger of the glove/hand loop. Closure is the positive angle direction.
struct finger_params {
    double torque_constant = 0.5;  ///< k_t, N m / A
    double servo_kp = 2.0;         ///< N m / rad
    double servo_kd = 0.05;        ///< N m s / rad
    double finger_inertia = 1e-3;  ///< kg m^2
    double glove_inertia = 1e-3;   ///< kg m^2, operator finger + glove actuator
    double operator_k = 1.0;       ///< N m / rad, operator finger stiffness toward its target
    double operator_b = 0.05;      ///< N m s / rad
    double render_scale = 1.0;
    double render_cap = 1.0;       ///< N m

    void validate() const;
};

/// Unilateral object between the fingers: resists closure past surface_angle.
struct grasp_object {
    double surface_angle = 0.5;
    double stiffness = 3.0;

    void validate() const;
};

struct finger_state {
    double glove_angle = 0.0;
    double glove_velocity = 0.0;
    double hand_angle = 0.0;
    double hand_velocity = 0.0;
    double motor_current = 0.0;
};

struct servo_output {
    double torque = 0.0;
    double current = 0.0;
};

/// Remote hand driver: tau = kp (glove_rx - theta) - kd theta_dot, i = tau / k_t.
servo_output hand_servo(const finger_params &params, const finger_state &state, double glove_angle_rx);

/// Torque the object exerts on the finger (never assists closure).
double object_torque(const grasp_object &object, double hand_angle, double hand_velocity = 0.0);

/// Current-based force estimate tau_est = k_t i. Includes the servo's own effort.
double estimate_force(const finger_params &params, const finger_state &state);

struct render_output {
    double torque = 0.0; ///< magnitude opposing closure, N m
    bool saturated = false;
};

/// rendered = clamp(scale tau_est_rx, -cap, cap), applied against closure.
render_output glove_render(double tau_est_rx, double render_scale, double cap);

/// Advances glove and hand one tick. `glove_target` is where the operator's finger
/// is heading; `rendered` the glove torque opposing closure.
finger_state step_finger(const finger_params &params, const std::optional<grasp_object> &object,
                         const finger_state &state, const servo_output &servo, double glove_target,
                         double rendered, double dt);

} // namespace telecell

#endif // TELECELL_HAND_HPP
