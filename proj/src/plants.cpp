#include "telecell/plants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace telecell {

void rigid_axis_plant::validate(int dof) const {
    for (int i = 0; i < dof; ++i) {
        if (!(mass[i] > 0.0)) {
            throw config_error("mass", "must be > 0 on every active axis");
        }
    }
    if (viscous_friction < 0.0) {
        throw config_error("viscous_friction", "must be >= 0");
    }
    if (coulomb_friction < 0.0) {
        throw config_error("coulomb_friction", "must be >= 0");
    }
}

vec friction_force(double viscous, double coulomb, const vec &v) {
    vec f;
    for (int i = 0; i < 3; ++i) {
        f[i] = viscous * v[i] + coulomb * std::tanh(v[i] / coulomb_velocity_eps);
    }
    return f;
}

void wall_contact::validate(int dof) const {
    if (axis < 0 || axis >= dof) {
        throw config_error("axis", "must index an active axis");
    }
    if (side != 1 && side != -1) {
        throw config_error("side", "must be +1 or -1");
    }
    if (stiffness < 0.0) {
        throw config_error("stiffness", "must be >= 0");
    }
    if (damping < 0.0) {
        throw config_error("damping", "must be >= 0");
    }
}

double penetration(const wall_contact &wall, const axis_state &state) {
    return std::max(0.0, wall.side * (state.x[wall.axis] - wall.position));
}

vec contact_force(const wall_contact &wall, const axis_state &state) {
    vec f = vec::Zero();
    const double p = penetration(wall, state);
    if (p <= 0.0) {
        return f;
    }
    // Velocity into the wall is positive.
    const double v_in = wall.side * state.v[wall.axis];
    const double push = std::max(0.0, wall.stiffness * p + wall.damping * v_in);
    f[wall.axis] = -wall.side * push;
    return f;
}

void object_coupling::validate() const {
    if (stiffness < 0.0) {
        throw config_error("stiffness", "must be >= 0");
    }
    if (damping < 0.0) {
        throw config_error("damping", "must be >= 0");
    }
}

std::pair<vec, vec> coupling_forces(const object_coupling &coupling, const axis_state &a,
                                    const axis_state &b, int dof, coupling_state &memory) {
    vec direction = vec::Zero();
    double separation = 0.0;
    const vec d = mask_dof(b.x - a.x, dof);
    if (dof == 1) {
        direction[0] = 1.0;
        separation = d[0];
    } else {
        separation = d.norm();
        if (separation < 1e-9) {
            direction = memory.last_direction;
        } else {
            direction = d / separation;
            memory.last_direction = direction;
        }
    }
    const double rate = direction.dot(mask_dof(b.v - a.v, dof));
    const double tension =
        coupling.stiffness * (separation - coupling.rest_length) + coupling.damping * rate;
    const vec on_a = tension * direction;
    const vec on_b = -on_a;
    return {on_a, on_b};
}

double min_jerk(double tau) {
    tau = std::clamp(tau, 0.0, 1.0);
    const double t3 = tau * tau * tau;
    return t3 * (10.0 - 15.0 * tau + 6.0 * tau * tau);
}

namespace {

double min_jerk_rate(double tau) {
    if (tau <= 0.0 || tau >= 1.0) {
        return 0.0;
    }
    const double t2 = tau * tau;
    return 30.0 * t2 - 60.0 * t2 * tau + 30.0 * t2 * t2;
}

double min_jerk_accel(double tau) {
    if (tau <= 0.0 || tau >= 1.0) {
        return 0.0;
    }
    return 60.0 * tau - 180.0 * tau * tau + 120.0 * tau * tau * tau;
}

// Peak of |s''(tau)| for the quintic profile, at tau = 1/2 -+ sqrt(3)/6.
constexpr double min_jerk_peak_accel = 5.773502691896258;

trajectory_sample sample_sinusoid(const sinusoid_trajectory &s, double t) {
    const double w = 2.0 * std::numbers::pi / s.period;
    const double arg = w * t + s.phase;
    trajectory_sample out;
    out.x = s.center + s.amplitude * std::sin(arg);
    out.v = s.amplitude * (w * std::cos(arg));
    out.a = s.amplitude * (-w * w * std::sin(arg));
    return out;
}

trajectory_sample sample_waypoints(const waypoint_trajectory &w, double t) {
    trajectory_sample out;
    if (w.points.empty()) {
        return out;
    }
    if (t <= w.points.front().t) {
        out.x = w.points.front().x;
        return out;
    }
    if (t >= w.points.back().t) {
        out.x = w.points.back().x;
        return out;
    }
    auto next = std::upper_bound(w.points.begin(), w.points.end(), t,
                                 [](double value, const waypoint &p) { return value < p.t; });
    auto prev = std::prev(next);
    const double span = next->t - prev->t;
    const double tau = (t - prev->t) / span;
    const vec delta = next->x - prev->x;
    out.x = prev->x + delta * min_jerk(tau);
    out.v = delta * (min_jerk_rate(tau) / span);
    out.a = delta * (min_jerk_accel(tau) / (span * span));
    return out;
}

} // namespace

trajectory_sample sample(const trajectory &traj, double t) {
    return std::visit(
        [t](const auto &g) {
            if constexpr (std::is_same_v<std::decay_t<decltype(g)>, sinusoid_trajectory>) {
                return sample_sinusoid(g, t);
            } else {
                return sample_waypoints(g, t);
            }
        },
        traj);
}

double max_acceleration(const trajectory &traj) {
    if (const auto *s = std::get_if<sinusoid_trajectory>(&traj)) {
        const double w = 2.0 * std::numbers::pi / s->period;
        return s->amplitude.cwiseAbs().maxCoeff() * w * w;
    }
    const auto &w = std::get<waypoint_trajectory>(traj);
    double peak = 0.0;
    for (std::size_t i = 1; i < w.points.size(); ++i) {
        const double span = w.points[i].t - w.points[i - 1].t;
        const double dist = (w.points[i].x - w.points[i - 1].x).cwiseAbs().maxCoeff();
        peak = std::max(peak, min_jerk_peak_accel * dist / (span * span));
    }
    return peak;
}

void operator_model::validate() const {
    if (k_h < 0.0) {
        throw config_error("k_h", "must be >= 0");
    }
    if (b_h < 0.0) {
        throw config_error("b_h", "must be >= 0");
    }
    if (const auto *s = std::get_if<sinusoid_trajectory>(&target)) {
        if (!(s->period > 0.0)) {
            throw config_error("trajectory.period", "must be > 0");
        }
    } else {
        const auto &w = std::get<waypoint_trajectory>(target);
        if (w.points.empty()) {
            throw config_error("trajectory.points", "needs at least one waypoint");
        }
        for (std::size_t i = 1; i < w.points.size(); ++i) {
            if (!(w.points[i].t > w.points[i - 1].t)) {
                throw config_error("trajectory.points", "waypoint times must be strictly increasing");
            }
        }
    }
}

vec impedance_pull(double k_h, double b_h, const vec &target, const axis_state &master) {
    return k_h * (target - master.x) - b_h * master.v;
}

vec operator_force(const operator_model &model, const axis_state &master, double t) {
    if (model.kind == operator_kind::scripted) {
        return vec::Zero();
    }
    return impedance_pull(model.k_h, model.b_h, sample(model.target, t).x, master);
}

scripted_step drive_scripted_master(const rigid_axis_plant &master, const trajectory &traj,
                                    double t_next, double dt, const vec &applied_force, int dof) {
    const trajectory_sample s = sample(traj, t_next);
    scripted_step out;
    out.state.x = mask_dof(s.x, dof);
    out.state.v = mask_dof(s.v, dof);
    const vec accel = (out.state.v - master.state.v) / dt;
    const vec friction =
        friction_force(master.viscous_friction, master.coulomb_friction, master.state.v);
    out.operator_force = mask_dof(master.mass.cwiseProduct(accel) - applied_force + friction, dof);
    return out;
}

double kinetic_energy(const vec &mass, const vec &v) {
    return 0.5 * mass.dot(v.cwiseProduct(v));
}

} // namespace telecell
