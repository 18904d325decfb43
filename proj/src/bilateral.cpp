#include "telecell/bilateral.hpp"

#include <algorithm>
#include <cmath>

#include "telecell/plants.hpp"

namespace telecell {

std::string_view to_string(bilateral_mode mode) {
    return mode == bilateral_mode::four_channel ? "FourChannel" : "PositionForce";
}

std::optional<bilateral_mode> parse_mode(std::string_view text) {
    if (text == "PositionForce") {
        return bilateral_mode::position_force;
    }
    if (text == "FourChannel") {
        return bilateral_mode::four_channel;
    }
    return std::nullopt;
}

void bilateral_gains::validate() const {
    const std::pair<const char *, double> fields[] = {
        {"bilateral.c1_kp", c1_kp},         {"bilateral.c1_kd", c1_kd},
        {"bilateral.c2_scale", c2_scale},   {"bilateral.c3_scale", c3_scale},
        {"bilateral.c4_kp", c4_kp},         {"bilateral.c4_kd", c4_kd},
        {"bilateral.local_damping_m", local_damping_m},
        {"bilateral.local_damping_s", local_damping_s},
    };
    for (const auto &[name, value] : fields) {
        if (!(value >= 0.0)) {
            throw config_error(name, "gain must be >= 0");
        }
    }
}

void bilateral_gains::validate_for(bilateral_mode mode) const {
    validate();
    if (mode == bilateral_mode::position_force) {
        if (c3_scale != 0.0) {
            throw config_error("bilateral.c3_scale", "must be 0 in PositionForce mode");
        }
        if (c4_kp != 0.0 || c4_kd != 0.0) {
            throw config_error("bilateral.c4_kp", "C4 gains must be 0 in PositionForce mode");
        }
    }
}

bilateral_gains effective_gains(const bilateral_gains &gains, bilateral_mode mode) {
    bilateral_gains out = gains;
    if (mode == bilateral_mode::position_force) {
        out.c3_scale = 0.0;
        out.c4_kp = 0.0;
        out.c4_kd = 0.0;
    }
    return out;
}

vec slave_command(const bilateral_gains &gains, bilateral_mode mode, const axis_state &master_rx,
                  const vec &f_h_rx, const axis_state &slave) {
    gains.validate_for(mode);
    vec f = gains.c1_kp * (master_rx.x - slave.x) + gains.c1_kd * (master_rx.v - slave.v) -
            gains.local_damping_s * slave.v;
    if (mode == bilateral_mode::four_channel) {
        f += gains.c3_scale * f_h_rx;
    }
    return f;
}

admittance_params slave_admittance(const bilateral_gains &gains, const vec &mass,
                                   const axis_state &master_rx) {
    admittance_params p;
    p.mass = mass;
    p.damping = vec::Constant(gains.c1_kd + gains.local_damping_s);
    p.stiffness = vec::Constant(gains.c1_kp);
    p.x_ref = master_rx.x;
    return p;
}

vec slave_feedforward(const bilateral_gains &gains, bilateral_mode mode, const axis_state &master_rx,
                      const vec &f_h_rx) {
    vec f = gains.c1_kd * master_rx.v;
    if (mode == bilateral_mode::four_channel) {
        f += gains.c3_scale * f_h_rx;
    }
    return f;
}

vec master_command(const bilateral_gains &gains, bilateral_mode mode, const axis_state &slave_rx,
                   const vec &f_e_rx, const axis_state &master, const vec &c4_offset) {
    vec f = -gains.c2_scale * f_e_rx - gains.local_damping_m * master.v;
    if (mode == bilateral_mode::four_channel) {
        f -= gains.c4_kp * (master.x - slave_rx.x - c4_offset) + gains.c4_kd * (master.v - slave_rx.v);
    }
    return f;
}

vec master_command(const bilateral_gains &gains, const bilateral_state &state,
                   const axis_state &slave_rx, const vec &f_e_rx, const axis_state &master) {
    return master_command(gains, state.mode, slave_rx, f_e_rx, master, state.c4_offset);
}

bilateral_state switch_mode(const bilateral_state &current, bilateral_mode new_mode,
                            const bilateral_gains &gains, const axis_state &master,
                            const axis_state &slave_rx) {
    bilateral_state next = current;
    if (new_mode == current.mode) {
        return next;
    }
    next.mode = new_mode;
    if (new_mode == bilateral_mode::four_channel) {
        // Offset chosen so c4_kp (e - offset) + c4_kd de == 0 at the switch.
        const vec e = master.x - slave_rx.x;
        const vec de = master.v - slave_rx.v;
        next.c4_offset = gains.c4_kp > 0.0 ? vec(e + (gains.c4_kd / gains.c4_kp) * de) : e;
    } else {
        next.c4_offset = vec::Zero();
    }
    return next;
}

void energy_budget::accumulate(const vec &f_h, const vec &v_m, double dt) {
    accumulated_interaction_energy += std::max(0.0, f_h.dot(v_m)) * dt;
}

vec friction_feedforward(double viscous, double coulomb, const axis_state &master,
                         energy_budget &budget, double dt) {
    const vec candidate = friction_force(viscous, coulomb, master.v);
    const double needed = std::max(0.0, candidate.dot(master.v)) * dt;
    if (needed <= 0.0) {
        return vec::Zero();
    }
    const double available = std::max(0.0, budget.available());
    if (needed <= available) {
        budget.spent_compensation_energy =
            std::min(budget.spent_compensation_energy + needed, budget.accumulated_interaction_energy);
        return candidate;
    }
    const double scale = available / needed;
    budget.spent_compensation_energy = budget.accumulated_interaction_energy;
    return candidate * scale;
}

double passivity_accumulator::add(const port_sample &s, double dt) {
    m_energy += dt * (s.f_m.dot(s.v_m) + s.f_s.dot(s.v_s));
    return m_energy;
}

passivity_trace flag_energy_trace(std::vector<double> energy, double dt,
                                  const passivity_settings &settings) {
    passivity_trace trace;
    trace.energy = std::move(energy);
    const auto window = static_cast<std::size_t>(std::max(1.0, std::round(settings.window / dt)));
    for (std::size_t k = 0; k < trace.energy.size(); ++k) {
        const double e = trace.energy[k];
        trace.max_energy = std::max(trace.max_energy, e);
        const double before = trace.energy[k >= window ? k - window : 0];
        if (!trace.active && e > settings.threshold && e > before) {
            trace.active = true;
            trace.first_active_tick = k;
        }
    }
    return trace;
}

passivity_trace passivity_observer(std::span<const port_sample> samples, double dt,
                                   const passivity_settings &settings) {
    std::vector<double> energy;
    energy.reserve(samples.size());
    passivity_accumulator acc;
    for (const auto &s : samples) {
        energy.push_back(acc.add(s, dt));
    }
    return flag_energy_trace(std::move(energy), dt, settings);
}

} // namespace telecell
