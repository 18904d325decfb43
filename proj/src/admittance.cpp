#include "telecell/admittance.hpp"

namespace telecell {

void admittance_params::validate() const {
    for (int i = 0; i < 3; ++i) {
        if (!(mass[i] > 0.0)) {
            throw config_error("admittance.mass", "virtual mass must be > 0 on every axis");
        }
        if (damping[i] < 0.0) {
            throw config_error("admittance.damping", "must be >= 0");
        }
        if (stiffness[i] < 0.0) {
            throw config_error("admittance.stiffness", "must be >= 0");
        }
    }
}

vec admittance_accel(const admittance_params &params, const axis_state &state, const vec &f_ext) {
    const vec spring = params.stiffness.cwiseProduct(state.x - params.x_ref);
    const vec damper = params.damping.cwiseProduct(state.v);
    return (f_ext - damper - spring).cwiseQuotient(params.mass);
}

inertia_reshaper::inertia_reshaper(vec physical_mass, vec desired_mass, double stabilizing_damping)
    : m_physical(std::move(physical_mass)), m_desired(std::move(desired_mass)),
      m_damping(stabilizing_damping) {
    for (int i = 0; i < 3; ++i) {
        if (!(m_physical[i] > 0.0)) {
            throw config_error("reshaping.physical_mass", "must be > 0");
        }
        if (!(m_desired[i] > 0.0) || m_desired[i] > m_physical[i]) {
            throw config_error("reshaping.desired_mass", "must satisfy 0 < desired <= physical mass");
        }
    }
    if (m_damping < 0.0) {
        throw config_error("reshaping.damping", "must be >= 0");
    }
    m_gain = m_physical.cwiseQuotient(m_desired) - vec::Ones();
}

vec inertia_reshaper::command(const vec &measured_force, const axis_state &state) const {
    return m_gain.cwiseProduct(measured_force) - m_damping * state.v;
}

vec reshape_inertia(const inertia_reshaper &reshaper, const vec &measured_force, const axis_state &state) {
    return reshaper.command(measured_force, state);
}

} // namespace telecell
