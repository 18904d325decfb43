#ifndef TELECELL_ADMITTANCE_HPP
#define TELECELL_ADMITTANCE_HPP

#include "telecell/sim_core.hpp"

namespace telecell {

/// Virtual mechanical system M, B, K (diagonal) of the remote end-effector.
/// The spring acts about x_ref.
struct admittance_params {
    vec mass = vec::Constant(5.0);
    vec damping = vec::Constant(50.0);
    vec stiffness = vec::Constant(400.0);
    vec x_ref = vec::Zero();

    /// Throws config_error when any mass component is <= 0 or B, K are negative.
    void validate() const;
};

/// Desired acceleration of the admittance law,
///
///     xdd_d = M^-1 (f_ext - B xd - K (x - x_ref))
///
/// evaluated componentwise. The state is the current (measured) state.
vec admittance_accel(const admittance_params &params, const axis_state &state, const vec &f_ext);

/// Apparent-inertia reshaping of the local device. Scales the force the wrist
/// sensor measures so the device accelerates like `desired_mass`, with a
/// small stabilizing damping b_fc.
class inertia_reshaper {
public:
    /// Requires 0 < desired_mass <= physical_mass on every axis.
    inertia_reshaper(vec physical_mass, vec desired_mass, double stabilizing_damping = 0.0);

    /// (m / m_d - 1) f_meas - b_fc v
    vec command(const vec &measured_force, const axis_state &state) const;

    const vec &physical_mass() const { return m_physical; }
    const vec &desired_mass() const { return m_desired; }
    double stabilizing_damping() const { return m_damping; }

private:
    vec m_physical;
    vec m_desired;
    vec m_gain;
    double m_damping;
};

vec reshape_inertia(const inertia_reshaper &reshaper, const vec &measured_force, const axis_state &state);

} // namespace telecell

#endif // TELECELL_ADMITTANCE_HPP
