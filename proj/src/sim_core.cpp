#include "telecell/sim_core.hpp"

#include <cmath>

namespace telecell {

void sim_config::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw config_error("sim.dt", "must be a finite value > 0");
    }
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
        throw config_error("sim.duration", "must be a finite value >= 0");
    }
    if (dof < 1 || dof > 3) {
        throw config_error("sim.dof", "must be 1, 2 or 3");
    }
}

std::uint64_t sim_config::tick_count() const {
    const double ratio = duration / dt;
    const double nearest = std::round(ratio);
    // 1.0 / 0.001 is 999.99999999999989 in binary; treat it as 1000.
    if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) {
        return static_cast<std::uint64_t>(nearest);
    }
    return static_cast<std::uint64_t>(std::floor(ratio));
}

bool all_finite(const vec &v) {
    return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

bool all_finite(const axis_state &s) {
    return all_finite(s.x) && all_finite(s.v);
}

axis_state integrate_step(const axis_state &state, const vec &accel, double dt,
                          const std::string &module, std::uint64_t at_tick) {
    if (!all_finite(state) || !all_finite(accel) || !std::isfinite(dt)) {
        throw sim_fault(module, at_tick, "non-finite integrator input");
    }
    axis_state next;
    next.v = state.v + accel * dt;
    next.x = state.x + next.v * dt;
    if (!all_finite(next)) {
        throw sim_fault(module, at_tick, "non-finite integrator output");
    }
    return next;
}

vec mask_dof(vec v, int dof) {
    for (int i = dof; i < 3; ++i) {
        v[i] = 0.0;
    }
    return v;
}

} // namespace telecell
