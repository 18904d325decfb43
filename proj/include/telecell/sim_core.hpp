#ifndef TELECELL_SIM_CORE_HPP
#define TELECELL_SIM_CORE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace telecell {

/// Cartesian quantity of an end-effector or device. Only the first `dof`
/// components are active; the rest stay at zero.
using vec = Eigen::Vector3d;

/// Raised when a configuration value violates an invariant. `path` names the
/// offending config location (e.g. "bilateral.c1_kp").
class config_error : public std::runtime_error {
public:
    config_error(std::string path, const std::string &what)
        : std::runtime_error(path.empty() ? what : path + ": " + what), m_path(std::move(path)),
          m_message(what) {}

    const std::string &path() const noexcept { return m_path; }
    const std::string &message() const noexcept { return m_message; }

private:
    std::string m_path;
    std::string m_message;
};

/// Non-finite value produced during a session. Aborts the session; never clamped.
class sim_fault : public std::runtime_error {
public:
    sim_fault(std::string module, std::uint64_t tick, const std::string &what)
        : std::runtime_error(module + " @ tick " + std::to_string(tick) + ": " + what),
          m_module(std::move(module)), m_tick(tick) {}

    const std::string &module() const noexcept { return m_module; }
    std::uint64_t tick() const noexcept { return m_tick; }

private:
    std::string m_module;
    std::uint64_t m_tick;
};

struct sim_config {
    double dt = 0.001;
    double duration = 0.0;
    std::uint64_t seed = 0;
    int dof = 1;

    void validate() const;

    /// floor(duration / dt), robust to the representation error of dt.
    std::uint64_t tick_count() const;
};

struct axis_state {
    vec x = vec::Zero();
    vec v = vec::Zero();
};

/// Step counter. Time is always derived from the index, never accumulated.
struct tick {
    std::uint64_t index = 0;
    double dt = 0.001;

    double time() const { return static_cast<double>(index) * dt; }
};

bool all_finite(const vec &v);
bool all_finite(const axis_state &s);

/// Semi-implicit (symplectic) Euler: v' = v + a dt, x' = x + v' dt.
/// Throws sim_fault tagged with `module` on non-finite input or output.
axis_state integrate_step(const axis_state &state, const vec &accel, double dt,
                          const std::string &module = "sim-core", std::uint64_t at_tick = 0);

/// Zeroes components beyond `dof`.
vec mask_dof(vec v, int dof);

} // namespace telecell

#endif // TELECELL_SIM_CORE_HPP
