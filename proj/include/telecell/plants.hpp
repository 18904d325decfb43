#ifndef TELECELL_PLANTS_HPP
#define TELECELL_PLANTS_HPP

#include <utility>
#include <variant>
#include <vector>

#include "telecell/sim_core.hpp"

namespace telecell {

/// Regularization velocity of the Coulomb term: f_c * tanh(v / v_eps).
inline constexpr double coulomb_velocity_eps = 1e-3;

/// Point-mass Cartesian device with viscous and (regularized) Coulomb friction.
struct rigid_axis_plant {
    vec mass = vec::Constant(2.0);
    double viscous_friction = 0.0;
    double coulomb_friction = 0.0;
    axis_state state;

    void validate(int dof) const;
};

/// Friction force the plant's joints exert against its motion (opposes v).
vec friction_force(double viscous, double coulomb, const vec &v);

/// One-sided wall along `axis`. `side` = +1 means the obstacle occupies
/// x > position; -1 means x < position.
struct wall_contact {
    int axis = 0;
    double position = 0.0;
    int side = 1;
    double stiffness = 5000.0;
    double damping = 0.0;

    void validate(int dof) const;
};

/// Force the wall exerts on the body. Never pulls the body into the wall.
vec contact_force(const wall_contact &wall, const axis_state &state);

/// Penetration depth, zero when not in contact.
double penetration(const wall_contact &wall, const axis_state &state);

/// Spring-damper between two bodies (the bottle held by both hands).
struct object_coupling {
    double rest_length = 0.0;
    double stiffness = 500.0;
    double damping = 0.0;

    void validate() const;
};

/// Direction memory for the degenerate (coincident endpoints) case.
struct coupling_state {
    vec last_direction = vec::UnitX();
};

/// Returns (force on a, force on b); the second is always the exact negation
/// of the first. In 1-DOF the separation is signed (x_b - x_a).
std::pair<vec, vec> coupling_forces(const object_coupling &coupling, const axis_state &a,
                                    const axis_state &b, int dof, coupling_state &memory);

struct trajectory_sample {
    vec x = vec::Zero();
    vec v = vec::Zero();
    vec a = vec::Zero();
};

/// x(t) = center + amplitude * sin(2 pi t / period + phase).
struct sinusoid_trajectory {
    vec center = vec::Zero();
    vec amplitude = vec::Zero();
    double period = 1.0;
    double phase = 0.0;
};

struct waypoint {
    double t = 0.0;
    vec x = vec::Zero();
};

/// Minimum-jerk point-to-point segments between consecutive waypoints,
/// holding the first/last point outside the covered time span.
struct waypoint_trajectory {
    std::vector<waypoint> points;
};

using trajectory = std::variant<sinusoid_trajectory, waypoint_trajectory>;

trajectory_sample sample(const trajectory &traj, double t);

/// Upper bound on |a(t)| declared by the generator.
double max_acceleration(const trajectory &traj);

/// Normalized minimum-jerk profile s(tau), tau in [0, 1].
double min_jerk(double tau);

enum class operator_kind { scripted, impedance };

/// Stand-in for the human. Scripted operators position-drive the master;
/// impedance operators pull it toward the target with k_h, b_h.
struct operator_model {
    operator_kind kind = operator_kind::scripted;
    trajectory target = waypoint_trajectory{};
    double k_h = 300.0;
    double b_h = 20.0;

    void validate() const;
};

/// Impedance operator force f_h = k_h (x_target(t) - x_m) - b_h v_m.
/// For scripted operators use drive_scripted_master instead.
vec operator_force(const operator_model &model, const axis_state &master, double t);

/// Same law toward an explicit target point (live drag input).
vec impedance_pull(double k_h, double b_h, const vec &target, const axis_state &master);

struct scripted_step {
    axis_state state;
    vec operator_force = vec::Zero();
};

/// Moves the master to the scripted trajectory at t_next and reports the force
/// the position constraint had to exert given the other forces on the device.
scripted_step drive_scripted_master(const rigid_axis_plant &master, const trajectory &traj,
                                    double t_next, double dt, const vec &applied_force, int dof);

/// Kinetic energy sum_i 0.5 m_i v_i^2.
double kinetic_energy(const vec &mass, const vec &v);

} // namespace telecell

#endif // TELECELL_PLANTS_HPP
