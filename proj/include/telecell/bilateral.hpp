#ifndef TELECELL_BILATERAL_HPP
#define TELECELL_BILATERAL_HPP

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "telecell/admittance.hpp"
#include "telecell/sim_core.hpp"

namespace telecell {

enum class bilateral_mode { position_force, four_channel };

std::string_view to_string(bilateral_mode mode);
std::optional<bilateral_mode> parse_mode(std::string_view text);

/// Channel gains of the bilateral layer.
///
///   C1  master -> slave motion (c1_kp, c1_kd; position reference + velocity feedforward)
///   C2  slave -> master force reflection (c2_scale)
///   C3  master -> slave operator-force feedforward (c3_scale)
///   C4  slave -> master motion coordination (c4_kp, c4_kd)
///
/// The position-force architecture is {C1, C2}; the four-channel one uses all.
struct bilateral_gains {
    double c1_kp = 400.0;
    double c1_kd = 40.0;
    double c2_scale = 1.0;
    double c3_scale = 1.0;
    double c4_kp = 200.0;
    double c4_kd = 20.0;
    double local_damping_m = 5.0;
    double local_damping_s = 30.0;

    /// All gains >= 0.
    void validate() const;

    /// Throws config_error if C3/C4 are active while in position-force mode.
    void validate_for(bilateral_mode mode) const;
};

/// Gains actually in force for `mode`: C3 and C4 are zeroed in position-force.
bilateral_gains effective_gains(const bilateral_gains &gains, bilateral_mode mode);

/// Mode plus the C4 reference offset used for bumpless transfer.
struct bilateral_state {
    bilateral_mode mode = bilateral_mode::position_force;
    vec c4_offset = vec::Zero();
};

/// Force the controller puts into the slave's admittance:
///
///   c1_kp (x_m_rx - x_s) + c1_kd (v_m_rx - v_s) - local_damping_s v_s  [+ c3 f_h_rx]
///
/// This equals the admittance law with K = c1_kp and B = c1_kd + local_damping_s about
/// x_ref = x_m_rx, driven by the feedforward c1_kd v_m_rx (+ c3 f_h_rx).
vec slave_command(const bilateral_gains &gains, bilateral_mode mode, const axis_state &master_rx,
                  const vec &f_h_rx, const axis_state &slave);

/// The slave's virtual M, B, K in bilateral wiring, referenced to the received master position.
admittance_params slave_admittance(const bilateral_gains &gains, const vec &mass,
                                   const axis_state &master_rx);

/// Feedforward force into the slave admittance (C1 velocity term, C3 in four-channel).
vec slave_feedforward(const bilateral_gains &gains, bilateral_mode mode, const axis_state &master_rx,
                      const vec &f_h_rx);

/// Force applied to the master device.
///
///   position-force:  -c2 f_e_rx - b_m v_m
///   four-channel:    -c2 f_e_rx - c4_kp (x_m - x_s_rx - offset) - c4_kd (v_m - v_s_rx) - b_m v_m
///
/// f_e is the force the slave exerts on its environment.
vec master_command(const bilateral_gains &gains, bilateral_mode mode, const axis_state &slave_rx,
                   const vec &f_e_rx, const axis_state &master, const vec &c4_offset = vec::Zero());

vec master_command(const bilateral_gains &gains, const bilateral_state &state,
                   const axis_state &slave_rx, const vec &f_e_rx, const axis_state &master);

/// Bumpless mode change. When entering four-channel, the C4 position reference is
/// re-zeroed so the C4 term (spring and damper together) is zero at the switch instant.
bilateral_state switch_mode(const bilateral_state &current, bilateral_mode new_mode,
                            const bilateral_gains &gains, const axis_state &master,
                            const axis_state &slave_rx);

/// Energy available to the friction compensator. Only positive operator inflow
/// (f_h . v_m > 0) is accumulated.
struct energy_budget {
    double accumulated_interaction_energy = 0.0;
    double spent_compensation_energy = 0.0;

    void accumulate(const vec &f_h, const vec &v_m, double dt);
    double available() const { return accumulated_interaction_energy - spent_compensation_energy; }
};

/// Friction feedforward limited by the budget. The candidate viscous + Coulomb
/// model is scaled down so the cumulative emitted energy never exceeds what the
/// operator has put in. Updates `budget`.
vec friction_feedforward(double viscous, double coulomb, const axis_state &master,
                         energy_budget &budget, double dt);

/// Per-tick port powers of the controller/channel network.
struct port_sample {
    vec f_m = vec::Zero();
    vec v_m = vec::Zero();
    vec f_s = vec::Zero();
    vec v_s = vec::Zero();
};

struct passivity_settings {
    double threshold = 1.0; ///< J
    double window = 0.5;    ///< s
};

struct passivity_trace {
    std::vector<double> energy; ///< E(k), J
    bool active = false;
    std::optional<std::size_t> first_active_tick;
    double max_energy = 0.0;
};

/// E(k) = dt sum_{j<=k} (f_m.v_m + f_s.v_s): energy the two-port delivers to the
/// plants. Flagged active when E(k) exceeds the threshold and rose over the
/// trailing window.
passivity_trace passivity_observer(std::span<const port_sample> samples, double dt,
                                   const passivity_settings &settings = {});

/// Flags a precomputed energy trace (e.g. summed over several arm pairs).
passivity_trace flag_energy_trace(std::vector<double> energy, double dt,
                                  const passivity_settings &settings = {});

/// Incremental form used by the session kernel.
class passivity_accumulator {
public:
    double add(const port_sample &sample, double dt);
    double energy() const { return m_energy; }

private:
    double m_energy = 0.0;
};

} // namespace telecell

#endif // TELECELL_BILATERAL_HPP
