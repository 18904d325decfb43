#ifndef TELECELL_SESSION_HPP
#define TELECELL_SESSION_HPP

#include <map>
#include <optional>
#include <vector>

#include "telecell/admittance.hpp"
#include "telecell/bilateral.hpp"
#include "telecell/channel.hpp"
#include "telecell/hand.hpp"
#include "telecell/plants.hpp"
#include "telecell/scenario.hpp"
#include "telecell/telemetry.hpp"

namespace telecell {

/// Fixed-step kernel for one scenario. Each tick runs, in order:
///
///   read sensors -> advance channels -> controllers -> integrate plants -> append telemetry
///
/// Live inputs (mode switches, operator targets, channel changes) are queued with
/// submit() and take effect at the next tick; they are written into that tick's
/// record so the run can be replayed exactly.
class session {
public:
    explicit session(scenario_config config);

    /// Validates and queues a live input. Throws config_error on malformed input.
    void submit(json event);

    /// Executes one tick and returns its record. Throws sim_fault on non-finite state.
    const telemetry_record &step();

    /// Runs all remaining ticks.
    void run();

    bool finished() const { return m_tick >= m_total; }
    std::uint64_t ticks_done() const { return m_tick; }
    std::uint64_t total_ticks() const { return m_total; }

    const scenario_config &config() const { return m_config; }
    const telemetry_series &series() const { return m_series; }
    telemetry_series take_series() { return std::move(m_series); }

    bilateral_mode mode(std::size_t arm) const { return m_arms.at(arm).control.mode; }
    channel_config channel_settings(std::size_t arm, int direction) const;

    /// Drops records from memory once consumed (the live service streams them to disk).
    void set_keep_records(bool keep) { m_keep_records = keep; }
    const telemetry_record &last_record() const { return m_last; }

private:
    struct arm_runtime {
        rigid_axis_plant master;
        axis_state slave;
        bilateral_state control;
        energy_budget budget;
        std::optional<inertia_reshaper> reshaper;
        channel<axis_state> motion_to_slave;
        channel<vec> force_to_slave;
        channel<axis_state> motion_to_master;
        channel<vec> force_to_master;
        vec last_f_h = vec::Zero();
        std::optional<vec> live_target;
    };

    struct finger_runtime {
        finger_state state;
        channel<double> glove_to_hand;
        channel<double> torque_to_glove;
    };

    void apply_event(const json &event, bool defer_modes, std::vector<json> &deferred_modes);
    void apply_mode(std::optional<std::size_t> arm, bilateral_mode mode,
                    const std::vector<axis_state> &slave_rx);

    scenario_config m_config;
    telemetry_series m_series;
    telemetry_record m_last;
    std::vector<arm_runtime> m_arms;
    std::vector<finger_runtime> m_fingers;
    std::optional<axis_state> m_object;
    int m_holder = 0; ///< coupling endpoint replaced at handoff (arm index or -1)
    coupling_state m_coupling_memory;
    double m_energy = 0.0; ///< running E(k) over all arm pairs
    std::vector<json> m_pending;
    std::size_t m_schedule_pos = 0;
    std::uint64_t m_tick = 0;
    std::uint64_t m_total = 0;
    bool m_keep_records = true;
    bool m_handoff_done = false;
};

/// Headless run. `inputs` maps tick -> array of live inputs to apply at that tick.
telemetry_series run_session(const scenario_config &config, const std::map<std::uint64_t, json> &inputs = {});

/// Inputs recorded in a series, keyed by tick.
std::map<std::uint64_t, json> recorded_inputs(const telemetry_series &series);

struct replay_result {
    bool identical = false;
    std::optional<std::uint64_t> first_divergent_tick;
    bool header_differs = false;
    telemetry_series replayed;
};

/// Re-simulates from the header config and recorded inputs and compares the
/// serialized output line by line. Throws schema_error if the header config
/// cannot be rebuilt into a session.
replay_result replay(const telemetry_series &series);

/// Same, comparing against the raw bytes of a recorded file (catches corruption
/// that still parses).
replay_result replay_verify(const std::string &recorded_text);

} // namespace telecell

#endif // TELECELL_SESSION_HPP
