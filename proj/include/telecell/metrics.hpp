#ifndef TELECELL_METRICS_HPP
#define TELECELL_METRICS_HPP

#include <optional>
#include <string>
#include <vector>

#include "telecell/telemetry.hpp"

namespace telecell {

struct phase_result {
    std::string name;
    bool completed = false;
    std::optional<double> completion_time;
};

/// Summary of one run. Metrics whose window is empty are absent rather than zero.
struct metrics_report {
    double tracking_rms = 0.0;                       ///< m, RMS |x_m - x_s| over the steady window
    std::optional<double> steady_force_error;        ///< fraction, over contact ticks
    std::optional<double> free_motion_force_rms;     ///< N, RMS |f_m_cmd| over no-contact ticks
    bool passivity_flag = false;
    double max_energy = 0.0;                         ///< J
    std::optional<std::uint64_t> passivity_first_tick;
    bool task_completion = false;
    std::optional<double> completion_time;           ///< s, when the goal dwell finished
    std::vector<phase_result> phases;
    std::optional<double> internal_force;            ///< N, coupling force at completion
    std::optional<double> handoff_force_jump;        ///< N, object force step at the holder switch
    double max_budget_excess = 0.0;                  ///< max over ticks of spent - accumulated (<= 0 when the ledger holds)
};

/// Pure function of the series (config is read back from the header).
metrics_report compute_metrics(const telemetry_series &series);

json to_json(const metrics_report &report);

/// Steady window: the last 20% of the ticks (at least one tick when non-empty).
std::size_t steady_window_start(std::size_t ticks);

} // namespace telecell

#endif // TELECELL_METRICS_HPP
