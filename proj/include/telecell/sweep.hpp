#ifndef TELECELL_SWEEP_HPP
#define TELECELL_SWEEP_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "telecell/metrics.hpp"
#include "telecell/scenario.hpp"

namespace telecell {

struct sweep_axis {
    std::string path;
    std::vector<json> values;
};

struct sweep_spec {
    json base;
    std::vector<sweep_axis> axes;
    std::optional<std::filesystem::path> output_dir; ///< CSV summary + one telemetry file per cell
    unsigned workers = 0;                            ///< 0: hardware concurrency
};

struct sweep_cell {
    std::size_t index = 0;
    std::vector<json> values; ///< one per axis
    metrics_report report;
};

/// "path=v1,v2,..." with each value parsed as JSON when possible.
sweep_axis parse_axis(const std::string &text);

/// Runs the Cartesian product (last axis varies fastest). Every path is checked
/// against the canonical base config before any cell runs.
std::vector<sweep_cell> run_sweep(const sweep_spec &spec);

std::string sweep_csv(const sweep_spec &spec, const std::vector<sweep_cell> &cells);

/// Runs one scenario JSON with overrides applied; returns metrics and the series.
struct scenario_run {
    telemetry_series series;
    metrics_report report;
};
scenario_run run_scenario(const json &config, const std::vector<std::pair<std::string, json>> &overrides = {});

/// Shipped task scenarios (the JSON under scenarios/), with overrides.
json task1_config();
json task2_config();
json task4_config();
metrics_report run_task1(const std::vector<std::pair<std::string, json>> &overrides = {});
metrics_report run_task2(const std::vector<std::pair<std::string, json>> &overrides = {});
metrics_report run_task4(const std::vector<std::pair<std::string, json>> &overrides = {});

} // namespace telecell

#endif // TELECELL_SWEEP_HPP
