#include "telecell/sweep.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "telecell/session.hpp"

namespace telecell {

// Defined in the generated translation unit that embeds scenarios/*.json.
const char *embedded_scenario(const std::string &name);

namespace {

json parse_value(const std::string &text) {
    try {
        return json::parse(text);
    } catch (const json::exception &) {
        return json(text);
    }
}

std::string csv_value(const json &v) {
    if (v.is_null()) {
        return "";
    }
    if (v.is_string()) {
        return v.get<std::string>();
    }
    return v.dump();
}

std::vector<std::size_t> digits(std::size_t index, const std::vector<sweep_axis> &axes) {
    std::vector<std::size_t> out(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
        out[a] = index % axes[a].values.size();
        index /= axes[a].values.size();
    }
    return out;
}

json task_config(const char *name) {
    return json::parse(embedded_scenario(name));
}

metrics_report run_task(const char *name, const std::vector<std::pair<std::string, json>> &overrides) {
    return run_scenario(task_config(name), overrides).report;
}

} // namespace

sweep_axis parse_axis(const std::string &text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw config_error(text, "expected path=v1,v2,...");
    }
    sweep_axis axis;
    axis.path = text.substr(0, eq);
    std::stringstream rest(text.substr(eq + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
        axis.values.push_back(parse_value(item));
    }
    if (axis.values.empty()) {
        throw config_error(axis.path, "axis has no values");
    }
    return axis;
}

scenario_run run_scenario(const json &config, const std::vector<std::pair<std::string, json>> &overrides) {
    json j = canonicalize(config);
    for (const auto &[path, value] : overrides) {
        apply_override(j, path, value);
    }
    scenario_run out;
    out.series = run_session(parse_scenario(j));
    out.report = compute_metrics(out.series);
    return out;
}

std::vector<sweep_cell> run_sweep(const sweep_spec &spec) {
    const json base = canonicalize(spec.base);
    std::size_t total = 1;
    for (const auto &axis : spec.axes) {
        if (!has_path(base, axis.path)) {
            throw config_error(axis.path, "no such parameter");
        }
        if (axis.values.empty()) {
            throw config_error(axis.path, "axis has no values");
        }
        total *= axis.values.size();
    }
    // Every cell config must parse before any cell runs.
    std::vector<json> configs(total);
    std::vector<sweep_cell> cells(total);
    for (std::size_t i = 0; i < total; ++i) {
        json j = base;
        const auto d = digits(i, spec.axes);
        cells[i].index = i;
        for (std::size_t a = 0; a < spec.axes.size(); ++a) {
            apply_override(j, spec.axes[a].path, spec.axes[a].values[d[a]]);
            cells[i].values.push_back(spec.axes[a].values[d[a]]);
        }
        parse_scenario(j);
        configs[i] = std::move(j);
    }
    if (spec.output_dir) {
        std::filesystem::create_directories(*spec.output_dir);
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(total);
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            try {
                telemetry_series series = run_session(parse_scenario(configs[i]));
                cells[i].report = compute_metrics(series);
                if (spec.output_dir) {
                    std::ofstream out(*spec.output_dir / ("cell_" + std::to_string(i) + ".jsonl"));
                    write_jsonl(out, series);
                }
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    unsigned n = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
    n = static_cast<unsigned>(std::min<std::size_t>(n, total));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < n; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool) {
        t.join();
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    if (spec.output_dir) {
        std::ofstream out(*spec.output_dir / "summary.csv");
        out << sweep_csv(spec, cells);
    }
    return cells;
}

std::string sweep_csv(const sweep_spec &spec, const std::vector<sweep_cell> &cells) {
    std::ostringstream out;
    out << "cell";
    for (const auto &axis : spec.axes) {
        out << ',' << axis.path;
    }
    out << ",tracking_rms,steady_force_error,free_motion_force_rms,passivity_flag,max_energy,task_completion,"
           "completion_time\n";
    for (const auto &c : cells) {
        const json m = to_json(c.report);
        out << c.index;
        for (const auto &v : c.values) {
            out << ',' << csv_value(v);
        }
        for (const char *k : {"tracking_rms", "steady_force_error", "free_motion_force_rms", "passivity_flag",
                              "max_energy", "task_completion", "completion_time"}) {
            out << ',' << csv_value(m.at(k));
        }
        out << '\n';
    }
    return out.str();
}

json task1_config() { return task_config("task1"); }
json task2_config() { return task_config("task2"); }
json task4_config() { return task_config("task4"); }

metrics_report run_task1(const std::vector<std::pair<std::string, json>> &overrides) {
    return run_task("task1", overrides);
}
metrics_report run_task2(const std::vector<std::pair<std::string, json>> &overrides) {
    return run_task("task2", overrides);
}
metrics_report run_task4(const std::vector<std::pair<std::string, json>> &overrides) {
    return run_task("task4", overrides);
}

} // namespace telecell
