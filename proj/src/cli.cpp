#include "telecell/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"

#include "telecell/metrics.hpp"
#include "telecell/service.hpp"
#include "telecell/session.hpp"
#include "telecell/sweep.hpp"

namespace telecell {

namespace {

std::filesystem::path log_dir() {
    if (const char *dir = std::getenv("TELECELL_LOG_DIR"); dir && *dir) {
        return dir;
    }
    return ".";
}

scenario_config load_with_overrides(const std::string &file, const std::vector<std::string> &sets,
                                    const std::optional<std::uint64_t> &seed) {
    json j = canonicalize(load_json_file(file));
    for (const auto &s : sets) {
        const auto [path, value] = parse_assignment(s);
        apply_override(j, path, value);
    }
    if (seed) {
        j["sim"]["seed"] = *seed;
    }
    return parse_scenario(j);
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw config_error(path, "cannot open telemetry file");
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct run_args {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
};

int cmd_run(const run_args &a, std::ostream &out, std::ostream &err) {
    const scenario_config config = load_with_overrides(a.config, a.sets, a.seed);
    const telemetry_series series = run_session(config);
    const std::filesystem::path path = a.out.empty() ? log_dir() / (config.name + ".jsonl") : std::filesystem::path(a.out);
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw config_error(path.string(), "cannot write telemetry");
    }
    write_jsonl(file, series);
    err << "telemetry: " << path.string() << '\n';
    out << to_json(compute_metrics(series)).dump(2) << '\n';
    return exit_ok;
}

int cmd_replay(const std::string &in, bool verify, std::ostream &out, std::ostream &err) {
    const std::string text = read_file(in);
    if (verify) {
        const replay_result r = replay_verify(text);
        if (r.identical) {
            out << "identical: " << r.replayed.records.size() << " ticks\n";
            return exit_ok;
        }
        if (r.header_differs) {
            err << "replay mismatch: header differs\n";
        }
        if (r.first_divergent_tick) {
            err << "replay mismatch: first divergent tick " << *r.first_divergent_tick << '\n';
            out << json{{"identical", false}, {"first_divergent_tick", *r.first_divergent_tick}}.dump() << '\n';
        }
        return exit_mismatch;
    }
    const telemetry_series recorded = parse_jsonl_string(text);
    const replay_result r = replay(recorded);
    out << to_json(compute_metrics(r.replayed)).dump(2) << '\n';
    return exit_ok;
}

int cmd_sweep(const std::string &config, const std::vector<std::string> &axes, const std::string &dir,
              unsigned workers, std::ostream &out) {
    sweep_spec spec;
    spec.base = load_json_file(config);
    for (const auto &a : axes) {
        spec.axes.push_back(parse_axis(a));
    }
    spec.output_dir = dir;
    spec.workers = workers;
    const auto cells = run_sweep(spec);
    out << sweep_csv(spec, cells);
    return exit_ok;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Teleoperation cell simulator", "telecell"};
    app.require_subcommand(1);

    run_args ra;
    auto *run = app.add_subcommand("run", "Run a scenario headless, write telemetry, print metrics");
    run->add_option("--config", ra.config, "Scenario JSON")->required();
    run->add_option("--out", ra.out, "Telemetry output (.jsonl)");
    run->add_option("--seed", ra.seed, "Override sim.seed");
    run->add_option("--set", ra.sets, "Override a parameter: path=value (repeatable)");

    std::string replay_in;
    bool verify = false;
    auto *rep = app.add_subcommand("replay", "Re-simulate a recorded telemetry file");
    rep->add_option("--in", replay_in, "Recorded .jsonl")->required();
    rep->add_flag("--verify", verify, "Compare byte for byte; exit 4 on mismatch");

    std::string sweep_config, sweep_out;
    std::vector<std::string> sweep_axes;
    unsigned workers = 0;
    auto *sw = app.add_subcommand("sweep", "Run the Cartesian product of parameter axes");
    sw->add_option("--config", sweep_config, "Base scenario JSON")->required();
    sw->add_option("--axis", sweep_axes, "path=v1,v2,... (repeatable)");
    sw->add_option("--out", sweep_out, "Output directory")->required();
    sw->add_option("--workers", workers, "Concurrent cells (0: one per core)");

    std::string serve_config;
    unsigned short port = 8765;
    double rate = 60.0;
    auto *srv = app.add_subcommand("serve", "Live WebSocket session");
    srv->add_option("--config", serve_config, "Scenario JSON")->required();
    srv->add_option("--port", port, "TCP port (0 picks one)");
    srv->add_option("--rate-hz", rate, "State message rate");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (run->parsed()) {
            return cmd_run(ra, out, err);
        }
        if (rep->parsed()) {
            return cmd_replay(replay_in, verify, out, err);
        }
        if (sw->parsed()) {
            return cmd_sweep(sweep_config, sweep_axes, sweep_out, workers, out);
        }
        serve_options options;
        options.config = load_scenario(serve_config);
        options.port = port;
        options.rate_hz = rate;
        options.log_dir = log_dir();
        return serve(options, err);
    } catch (const config_error &e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const schema_error &e) {
        err << "schema error: " << e.what() << '\n';
        return exit_config;
    } catch (const ordering_error &e) {
        err << "ordering error: " << e.what() << '\n';
        return exit_config;
    } catch (const sim_fault &e) {
        err << "simulation fault: " << e.what() << '\n';
        return exit_fault;
    }
}

} // namespace telecell
