// Acceptance gate. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "channel_oracle.hpp"
#include "common.hpp"
#include "telecell/admittance.hpp"
#include "telecell/channel.hpp"
#include "telecell/cli.hpp"
#include "telecell/metrics.hpp"
#include "telecell/session.hpp"
#include "telecell/sweep.hpp"

using namespace telecell;

namespace {

struct outcome {
    bool pass = false;
    std::string detail;
};

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::string fmt(const char *f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// Every series produced by a regression run lands here for the ledger check.
std::vector<telemetry_series> ledger_runs;

// ---------------------------------------------------------------------------

outcome admittance_oracle() {
    const auto start = clock_type::now();
    const double m = 2.0, b = 3.0, k = 10.0, f = 1.0, dt = 0.001;
    admittance_params p;
    p.mass = vec::Constant(m);
    p.damping = vec::Constant(b);
    p.stiffness = vec::Constant(k);
    axis_state s;
    // Underdamped: x(t) = x_ss (1 - e^{-z wn t} (cos wd t + z/sqrt(1-z^2) sin wd t)).
    const double wn = std::sqrt(k / m);
    const double z = b / (2.0 * std::sqrt(k * m));
    const double wd = wn * std::sqrt(1.0 - z * z);
    const double x_ss = f / k;
    double max_err = 0.0;
    for (std::uint64_t i = 1; i <= 10000; ++i) {
        s = integrate_step(s, admittance_accel(p, s, vec(f, 0, 0)), dt);
        const double t = static_cast<double>(i) * dt;
        const double exact =
            x_ss * (1.0 - std::exp(-z * wn * t) * (std::cos(wd * t) + z / std::sqrt(1.0 - z * z) * std::sin(wd * t)));
        max_err = std::max(max_err, std::abs(s.x[0] - exact));
    }
    const double elapsed = seconds_since(start);
    const double rel = max_err / x_ss;
    return {rel <= 1e-3 && elapsed < 1.0,
            fmt("max error %.3e of steady state", rel) + fmt(", %.3f s", elapsed)};
}

outcome force_reflection() {
    const auto start = clock_type::now();
    const double k_w = 5000.0, c1_kp = 400.0, c2 = 1.0, x_wall = 0.0, x_m = 0.01;
    json j = {{"name", "reflection"},
              {"sim", {{"dt", 0.001}, {"duration", 4.0}, {"seed", 1}, {"dof", 1}}},
              {"bilateral", {{"mode", "PositionForce"}}},
              {"arms",
               json::array({{{"name", "a"},
                             {"operator",
                              {{"kind", "scripted"},
                               {"trajectory",
                                {{"kind", "waypoints"},
                                 {"points", json::array({{{"t", 0.0}, {"x", {-0.02}}}, {{"t", 1.0}, {"x", {x_m}}}})}}}}}}})},
              {"environment",
               {{"walls", json::array({{{"arm", 0}, {"axis", 0}, {"position", x_wall}, {"side", 1}, {"stiffness", k_w},
                                        {"damping", 20.0}}})}}}};
    const auto series = run_session(parse_scenario(j));
    ledger_runs.push_back(series);
    // c1_kp (x_m - x_s) = k_w (x_s - x_wall)
    const double x_s = (c1_kp * x_m + k_w * x_wall) / (c1_kp + k_w);
    const double expected = c2 * k_w * (x_s - x_wall);
    const double reflected = std::abs(series.records.back().arms[0].f_m_cmd[0]);
    const double rel = std::abs(reflected - expected) / expected;
    const double elapsed = seconds_since(start);
    return {rel <= 5e-3 && elapsed < 5.0,
            fmt("reflected %.6f N", reflected) + fmt(" vs %.6f N", expected) + fmt(", error %.2e", rel) +
                fmt(", %.3f s", elapsed)};
}

outcome lightness() {
    const json base = testing::scenario_json("free_motion");
    const auto pf = run_scenario(base, {{"bilateral.mode", "PositionForce"}});
    const auto fc = run_scenario(base, {{"bilateral.mode", "FourChannel"}});
    ledger_runs.push_back(pf.series);
    ledger_runs.push_back(fc.series);
    const double a = pf.report.free_motion_force_rms.value_or(NAN);
    const double b = fc.report.free_motion_force_rms.value_or(NAN);
    const double margin = (b - a) / b;
    return {a < b && margin >= 0.2,
            fmt("RMS PositionForce %.4f N", a) + fmt(", FourChannel %.4f N", b) + fmt(", margin %.1f%%", 100 * margin)};
}

outcome stability_grid() {
    const auto start = clock_type::now();
    sweep_spec spec;
    spec.base = testing::scenario_json("task1");
    spec.axes.push_back(parse_axis("channel.delay_steps=0,20,40,100"));
    spec.axes.push_back(parse_axis("environment.walls.0.stiffness=5000,20000"));
    spec.axes.push_back(parse_axis("bilateral.mode=PositionForce,FourChannel"));
    const auto cells = run_sweep(spec);
    const double elapsed = seconds_since(start);
    int separating = 0;
    bool frozen = false;
    for (std::size_t i = 0; i + 1 < cells.size(); i += 2) {
        const auto &pf = cells[i];
        const auto &fc = cells[i + 1];
        if (pf.report.passivity_flag && !fc.report.passivity_flag) {
            ++separating;
            if (pf.values[0] == 40 && pf.values[1] == 20000) {
                frozen = true;
            }
        }
    }
    return {separating > 0 && frozen && elapsed < 60.0,
            std::to_string(separating) + " separating cells, frozen cell (40 ms, 20000 N/m) " +
                (frozen ? "holds" : "lost") + fmt(", %.1f s", elapsed)};
}

outcome bumpless() {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        json j = testing::one_arm(2, 2.0);
        j["sim"]["seed"] = trial;
        j["arms"][0]["operator"]["trajectory"] = {{"kind", "sinusoid"},
                                                  {"center", {0.0, 0.0}},
                                                  {"amplitude", {0.02 + 0.06 * u(rng), 0.05 * u(rng)}},
                                                  {"period", 0.5 + 1.5 * u(rng)},
                                                  {"phase", 6.28 * u(rng)}};
        j["channel"] = {{"delay_steps", static_cast<int>(30 * u(rng))},
                        {"jitter_steps_max", static_cast<int>(5 * u(rng))},
                        {"drop_probability", 0.1 * u(rng)}};
        const auto switch_tick = static_cast<std::uint64_t>(200 + 1500 * u(rng));
        const auto config = parse_scenario(j);
        session without(config), with(config);
        vec f_without = vec::Zero(), f_with = vec::Zero();
        for (std::uint64_t k = 0; k <= switch_tick; ++k) {
            if (k == switch_tick) {
                with.submit({{"type", "set_mode"}, {"mode", "FourChannel"}});
            }
            f_without = without.step().arms[0].f_m_cmd;
            const auto &r = with.step();
            f_with = r.arms[0].f_m_cmd;
            if (k == switch_tick && r.arms[0].mode != bilateral_mode::four_channel) {
                return {false, "switch not applied at tick " + std::to_string(k)};
            }
        }
        worst = std::max(worst, (f_with - f_without).norm());
    }
    return {worst <= 0.01, fmt("max discontinuity %.3e N over 100 switches", worst)};
}

outcome hand_fidelity() {
    json j = testing::one_arm(1, 6.0);
    j["hand"] = {{"fingers", 2},
                 {"render_scale", 0.8},
                 {"object", {{"surface_angle", 0.4}, {"stiffness", 1.5}}},
                 {"glove_target", {{"kind", "waypoints"},
                                   {"points", json::array({{{"t", 0.0}, {"x", {0.0}}}, {{"t", 1.0}, {"x", {0.9}}}})}}}};
    const auto config = parse_scenario(j);
    const auto series = run_session(config);
    ledger_runs.push_back(series);
    double worst = 0.0;
    for (const auto &f : series.records.back().fingers) {
        const double penetration = f.hand_angle - 0.4;
        const double expected = 0.8 * 1.5 * penetration;
        worst = std::max(worst, std::abs(f.rendered - expected) / expected);
        if (f.saturated || penetration <= 0.0) {
            return {false, "finger not in a steady unsaturated grasp"};
        }
    }
    return {worst <= 0.01, fmt("max rendered-torque error %.3e", worst)};
}

outcome channel_oracle() {
    channel_config c;
    c.delay_steps = 4;
    c.jitter_steps_max = 2;
    c.drop_probability = 0.1;
    c.seed = 0xC0FFEE;
    channel<double> ch(c, 0.0);
    testing::oracle_link oracle(c.delay_steps, c.jitter_steps_max, c.drop_probability, c.seed, 0.0);
    std::mt19937_64 input(99);
    std::normal_distribution<double> n(0.0, 1.0);
    std::size_t mismatches = 0;
    for (int k = 0; k < 10000; ++k) {
        const double v = n(input);
        if (ch.push_pop(v) != oracle.step(v)) {
            ++mismatches;
        }
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatches in 10000 ticks"};
}

json random_config(std::mt19937_64 &rng, int index) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int dof = 1 + static_cast<int>(rng() % 3);
    const int arms = 1 + static_cast<int>(rng() % 2);
    auto point = [&](double scale) {
        json x = json::array();
        for (int i = 0; i < dof; ++i) {
            x.push_back(scale * (u(rng) - 0.5));
        }
        return x;
    };
    json j;
    j["name"] = "random" + std::to_string(index);
    j["sim"] = {{"dt", 0.001}, {"duration", 0.5 + u(rng)}, {"seed", rng()}, {"dof", dof}};
    j["bilateral"] = {{"mode", u(rng) < 0.5 ? "PositionForce" : "FourChannel"},
                      {"schedule", json::array({{{"tick", 100 + rng() % 200}, {"mode", "FourChannel"}},
                                                {{"tick", 400 + rng() % 100}, {"mode", "PositionForce"}}})}};
    j["channel"] = {{"delay_steps", rng() % 30}, {"jitter_steps_max", rng() % 6}, {"drop_probability", 0.2 * u(rng)}};
    j["arms"] = json::array();
    for (int a = 0; a < arms; ++a) {
        json op;
        if (u(rng) < 0.5) {
            op = {{"kind", "scripted"},
                  {"trajectory", {{"kind", "sinusoid"}, {"center", point(0.1)}, {"amplitude", point(0.1)},
                                  {"period", 0.5 + u(rng)}}}};
        } else {
            op = {{"kind", "impedance"},
                  {"trajectory", {{"kind", "waypoints"},
                                  {"points", json::array({{{"t", 0.0}, {"x", point(0.0)}}, {{"t", 0.5}, {"x", point(0.1)}}})}}}};
        }
        j["arms"].push_back({{"name", "arm" + std::to_string(a)}, {"operator", op}});
    }
    j["environment"] = {{"walls", json::array({{{"arm", 0}, {"axis", 0}, {"position", 0.02}, {"side", 1},
                                                {"stiffness", 2000.0 + 18000.0 * u(rng)}, {"damping", 30.0}}})}};
    if (u(rng) < 0.5) {
        j["hand"] = {{"fingers", 1 + rng() % 3}, {"object", {{"surface_angle", 0.3}}}};
    }
    return j;
}

outcome replay_determinism() {
    const auto dir = testing::scratch_dir("acceptance_replay");
    std::mt19937_64 rng(77);
    int ok = 0;
    std::string failures;
    for (int i = 0; i < 20; ++i) {
        const json j = random_config(rng, i);
        const auto config = parse_scenario(j);
        // Live inputs are part of the record and must replay too.
        std::map<std::uint64_t, json> inputs;
        inputs[150] = json::array({{{"type", "set_channel"}, {"delay_steps", rng() % 10}}});
        inputs[320] = json::array({{{"type", "set_mode"}, {"arm", 0}, {"mode", "FourChannel"}}});
        const auto series = run_session(config, inputs);
        ledger_runs.push_back(series);
        const auto path = dir / ("run" + std::to_string(i) + ".jsonl");
        {
            std::ofstream out(path, std::ios::binary);
            write_jsonl(out, series);
        }
        std::ostringstream out, err;
        const int code = run_cli({"replay", "--in", path.string(), "--verify"}, out, err);
        if (code == exit_ok) {
            ++ok;
        } else {
            failures += " #" + std::to_string(i) + "(" + std::to_string(code) + ")";
        }
    }
    return {ok == 20, std::to_string(ok) + "/20 byte-exact" + failures};
}

outcome scenario_regressions() {
    struct task {
        const char *name;
        std::function<json()> config;
    };
    const task tasks[] = {{"task1", task1_config}, {"task2", task2_config}, {"task4", task4_config}};
    std::string detail;
    bool pass = true;
    for (const auto &t : tasks) {
        const auto run = run_scenario(t.config());
        ledger_runs.push_back(run.series);
        const json got = to_json(run.report);
        const json golden = load_json_file(testing::source_dir() / "tests" / "golden" / (std::string(t.name) + ".json"));
        const bool same = got.dump() == golden.dump();
        pass &= same;
        detail += std::string(t.name) + (same ? " exact" : " DIFFERS") + "; ";
    }
    const auto t1 = run_task1();
    const auto t2 = run_task2();
    const auto t4 = run_task4();
    const bool flags = t1.task_completion && t2.task_completion && t4.phases.size() == 2 &&
                       !t4.phases[0].completed && t4.phases[1].completed;
    pass &= flags;
    detail += flags ? "completion flags task1 true, task2 true, task4 false/true" : "completion flags wrong";
    return {pass, detail};
}

outcome budget_ledger() {
    std::size_t ticks = 0;
    for (const auto &s : ledger_runs) {
        for (std::size_t arm = 0; arm < (s.records.empty() ? 0 : s.records[0].arms.size()); ++arm) {
            double prev_spent = 0.0;
            for (const auto &r : s.records) {
                const auto &a = r.arms[arm];
                if (a.budget_spent > a.budget_accumulated || a.budget_spent < prev_spent) {
                    return {false, "violated at tick " + std::to_string(r.tick) + " of " +
                                       s.config().at("name").get<std::string>()};
                }
                prev_spent = a.budget_spent;
                ++ticks;
            }
        }
    }
    return {ticks > 0, std::to_string(ledger_runs.size()) + " runs, " + std::to_string(ticks) + " arm-ticks checked"};
}

} // namespace

int main() {
    const std::pair<const char *, outcome (*)()> criteria[] = {
        {"admittance-oracle", admittance_oracle},
        {"force-reflection-fidelity", force_reflection},
        {"free-motion-lightness", lightness},
        {"contact-stability-grid", stability_grid},
        {"bumpless-switching", bumpless},
        {"hand-loop-fidelity", hand_fidelity},
        {"channel-oracle-equivalence", channel_oracle},
        {"determinism-and-replay", replay_determinism},
        {"scenario-regressions", scenario_regressions},
        {"energy-budget-ledger", budget_ledger},
    };
    int failed = 0;
    for (const auto &[name, check] : criteria) {
        outcome o;
        try {
            o = check();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << (std::size(criteria) - failed) << "/" << std::size(criteria)
              << std::endl;
    return failed ? 1 : 0;
}
