#include <cmath>

#include "common.hpp"
#include "doctest.h"
#include "telecell/metrics.hpp"
#include "telecell/session.hpp"

using namespace telecell;

namespace {

telemetry_series synthetic(json config, std::size_t ticks) {
    telemetry_series s;
    s.header = make_header(canonicalize(config), 1, 0, false);
    for (std::size_t k = 0; k < ticks; ++k) {
        telemetry_record r;
        r.tick = k;
        r.time = static_cast<double>(k) * 0.001;
        r.arms.resize(1);
        record_append(s, r);
    }
    return s;
}

} // namespace

TEST_CASE("steady window is the last fifth") {
    CHECK(steady_window_start(0) == 0);
    CHECK(steady_window_start(1) == 0);
    CHECK(steady_window_start(4) == 3);
    CHECK(steady_window_start(1000) == 800);
}

TEST_CASE("tracking RMS uses only the steady window") {
    auto s = synthetic(testing::one_arm(), 100);
    for (std::size_t k = 0; k < 80; ++k) {
        s.records[k].arms[0].x_m[0] = 10.0; // transient, ignored
    }
    for (std::size_t k = 80; k < 100; ++k) {
        s.records[k].arms[0].x_m[0] = (k % 2) ? 0.3 : -0.4;
    }
    const auto m = compute_metrics(s);
    CHECK(m.tracking_rms == doctest::Approx(std::sqrt((0.09 + 0.16) / 2)));
}

TEST_CASE("force error is weighted over contact ticks; free motion RMS over the rest") {
    auto s = synthetic(testing::one_arm(), 10);
    for (std::size_t k = 0; k < 4; ++k) {
        auto &a = s.records[k].arms[0];
        a.in_contact = true;
        a.f_e[0] = 2.0;
        a.f_m_cmd[0] = -2.0 + (k == 0 ? 0.4 : 0.0);
    }
    for (std::size_t k = 4; k < 10; ++k) {
        s.records[k].arms[0].f_m_cmd[0] = (k % 2) ? 1.0 : -1.0;
    }
    const auto m = compute_metrics(s);
    REQUIRE(m.steady_force_error.has_value());
    CHECK(*m.steady_force_error == doctest::Approx(0.4 / 8.0));
    REQUIRE(m.free_motion_force_rms.has_value());
    CHECK(*m.free_motion_force_rms == doctest::Approx(1.0));
}

TEST_CASE("absent windows give absent metrics") {
    const auto m = compute_metrics(synthetic(testing::one_arm(), 5));
    CHECK_FALSE(m.steady_force_error.has_value());
    CHECK_FALSE(m.task_completion);
    CHECK_FALSE(m.completion_time.has_value());
    const json j = to_json(m);
    CHECK(j.at("steady_force_error").is_null());
    CHECK(j.at("free_motion_force_rms") == 0.0);
}

TEST_CASE("passivity flag follows the energy trace and the configured threshold") {
    json cfg = testing::one_arm();
    cfg["observer"] = {{"threshold", 0.5}, {"window", 0.01}};
    auto s = synthetic(cfg, 100);
    for (std::size_t k = 0; k < 100; ++k) {
        s.records[k].energy = 0.01 * static_cast<double>(k);
    }
    const auto m = compute_metrics(s);
    CHECK(m.passivity_flag);
    REQUIRE(m.passivity_first_tick.has_value());
    CHECK(*m.passivity_first_tick == 51);
    CHECK(m.max_energy == doctest::Approx(0.99));
}

TEST_CASE("completion needs an uninterrupted dwell inside the goal") {
    json cfg = testing::one_arm();
    cfg["success"] = {{"subject", "slave"}, {"center", {0.1}}, {"radius", 0.01}, {"dwell", 0.01}};
    cfg["phases"] = json::array({{{"name", "early"}, {"start", 0.0}, {"end", 0.05}},
                                 {{"name", "late"}, {"start", 0.05}, {"end", 0.2}}});
    auto s = synthetic(cfg, 200);
    // 9 ticks inside, one out, then 10 inside from tick 60.
    for (std::size_t k = 20; k < 29; ++k) {
        s.records[k].arms[0].x_s[0] = 0.105;
    }
    for (std::size_t k = 60; k < 200; ++k) {
        s.records[k].arms[0].x_s[0] = 0.095;
    }
    const auto m = compute_metrics(s);
    CHECK(m.task_completion);
    REQUIRE(m.completion_time.has_value());
    CHECK(*m.completion_time == doctest::Approx(0.069));
    REQUIRE(m.phases.size() == 2);
    CHECK_FALSE(m.phases[0].completed);
    CHECK(m.phases[1].completed);
}

TEST_CASE("budget excess is reported") {
    auto s = synthetic(testing::one_arm(), 3);
    s.records[1].arms[0].budget_accumulated = 1.0;
    s.records[1].arms[0].budget_spent = 1.25;
    CHECK(compute_metrics(s).max_budget_excess == doctest::Approx(0.25));
}

TEST_CASE("metrics are a pure function of the series") {
    const auto series = run_session(parse_scenario(testing::one_arm(1, 0.5)));
    const auto a = to_json(compute_metrics(series));
    const auto b = to_json(compute_metrics(parse_jsonl_string(serialize(series))));
    CHECK(a == b);
}
