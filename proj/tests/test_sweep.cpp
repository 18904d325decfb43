#include <sstream>

#include "common.hpp"
#include "doctest.h"
#include "telecell/sweep.hpp"

using namespace telecell;

namespace {

std::vector<std::string> csv_lines(const std::string &csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    for (std::string l; std::getline(in, l);) {
        out.push_back(l);
    }
    return out;
}

sweep_spec small_spec() {
    sweep_spec spec;
    spec.base = testing::one_arm(1, 0.1);
    spec.axes.push_back(parse_axis("channel.delay_steps=0,5,10"));
    spec.axes.push_back(parse_axis("bilateral.c2_scale=0.25,0.5,0.75,1.0"));
    spec.workers = 1;
    return spec;
}

} // namespace

TEST_CASE("axis text parses to JSON values") {
    const auto a = parse_axis("bilateral.mode=PositionForce,FourChannel");
    CHECK(a.path == "bilateral.mode");
    REQUIRE(a.values.size() == 2);
    CHECK(a.values[1] == "FourChannel");
    const auto b = parse_axis("channel.delay_steps=0,20");
    CHECK(b.values[1] == 20);
    CHECK_THROWS_AS(parse_axis("nothing"), config_error);
    CHECK_THROWS_AS(parse_axis("x="), config_error);
}

TEST_CASE("no axes runs the base config once") {
    sweep_spec spec;
    spec.base = testing::one_arm(1, 0.1);
    const auto cells = run_sweep(spec);
    REQUIRE(cells.size() == 1);
    CHECK(csv_lines(sweep_csv(spec, cells)).size() == 2);
}

TEST_CASE("3 x 4 grid gives 12 rows with the last axis fastest") {
    const auto spec = small_spec();
    const auto cells = run_sweep(spec);
    REQUIRE(cells.size() == 12);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        CHECK(cells[i].index == i);
        CHECK(cells[i].values[0] == spec.axes[0].values[i / 4]);
        CHECK(cells[i].values[1] == spec.axes[1].values[i % 4]);
    }
    const auto lines = csv_lines(sweep_csv(spec, cells));
    REQUIRE(lines.size() == 13);
    CHECK(lines[0].rfind("cell,channel.delay_steps,bilateral.c2_scale,", 0) == 0);
    CHECK(lines[1].rfind("0,0,0.25,", 0) == 0);
    CHECK(lines[12].rfind("11,10,1.0,", 0) == 0);
}

TEST_CASE("results do not depend on the worker count") {
    auto spec = small_spec();
    const auto serial = sweep_csv(spec, run_sweep(spec));
    spec.workers = 4;
    CHECK(sweep_csv(spec, run_sweep(spec)) == serial);
}

TEST_CASE("an unknown path fails before any cell runs") {
    auto spec = small_spec();
    spec.axes.push_back(parse_axis("bilateral.nope=1,2"));
    spec.output_dir = testing::scratch_dir("sweep_bad");
    CHECK_THROWS_AS(run_sweep(spec), config_error);
    CHECK(std::filesystem::is_empty(*spec.output_dir));
}

TEST_CASE("an invalid value fails before any cell runs") {
    auto spec = small_spec();
    spec.axes[1] = parse_axis("bilateral.c2_scale=1.0,-1.0");
    spec.output_dir = testing::scratch_dir("sweep_bad_value");
    CHECK_THROWS_AS(run_sweep(spec), config_error);
    CHECK(std::filesystem::is_empty(*spec.output_dir));
}

TEST_CASE("output directory gets the summary and one telemetry file per cell") {
    auto spec = small_spec();
    spec.output_dir = testing::scratch_dir("sweep_out");
    const auto cells = run_sweep(spec);
    CHECK(std::filesystem::exists(*spec.output_dir / "summary.csv"));
    CHECK(testing::slurp(*spec.output_dir / "summary.csv") == sweep_csv(spec, cells));
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(std::filesystem::exists(*spec.output_dir / ("cell_" + std::to_string(i) + ".jsonl")));
    }
}

TEST_CASE("scenario runs apply overrides") {
    const auto base = run_scenario(testing::one_arm(1, 0.2));
    const auto delayed = run_scenario(testing::one_arm(1, 0.2), {{"channel.delay_steps", 30}});
    CHECK(delayed.series.config().at("channel").at("delay_steps") == 30);
    CHECK(delayed.report.tracking_rms > base.report.tracking_rms);
}
