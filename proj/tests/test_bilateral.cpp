#include <cmath>
#include <random>

#include "doctest.h"
#include "telecell/bilateral.hpp"
#include "telecell/plants.hpp"

using namespace telecell;

namespace {

axis_state random_state(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    axis_state s;
    s.x = vec(u(rng), u(rng), u(rng));
    s.v = vec(u(rng), u(rng), u(rng)) * 5.0;
    return s;
}

} // namespace

TEST_CASE("mode names round trip") {
    CHECK(parse_mode(to_string(bilateral_mode::position_force)) == bilateral_mode::position_force);
    CHECK(parse_mode(to_string(bilateral_mode::four_channel)) == bilateral_mode::four_channel);
    CHECK_FALSE(parse_mode("Impedance").has_value());
}

TEST_CASE("gain validation") {
    bilateral_gains g;
    CHECK_NOTHROW(g.validate());
    CHECK_NOTHROW(g.validate_for(bilateral_mode::four_channel));
    CHECK_THROWS_AS(g.validate_for(bilateral_mode::position_force), config_error);
    CHECK_NOTHROW(effective_gains(g, bilateral_mode::position_force).validate_for(bilateral_mode::position_force));
    g.c1_kd = -1.0;
    try {
        g.validate();
        FAIL("expected config_error");
    } catch (const config_error &e) {
        CHECK(e.path() == "bilateral.c1_kd");
    }
}

TEST_CASE("position-force master command is force reflection plus damping only") {
    std::mt19937_64 rng(5);
    const bilateral_gains g = effective_gains(bilateral_gains{}, bilateral_mode::position_force);
    for (int i = 0; i < 200; ++i) {
        const axis_state m = random_state(rng);
        const axis_state s = random_state(rng);
        const vec fe = random_state(rng).x * 100.0;
        const vec f = master_command(g, bilateral_mode::position_force, s, fe, m);
        CHECK(f.isApprox(-g.c2_scale * fe - g.local_damping_m * m.v));
    }
}

TEST_CASE("four-channel master command") {
    bilateral_gains g;
    axis_state m, s;
    m.x[0] = 0.1;
    m.v[0] = 0.2;
    s.x[0] = 0.05;
    const vec fe(2.0, 0, 0);
    const vec f = master_command(g, bilateral_mode::four_channel, s, fe, m, vec(0.01, 0, 0));
    CHECK(f[0] == doctest::Approx(-2.0 - 200.0 * 0.04 - 20.0 * 0.2 - 5.0 * 0.2));
}

TEST_CASE("slave command equals the admittance law with feedforward") {
    std::mt19937_64 rng(9);
    const bilateral_gains g;
    for (const auto mode : {bilateral_mode::position_force, bilateral_mode::four_channel}) {
        const bilateral_gains eff = effective_gains(g, mode);
        for (int i = 0; i < 200; ++i) {
            const axis_state mrx = random_state(rng);
            const axis_state s = random_state(rng);
            const vec fh = random_state(rng).x * 10.0;
            const vec direct = slave_command(eff, mode, mrx, fh, s);
            const admittance_params p = slave_admittance(eff, vec::Constant(5.0), mrx);
            // M a = ff - B v - K (x - x_ref)  <=>  M a = slave_command
            const vec via_admittance =
                admittance_accel(p, s, slave_feedforward(eff, mode, mrx, fh)).cwiseProduct(p.mass);
            CHECK((direct - via_admittance).norm() < 1e-9);
        }
    }
}

TEST_CASE("entering four-channel is bumpless for random states") {
    std::mt19937_64 rng(21);
    const bilateral_gains g;
    for (int i = 0; i < 500; ++i) {
        const axis_state m = random_state(rng);
        const axis_state srx = random_state(rng);
        const vec fe = random_state(rng).x * 50.0;
        const bilateral_state before{};
        const vec f_before = master_command(effective_gains(g, before.mode), before, srx, fe, m);
        const bilateral_state after = switch_mode(before, bilateral_mode::four_channel, g, m, srx);
        CHECK(after.mode == bilateral_mode::four_channel);
        const vec f_after = master_command(g, after, srx, fe, m);
        CHECK((f_after - f_before).norm() <= 1e-9);
    }
}

TEST_CASE("leaving four-channel drops exactly the C4 term") {
    const bilateral_gains g;
    axis_state m, srx;
    m.x[0] = 0.1;
    srx.x[0] = 0.02;
    m.v[0] = 0.3;
    bilateral_state four{bilateral_mode::four_channel, vec(0.01, 0, 0)};
    const vec fe(1.0, 0, 0);
    const vec f4 = master_command(g, four, srx, fe, m);
    const bilateral_state pf = switch_mode(four, bilateral_mode::position_force, g, m, srx);
    CHECK(pf.c4_offset == vec::Zero());
    const vec fpf = master_command(effective_gains(g, pf.mode), pf, srx, fe, m);
    const double c4_term = -(200.0 * (0.08 - 0.01) + 20.0 * 0.3);
    CHECK((f4 - fpf)[0] == doctest::Approx(c4_term));
}

TEST_CASE("switching to the current mode changes nothing") {
    const bilateral_gains g;
    bilateral_state s{bilateral_mode::four_channel, vec(0.5, 0, 0)};
    axis_state m;
    m.x[0] = 1.0;
    const auto same = switch_mode(s, bilateral_mode::four_channel, g, m, axis_state{});
    CHECK(same.c4_offset == s.c4_offset);
}

TEST_CASE("energy budget accumulates only operator inflow") {
    energy_budget b;
    b.accumulate(vec(2, 0, 0), vec(1, 0, 0), 0.1);
    b.accumulate(vec(-2, 0, 0), vec(1, 0, 0), 0.1);
    CHECK(b.accumulated_interaction_energy == doctest::Approx(0.2));
}

TEST_CASE("friction feedforward never spends more than accumulated") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    energy_budget b;
    int limited = 0;
    for (int k = 0; k < 20000; ++k) {
        axis_state m;
        m.v = vec(u(rng), u(rng), 0.0) * 0.3;
        b.accumulate(vec(u(rng), u(rng), 0.0), m.v, 0.001);
        const vec ff = friction_feedforward(2.0, 0.3, m, b, 0.001);
        const vec full = friction_force(2.0, 0.3, m.v);
        if ((ff - full).norm() > 1e-12) {
            ++limited;
        }
        CHECK(b.spent_compensation_energy <= b.accumulated_interaction_energy + 1e-15);
    }
    CHECK(limited > 0);
}

TEST_CASE("friction feedforward with ample budget is the full model") {
    energy_budget b;
    b.accumulated_interaction_energy = 10.0;
    axis_state m;
    m.v = vec(0.1, 0, 0);
    const vec ff = friction_feedforward(1.0, 0.2, m, b, 0.001);
    CHECK(ff.isApprox(friction_force(1.0, 0.2, m.v)));
    CHECK(b.spent_compensation_energy == doctest::Approx(ff.dot(m.v) * 0.001));
}

TEST_CASE("passivity observer sums port power and flags growth above threshold") {
    std::vector<port_sample> samples(3000);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        samples[k].f_m = vec(1.5, 0, 0);
        samples[k].v_m = vec(1.0, 0, 0);
    }
    const auto trace = passivity_observer(samples, 0.001);
    CHECK(trace.energy.back() == doctest::Approx(4.5));
    CHECK(trace.active);
    // E(k) = 0.0015 (k + 1) first exceeds 1 J at k = 666.
    REQUIRE(trace.first_active_tick.has_value());
    CHECK(*trace.first_active_tick == 666);
    CHECK(trace.max_energy == doctest::Approx(4.5));
}

TEST_CASE("dissipative ports never flag") {
    std::vector<port_sample> samples(3000);
    for (auto &s : samples) {
        s.f_m = vec(-1.0, 0, 0);
        s.v_m = vec(1.0, 0, 0);
        s.f_s = vec(0.5, 0, 0);
        s.v_s = vec(-0.5, 0, 0);
    }
    const auto trace = passivity_observer(samples, 0.001);
    CHECK_FALSE(trace.active);
    CHECK(trace.max_energy == 0.0);
}

TEST_CASE("energy above threshold but flat does not flag") {
    std::vector<double> e(2000, 2.0);
    CHECK_FALSE(flag_energy_trace(e, 0.001).active);
}
