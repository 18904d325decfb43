#include "telecell/session.hpp"

#include <sstream>

namespace telecell {

namespace {

constexpr std::uint64_t finger_stream_base = 1000;

channel_config seeded(channel_config c, std::uint64_t session_seed, std::uint64_t stream) {
    c.seed = derive_seed(session_seed, stream);
    return c;
}

const link_config &arm_link(const scenario_config &c, std::size_t arm) {
    return c.arms[arm].channel ? *c.arms[arm].channel : c.channel;
}

const link_config &hand_link(const scenario_config &c) {
    if (c.hand.channel) {
        return *c.hand.channel;
    }
    return arm_link(c, static_cast<std::size_t>(c.hand.arm));
}

axis_state initial_master(const arm_config &a, int dof) {
    axis_state s;
    if (a.op.kind == operator_kind::scripted) {
        const auto t0 = sample(a.op.target, 0.0);
        s.x = mask_dof(t0.x, dof);
        s.v = mask_dof(t0.v, dof);
    } else {
        s.x = a.master_initial;
    }
    return s;
}

void require_finite(const vec &v, const char *module, const char *what, std::uint64_t tick) {
    if (!all_finite(v)) {
        throw sim_fault(module, tick, std::string("non-finite ") + what);
    }
}

std::optional<int> direction_index(const std::string &name) {
    static const char *names[4] = {"motion_to_slave", "force_to_slave", "motion_to_master", "force_to_master"};
    for (int i = 0; i < 4; ++i) {
        if (name == names[i]) {
            return i;
        }
    }
    return std::nullopt;
}

} // namespace

session::session(scenario_config config) : m_config(std::move(config)) {
    const auto &c = m_config;
    c.sim.validate();
    const int dof = c.sim.dof;
    m_total = c.sim.tick_count();

    for (std::size_t i = 0; i < c.arms.size(); ++i) {
        const auto &a = c.arms[i];
        const link_config &link = arm_link(c, i);
        const auto stream = static_cast<std::uint64_t>(i) * 4;
        const axis_state m0 = initial_master(a, dof);
        axis_state s0;
        s0.x = a.slave_initial;
        arm_runtime rt{
            rigid_axis_plant{c.master.mass, c.master.viscous_friction, c.master.coulomb_friction, m0},
            s0,
            bilateral_state{c.bilateral.mode, vec::Zero()},
            energy_budget{},
            std::nullopt,
            channel<axis_state>(seeded(link.direction(motion_to_slave), c.sim.seed, stream + 0), m0),
            channel<vec>(seeded(link.direction(force_to_slave), c.sim.seed, stream + 1), vec::Zero()),
            channel<axis_state>(seeded(link.direction(motion_to_master), c.sim.seed, stream + 2), s0),
            channel<vec>(seeded(link.direction(force_to_master), c.sim.seed, stream + 3), vec::Zero()),
            vec::Zero(),
            std::nullopt,
        };
        if (c.local.desired_mass) {
            rt.reshaper.emplace(c.master.mass, *c.local.desired_mass, c.local.reshaping_damping);
        }
        m_arms.push_back(std::move(rt));
    }

    const link_config &hl = hand_link(c);
    for (int f = 0; f < c.hand.fingers; ++f) {
        const auto stream = finger_stream_base + static_cast<std::uint64_t>(f) * 2;
        finger_state fs;
        fs.glove_angle = sample(trajectory{c.hand.glove_target}, 0.0).x[0];
        fs.hand_angle = fs.glove_angle;
        m_fingers.push_back(finger_runtime{
            fs,
            channel<double>(seeded(hl.direction(motion_to_slave), c.sim.seed, stream), fs.glove_angle),
            channel<double>(seeded(hl.direction(force_to_master), c.sim.seed, stream + 1), 0.0),
        });
    }

    if (c.environment.object) {
        axis_state o;
        o.x = c.environment.object->initial;
        m_object = o;
    }
    if (c.environment.coupling) {
        const auto &cc = *c.environment.coupling;
        m_holder = cc.a.is_object() ? cc.b.arm : cc.a.arm;
    }

    m_series.header = make_header(to_json(c), c.arms.size(), m_fingers.size(), m_object.has_value());
    m_series.records.reserve(m_total);
}

channel_config session::channel_settings(std::size_t arm, int direction) const {
    const auto &a = m_arms.at(arm);
    switch (direction) {
    case motion_to_slave:
        return a.motion_to_slave.config();
    case force_to_slave:
        return a.force_to_slave.config();
    case motion_to_master:
        return a.motion_to_master.config();
    default:
        return a.force_to_master.config();
    }
}

void session::submit(json event) {
    if (!event.is_object() || !event.contains("type") || !event.at("type").is_string()) {
        throw config_error("type", "input event needs a string 'type'");
    }
    const auto type = event.at("type").get<std::string>();
    const int dof = m_config.sim.dof;
    auto check_arm = [&](bool required) {
        if (!event.contains("arm")) {
            if (required) {
                throw config_error("arm", "required");
            }
            return;
        }
        if (!event.at("arm").is_number_integer() || event.at("arm").get<int>() < 0 ||
            event.at("arm").get<std::size_t>() >= m_arms.size()) {
            throw config_error("arm", "no such arm");
        }
    };
    if (type == "set_mode") {
        check_arm(false);
        if (!event.contains("mode") || !event.at("mode").is_string() ||
            !parse_mode(event.at("mode").get<std::string>())) {
            throw config_error("mode", "expected PositionForce or FourChannel");
        }
    } else if (type == "master_input") {
        check_arm(false);
        if (!event.contains("arm")) {
            event["arm"] = 0;
        }
        const bool has_target = event.contains("target");
        const bool has_delta = event.contains("delta");
        if (has_target == has_delta) {
            throw config_error("target", "master_input needs exactly one of 'target' or 'delta'");
        }
        const json &v = has_target ? event.at("target") : event.at("delta");
        if (!v.is_array() || v.size() != static_cast<std::size_t>(dof)) {
            throw config_error(has_target ? "target" : "delta", "expected " + std::to_string(dof) + " numbers");
        }
        for (const auto &x : v) {
            if (!x.is_number() || !std::isfinite(x.get<double>())) {
                throw config_error(has_target ? "target" : "delta", "expected finite numbers");
            }
        }
    } else if (type == "set_channel") {
        check_arm(false);
        if (event.contains("direction") &&
            (!event.at("direction").is_string() || !direction_index(event.at("direction").get<std::string>()))) {
            throw config_error("direction", "unknown channel direction");
        }
        channel_config probe;
        for (const char *key : {"delay_steps", "jitter_steps_max"}) {
            if (event.contains(key) &&
                (!event.at(key).is_number_integer() || event.at(key).get<std::int64_t>() < 0)) {
                throw config_error(key, "expected a non-negative integer");
            }
        }
        if (event.contains("drop_probability")) {
            if (!event.at("drop_probability").is_number()) {
                throw config_error("drop_probability", "expected a number");
            }
            probe.drop_probability = event.at("drop_probability").get<double>();
        }
        probe.validate();
    } else {
        throw config_error("type", "unknown input type '" + type + "'");
    }
    m_pending.push_back(std::move(event));
}

void session::apply_mode(std::optional<std::size_t> arm, bilateral_mode mode,
                         const std::vector<axis_state> &slave_rx) {
    for (std::size_t i = 0; i < m_arms.size(); ++i) {
        if (arm && *arm != i) {
            continue;
        }
        auto &a = m_arms[i];
        a.control = switch_mode(a.control, mode, m_config.bilateral.gains, a.master.state, slave_rx[i]);
    }
}

void session::apply_event(const json &event, bool defer_modes, std::vector<json> &deferred_modes) {
    const auto type = event.at("type").get<std::string>();
    if (type == "set_mode") {
        if (defer_modes) {
            deferred_modes.push_back(event);
        }
        return;
    }
    if (type == "master_input") {
        auto &a = m_arms.at(event.at("arm").get<std::size_t>());
        if (event.contains("target")) {
            a.live_target = vec_from_json(event.at("target"));
        } else {
            const vec base = a.live_target.value_or(a.master.state.x);
            a.live_target = mask_dof(base + vec_from_json(event.at("delta")), m_config.sim.dof);
        }
        return;
    }
    if (type == "set_channel") {
        std::optional<int> only;
        if (event.contains("direction")) {
            only = direction_index(event.at("direction").get<std::string>());
        }
        for (std::size_t i = 0; i < m_arms.size(); ++i) {
            if (event.contains("arm") && event.at("arm").get<std::size_t>() != i) {
                continue;
            }
            for (int d = 0; d < 4; ++d) {
                if (only && *only != d) {
                    continue;
                }
                channel_config c = channel_settings(i, d);
                if (event.contains("delay_steps")) {
                    c.delay_steps = event.at("delay_steps").get<std::uint64_t>();
                }
                if (event.contains("jitter_steps_max")) {
                    c.jitter_steps_max = event.at("jitter_steps_max").get<std::uint64_t>();
                }
                if (event.contains("drop_probability")) {
                    c.drop_probability = event.at("drop_probability").get<double>();
                }
                auto &a = m_arms[i];
                switch (d) {
                case motion_to_slave:
                    a.motion_to_slave.reconfigure(c);
                    break;
                case force_to_slave:
                    a.force_to_slave.reconfigure(c);
                    break;
                case motion_to_master:
                    a.motion_to_master.reconfigure(c);
                    break;
                default:
                    a.force_to_master.reconfigure(c);
                    break;
                }
            }
        }
    }
}

const telemetry_record &session::step() {
    if (finished()) {
        throw std::logic_error("session already finished");
    }
    const auto &c = m_config;
    const int dof = c.sim.dof;
    const double dt = c.sim.dt;
    const tick now{m_tick, dt};
    const double t = now.time();
    const std::size_t n = m_arms.size();
    const auto &gains = c.bilateral.gains;

    telemetry_record rec;
    rec.tick = m_tick;
    rec.time = t;
    rec.arms.resize(n);

    // Live inputs for this tick. Mode switches wait for the received slave state.
    std::vector<json> inputs;
    inputs.swap(m_pending);
    std::vector<json> mode_inputs;
    for (const auto &e : inputs) {
        apply_event(e, true, mode_inputs);
    }

    // Handoff: the object changes hands once both slaves coincide.
    if (c.environment.handoff && !m_handoff_done && t >= c.environment.handoff->after) {
        const auto &h = *c.environment.handoff;
        const auto &from = m_arms[static_cast<std::size_t>(m_holder)].slave;
        const auto &to = m_arms[static_cast<std::size_t>(h.to_arm)].slave;
        if ((from.x - to.x).norm() <= h.distance_tolerance && from.v.norm() <= h.speed_tolerance &&
            to.v.norm() <= h.speed_tolerance) {
            m_holder = h.to_arm;
            m_handoff_done = true;
        }
    }

    // --- sensors -----------------------------------------------------------
    std::vector<vec> f_h(n), f_env(n, vec::Zero());
    for (std::size_t i = 0; i < n; ++i) {
        auto &a = m_arms[i];
        const auto &op = c.arms[i].op;
        if (a.live_target) {
            f_h[i] = mask_dof(impedance_pull(op.k_h, op.b_h, *a.live_target, a.master.state), dof);
        } else if (op.kind == operator_kind::impedance) {
            f_h[i] = mask_dof(operator_force(op, a.master.state, t), dof);
        } else {
            f_h[i] = a.last_f_h;
        }
    }
    for (const auto &w : c.environment.walls) {
        const auto i = static_cast<std::size_t>(w.arm);
        f_env[i] += contact_force(w.wall, m_arms[i].slave);
        if (penetration(w.wall, m_arms[i].slave) > 0.0) {
            rec.arms[i].in_contact = true;
        }
    }
    vec f_object = vec::Zero();
    if (c.environment.coupling) {
        const auto &cc = *c.environment.coupling;
        auto body = [&](const endpoint &e) -> const axis_state & {
            if (e.is_object()) {
                return *m_object;
            }
            return m_arms[static_cast<std::size_t>(e.arm)].slave;
        };
        endpoint ea = cc.a, eb = cc.b;
        // The non-object endpoint follows the current holder.
        if (ea.is_object()) {
            eb.arm = m_holder;
        } else if (eb.is_object()) {
            ea.arm = m_holder;
        }
        const auto [on_a, on_b] = coupling_forces(cc.coupling, body(ea), body(eb), dof, m_coupling_memory);
        auto credit = [&](const endpoint &e, const vec &f) {
            if (e.is_object()) {
                f_object += f;
            } else {
                f_env[static_cast<std::size_t>(e.arm)] += f;
                rec.arms[static_cast<std::size_t>(e.arm)].f_coupling += f;
            }
        };
        credit(ea, on_a);
        credit(eb, on_b);
    }
    std::vector<vec> f_e(n);
    for (std::size_t i = 0; i < n; ++i) {
        f_env[i] = mask_dof(f_env[i], dof);
        f_e[i] = -f_env[i];
    }
    std::vector<double> tau_est(m_fingers.size());
    for (std::size_t f = 0; f < m_fingers.size(); ++f) {
        tau_est[f] = estimate_force(c.hand.params, m_fingers[f].state);
    }

    // --- channels ----------------------------------------------------------
    std::vector<axis_state> master_rx(n), slave_rx(n);
    std::vector<vec> f_h_rx(n), f_e_rx(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto &a = m_arms[i];
        master_rx[i] = a.motion_to_slave.push_pop(a.master.state);
        f_h_rx[i] = a.force_to_slave.push_pop(f_h[i]);
        slave_rx[i] = a.motion_to_master.push_pop(a.slave);
        f_e_rx[i] = a.force_to_master.push_pop(f_e[i]);
        auto &r = rec.arms[i];
        r.age[motion_to_slave] = a.motion_to_slave.age();
        r.age[force_to_slave] = a.force_to_slave.age();
        r.age[motion_to_master] = a.motion_to_master.age();
        r.age[force_to_master] = a.force_to_master.age();
    }
    std::vector<double> glove_rx(m_fingers.size()), tau_rx(m_fingers.size());
    for (std::size_t f = 0; f < m_fingers.size(); ++f) {
        auto &fr = m_fingers[f];
        glove_rx[f] = fr.glove_to_hand.push_pop(fr.state.glove_angle);
        tau_rx[f] = fr.torque_to_glove.push_pop(tau_est[f]);
    }

    // --- mode changes (scheduled, then live) ---------------------------------
    while (m_schedule_pos < c.bilateral.schedule.size() && c.bilateral.schedule[m_schedule_pos].tick <= m_tick) {
        const auto &ev = c.bilateral.schedule[m_schedule_pos++];
        if (ev.tick == m_tick) {
            apply_mode(std::nullopt, ev.mode, slave_rx);
        }
    }
    for (const auto &e : mode_inputs) {
        std::optional<std::size_t> arm;
        if (e.contains("arm")) {
            arm = e.at("arm").get<std::size_t>();
        }
        apply_mode(arm, *parse_mode(e.at("mode").get<std::string>()), slave_rx);
    }

    // --- controllers -------------------------------------------------------
    std::vector<vec> f_s_cmd(n), f_m_cmd(n), f_local(n), slave_acc(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto &a = m_arms[i];
        const auto mode = a.control.mode;
        const bilateral_gains eff = effective_gains(gains, mode);
        f_s_cmd[i] = mask_dof(slave_command(eff, mode, master_rx[i], f_h_rx[i], a.slave), dof);
        f_m_cmd[i] = mask_dof(master_command(eff, a.control, slave_rx[i], f_e_rx[i], a.master.state), dof);
        vec local = vec::Zero();
        if (a.reshaper) {
            local += a.reshaper->command(f_h[i], a.master.state);
        }
        if (c.local.friction_compensation) {
            local += friction_feedforward(a.master.viscous_friction, a.master.coulomb_friction, a.master.state,
                                          a.budget, dt);
        }
        f_local[i] = mask_dof(local, dof);
        const admittance_params virt = slave_admittance(eff, c.slave_mass, master_rx[i]);
        slave_acc[i] = mask_dof(
            admittance_accel(virt, a.slave, slave_feedforward(eff, mode, master_rx[i], f_h_rx[i]) + f_env[i]), dof);
        require_finite(f_m_cmd[i], "bilateral-controller", "master command", m_tick);
        require_finite(f_s_cmd[i], "bilateral-controller", "slave command", m_tick);
        require_finite(f_local[i], "bilateral-controller", "local device command", m_tick);
    }
    std::vector<servo_output> servo(m_fingers.size());
    std::vector<render_output> rendered(m_fingers.size());
    for (std::size_t f = 0; f < m_fingers.size(); ++f) {
        servo[f] = hand_servo(c.hand.params, m_fingers[f].state, glove_rx[f]);
        rendered[f] = glove_render(tau_rx[f], c.hand.params.render_scale, c.hand.params.render_cap);
    }

    // --- plants ------------------------------------------------------------
    double power = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto &a = m_arms[i];
        const auto &op = c.arms[i].op;
        auto &r = rec.arms[i];
        r.x_m = a.master.state.x;
        r.v_m = a.master.state.v;
        r.x_s = a.slave.x;
        r.v_s = a.slave.v;
        r.f_e = f_e[i];
        r.f_m_cmd = f_m_cmd[i];
        r.f_local = f_local[i];
        r.f_s_cmd = f_s_cmd[i];
        r.f_coupling = mask_dof(r.f_coupling, dof);
        r.mode = a.control.mode;

        const vec actuator = f_m_cmd[i] + f_local[i];
        if (op.kind == operator_kind::scripted && !a.live_target) {
            const auto s = drive_scripted_master(a.master, op.target, tick{m_tick + 1, dt}.time(), dt, actuator, dof);
            f_h[i] = s.operator_force;
            require_finite(f_h[i], "plant-models", "scripted operator force", m_tick);
            a.master.state = s.state;
        } else {
            const vec friction = friction_force(a.master.viscous_friction, a.master.coulomb_friction, a.master.state.v);
            const vec acc = mask_dof((f_h[i] + actuator - friction).cwiseQuotient(a.master.mass), dof);
            a.master.state = integrate_step(a.master.state, acc, dt, "plant-models", m_tick);
        }
        r.f_h = f_h[i];
        a.budget.accumulate(f_h[i], r.v_m, dt);
        r.budget_accumulated = a.budget.accumulated_interaction_energy;
        r.budget_spent = a.budget.spent_compensation_energy;
        a.last_f_h = f_h[i];

        a.slave = integrate_step(a.slave, slave_acc[i], dt, "admittance-controller", m_tick);
        power += f_m_cmd[i].dot(r.v_m) + f_s_cmd[i].dot(r.v_s);
    }
    if (m_object) {
        object_record o;
        o.x = m_object->x;
        o.v = m_object->v;
        o.f = mask_dof(f_object, dof);
        o.holder = m_holder;
        rec.object = o;
        const vec acc = mask_dof(f_object / c.environment.object->mass, dof);
        *m_object = integrate_step(*m_object, acc, dt, "plant-models", m_tick);
    }
    const double glove_target = sample(trajectory{c.hand.glove_target}, t).x[0];
    rec.fingers.resize(m_fingers.size());
    for (std::size_t f = 0; f < m_fingers.size(); ++f) {
        auto &fr = m_fingers[f];
        auto &r = rec.fingers[f];
        r.glove_angle = fr.state.glove_angle;
        r.hand_angle = fr.state.hand_angle;
        r.current = servo[f].current;
        r.tau_est = tau_est[f];
        r.rendered = rendered[f].torque;
        r.saturated = rendered[f].saturated;
        r.age[0] = fr.glove_to_hand.age();
        r.age[1] = fr.torque_to_glove.age();
        fr.state = step_finger(c.hand.params, c.hand.object, fr.state, servo[f], glove_target, rendered[f].torque, dt);
        if (!std::isfinite(fr.state.hand_angle) || !std::isfinite(fr.state.glove_angle)) {
            throw sim_fault("hand-teleop", m_tick, "non-finite finger state");
        }
    }

    // --- telemetry -----------------------------------------------------------
    m_energy += dt * power;
    rec.energy = m_energy;
    for (auto &e : inputs) {
        rec.events.push_back(std::move(e));
    }
    m_last = rec;
    if (m_keep_records) {
        record_append(m_series, std::move(rec));
    } else {
        m_series.records.clear();
    }
    ++m_tick;
    return m_last;
}

void session::run() {
    while (!finished()) {
        step();
    }
}

telemetry_series run_session(const scenario_config &config, const std::map<std::uint64_t, json> &inputs) {
    session s(config);
    while (!s.finished()) {
        auto it = inputs.find(s.ticks_done());
        if (it != inputs.end()) {
            for (const auto &e : it->second) {
                s.submit(e);
            }
        }
        s.step();
    }
    return s.take_series();
}

std::map<std::uint64_t, json> recorded_inputs(const telemetry_series &series) {
    std::map<std::uint64_t, json> out;
    for (const auto &r : series.records) {
        if (!r.events.empty()) {
            out[r.tick] = r.events;
        }
    }
    return out;
}

namespace {

scenario_config config_from_header(const json &header) {
    try {
        return parse_scenario(header.at("config"));
    } catch (const config_error &e) {
        throw schema_error(std::string("header config invalid: ") + e.what());
    } catch (const json::exception &e) {
        throw schema_error(std::string("header config missing: ") + e.what());
    }
}

std::vector<std::string> split_lines(const std::string &text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    return lines;
}

replay_result compare_lines(const std::vector<std::string> &recorded, telemetry_series replayed) {
    replay_result result;
    const std::vector<std::string> fresh = split_lines(serialize(replayed));
    result.replayed = std::move(replayed);
    if (recorded.empty() || fresh.empty() || recorded[0] != fresh[0]) {
        result.header_differs = true;
    }
    const std::size_t lines = std::max(recorded.size(), fresh.size());
    for (std::size_t i = 1; i < lines; ++i) {
        if (i >= recorded.size() || i >= fresh.size() || recorded[i] != fresh[i]) {
            result.first_divergent_tick = i - 1;
            break;
        }
    }
    result.identical = !result.header_differs && !result.first_divergent_tick;
    return result;
}

} // namespace

replay_result replay(const telemetry_series &series) {
    const scenario_config config = config_from_header(series.header);
    return compare_lines(split_lines(serialize(series)), run_session(config, recorded_inputs(series)));
}

replay_result replay_verify(const std::string &recorded_text) {
    const std::vector<std::string> lines = split_lines(recorded_text);
    if (lines.empty()) {
        throw schema_error("empty telemetry file (no header line)");
    }
    json header;
    try {
        header = json::parse(lines[0]);
    } catch (const json::exception &e) {
        throw schema_error(std::string("line 1: malformed header: ") + e.what());
    }
    if (!header.is_object() || header.value("schema", "") != telemetry_schema_name) {
        throw schema_error("line 1: not a telecell telemetry header");
    }
    if (header.value("version", -1) != telemetry_schema_version) {
        throw schema_error("line 1: schema version " + header.value("version", json(-1)).dump() +
                           " is not supported (expected " + std::to_string(telemetry_schema_version) + ")");
    }
    const scenario_config config = config_from_header(header);
    // Inputs are read leniently: a corrupted line shows up as a divergence, not a parse error.
    std::map<std::uint64_t, json> inputs;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        try {
            const json line = json::parse(lines[i]);
            if (line.contains("events")) {
                inputs[i - 1] = line.at("events");
            }
        } catch (const json::exception &) {
        }
    }
    return compare_lines(lines, run_session(config, inputs));
}

} // namespace telecell
