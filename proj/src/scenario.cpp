#include "telecell/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace telecell {

namespace {

std::string join(const std::string &base, const std::string &key) {
    return base.empty() ? key : base + "." + key;
}

/// Read-only cursor over a JSON object that reports errors by dotted path.
class reader {
public:
    reader(const json &node, std::string path) : m_node(node), m_path(std::move(path)) {
        if (!m_node.is_object()) {
            throw config_error(m_path, "expected an object");
        }
    }

    bool has(const char *key) const { return m_node.contains(key) && !m_node.at(key).is_null(); }
    std::string path(const char *key) const { return join(m_path, key); }

    reader child(const char *key) const { return reader(m_node.at(key), path(key)); }
    const json &raw(const char *key) const { return m_node.at(key); }

    double number(const char *key, double fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json &v = m_node.at(key);
        if (!v.is_number()) {
            throw config_error(path(key), "expected a number");
        }
        return v.get<double>();
    }

    std::uint64_t unsigned_number(const char *key, std::uint64_t fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json &v = m_node.at(key);
        if (v.is_number_unsigned()) {
            return v.get<std::uint64_t>();
        }
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
            return static_cast<std::uint64_t>(v.get<std::int64_t>());
        }
        if (v.is_number_float() && v.get<double>() >= 0.0 && v.get<double>() == std::floor(v.get<double>())) {
            return static_cast<std::uint64_t>(v.get<double>());
        }
        throw config_error(path(key), "expected a non-negative integer");
    }

    int integer(const char *key, int fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json &v = m_node.at(key);
        if (!v.is_number_integer()) {
            throw config_error(path(key), "expected an integer");
        }
        return v.get<int>();
    }

    bool boolean(const char *key, bool fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json &v = m_node.at(key);
        if (!v.is_boolean()) {
            throw config_error(path(key), "expected true or false");
        }
        return v.get<bool>();
    }

    std::string string(const char *key, const std::string &fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json &v = m_node.at(key);
        if (!v.is_string()) {
            throw config_error(path(key), "expected a string");
        }
        return v.get<std::string>();
    }

    /// Position-like vector: array of up to 3 numbers, zero padded.
    vec position(const char *key, const vec &fallback) const {
        if (!has(key)) {
            return fallback;
        }
        return parse_position(m_node.at(key), path(key));
    }

    /// Per-axis parameter: scalar broadcast, or array padded with its last entry.
    vec per_axis(const char *key, const vec &fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json &v = m_node.at(key);
        if (v.is_number()) {
            return vec::Constant(v.get<double>());
        }
        vec out = parse_position(v, path(key));
        if (v.empty()) {
            throw config_error(path(key), "expected a number or non-empty array");
        }
        for (std::size_t i = v.size(); i < 3; ++i) {
            out[static_cast<int>(i)] = out[static_cast<int>(v.size()) - 1];
        }
        return out;
    }

    static vec parse_position(const json &v, const std::string &where) {
        if (!v.is_array() || v.size() > 3) {
            throw config_error(where, "expected an array of at most 3 numbers");
        }
        vec out = vec::Zero();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                throw config_error(where, "expected numbers");
            }
            out[static_cast<int>(i)] = v[i].get<double>();
        }
        return out;
    }

private:
    const json &m_node;
    std::string m_path;
};

template <class F>
auto rethrow_at(const std::string &path, F &&f) {
    try {
        return f();
    } catch (const config_error &e) {
        if (e.path().rfind(path, 0) == 0) {
            throw;
        }
        throw config_error(join(path, e.path()), e.message());
    }
}

channel_config parse_channel_fields(const reader &r, const channel_config &base) {
    channel_config c = base;
    c.delay_steps = r.unsigned_number("delay_steps", base.delay_steps);
    c.jitter_steps_max = r.unsigned_number("jitter_steps_max", base.jitter_steps_max);
    c.drop_probability = r.number("drop_probability", base.drop_probability);
    if (!(c.drop_probability >= 0.0 && c.drop_probability <= 1.0)) {
        throw config_error(r.path("drop_probability"), "must lie in [0, 1]");
    }
    return c;
}

constexpr const char *direction_names[4] = {"motion_to_slave", "force_to_slave", "motion_to_master",
                                             "force_to_master"};

link_config parse_link(const reader &r) {
    link_config link;
    link.base = parse_channel_fields(r, {});
    for (int i = 0; i < 4; ++i) {
        if (r.has(direction_names[i])) {
            link.directions[i] = parse_channel_fields(r.child(direction_names[i]), link.base);
        }
    }
    return link;
}

trajectory parse_trajectory(const reader &r) {
    const std::string kind = r.string("kind", "waypoints");
    if (kind == "sinusoid") {
        sinusoid_trajectory s;
        s.center = r.position("center", vec::Zero());
        s.amplitude = r.position("amplitude", vec::Zero());
        s.period = r.number("period", 1.0);
        s.phase = r.number("phase", 0.0);
        if (!(s.period > 0.0)) {
            throw config_error(r.path("period"), "must be > 0");
        }
        return s;
    }
    if (kind == "waypoints") {
        waypoint_trajectory w;
        if (!r.has("points") || !r.raw("points").is_array() || r.raw("points").empty()) {
            throw config_error(r.path("points"), "needs at least one waypoint");
        }
        const json &points = r.raw("points");
        for (std::size_t i = 0; i < points.size(); ++i) {
            const std::string where = r.path("points") + "." + std::to_string(i);
            reader p(points[i], where);
            waypoint wp;
            wp.t = p.number("t", 0.0);
            if (p.has("x") && p.raw("x").is_number()) {
                wp.x = vec::Zero();
                wp.x[0] = p.raw("x").get<double>();
            } else {
                wp.x = p.position("x", vec::Zero());
            }
            if (!w.points.empty() && !(wp.t > w.points.back().t)) {
                throw config_error(where + ".t", "waypoint times must be strictly increasing");
            }
            w.points.push_back(wp);
        }
        return w;
    }
    throw config_error(r.path("kind"), "unknown trajectory kind '" + kind + "'");
}

operator_model parse_operator(const reader &r) {
    operator_model op;
    const std::string kind = r.string("kind", "scripted");
    if (kind == "scripted") {
        op.kind = operator_kind::scripted;
    } else if (kind == "impedance") {
        op.kind = operator_kind::impedance;
    } else {
        throw config_error(r.path("kind"), "expected 'scripted' or 'impedance'");
    }
    op.k_h = r.number("k_h", op.k_h);
    op.b_h = r.number("b_h", op.b_h);
    if (op.k_h < 0.0) {
        throw config_error(r.path("k_h"), "must be >= 0");
    }
    if (op.b_h < 0.0) {
        throw config_error(r.path("b_h"), "must be >= 0");
    }
    if (!r.has("trajectory")) {
        throw config_error(r.path("trajectory"), "unbound port: operator needs a trajectory");
    }
    op.target = parse_trajectory(r.child("trajectory"));
    return op;
}

endpoint parse_endpoint(const json &j, const std::string &where, std::size_t arms) {
    if (!j.is_string()) {
        throw config_error(where, "expected \"arm:<index>\" or \"object\"");
    }
    const auto s = j.get<std::string>();
    if (s == "object") {
        return endpoint{-1};
    }
    if (s.rfind("arm:", 0) == 0) {
        try {
            const int index = std::stoi(s.substr(4));
            if (index >= 0 && static_cast<std::size_t>(index) < arms) {
                return endpoint{index};
            }
        } catch (const std::exception &) {
        }
    }
    throw config_error(where, "unbound port '" + s + "'");
}

json endpoint_to_json(const endpoint &e) {
    return e.is_object() ? json("object") : json("arm:" + std::to_string(e.arm));
}

json channel_to_json(const channel_config &c) {
    return {{"delay_steps", c.delay_steps},
            {"jitter_steps_max", c.jitter_steps_max},
            {"drop_probability", c.drop_probability}};
}

json link_to_json(const link_config &l) {
    json j = channel_to_json(l.base);
    for (int i = 0; i < 4; ++i) {
        j[direction_names[i]] = l.directions[i] ? channel_to_json(*l.directions[i]) : json(nullptr);
    }
    return j;
}

json trajectory_to_json(const trajectory &t, int dof) {
    if (const auto *s = std::get_if<sinusoid_trajectory>(&t)) {
        return {{"kind", "sinusoid"},
                {"center", vec_to_json(s->center, dof)},
                {"amplitude", vec_to_json(s->amplitude, dof)},
                {"period", s->period},
                {"phase", s->phase}};
    }
    json points = json::array();
    for (const auto &p : std::get<waypoint_trajectory>(t).points) {
        points.push_back({{"t", p.t}, {"x", vec_to_json(p.x, dof)}});
    }
    return {{"kind", "waypoints"}, {"points", points}};
}

const char *subject_name(subject_kind k) {
    switch (k) {
    case subject_kind::object:
        return "object";
    case subject_kind::relative:
        return "relative";
    default:
        return "slave";
    }
}

} // namespace

scenario_config parse_scenario(const json &j) {
    scenario_config c;
    const reader root(j, "");
    c.name = root.string("name", c.name);

    if (!root.has("sim")) {
        throw config_error("sim", "missing");
    }
    {
        const reader r = root.child("sim");
        c.sim.dt = r.number("dt", c.sim.dt);
        c.sim.duration = r.number("duration", c.sim.duration);
        c.sim.seed = r.unsigned_number("seed", c.sim.seed);
        c.sim.dof = r.integer("dof", c.sim.dof);
        c.sim.validate();
    }
    const int dof = c.sim.dof;

    if (root.has("plants")) {
        const reader r = root.child("plants");
        if (r.has("master")) {
            const reader m = r.child("master");
            c.master.mass = m.per_axis("mass", c.master.mass);
            c.master.viscous_friction = m.number("viscous_friction", c.master.viscous_friction);
            c.master.coulomb_friction = m.number("coulomb_friction", c.master.coulomb_friction);
            rethrow_at(r.path("master"), [&] {
                rigid_axis_plant p{c.master.mass, c.master.viscous_friction, c.master.coulomb_friction, {}};
                p.validate(3);
                return 0;
            });
        }
    }
    if (root.has("admittance")) {
        const reader r = root.child("admittance");
        c.slave_mass = r.per_axis("mass", c.slave_mass);
        for (int i = 0; i < 3; ++i) {
            if (!(c.slave_mass[i] > 0.0)) {
                throw config_error(r.path("mass"), "virtual mass must be > 0");
            }
        }
    }
    if (root.has("local_device")) {
        const reader r = root.child("local_device");
        c.local.friction_compensation = r.boolean("friction_compensation", c.local.friction_compensation);
        if (r.has("desired_mass")) {
            c.local.desired_mass = r.per_axis("desired_mass", c.master.mass);
        }
        c.local.reshaping_damping = r.number("reshaping_damping", c.local.reshaping_damping);
        if (c.local.desired_mass) {
            rethrow_at("local_device", [&] {
                inertia_reshaper check(c.master.mass, *c.local.desired_mass, c.local.reshaping_damping);
                return 0;
            });
        } else if (c.local.reshaping_damping < 0.0) {
            throw config_error("local_device.reshaping_damping", "must be >= 0");
        }
    }
    if (root.has("bilateral")) {
        const reader r = root.child("bilateral");
        auto &g = c.bilateral.gains;
        g.c1_kp = r.number("c1_kp", g.c1_kp);
        g.c1_kd = r.number("c1_kd", g.c1_kd);
        g.c2_scale = r.number("c2_scale", g.c2_scale);
        g.c3_scale = r.number("c3_scale", g.c3_scale);
        g.c4_kp = r.number("c4_kp", g.c4_kp);
        g.c4_kd = r.number("c4_kd", g.c4_kd);
        g.local_damping_m = r.number("local_damping_m", g.local_damping_m);
        g.local_damping_s = r.number("local_damping_s", g.local_damping_s);
        g.validate();
        const auto mode_text = r.string("mode", std::string(to_string(c.bilateral.mode)));
        const auto mode = parse_mode(mode_text);
        if (!mode) {
            throw config_error(r.path("mode"), "expected PositionForce or FourChannel");
        }
        c.bilateral.mode = *mode;
        if (r.has("schedule")) {
            const json &s = r.raw("schedule");
            if (!s.is_array()) {
                throw config_error(r.path("schedule"), "expected an array");
            }
            for (std::size_t i = 0; i < s.size(); ++i) {
                const std::string where = r.path("schedule") + "." + std::to_string(i);
                const reader e(s[i], where);
                mode_event ev;
                ev.tick = e.unsigned_number("tick", 0);
                const auto m = parse_mode(e.string("mode", ""));
                if (!m) {
                    throw config_error(where + ".mode", "expected PositionForce or FourChannel");
                }
                ev.mode = *m;
                if (!c.bilateral.schedule.empty() && !(ev.tick > c.bilateral.schedule.back().tick)) {
                    throw config_error(where + ".tick", "schedule ticks must be strictly increasing");
                }
                c.bilateral.schedule.push_back(ev);
            }
        }
    }
    if (root.has("channel")) {
        c.channel = parse_link(root.child("channel"));
    }

    if (!root.has("arms") || !root.raw("arms").is_array() || root.raw("arms").empty()) {
        throw config_error("arms", "unbound port: at least one master/slave arm pair is required");
    }
    const json &arms = root.raw("arms");
    for (std::size_t i = 0; i < arms.size(); ++i) {
        const std::string where = "arms." + std::to_string(i);
        const reader r(arms[i], where);
        arm_config a;
        a.name = r.string("name", "arm" + std::to_string(i));
        a.master_initial = mask_dof(r.position("master_initial", vec::Zero()), dof);
        a.slave_initial = mask_dof(r.position("slave_initial", a.master_initial), dof);
        if (!r.has("operator")) {
            throw config_error(r.path("operator"), "unbound port: arm has no operator input");
        }
        a.op = parse_operator(r.child("operator"));
        if (r.has("channel")) {
            a.channel = parse_link(r.child("channel"));
        }
        c.arms.push_back(std::move(a));
    }

    if (root.has("hand")) {
        const reader r = root.child("hand");
        auto &h = c.hand;
        h.fingers = r.integer("fingers", 0);
        if (h.fingers < 0 || h.fingers > 5) {
            throw config_error(r.path("fingers"), "must be between 0 and 5");
        }
        h.arm = r.integer("arm", 0);
        if (h.arm < 0 || static_cast<std::size_t>(h.arm) >= c.arms.size()) {
            throw config_error(r.path("arm"), "unbound port: no such arm");
        }
        auto &p = h.params;
        p.torque_constant = r.number("torque_constant", p.torque_constant);
        p.servo_kp = r.number("servo_kp", p.servo_kp);
        p.servo_kd = r.number("servo_kd", p.servo_kd);
        p.finger_inertia = r.number("finger_inertia", p.finger_inertia);
        p.glove_inertia = r.number("glove_inertia", p.glove_inertia);
        p.operator_k = r.number("operator_k", p.operator_k);
        p.operator_b = r.number("operator_b", p.operator_b);
        p.render_scale = r.number("render_scale", p.render_scale);
        p.render_cap = r.number("render_cap", p.render_cap);
        p.validate();
        if (r.has("object")) {
            const reader o = r.child("object");
            grasp_object obj;
            obj.surface_angle = o.number("surface_angle", obj.surface_angle);
            obj.stiffness = o.number("stiffness", obj.stiffness);
            obj.validate();
            h.object = obj;
        }
        if (r.has("glove_target")) {
            auto t = parse_trajectory(r.child("glove_target"));
            if (!std::holds_alternative<waypoint_trajectory>(t)) {
                throw config_error(r.path("glove_target"), "expected waypoints");
            }
            h.glove_target = std::get<waypoint_trajectory>(t);
        } else if (h.fingers > 0) {
            h.glove_target.points.push_back({0.0, vec::Zero()});
        }
        if (r.has("channel")) {
            h.channel = parse_link(r.child("channel"));
        }
    }

    if (root.has("environment")) {
        const reader r = root.child("environment");
        auto &env = c.environment;
        if (r.has("walls")) {
            const json &walls = r.raw("walls");
            if (!walls.is_array()) {
                throw config_error(r.path("walls"), "expected an array");
            }
            for (std::size_t i = 0; i < walls.size(); ++i) {
                const std::string where = r.path("walls") + "." + std::to_string(i);
                const reader w(walls[i], where);
                wall_config wc;
                wc.arm = w.integer("arm", 0);
                if (wc.arm < 0 || static_cast<std::size_t>(wc.arm) >= c.arms.size()) {
                    throw config_error(where + ".arm", "unbound port: no such arm");
                }
                wc.wall.axis = w.integer("axis", 0);
                wc.wall.position = w.number("position", 0.0);
                wc.wall.side = w.integer("side", 1);
                wc.wall.stiffness = w.number("stiffness", wc.wall.stiffness);
                wc.wall.damping = w.number("damping", wc.wall.damping);
                rethrow_at(where, [&] {
                    wc.wall.validate(dof);
                    return 0;
                });
                env.walls.push_back(wc);
            }
        }
        if (r.has("object")) {
            const reader o = r.child("object");
            object_config oc;
            oc.mass = o.number("mass", oc.mass);
            oc.initial = mask_dof(o.position("initial", vec::Zero()), dof);
            if (!(oc.mass > 0.0)) {
                throw config_error(o.path("mass"), "must be > 0");
            }
            env.object = oc;
        }
        if (r.has("coupling")) {
            const reader cr = r.child("coupling");
            coupling_config cc;
            if (!cr.has("endpoints") || !cr.raw("endpoints").is_array() || cr.raw("endpoints").size() != 2) {
                throw config_error(cr.path("endpoints"), "unbound port: expected two endpoints");
            }
            cc.a = parse_endpoint(cr.raw("endpoints")[0], cr.path("endpoints") + ".0", c.arms.size());
            cc.b = parse_endpoint(cr.raw("endpoints")[1], cr.path("endpoints") + ".1", c.arms.size());
            if ((cc.a.is_object() || cc.b.is_object()) && !env.object) {
                throw config_error(cr.path("endpoints"), "unbound port 'object': environment.object is not declared");
            }
            if (cc.a.arm == cc.b.arm) {
                throw config_error(cr.path("endpoints"), "endpoints must differ");
            }
            cc.coupling.rest_length = cr.number("rest_length", cc.coupling.rest_length);
            cc.coupling.stiffness = cr.number("stiffness", cc.coupling.stiffness);
            cc.coupling.damping = cr.number("damping", cc.coupling.damping);
            rethrow_at("environment.coupling", [&] {
                cc.coupling.validate();
                return 0;
            });
            env.coupling = cc;
        }
        if (r.has("handoff")) {
            const reader h = r.child("handoff");
            handoff_config hc;
            hc.to_arm = h.integer("to_arm", hc.to_arm);
            hc.after = h.number("after", hc.after);
            hc.distance_tolerance = h.number("distance_tolerance", hc.distance_tolerance);
            hc.speed_tolerance = h.number("speed_tolerance", hc.speed_tolerance);
            if (hc.to_arm < 0 || static_cast<std::size_t>(hc.to_arm) >= c.arms.size()) {
                throw config_error(h.path("to_arm"), "unbound port: no such arm");
            }
            if (!env.coupling || !(env.coupling->a.is_object() || env.coupling->b.is_object())) {
                throw config_error(h.path("to_arm"), "handoff needs a coupling with an 'object' endpoint");
            }
            env.handoff = hc;
        }
    }

    if (root.has("success")) {
        const reader r = root.child("success");
        success_config s;
        const std::string subject = r.string("subject", "slave");
        if (subject == "slave") {
            s.subject = subject_kind::slave;
        } else if (subject == "object") {
            s.subject = subject_kind::object;
            if (!c.environment.object) {
                throw config_error(r.path("subject"), "unbound port 'object'");
            }
        } else if (subject == "relative") {
            s.subject = subject_kind::relative;
        } else {
            throw config_error(r.path("subject"), "expected slave, object or relative");
        }
        s.arm = r.integer("arm", 0);
        s.arm_b = r.integer("arm_b", 1);
        const auto n = static_cast<int>(c.arms.size());
        if (s.arm < 0 || s.arm >= n) {
            throw config_error(r.path("arm"), "unbound port: no such arm");
        }
        if (s.subject == subject_kind::relative && (s.arm_b < 0 || s.arm_b >= n)) {
            throw config_error(r.path("arm_b"), "unbound port: no such arm");
        }
        s.center = mask_dof(r.position("center", vec::Zero()), dof);
        s.radius = r.number("radius", s.radius);
        s.dwell = r.number("dwell", s.dwell);
        if (!(s.radius > 0.0)) {
            throw config_error(r.path("radius"), "must be > 0");
        }
        if (s.dwell < 0.0) {
            throw config_error(r.path("dwell"), "must be >= 0");
        }
        c.success = s;
    }
    if (root.has("phases")) {
        const json &ph = root.raw("phases");
        if (!ph.is_array()) {
            throw config_error("phases", "expected an array");
        }
        for (std::size_t i = 0; i < ph.size(); ++i) {
            const std::string where = "phases." + std::to_string(i);
            const reader r(ph[i], where);
            phase_config p;
            p.name = r.string("name", "phase" + std::to_string(i + 1));
            p.start = r.number("start", 0.0);
            p.end = r.number("end", c.sim.duration);
            if (!(p.end > p.start)) {
                throw config_error(where + ".end", "must be after start");
            }
            c.phases.push_back(p);
        }
    }
    if (root.has("observer")) {
        const reader r = root.child("observer");
        c.observer.threshold = r.number("threshold", c.observer.threshold);
        c.observer.window = r.number("window", c.observer.window);
        if (!(c.observer.window > 0.0)) {
            throw config_error("observer.window", "must be > 0");
        }
    }
    return c;
}

json to_json(const scenario_config &c) {
    const int dof = c.sim.dof;
    json j;
    j["name"] = c.name;
    j["sim"] = {{"dt", c.sim.dt}, {"duration", c.sim.duration}, {"seed", c.sim.seed}, {"dof", dof}};
    j["plants"] = {{"master",
                    {{"mass", vec_to_json(c.master.mass, dof)},
                     {"viscous_friction", c.master.viscous_friction},
                     {"coulomb_friction", c.master.coulomb_friction}}}};
    j["admittance"] = {{"mass", vec_to_json(c.slave_mass, dof)}};
    j["local_device"] = {{"friction_compensation", c.local.friction_compensation},
                         {"desired_mass", c.local.desired_mass ? vec_to_json(*c.local.desired_mass, dof) : json(nullptr)},
                         {"reshaping_damping", c.local.reshaping_damping}};
    const auto &g = c.bilateral.gains;
    json schedule = json::array();
    for (const auto &e : c.bilateral.schedule) {
        schedule.push_back({{"tick", e.tick}, {"mode", std::string(to_string(e.mode))}});
    }
    j["bilateral"] = {{"mode", std::string(to_string(c.bilateral.mode))},
                      {"c1_kp", g.c1_kp},
                      {"c1_kd", g.c1_kd},
                      {"c2_scale", g.c2_scale},
                      {"c3_scale", g.c3_scale},
                      {"c4_kp", g.c4_kp},
                      {"c4_kd", g.c4_kd},
                      {"local_damping_m", g.local_damping_m},
                      {"local_damping_s", g.local_damping_s},
                      {"schedule", schedule}};
    j["channel"] = link_to_json(c.channel);
    json arms = json::array();
    for (const auto &a : c.arms) {
        arms.push_back({{"name", a.name},
                        {"master_initial", vec_to_json(a.master_initial, dof)},
                        {"slave_initial", vec_to_json(a.slave_initial, dof)},
                        {"operator",
                         {{"kind", a.op.kind == operator_kind::impedance ? "impedance" : "scripted"},
                          {"k_h", a.op.k_h},
                          {"b_h", a.op.b_h},
                          {"trajectory", trajectory_to_json(a.op.target, dof)}}},
                        {"channel", a.channel ? link_to_json(*a.channel) : json(nullptr)}});
    }
    j["arms"] = arms;
    const auto &h = c.hand;
    const auto &p = h.params;
    j["hand"] = {{"fingers", h.fingers},
                 {"arm", h.arm},
                 {"torque_constant", p.torque_constant},
                 {"servo_kp", p.servo_kp},
                 {"servo_kd", p.servo_kd},
                 {"finger_inertia", p.finger_inertia},
                 {"glove_inertia", p.glove_inertia},
                 {"operator_k", p.operator_k},
                 {"operator_b", p.operator_b},
                 {"render_scale", p.render_scale},
                 {"render_cap", p.render_cap},
                 {"object", h.object ? json{{"surface_angle", h.object->surface_angle},
                                            {"stiffness", h.object->stiffness}}
                                     : json(nullptr)},
                 {"glove_target", h.glove_target.points.empty() ? json(nullptr) : trajectory_to_json(h.glove_target, 1)},
                 {"channel", h.channel ? link_to_json(*h.channel) : json(nullptr)}};
    json walls = json::array();
    for (const auto &w : c.environment.walls) {
        walls.push_back({{"arm", w.arm},
                         {"axis", w.wall.axis},
                         {"position", w.wall.position},
                         {"side", w.wall.side},
                         {"stiffness", w.wall.stiffness},
                         {"damping", w.wall.damping}});
    }
    json env;
    env["walls"] = walls;
    env["object"] = c.environment.object
                        ? json{{"mass", c.environment.object->mass},
                               {"initial", vec_to_json(c.environment.object->initial, dof)}}
                        : json(nullptr);
    if (c.environment.coupling) {
        const auto &cc = *c.environment.coupling;
        env["coupling"] = {{"endpoints", {endpoint_to_json(cc.a), endpoint_to_json(cc.b)}},
                           {"rest_length", cc.coupling.rest_length},
                           {"stiffness", cc.coupling.stiffness},
                           {"damping", cc.coupling.damping}};
    } else {
        env["coupling"] = nullptr;
    }
    if (c.environment.handoff) {
        const auto &ho = *c.environment.handoff;
        env["handoff"] = {{"to_arm", ho.to_arm},
                          {"after", ho.after},
                          {"distance_tolerance", ho.distance_tolerance},
                          {"speed_tolerance", ho.speed_tolerance}};
    } else {
        env["handoff"] = nullptr;
    }
    j["environment"] = env;
    if (c.success) {
        const auto &s = *c.success;
        j["success"] = {{"subject", subject_name(s.subject)},
                        {"arm", s.arm},
                        {"arm_b", s.arm_b},
                        {"center", vec_to_json(s.center, dof)},
                        {"radius", s.radius},
                        {"dwell", s.dwell}};
    } else {
        j["success"] = nullptr;
    }
    json phases = json::array();
    for (const auto &ph : c.phases) {
        phases.push_back({{"name", ph.name}, {"start", ph.start}, {"end", ph.end}});
    }
    j["phases"] = phases;
    j["observer"] = {{"threshold", c.observer.threshold}, {"window", c.observer.window}};
    return j;
}

json canonicalize(const json &j) {
    return to_json(parse_scenario(j));
}

json load_json_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw config_error(path.string(), "cannot open config file");
    }
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw config_error(path.string(), std::string("malformed JSON: ") + e.what());
    }
}

scenario_config load_scenario(const std::filesystem::path &path) {
    return parse_scenario(load_json_file(path));
}

namespace {

std::vector<std::string> split_path(const std::string &path) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
        parts.push_back(part);
    }
    return parts;
}

json *resolve(json &root, const std::string &path) {
    json *node = &root;
    for (const auto &part : split_path(path)) {
        if (node->is_object()) {
            if (!node->contains(part)) {
                return nullptr;
            }
            node = &(*node)[part];
        } else if (node->is_array()) {
            std::size_t index = 0;
            try {
                std::size_t used = 0;
                index = std::stoul(part, &used);
                if (used != part.size()) {
                    return nullptr;
                }
            } catch (const std::exception &) {
                return nullptr;
            }
            if (index >= node->size()) {
                return nullptr;
            }
            node = &(*node)[index];
        } else {
            return nullptr;
        }
    }
    return node;
}

} // namespace

bool has_path(const json &root, const std::string &path) {
    return resolve(const_cast<json &>(root), path) != nullptr;
}

void apply_override(json &root, const std::string &path, const json &value) {
    if (path.empty()) {
        throw config_error(path, "empty override path");
    }
    json *node = resolve(root, path);
    if (node == nullptr) {
        // Optional sections may be absent from a user config; check the canonical form.
        json canonical = canonicalize(root);
        json *slot = resolve(canonical, path);
        if (slot == nullptr) {
            throw config_error(path, "no such parameter");
        }
        *slot = value;
        root = std::move(canonical);
        return;
    }
    *node = value;
}

std::pair<std::string, json> parse_assignment(const std::string &text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw config_error(text, "expected path=value");
    }
    const std::string path = text.substr(0, eq);
    const std::string raw = text.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception &) {
        value = raw;
    }
    return {path, value};
}

} // namespace telecell
