#include "telecell/telemetry.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace telecell {

int telemetry_series::dof() const {
    return header.at("config").at("sim").at("dof").get<int>();
}

double telemetry_series::dt() const {
    return header.at("config").at("sim").at("dt").get<double>();
}

json vec_to_json(const vec &v, int dof) {
    json out = json::array();
    for (int i = 0; i < dof; ++i) {
        out.push_back(v[i]);
    }
    return out;
}

vec vec_from_json(const json &j) {
    vec out = vec::Zero();
    if (!j.is_array() || j.size() > 3) {
        throw schema_error("expected an array of at most 3 numbers");
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
        out[static_cast<int>(i)] = j[i].get<double>();
    }
    return out;
}

json make_header(const json &canonical_config, std::size_t arms, std::size_t fingers, bool has_object) {
    json h;
    h["schema"] = telemetry_schema_name;
    h["version"] = telemetry_schema_version;
    h["arms"] = arms;
    h["fingers"] = fingers;
    h["object"] = has_object;
    h["fields"] = {
        {"arm", {"x_m", "v_m", "x_s", "v_s", "f_h", "f_e", "f_m_cmd", "f_local", "f_s_cmd",
                 "f_coupling", "mode", "contact", "age", "budget"}},
        {"finger", {"glove", "hand", "current", "tau_est", "rendered", "saturated", "age"}},
        {"object", {"x", "v", "f", "holder"}},
        {"record", {"tick", "t", "arms", "fingers", "object", "energy", "events"}},
    };
    h["config"] = canonical_config;
    return h;
}

void record_append(telemetry_series &series, telemetry_record record) {
    if (record.tick != series.records.size()) {
        throw ordering_error("record tick " + std::to_string(record.tick) + " appended to series of length " +
                             std::to_string(series.records.size()));
    }
    series.records.push_back(std::move(record));
}

std::string serialize_header(const telemetry_series &series) {
    return series.header.dump();
}

std::string serialize_record(const telemetry_record &r, int dof) {
    json line;
    line["tick"] = r.tick;
    line["t"] = r.time;
    json arms = json::array();
    for (const auto &a : r.arms) {
        json j;
        j["x_m"] = vec_to_json(a.x_m, dof);
        j["v_m"] = vec_to_json(a.v_m, dof);
        j["x_s"] = vec_to_json(a.x_s, dof);
        j["v_s"] = vec_to_json(a.v_s, dof);
        j["f_h"] = vec_to_json(a.f_h, dof);
        j["f_e"] = vec_to_json(a.f_e, dof);
        j["f_m_cmd"] = vec_to_json(a.f_m_cmd, dof);
        j["f_local"] = vec_to_json(a.f_local, dof);
        j["f_s_cmd"] = vec_to_json(a.f_s_cmd, dof);
        j["f_coupling"] = vec_to_json(a.f_coupling, dof);
        j["mode"] = std::string(to_string(a.mode));
        j["contact"] = a.in_contact;
        j["age"] = {a.age[0], a.age[1], a.age[2], a.age[3]};
        j["budget"] = {a.budget_accumulated, a.budget_spent};
        arms.push_back(std::move(j));
    }
    line["arms"] = std::move(arms);
    json fingers = json::array();
    for (const auto &f : r.fingers) {
        fingers.push_back({{"glove", f.glove_angle},
                           {"hand", f.hand_angle},
                           {"current", f.current},
                           {"tau_est", f.tau_est},
                           {"rendered", f.rendered},
                           {"saturated", f.saturated},
                           {"age", {f.age[0], f.age[1]}}});
    }
    line["fingers"] = std::move(fingers);
    if (r.object) {
        line["object"] = {{"x", vec_to_json(r.object->x, dof)},
                          {"v", vec_to_json(r.object->v, dof)},
                          {"f", vec_to_json(r.object->f, dof)},
                          {"holder", r.object->holder}};
    }
    line["energy"] = r.energy;
    if (!r.events.empty()) {
        line["events"] = r.events;
    }
    return line.dump();
}

std::string serialize(const telemetry_series &series) {
    std::ostringstream out;
    write_jsonl(out, series);
    return out.str();
}

void write_jsonl(std::ostream &out, const telemetry_series &series) {
    const int dof = series.dof();
    out << serialize_header(series) << '\n';
    for (const auto &r : series.records) {
        out << serialize_record(r, dof) << '\n';
    }
}

telemetry_record parse_record(const json &line, int dof, std::size_t arm_count, std::size_t finger_count) {
    (void)dof;
    telemetry_record r;
    r.tick = line.at("tick").get<std::uint64_t>();
    r.time = line.at("t").get<double>();
    const auto &arms = line.at("arms");
    if (arms.size() != arm_count) {
        throw schema_error("arm count differs from header");
    }
    for (const auto &j : arms) {
        arm_record a;
        a.x_m = vec_from_json(j.at("x_m"));
        a.v_m = vec_from_json(j.at("v_m"));
        a.x_s = vec_from_json(j.at("x_s"));
        a.v_s = vec_from_json(j.at("v_s"));
        a.f_h = vec_from_json(j.at("f_h"));
        a.f_e = vec_from_json(j.at("f_e"));
        a.f_m_cmd = vec_from_json(j.at("f_m_cmd"));
        a.f_local = vec_from_json(j.at("f_local"));
        a.f_s_cmd = vec_from_json(j.at("f_s_cmd"));
        a.f_coupling = vec_from_json(j.at("f_coupling"));
        const auto mode = parse_mode(j.at("mode").get<std::string>());
        if (!mode) {
            throw schema_error("unknown mode");
        }
        a.mode = *mode;
        a.in_contact = j.at("contact").get<bool>();
        for (int i = 0; i < 4; ++i) {
            a.age[i] = j.at("age").at(static_cast<std::size_t>(i)).get<std::int64_t>();
        }
        a.budget_accumulated = j.at("budget").at(0).get<double>();
        a.budget_spent = j.at("budget").at(1).get<double>();
        r.arms.push_back(a);
    }
    const auto &fingers = line.at("fingers");
    if (fingers.size() != finger_count) {
        throw schema_error("finger count differs from header");
    }
    for (const auto &j : fingers) {
        finger_record f;
        f.glove_angle = j.at("glove").get<double>();
        f.hand_angle = j.at("hand").get<double>();
        f.current = j.at("current").get<double>();
        f.tau_est = j.at("tau_est").get<double>();
        f.rendered = j.at("rendered").get<double>();
        f.saturated = j.at("saturated").get<bool>();
        f.age[0] = j.at("age").at(0).get<std::int64_t>();
        f.age[1] = j.at("age").at(1).get<std::int64_t>();
        r.fingers.push_back(f);
    }
    if (line.contains("object")) {
        const auto &j = line.at("object");
        object_record o;
        o.x = vec_from_json(j.at("x"));
        o.v = vec_from_json(j.at("v"));
        o.f = vec_from_json(j.at("f"));
        o.holder = j.at("holder").get<int>();
        r.object = o;
    }
    r.energy = line.at("energy").get<double>();
    if (line.contains("events")) {
        r.events = line.at("events");
    }
    return r;
}

telemetry_series parse_jsonl(std::istream &in) {
    telemetry_series series;
    std::string text;
    std::size_t line_number = 0;
    if (!std::getline(in, text)) {
        throw schema_error("empty telemetry file (no header line)");
    }
    ++line_number;
    try {
        series.header = json::parse(text);
    } catch (const json::exception &e) {
        throw schema_error("line 1: malformed header: " + std::string(e.what()));
    }
    if (!series.header.is_object() || series.header.value("schema", "") != telemetry_schema_name) {
        throw schema_error("line 1: not a telecell telemetry header");
    }
    if (series.header.value("version", -1) != telemetry_schema_version) {
        throw schema_error("line 1: schema version " + series.header.value("version", json(-1)).dump() +
                           " is not supported (expected " + std::to_string(telemetry_schema_version) + ")");
    }
    const int dof = series.dof();
    const auto arms = series.header.at("arms").get<std::size_t>();
    const auto fingers = series.header.at("fingers").get<std::size_t>();
    while (std::getline(in, text)) {
        ++line_number;
        if (text.empty()) {
            continue;
        }
        telemetry_record r;
        try {
            r = parse_record(json::parse(text), dof, arms, fingers);
        } catch (const json::exception &e) {
            throw schema_error("line " + std::to_string(line_number) + " (tick " +
                               std::to_string(series.records.size()) + "): " + e.what());
        } catch (const schema_error &e) {
            throw schema_error("line " + std::to_string(line_number) + " (tick " +
                               std::to_string(series.records.size()) + "): " + e.what());
        }
        record_append(series, std::move(r));
    }
    return series;
}

telemetry_series parse_jsonl_string(const std::string &text) {
    std::istringstream in(text);
    return parse_jsonl(in);
}

std::vector<port_sample> port_samples(const telemetry_series &series, std::size_t arm) {
    std::vector<port_sample> out;
    out.reserve(series.records.size());
    for (const auto &r : series.records) {
        const auto &a = r.arms.at(arm);
        out.push_back({a.f_m_cmd, a.v_m, a.f_s_cmd, a.v_s});
    }
    return out;
}

} // namespace telecell
