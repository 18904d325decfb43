#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "telecell/admittance.hpp"
#include "telecell/bilateral.hpp"
#include "telecell/channel.hpp"
#include "telecell/metrics.hpp"
#include "telecell/session.hpp"
#include "telecell/sweep.hpp"

namespace py = pybind11;
using namespace telecell;

// JSON crosses the boundary as text; the Python package wraps it with json.loads/dumps.

namespace {

vec to_vec(const std::vector<double> &v) {
    if (v.size() > 3) {
        throw py::value_error("expected at most 3 components");
    }
    vec out = vec::Zero();
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[static_cast<int>(i)] = v[i];
    }
    return out;
}

std::vector<double> from_vec(const vec &v, std::size_t n) {
    return std::vector<double>(v.data(), v.data() + n);
}

axis_state to_state(const std::vector<double> &x, const std::vector<double> &v) {
    return axis_state{to_vec(x), to_vec(v)};
}

std::map<std::uint64_t, json> parse_inputs(const std::string &text) {
    std::map<std::uint64_t, json> out;
    if (text.empty()) {
        return out;
    }
    const json parsed = json::parse(text);
    for (const auto &[tick, events] : parsed.items()) {
        out[std::stoull(tick)] = events;
    }
    return out;
}

std::vector<std::pair<std::string, json>> parse_overrides(const std::string &text) {
    std::vector<std::pair<std::string, json>> out;
    if (text.empty()) {
        return out;
    }
    const json parsed = json::parse(text);
    for (const auto &[path, value] : parsed.items()) {
        out.emplace_back(path, value);
    }
    return out;
}

class py_session {
public:
    explicit py_session(const std::string &config) : m_session(parse_scenario(json::parse(config))) {}

    void submit(const std::string &event) { m_session.submit(json::parse(event)); }

    std::string step() {
        const auto &r = m_session.step();
        return serialize_record(r, m_session.config().sim.dof);
    }

    bool finished() const { return m_session.finished(); }
    std::uint64_t ticks_done() const { return m_session.ticks_done(); }
    std::uint64_t total_ticks() const { return m_session.total_ticks(); }
    std::string mode(std::size_t arm) const { return std::string(to_string(m_session.mode(arm))); }

    std::string telemetry() const { return serialize(m_session.series()); }

private:
    session m_session;
};

class py_channel {
public:
    py_channel(std::uint64_t delay, std::uint64_t jitter, double drop, std::uint64_t seed, double initial)
        : m_channel(channel_config{delay, jitter, drop, seed}, initial) {}

    double push_pop(double v) { return m_channel.push_pop(v); }
    std::int64_t age() const { return m_channel.age(); }

private:
    channel<double> m_channel;
};

} // namespace

PYBIND11_MODULE(_telecell, m) {
    m.doc() = "Teleoperation cell simulator core";

    py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<schema_error>(m, "SchemaError", PyExc_ValueError);
    py::register_exception<ordering_error>(m, "OrderingError", PyExc_ValueError);
    py::register_exception<sim_fault>(m, "SimFault", PyExc_RuntimeError);

    m.attr("schema_version") = telemetry_schema_version;

    m.def("canonicalize", [](const std::string &config) { return canonicalize(json::parse(config)).dump(); });

    m.def(
        "run",
        [](const std::string &config, const std::string &inputs) {
            return serialize(run_session(parse_scenario(json::parse(config)), parse_inputs(inputs)));
        },
        py::arg("config"), py::arg("inputs") = "");

    m.def("metrics", [](const std::string &telemetry) {
        return to_json(compute_metrics(parse_jsonl_string(telemetry))).dump();
    });

    m.def("replay_verify", [](const std::string &telemetry) {
        const auto r = replay_verify(telemetry);
        json out = {{"identical", r.identical},
                    {"header_differs", r.header_differs},
                    {"first_divergent_tick", r.first_divergent_tick ? json(*r.first_divergent_tick) : json(nullptr)}};
        return out.dump();
    });

    m.def(
        "run_scenario",
        [](const std::string &config, const std::string &overrides) {
            const auto r = run_scenario(json::parse(config), parse_overrides(overrides));
            return std::make_pair(serialize(r.series), to_json(r.report).dump());
        },
        py::arg("config"), py::arg("overrides") = "");

    m.def("task_config", [](int task) {
        switch (task) {
        case 1:
            return task1_config().dump();
        case 2:
            return task2_config().dump();
        case 4:
            return task4_config().dump();
        default:
            throw py::value_error("shipped tasks are 1, 2 and 4");
        }
    });

    m.def(
        "sweep",
        [](const std::string &base, const std::vector<std::string> &axes, unsigned workers) {
            sweep_spec spec;
            spec.base = json::parse(base);
            for (const auto &a : axes) {
                spec.axes.push_back(parse_axis(a));
            }
            spec.workers = workers;
            py::gil_scoped_release release;
            return sweep_csv(spec, run_sweep(spec));
        },
        py::arg("base"), py::arg("axes"), py::arg("workers") = 1);

    m.def(
        "admittance_accel",
        [](const std::vector<double> &mass, const std::vector<double> &damping, const std::vector<double> &stiffness,
           const std::vector<double> &x, const std::vector<double> &v, const std::vector<double> &f) {
            admittance_params p;
            p.mass = vec::Ones();
            for (std::size_t i = 0; i < mass.size() && i < 3; ++i) {
                p.mass[static_cast<int>(i)] = mass[i];
            }
            p.damping = to_vec(damping);
            p.stiffness = to_vec(stiffness);
            p.validate();
            return from_vec(admittance_accel(p, to_state(x, v), to_vec(f)), x.size());
        },
        py::arg("mass"), py::arg("damping"), py::arg("stiffness"), py::arg("x"), py::arg("v"), py::arg("f_ext"));

    m.def(
        "master_command",
        [](const std::string &mode, const std::vector<double> &x_s_rx, const std::vector<double> &v_s_rx,
           const std::vector<double> &f_e_rx, const std::vector<double> &x_m, const std::vector<double> &v_m,
           const std::map<std::string, double> &gains) {
            const auto parsed = parse_mode(mode);
            if (!parsed) {
                throw py::value_error("mode must be PositionForce or FourChannel");
            }
            bilateral_gains g;
            const std::pair<const char *, double *> fields[] = {
                {"c1_kp", &g.c1_kp},   {"c1_kd", &g.c1_kd},   {"c2_scale", &g.c2_scale},
                {"c3_scale", &g.c3_scale}, {"c4_kp", &g.c4_kp}, {"c4_kd", &g.c4_kd},
                {"local_damping_m", &g.local_damping_m}, {"local_damping_s", &g.local_damping_s},
            };
            for (const auto &[key, value] : gains) {
                bool known = false;
                for (const auto &[name, slot] : fields) {
                    if (key == name) {
                        *slot = value;
                        known = true;
                    }
                }
                if (!known) {
                    throw py::key_error("unknown gain '" + key + "'");
                }
            }
            g.validate();
            const auto eff = effective_gains(g, *parsed);
            return from_vec(master_command(eff, *parsed, to_state(x_s_rx, v_s_rx), to_vec(f_e_rx), to_state(x_m, v_m)),
                            x_m.size());
        },
        py::arg("mode"), py::arg("x_s_rx"), py::arg("v_s_rx"), py::arg("f_e_rx"), py::arg("x_m"), py::arg("v_m"),
        py::arg("gains") = std::map<std::string, double>{});

    py::class_<py_session>(m, "Session")
        .def(py::init<const std::string &>())
        .def("submit", &py_session::submit)
        .def("step", &py_session::step)
        .def_property_readonly("finished", &py_session::finished)
        .def_property_readonly("ticks_done", &py_session::ticks_done)
        .def_property_readonly("total_ticks", &py_session::total_ticks)
        .def("mode", &py_session::mode, py::arg("arm") = 0)
        .def("telemetry", &py_session::telemetry);

    py::class_<py_channel>(m, "Channel")
        .def(py::init<std::uint64_t, std::uint64_t, double, std::uint64_t, double>(), py::arg("delay_steps") = 0,
             py::arg("jitter_steps_max") = 0, py::arg("drop_probability") = 0.0, py::arg("seed") = 0,
             py::arg("initial") = 0.0)
        .def("push_pop", &py_channel::push_pop)
        .def_property_readonly("age", &py_channel::age);
}
