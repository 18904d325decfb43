#include "telecell/metrics.hpp"

#include <cmath>

#include "telecell/bilateral.hpp"
#include "telecell/scenario.hpp"

namespace telecell {

namespace {

vec subject_position(const success_config &s, const telemetry_record &r) {
    switch (s.subject) {
    case subject_kind::object:
        return r.object ? r.object->x : vec::Zero();
    case subject_kind::relative:
        return r.arms.at(static_cast<std::size_t>(s.arm_b)).x_s - r.arms.at(static_cast<std::size_t>(s.arm)).x_s;
    default:
        return r.arms.at(static_cast<std::size_t>(s.arm)).x_s;
    }
}

/// First tick at which the subject has stayed inside the goal for the dwell time,
/// considering only records with time in [start, end).
std::optional<double> goal_reached(const success_config &s, const std::vector<telemetry_record> &records,
                                   double dt, double start, double end) {
    const auto needed = static_cast<std::uint64_t>(std::max<double>(1.0, std::ceil(s.dwell / dt - 1e-9)));
    std::uint64_t inside = 0;
    for (const auto &r : records) {
        if (r.time < start - 1e-12 || r.time >= end - 1e-12) {
            inside = 0;
            continue;
        }
        if ((subject_position(s, r) - s.center).norm() <= s.radius) {
            if (++inside >= needed) {
                return r.time;
            }
        } else {
            inside = 0;
        }
    }
    return std::nullopt;
}

} // namespace

std::size_t steady_window_start(std::size_t ticks) {
    if (ticks == 0) {
        return 0;
    }
    const std::size_t len = std::max<std::size_t>(1, ticks / 5);
    return ticks - len;
}

metrics_report compute_metrics(const telemetry_series &series) {
    metrics_report m;
    const scenario_config config = parse_scenario(series.config());
    const double dt = config.sim.dt;
    const double c2 = config.bilateral.gains.c2_scale;
    const auto &records = series.records;

    double sq = 0.0;
    std::size_t count = 0;
    for (std::size_t k = steady_window_start(records.size()); k < records.size(); ++k) {
        for (const auto &a : records[k].arms) {
            sq += (a.x_m - a.x_s).squaredNorm();
            ++count;
        }
    }
    m.tracking_rms = count ? std::sqrt(sq / static_cast<double>(count)) : 0.0;

    // Reflection error, weighted by force: sum |f_m + c2 f_e| / sum |c2 f_e| over contact ticks.
    double err = 0.0, ref = 0.0, free_sq = 0.0;
    std::size_t free_count = 0;
    std::vector<double> energy;
    energy.reserve(records.size());
    for (const auto &r : records) {
        for (const auto &a : r.arms) {
            if (a.in_contact) {
                err += (a.f_m_cmd + c2 * a.f_e).norm();
                ref += (c2 * a.f_e).norm();
            } else {
                free_sq += a.f_m_cmd.squaredNorm();
                ++free_count;
            }
            m.max_budget_excess = std::max(m.max_budget_excess, a.budget_spent - a.budget_accumulated);
        }
        energy.push_back(r.energy);
    }
    if (ref > 0.0) {
        m.steady_force_error = err / ref;
    }
    if (free_count) {
        m.free_motion_force_rms = std::sqrt(free_sq / static_cast<double>(free_count));
    }

    const passivity_trace trace = flag_energy_trace(std::move(energy), dt, config.observer);
    m.passivity_flag = trace.active;
    m.max_energy = trace.max_energy;
    if (trace.first_active_tick) {
        m.passivity_first_tick = *trace.first_active_tick;
    }

    if (config.success) {
        const auto &s = *config.success;
        m.completion_time = goal_reached(s, records, dt, 0.0, INFINITY);
        m.task_completion = m.completion_time.has_value();
        for (const auto &ph : config.phases) {
            phase_result pr;
            pr.name = ph.name;
            pr.completion_time = goal_reached(s, records, dt, ph.start, ph.end);
            pr.completed = pr.completion_time.has_value();
            m.phases.push_back(pr);
        }
        if (m.completion_time && config.environment.coupling) {
            const auto k = static_cast<std::size_t>(std::llround(*m.completion_time / dt));
            const auto &r = records.at(k);
            double f = 0.0;
            for (const auto &a : r.arms) {
                f = std::max(f, a.f_coupling.norm());
            }
            if (r.object) {
                f = std::max(f, r.object->f.norm());
            }
            m.internal_force = f;
        }
    }

    for (std::size_t k = 1; k < records.size(); ++k) {
        const auto &prev = records[k - 1].object;
        const auto &cur = records[k].object;
        if (prev && cur && prev->holder != cur->holder) {
            m.handoff_force_jump = (cur->f - prev->f).norm();
            break;
        }
    }
    return m;
}

json to_json(const metrics_report &m) {
    auto opt = [](const auto &o) { return o ? json(*o) : json(nullptr); };
    json phases = json::array();
    for (const auto &p : m.phases) {
        phases.push_back({{"name", p.name}, {"completed", p.completed}, {"completion_time", opt(p.completion_time)}});
    }
    return json{{"tracking_rms", m.tracking_rms},
                {"steady_force_error", opt(m.steady_force_error)},
                {"free_motion_force_rms", opt(m.free_motion_force_rms)},
                {"passivity_flag", m.passivity_flag},
                {"max_energy", m.max_energy},
                {"passivity_first_tick", opt(m.passivity_first_tick)},
                {"task_completion", m.task_completion},
                {"completion_time", opt(m.completion_time)},
                {"phases", phases},
                {"internal_force", opt(m.internal_force)},
                {"handoff_force_jump", opt(m.handoff_force_jump)},
                {"max_budget_excess", m.max_budget_excess}};
}

} // namespace telecell
