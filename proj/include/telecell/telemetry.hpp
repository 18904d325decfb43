#ifndef TELECELL_TELEMETRY_HPP
#define TELECELL_TELEMETRY_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "telecell/bilateral.hpp"
#include "telecell/sim_core.hpp"

namespace telecell {

using json = nlohmann::ordered_json;

inline constexpr const char *telemetry_schema_name = "telecell-telemetry";
inline constexpr int telemetry_schema_version = 1;

class ordering_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class schema_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Channel indices of an arm pair, also the seed stream order.
enum channel_direction : int {
    motion_to_slave = 0,
    force_to_slave = 1,
    motion_to_master = 2,
    force_to_master = 3,
};

struct arm_record {
    vec x_m = vec::Zero();
    vec v_m = vec::Zero();
    vec x_s = vec::Zero();
    vec v_s = vec::Zero();
    vec f_h = vec::Zero();       ///< operator force on the master
    vec f_e = vec::Zero();       ///< force the slave exerts on its environment
    vec f_m_cmd = vec::Zero();   ///< bilateral command to the master
    vec f_local = vec::Zero();   ///< local-device shaping (reshaping + friction feedforward)
    vec f_s_cmd = vec::Zero();   ///< bilateral command into the slave admittance
    vec f_coupling = vec::Zero(); ///< coupling force on the slave
    bilateral_mode mode = bilateral_mode::position_force;
    bool in_contact = false;
    std::int64_t age[4] = {0, 0, 0, 0};
    double budget_accumulated = 0.0;
    double budget_spent = 0.0;
};

struct finger_record {
    double glove_angle = 0.0;
    double hand_angle = 0.0;
    double current = 0.0;
    double tau_est = 0.0;
    double rendered = 0.0;
    bool saturated = false;
    std::int64_t age[2] = {0, 0};
};

struct object_record {
    vec x = vec::Zero();
    vec v = vec::Zero();
    vec f = vec::Zero(); ///< coupling force on the object
    int holder = 0;
};

struct telemetry_record {
    std::uint64_t tick = 0;
    double time = 0.0;
    std::vector<arm_record> arms;
    std::vector<finger_record> fingers;
    std::optional<object_record> object;
    double energy = 0.0;
    json events = json::array(); ///< live inputs applied at this tick
};

/// Header (full canonical config + schema) and the per-tick records.
struct telemetry_series {
    json header;
    std::vector<telemetry_record> records;

    int dof() const;
    double dt() const;
    const json &config() const { return header.at("config"); }
};

json make_header(const json &canonical_config, std::size_t arms, std::size_t fingers, bool has_object);

/// Appends `record`; its tick must equal the current length.
void record_append(telemetry_series &series, telemetry_record record);

std::string serialize_header(const telemetry_series &series);
std::string serialize_record(const telemetry_record &record, int dof);

/// Line-delimited JSON: header line, then one line per record.
std::string serialize(const telemetry_series &series);
void write_jsonl(std::ostream &out, const telemetry_series &series);

/// Throws schema_error on malformed input or version mismatch; ordering_error
/// when ticks are missing or out of order. `line_number` in messages is 1-based.
telemetry_series parse_jsonl(std::istream &in);
telemetry_series parse_jsonl_string(const std::string &text);

telemetry_record parse_record(const json &line, int dof, std::size_t arms, std::size_t fingers);

json vec_to_json(const vec &v, int dof);
vec vec_from_json(const json &j);

/// Port samples of all arms, summed per tick into the observer's power series.
std::vector<port_sample> port_samples(const telemetry_series &series, std::size_t arm);

} // namespace telecell

#endif // TELECELL_TELEMETRY_HPP
