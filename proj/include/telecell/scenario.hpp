#ifndef TELECELL_SCENARIO_HPP
#define TELECELL_SCENARIO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "telecell/bilateral.hpp"
#include "telecell/channel.hpp"
#include "telecell/hand.hpp"
#include "telecell/plants.hpp"
#include "telecell/sim_core.hpp"
#include "telecell/telemetry.hpp"

namespace telecell {

/// Link settings for one arm pair: shared defaults plus optional per-direction overrides.
struct link_config {
    channel_config base;
    std::optional<channel_config> directions[4];

    channel_config direction(int index) const { return directions[index].value_or(base); }
};

struct master_device_config {
    vec mass = vec::Constant(2.0);
    double viscous_friction = 1.0;
    double coulomb_friction = 0.5;
};

struct local_device_config {
    bool friction_compensation = true;
    std::optional<vec> desired_mass; ///< unset: no inertia reshaping
    double reshaping_damping = 0.0;
};

struct arm_config {
    std::string name;
    vec master_initial = vec::Zero();
    vec slave_initial = vec::Zero();
    operator_model op;
    std::optional<link_config> channel;
};

struct mode_event {
    std::uint64_t tick = 0;
    bilateral_mode mode = bilateral_mode::position_force;
};

struct bilateral_config {
    bilateral_gains gains;
    bilateral_mode mode = bilateral_mode::position_force;
    std::vector<mode_event> schedule;
};

struct hand_config {
    int fingers = 0;
    int arm = 0;
    finger_params params;
    std::optional<grasp_object> object;
    waypoint_trajectory glove_target; ///< component 0 is the closure angle target
    std::optional<link_config> channel;
};

struct wall_config {
    int arm = 0;
    wall_contact wall;
};

/// A coupling endpoint: a slave arm index, or -1 for the free object.
struct endpoint {
    int arm = 0;
    bool is_object() const { return arm < 0; }
};

struct coupling_config {
    endpoint a;
    endpoint b;
    object_coupling coupling;
};

struct object_config {
    double mass = 0.2;
    vec initial = vec::Zero();
};

/// Switches the coupling endpoint that holds the object to another arm once both
/// slaves coincide (regrasp with the other hand).
struct handoff_config {
    int to_arm = 1;
    double after = 0.0;
    double distance_tolerance = 1e-5;
    double speed_tolerance = 1e-3;
};

struct environment_config {
    std::vector<wall_config> walls;
    std::optional<coupling_config> coupling;
    std::optional<object_config> object;
    std::optional<handoff_config> handoff;
};

enum class subject_kind { slave, object, relative };

struct success_config {
    subject_kind subject = subject_kind::slave;
    int arm = 0;
    int arm_b = 1; ///< relative subject: x_s[arm_b] - x_s[arm]
    vec center = vec::Zero();
    double radius = 0.005;
    double dwell = 0.5;
};

struct phase_config {
    std::string name;
    double start = 0.0;
    double end = 0.0;
};

struct scenario_config {
    std::string name = "scenario";
    sim_config sim;
    master_device_config master;
    local_device_config local;
    vec slave_mass = vec::Constant(5.0); ///< admittance virtual mass
    bilateral_config bilateral;
    link_config channel;
    std::vector<arm_config> arms;
    hand_config hand;
    environment_config environment;
    std::optional<success_config> success;
    std::vector<phase_config> phases;
    passivity_settings observer;
};

/// Parses and validates. Errors are config_error naming the JSON path.
scenario_config parse_scenario(const json &j);

/// Full config with every default filled in, as written to telemetry headers.
json to_json(const scenario_config &config);

/// Parse then re-emit; the canonical form of a user config.
json canonicalize(const json &j);

json load_json_file(const std::filesystem::path &path);
scenario_config load_scenario(const std::filesystem::path &path);

/// Dotted path with numeric array indices, e.g. "environment.walls.0.stiffness".
bool has_path(const json &root, const std::string &path);

/// Sets `path` to `value`. Throws config_error if the path does not exist in the
/// canonical config.
void apply_override(json &root, const std::string &path, const json &value);

/// "path=value" with value parsed as JSON when possible, else taken as a string.
std::pair<std::string, json> parse_assignment(const std::string &text);

} // namespace telecell

#endif // TELECELL_SCENARIO_HPP
