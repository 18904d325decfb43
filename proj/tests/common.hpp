#ifndef TELECELL_TESTS_COMMON_HPP
#define TELECELL_TESTS_COMMON_HPP

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "telecell/scenario.hpp"

namespace testing {

inline std::filesystem::path source_dir() { return TELECELL_SOURCE_DIR; }

inline telecell::json scenario_json(const std::string &name) {
    return telecell::load_json_file(source_dir() / "scenarios" / (name + ".json"));
}

inline std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("telecell_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Minimal single-arm config used by many tests.
inline telecell::json one_arm(int dof = 1, double duration = 1.0) {
    using telecell::json;
    json x = json::array();
    for (int i = 0; i < dof; ++i) {
        x.push_back(0.0);
    }
    json amp = x;
    amp[0] = 0.02;
    return json{{"name", "unit"},
                {"sim", {{"dt", 0.001}, {"duration", duration}, {"seed", 7}, {"dof", dof}}},
                {"arms",
                 json::array({{{"name", "a"},
                               {"operator",
                                {{"kind", "scripted"},
                                 {"trajectory",
                                  {{"kind", "sinusoid"}, {"center", x}, {"amplitude", amp}, {"period", 1.0}}}}}}})}};
}

} // namespace testing

#endif
