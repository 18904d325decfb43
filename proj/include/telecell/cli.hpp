#ifndef TELECELL_CLI_HPP
#define TELECELL_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace telecell {

enum exit_code : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_config = 2,
    exit_fault = 3,
    exit_mismatch = 4,
};

/// `telecell run|replay|sweep|serve ...`. `args` excludes the program name.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace telecell

#endif // TELECELL_CLI_HPP
