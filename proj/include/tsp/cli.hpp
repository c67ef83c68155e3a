#ifndef TSP_CLI_HPP
#define TSP_CLI_HPP

#include <string>
#include <vector>

namespace tsp {

// Full command-line entry point (everything main() does besides argv
// conversion). Exit codes: 0 success, 1 config/schema error, 2 IO/format
// error, 3 numeric/training/state error.
int run_cli(const std::vector<std::string>& args);

}  // namespace tsp

#endif  // TSP_CLI_HPP
