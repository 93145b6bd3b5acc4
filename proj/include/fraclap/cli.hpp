#ifndef FRACLAP_CLI_HPP
#define FRACLAP_CLI_HPP

#include <string>
#include <vector>

namespace fraclap::cli {

/// Runs one command line (without the program name) and returns the process
/// exit code: 0 pass, 1 verification failure, 2 usage or configuration error.
int run(const std::vector<std::string>& args);

}  // namespace fraclap::cli

#endif
