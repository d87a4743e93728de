// Command-line front end shared by the fwkit executable and the tests.
#pragma once

#include <string>
#include <vector>

namespace fwkit::cli {

inline constexpr const char* kVersion = "fwkit 0.1.0";

/// Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
/// failure (blow-up or non-convergence).
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

const std::vector<std::string>& subcommands();

}  // namespace fwkit::cli
