#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace uotkit::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_data = 2;
inline constexpr int exit_numerical = 3;

// Runs one command. `args` excludes the program name. The JSON run report goes
// to `out`, diagnostics and usage text to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace uotkit::cli
