#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace inspire::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitProvider = 2;
inline constexpr int kExitUsage = 64;

// argv[0] is the program name. Returns the process exit code.
int cli_dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);
int cli_dispatch(int argc, const char* const* argv);

}  // namespace inspire::cli
