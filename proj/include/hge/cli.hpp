#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNotCompleted = 3;

/// Entry point shared by the executable and the tests. `args` excludes
/// the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hge::cli
