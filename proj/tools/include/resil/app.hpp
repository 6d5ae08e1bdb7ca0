#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace resil {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNotResilient = 1;
inline constexpr int kExitInputError = 2;

/// Runs one `resil` invocation. `args` excludes the program name. The main
/// JSON document goes to `out` and, with --out, to files in that directory.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace resil
