#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lgp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitTheorem = 4;

/// Entry point of the lgp tool; args[0] is the program name. Results go to
/// `out`, errors to `err` as one JSON object per line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lgp::cli
