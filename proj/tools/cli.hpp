#pragma once

#include <iosfwd>

namespace isacwave::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point of the `isacwave` tool: generate, train, eval, maps, report.
/// The output directory defaults to $ISACWAVE_OUT, then "out".
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace isacwave::cli
