#pragma once

#include <iosfwd>

namespace ttts::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;    ///< bad arguments or configuration
inline constexpr int exit_runtime = 3;  ///< resource or runtime failure

/// Entry point of the ttts_cli tool: run, compare, gen, bound, amm.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ttts::cli
