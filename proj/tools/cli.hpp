#pragma once

#include <iosfwd>

namespace gprune::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;  ///< bad input, unknown flag, failed verification
inline constexpr int kExitInfeasible = 2;  ///< infeasible budget or oracle cap exceeded

/// Entry point of the `gprune` tool. Results go to files (or `out` when no
/// --out is given); the human-readable summary goes to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gprune::cli
