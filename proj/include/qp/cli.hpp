#pragma once

#include <iosfwd>

#include "qp/error.hpp"

namespace qp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitPrecondition = 3;
inline constexpr int kExitDivergence = 4;

int exit_code_for(ErrorCode code);

/// Entry point of the qpmap tool. The machine-readable report goes to `out`
/// (or the --out file), a short human summary and diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qp::cli
