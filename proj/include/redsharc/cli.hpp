#pragma once

#include "redsharc/control.hpp"

#include <iosfwd>

namespace redsharc {

inline constexpr int kExitCompleted = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitDeadlock = 2;

/// Entry point of the `redsharc` tool. Console commands are read from `in`.
int cliMain(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

/// Debug console driving a started control kernel that is paused on entry.
/// Runs the engine on a background thread and returns the final report.
control::RunReport runInteractive(control::ControlKernel& ck, const sysio::System& sys, std::istream& in,
                                  std::ostream& out);

int exitCodeFor(control::Outcome o) noexcept;

} // namespace redsharc
