#pragma once

#include <iosfwd>
#include <string_view>

namespace asclens::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

std::string_view tool_version() noexcept;

/// Entry point of `asc-lens`. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace asclens::cli
