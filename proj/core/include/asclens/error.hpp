#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace asclens {

enum class Errc {
  invalid_argument,
  dimension_mismatch,
  io_failure,
  missing_file,
  malformed_manifest,
  truncated_tensor,
  unsupported_version,
  empty_selection,
  capacity,
  invariant_violation,
  stratification,
  non_symmetric,
  degenerate_embedding,
  group_too_small,
  empty_group,
  missing_role,
  length_mismatch,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can distinguish variants without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace asclens
