#include "asclens/types.hpp"

#include <algorithm>
#include <string>

#include "asclens/error.hpp"

namespace asclens {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::io_failure: return "io_failure";
    case Errc::missing_file: return "missing_file";
    case Errc::malformed_manifest: return "malformed_manifest";
    case Errc::truncated_tensor: return "truncated_tensor";
    case Errc::unsupported_version: return "unsupported_version";
    case Errc::empty_selection: return "empty_selection";
    case Errc::capacity: return "capacity";
    case Errc::invariant_violation: return "invariant_violation";
    case Errc::stratification: return "stratification";
    case Errc::non_symmetric: return "non_symmetric";
    case Errc::degenerate_embedding: return "degenerate_embedding";
    case Errc::group_too_small: return "group_too_small";
    case Errc::empty_group: return "empty_group";
    case Errc::missing_role: return "missing_role";
    case Errc::length_mismatch: return "length_mismatch";
  }
  return "unknown";
}

std::string_view to_string(ConstructionLabel label) noexcept {
  switch (label) {
    case ConstructionLabel::transitive: return "transitive";
    case ConstructionLabel::ditransitive: return "ditransitive";
    case ConstructionLabel::caused_motion: return "caused_motion";
    case ConstructionLabel::resultative: return "resultative";
  }
  return "unknown";
}

std::string_view to_string(TokenRole role) noexcept {
  switch (role) {
    case TokenRole::CLS: return "CLS";
    case TokenRole::DET: return "DET";
    case TokenRole::SUBJ: return "SUBJ";
    case TokenRole::VERB: return "VERB";
    case TokenRole::OBJ: return "OBJ";
    case TokenRole::INDOBJ: return "INDOBJ";
    case TokenRole::PREP: return "PREP";
    case TokenRole::OBJPREP: return "OBJPREP";
    case TokenRole::SEP: return "SEP";
    case TokenRole::OTHER: return "OTHER";
  }
  return "unknown";
}

std::optional<ConstructionLabel> parse_label(std::string_view text) noexcept {
  for (auto label : kAllConstructions) {
    if (to_string(label) == text) return label;
  }
  return std::nullopt;
}

std::optional<TokenRole> parse_role(std::string_view text) noexcept {
  for (auto role : kAllRoles) {
    if (to_string(role) == text) return role;
  }
  return std::nullopt;
}

std::vector<TokenRole> parse_role_list(std::string_view text) {
  std::vector<TokenRole> roles;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    auto item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      auto role = parse_role(item);
      if (!role) throw Error(Errc::invalid_argument, "unknown token role '" + std::string(item) + "'");
      roles.push_back(*role);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (roles.empty()) throw Error(Errc::invalid_argument, "empty role list");
  return roles;
}

std::vector<TokenRole> canonical_roles(std::vector<TokenRole> roles) {
  std::sort(roles.begin(), roles.end());
  roles.erase(std::unique(roles.begin(), roles.end()), roles.end());
  return roles;
}

}  // namespace asclens
