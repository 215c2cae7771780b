#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace asclens {

enum class ConstructionLabel : int {
  transitive = 0,
  ditransitive = 1,
  caused_motion = 2,
  resultative = 3,
};

inline constexpr std::size_t kNumConstructions = 4;

inline constexpr std::array<ConstructionLabel, kNumConstructions> kAllConstructions = {
    ConstructionLabel::transitive, ConstructionLabel::ditransitive,
    ConstructionLabel::caused_motion, ConstructionLabel::resultative};

// Declaration order is the canonical "enum order" used by every table writer.
enum class TokenRole : int {
  CLS = 0,
  DET,
  SUBJ,
  VERB,
  OBJ,
  INDOBJ,
  PREP,
  OBJPREP,
  SEP,
  OTHER,
};

inline constexpr std::size_t kNumRoles = 10;

inline constexpr std::array<TokenRole, kNumRoles> kAllRoles = {
    TokenRole::CLS,  TokenRole::DET,    TokenRole::SUBJ,    TokenRole::VERB,
    TokenRole::OBJ,  TokenRole::INDOBJ, TokenRole::PREP,    TokenRole::OBJPREP,
    TokenRole::SEP,  TokenRole::OTHER};

/// Roles shared by all four constructions.
inline constexpr std::array<TokenRole, 6> kCommonRoles = {
    TokenRole::CLS, TokenRole::DET, TokenRole::SUBJ,
    TokenRole::VERB, TokenRole::OBJ, TokenRole::SEP};

/// Default analysis roles (the common tokens without SEP).
inline constexpr std::array<TokenRole, 5> kDefaultRoles = {
    TokenRole::CLS, TokenRole::DET, TokenRole::SUBJ, TokenRole::VERB, TokenRole::OBJ};

std::string_view to_string(ConstructionLabel label) noexcept;
std::string_view to_string(TokenRole role) noexcept;

std::optional<ConstructionLabel> parse_label(std::string_view text) noexcept;
std::optional<TokenRole> parse_role(std::string_view text) noexcept;

inline constexpr std::size_t index_of(ConstructionLabel label) noexcept {
  return static_cast<std::size_t>(label);
}

inline constexpr std::size_t index_of(TokenRole role) noexcept {
  return static_cast<std::size_t>(role);
}

/// Parses a comma separated role list such as "CLS,DET,OBJ".
/// Throws Error(invalid_argument) on an unknown name.
std::vector<TokenRole> parse_role_list(std::string_view text);

/// Sorts and deduplicates roles into enum order.
std::vector<TokenRole> canonical_roles(std::vector<TokenRole> roles);

}  // namespace asclens
