#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asclens/matrix.hpp"
#include "asclens/types.hpp"

namespace asclens {

inline constexpr int kArchiveFormatVersion = 1;

struct TokenRecord {
  std::string text;
  TokenRole role = TokenRole::OTHER;
  std::size_t position = 0;

  friend bool operator==(const TokenRecord&, const TokenRecord&) = default;
};

struct SentenceRecord {
  std::int64_t id = 0;
  std::string text;
  ConstructionLabel label = ConstructionLabel::transitive;
  std::vector<TokenRecord> tokens;

  /// First position carrying the role (for DET this is the first
  /// determiner), or nullopt.
  std::optional<std::size_t> position_of(TokenRole role) const noexcept;

  /// One past the last token position; positions at or beyond are padding.
  std::size_t valid_length() const noexcept;

  friend bool operator==(const SentenceRecord&, const SentenceRecord&) = default;
};

struct ArchiveManifest {
  int format_version = kArchiveFormatVersion;
  std::string model_id;
  std::size_t n_layers = 0;
  std::size_t hidden_size = 0;
  std::size_t n_heads = 0;
  std::size_t max_tokens = 0;
  std::size_t n_sentences = 0;
  std::vector<SentenceRecord> sentences;

  friend bool operator==(const ArchiveManifest&, const ArchiveManifest&) = default;
};

/// Checks the manifest-level invariants (positive sizes, sentence count,
/// CLS..SEP framing, increasing in-range positions, schema conformance).
/// Throws Error(malformed_manifest).
void validate_manifest(const ArchiveManifest& manifest);

/// Hidden tensor for one layer: [n_sentences, max_tokens, hidden_size].
using HiddenTensor = std::vector<float>;
/// Attention tensor for one layer: [n_sentences, n_heads, max_tokens, max_tokens].
using AttentionTensor = std::vector<float>;

/// In-memory archive. hidden has n_layers + 1 entries (layer 0 is the
/// embedding output); attention has n_layers entries for layers 1..n_layers.
/// Immutable once constructed, so concurrent readers are safe.
class ActivationArchive {
 public:
  ActivationArchive(ArchiveManifest manifest, std::vector<HiddenTensor> hidden,
                    std::vector<AttentionTensor> attention);

  const ArchiveManifest& manifest() const noexcept { return manifest_; }
  const std::vector<HiddenTensor>& hidden() const noexcept { return hidden_; }
  const std::vector<AttentionTensor>& attention() const noexcept { return attention_; }

  std::size_t n_sentences() const noexcept { return manifest_.n_sentences; }
  std::size_t n_layers() const noexcept { return manifest_.n_layers; }
  std::size_t n_heads() const noexcept { return manifest_.n_heads; }
  std::size_t hidden_size() const noexcept { return manifest_.hidden_size; }
  std::size_t max_tokens() const noexcept { return manifest_.max_tokens; }

  /// layer in [0, n_layers].
  std::span<const float> hidden_vector(std::size_t layer, std::size_t sentence,
                                       std::size_t position) const;

  /// Attention row of query position `query`; layer in [1, n_layers].
  std::span<const float> attention_row(std::size_t layer, std::size_t sentence,
                                       std::size_t head, std::size_t query) const;

 private:
  ArchiveManifest manifest_;
  std::vector<HiddenTensor> hidden_;
  std::vector<AttentionTensor> attention_;
};

std::size_t hidden_tensor_size(const ArchiveManifest& manifest) noexcept;
std::size_t attention_tensor_size(const ArchiveManifest& manifest) noexcept;

/// Writes manifest.json, hidden/layer_{L}.f32 and attention/layer_{L}.f32.
/// Throws Error(dimension_mismatch) naming the tensor, Error(io_failure).
void write_archive(const ArchiveManifest& manifest, std::span<const HiddenTensor> hidden,
                   std::span<const AttentionTensor> attention,
                   const std::filesystem::path& dir);
void write_archive(const ActivationArchive& archive, const std::filesystem::path& dir);

/// Throws Error with missing_file, malformed_manifest, unsupported_version
/// or truncated_tensor.
ActivationArchive read_archive(const std::filesystem::path& dir);

std::string manifest_to_json(const ArchiveManifest& manifest);
ArchiveManifest manifest_from_json(const std::string& text);

struct AttentionViolation {
  std::size_t layer = 0;
  std::size_t sentence = 0;
  std::size_t head = 0;
  std::size_t query = 0;
  double row_sum = 0.0;
};

/// Row-sum and padding checks, run on demand rather than at load time.
struct ArchiveValidation {
  std::vector<AttentionViolation> row_sum_violations;
  std::size_t nonzero_hidden_padding = 0;
  std::size_t nonzero_attention_padding = 0;

  bool ok() const noexcept {
    return row_sum_violations.empty() && nonzero_hidden_padding == 0 &&
           nonzero_attention_padding == 0;
  }
};

ArchiveValidation validate_archive(const ActivationArchive& archive,
                                   double row_sum_tolerance = 1e-4);

struct RoleSlice {
  Matrix features;                           // n_selected x hidden_size
  std::vector<ConstructionLabel> labels;     // aligned with rows
  std::vector<std::int64_t> sentence_ids;    // aligned with rows
  std::vector<std::int64_t> skipped_ids;     // sentences lacking the role
};

/// Hidden vectors at the role's position for every sentence that has it.
/// Throws Error(invalid_argument) for a bad layer, Error(empty_selection)
/// when no sentence carries the role.
RoleSlice slice_role(const ActivationArchive& archive, TokenRole role, std::size_t layer);

}  // namespace asclens
