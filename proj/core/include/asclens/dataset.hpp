#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "asclens/archive.hpp"
#include "asclens/types.hpp"

namespace asclens {

struct ConstructionSchema {
  ConstructionLabel label;
  std::vector<TokenRole> roles;
};

/// Fixed role sequences (CLS ... SEP) of the four constructions.
const ConstructionSchema& schema_for(ConstructionLabel label);

/// Labeled sentences. Token positions are left at their index in the token
/// list until an extractor assigns model positions.
struct SentenceSet {
  std::vector<SentenceRecord> sentences;

  friend bool operator==(const SentenceSet&, const SentenceSet&) = default;
};

/// Candidate words for the lexical slots of one construction, one list per
/// non-special slot of the schema (CLS and SEP are implicit).
struct SlotVocabulary {
  std::array<std::vector<std::vector<std::string>>, kNumConstructions> slots;

  const std::vector<std::vector<std::string>>& for_label(ConstructionLabel label) const {
    return slots[index_of(label)];
  }
};

/// Curated vocabulary of common single-wordpiece words.
const SlotVocabulary& default_vocabulary();

/// Number of distinct slot combinations for the label, saturating at
/// UINT64_MAX.
std::uint64_t vocabulary_capacity(const SlotVocabulary& vocab, ConstructionLabel label);

/// Checks slot arity against the schemas, non-empty lists, single-token
/// words and per-slot uniqueness. Throws Error(invalid_argument).
void check_vocabulary(const SlotVocabulary& vocab);

/// Words likely to split into several wordpieces (anything but lowercase
/// ASCII letters, or longer than 10 characters). Advisory only; the extractor
/// enforces the single-piece rule against the real tokenizer.
std::vector<std::string> lint_vocabulary(const SlotVocabulary& vocab);

/// per_class unique sentences per construction, sampled uniformly without
/// replacement from the slot combinations. Each construction draws from its
/// own stream derived from `seed`.
/// Throws Error(capacity) when a construction has fewer than per_class
/// combinations.
SentenceSet generate_dataset(const SlotVocabulary& vocab, std::size_t per_class,
                             std::uint64_t seed);

struct ConstructionReport {
  ConstructionLabel label;
  std::size_t count = 0;
  std::vector<std::int64_t> schema_violations;  // sentence ids
};

struct ValidationReport {
  std::array<ConstructionReport, kNumConstructions> constructions;
  std::vector<std::string> duplicate_texts;
  bool balanced = false;
  bool pass = false;

  std::string summary() const;
};

ValidationReport validate_dataset(const SentenceSet& set);

/// Interchange JSON {"sentences":[{id,text,label,tokens:[{text,role}]}]}.
std::string sentence_set_to_json(const SentenceSet& set);
/// Positions are assigned from token order. Throws Error(malformed_manifest).
SentenceSet sentence_set_from_json(const std::string& text);

SentenceSet read_sentence_set(const std::filesystem::path& path);
void write_sentence_set(const SentenceSet& set, const std::filesystem::path& path);

/// Slot vocabulary JSON: {"transitive": [["the","a"], ["baker", ...], ...], ...}.
SlotVocabulary vocabulary_from_json(const std::string& text);
std::string vocabulary_to_json(const SlotVocabulary& vocab);

}  // namespace asclens
