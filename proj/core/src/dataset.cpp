#include "asclens/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "asclens/error.hpp"
#include "asclens/rng.hpp"

namespace asclens {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using R = TokenRole;

const std::array<ConstructionSchema, kNumConstructions> kSchemas = {{
    {ConstructionLabel::transitive, {R::CLS, R::DET, R::SUBJ, R::VERB, R::DET, R::OBJ, R::SEP}},
    {ConstructionLabel::ditransitive,
     {R::CLS, R::DET, R::SUBJ, R::VERB, R::INDOBJ, R::OBJ, R::SEP}},
    {ConstructionLabel::caused_motion,
     {R::CLS, R::DET, R::SUBJ, R::VERB, R::DET, R::OBJ, R::PREP, R::DET, R::OBJPREP, R::SEP}},
    {ConstructionLabel::resultative,
     {R::CLS, R::DET, R::SUBJ, R::VERB, R::DET, R::OBJ, R::PREP, R::OBJPREP, R::SEP}},
}};

std::size_t lexical_slots(ConstructionLabel label) { return schema_for(label).roles.size() - 2; }

std::string sentence_text(const std::vector<std::string>& words) {
  std::string text;
  for (const auto& w : words) {
    if (!text.empty()) text += ' ';
    text += w;
  }
  if (!text.empty()) text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  return text;
}

SentenceRecord make_record(ConstructionLabel label, const std::vector<std::string>& words) {
  const auto& roles = schema_for(label).roles;
  SentenceRecord record;
  record.label = label;
  record.text = sentence_text(words);
  record.tokens.push_back({"[CLS]", R::CLS, 0});
  for (std::size_t k = 0; k < words.size(); ++k) record.tokens.push_back({words[k], roles[k + 1], k + 1});
  record.tokens.push_back({"[SEP]", R::SEP, words.size() + 1});
  return record;
}

}  // namespace

const ConstructionSchema& schema_for(ConstructionLabel label) { return kSchemas.at(index_of(label)); }

std::uint64_t vocabulary_capacity(const SlotVocabulary& vocab, ConstructionLabel label) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t capacity = 1;
  for (const auto& slot : vocab.for_label(label)) {
    const std::uint64_t n = slot.size();
    if (n == 0) return 0;
    if (capacity > kMax / n) return kMax;
    capacity *= n;
  }
  return capacity;
}

void check_vocabulary(const SlotVocabulary& vocab) {
  for (auto label : kAllConstructions) {
    const auto& slots = vocab.for_label(label);
    const std::string name(to_string(label));
    if (slots.size() != lexical_slots(label)) {
      throw Error(Errc::invalid_argument, name + " vocabulary has " + std::to_string(slots.size()) +
                                              " slots, schema needs " +
                                              std::to_string(lexical_slots(label)));
    }
    for (std::size_t k = 0; k < slots.size(); ++k) {
      const std::string where = name + " slot " + std::to_string(k) + " (" +
                                std::string(to_string(schema_for(label).roles[k + 1])) + ")";
      if (slots[k].empty()) throw Error(Errc::invalid_argument, where + " is empty");
      std::set<std::string> seen;
      for (const auto& word : slots[k]) {
        if (word.empty() || std::any_of(word.begin(), word.end(), [](unsigned char c) {
              return std::isspace(c);
            })) {
          throw Error(Errc::invalid_argument, where + " has a word that is empty or contains spaces");
        }
        if (!seen.insert(word).second) {
          throw Error(Errc::invalid_argument, where + " lists '" + word + "' twice");
        }
      }
    }
  }
}

std::vector<std::string> lint_vocabulary(const SlotVocabulary& vocab) {
  std::set<std::string> flagged;
  for (auto label : kAllConstructions) {
    for (const auto& slot : vocab.for_label(label)) {
      for (const auto& word : slot) {
        const bool plain = std::all_of(word.begin(), word.end(), [](char c) { return c >= 'a' && c <= 'z'; });
        if (!plain || word.size() > 10) flagged.insert(word);
      }
    }
  }
  return {flagged.begin(), flagged.end()};
}

SentenceSet generate_dataset(const SlotVocabulary& vocab, std::size_t per_class, std::uint64_t seed) {
  if (per_class == 0) throw Error(Errc::invalid_argument, "per_class must be at least 1");
  check_vocabulary(vocab);
  for (auto label : kAllConstructions) {
    const auto capacity = vocabulary_capacity(vocab, label);
    if (capacity < per_class) {
      throw Error(Errc::capacity, std::string(to_string(label)) + " vocabulary supports " +
                                      std::to_string(capacity) + " sentences, " +
                                      std::to_string(per_class) + " required");
    }
  }

  SentenceSet set;
  std::unordered_set<std::string> texts;
  for (auto label : kAllConstructions) {
    const auto& slots = vocab.for_label(label);
    const std::uint64_t capacity = vocabulary_capacity(vocab, label);
    Rng rng(derive_seed(seed, index_of(label)));
    std::size_t produced = 0;

    auto accept = [&](const std::vector<std::string>& words) {
      auto record = make_record(label, words);
      if (!texts.insert(record.text).second) return;
      record.id = static_cast<std::int64_t>(set.sentences.size());
      set.sentences.push_back(std::move(record));
      ++produced;
    };

    std::vector<std::string> words(slots.size());
    if (capacity <= 4 * static_cast<std::uint64_t>(per_class)) {
      // Small space: walk a seeded permutation of every combination.
      std::vector<std::uint64_t> order(capacity);
      for (std::uint64_t i = 0; i < capacity; ++i) order[i] = i;
      shuffle(order.begin(), order.end(), rng);
      for (std::uint64_t i = 0; i < capacity && produced < per_class; ++i) {
        std::uint64_t index = order[i];
        for (std::size_t k = slots.size(); k-- > 0;) {
          words[k] = slots[k][index % slots[k].size()];
          index /= slots[k].size();
        }
        accept(words);
      }
    } else {
      // Large space: independent uniform slot draws, rejecting repeats.
      std::set<std::vector<std::size_t>> seen;
      std::vector<std::size_t> choice(slots.size());
      std::uint64_t attempts = 0;
      const std::uint64_t max_attempts = 64 * static_cast<std::uint64_t>(per_class) + 1024;
      while (produced < per_class && attempts++ < max_attempts) {
        for (std::size_t k = 0; k < slots.size(); ++k) choice[k] = rng.below(slots[k].size());
        if (!seen.insert(choice).second) continue;
        for (std::size_t k = 0; k < slots.size(); ++k) words[k] = slots[k][choice[k]];
        accept(words);
      }
    }
    if (produced < per_class) {
      throw Error(Errc::capacity, std::string(to_string(label)) + ": only " +
                                      std::to_string(produced) + " unique sentences available, " +
                                      std::to_string(per_class) + " required");
    }
  }
  return set;
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& c : constructions) {
    out << to_string(c.label) << ": " << c.count << " sentences";
    if (!c.schema_violations.empty()) {
      out << ", schema violations in ids";
      for (auto id : c.schema_violations) out << ' ' << id;
    }
    out << '\n';
  }
  for (const auto& text : duplicate_texts) out << "duplicate text: " << text << '\n';
  out << "balanced: " << (balanced ? "yes" : "no") << '\n';
  out << "result: " << (pass ? "PASS" : "FAIL") << '\n';
  return out.str();
}

ValidationReport validate_dataset(const SentenceSet& set) {
  ValidationReport report;
  for (auto label : kAllConstructions) report.constructions[index_of(label)].label = label;

  std::set<std::string> seen;
  std::set<std::string> duplicates;
  for (const auto& s : set.sentences) {
    auto& entry = report.constructions[index_of(s.label)];
    ++entry.count;
    const auto& schema = schema_for(s.label).roles;
    bool conforms = schema.size() == s.tokens.size();
    for (std::size_t t = 0; conforms && t < schema.size(); ++t) conforms = schema[t] == s.tokens[t].role;
    if (!conforms) entry.schema_violations.push_back(s.id);
    if (!seen.insert(s.text).second) duplicates.insert(s.text);
  }
  report.duplicate_texts.assign(duplicates.begin(), duplicates.end());

  const std::size_t first = report.constructions[0].count;
  report.balanced = first > 0 && std::all_of(report.constructions.begin(), report.constructions.end(),
                                             [&](const auto& c) { return c.count == first; });
  const bool conformant = std::all_of(report.constructions.begin(), report.constructions.end(),
                                      [](const auto& c) { return c.schema_violations.empty(); });
  report.pass = report.balanced && conformant && report.duplicate_texts.empty();
  return report;
}

std::string sentence_set_to_json(const SentenceSet& set) {
  auto sentences = ordered_json::array();
  for (const auto& s : set.sentences) {
    ordered_json js;
    js["id"] = s.id;
    js["text"] = s.text;
    js["label"] = std::string(to_string(s.label));
    auto tokens = ordered_json::array();
    for (const auto& t : s.tokens) {
      ordered_json jt;
      jt["text"] = t.text;
      jt["role"] = std::string(to_string(t.role));
      tokens.push_back(std::move(jt));
    }
    js["tokens"] = std::move(tokens);
    sentences.push_back(std::move(js));
  }
  ordered_json root;
  root["sentences"] = std::move(sentences);
  return root.dump(1) + "\n";
}

SentenceSet sentence_set_from_json(const std::string& text) {
  SentenceSet set;
  try {
    const json root = json::parse(text);
    for (const auto& js : root.at("sentences")) {
      SentenceRecord s;
      s.id = js.at("id").get<std::int64_t>();
      s.text = js.at("text").get<std::string>();
      const auto label = parse_label(js.at("label").get<std::string>());
      if (!label) throw Error(Errc::malformed_manifest, "sentence " + std::to_string(s.id) + ": unknown label");
      s.label = *label;
      std::size_t position = 0;
      for (const auto& jt : js.at("tokens")) {
        const auto role = parse_role(jt.at("role").get<std::string>());
        if (!role) throw Error(Errc::malformed_manifest, "sentence " + std::to_string(s.id) + ": unknown role");
        s.tokens.push_back({jt.at("text").get<std::string>(), *role, position++});
      }
      set.sentences.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_manifest, std::string("malformed sentence set: ") + e.what());
  }
  return set;
}

SentenceSet read_sentence_set(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_file, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return sentence_set_from_json(buffer.str());
}

void write_sentence_set(const SentenceSet& set, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
  out << sentence_set_to_json(set);
  if (!out) throw Error(Errc::io_failure, "failed writing " + path.string());
}

SlotVocabulary vocabulary_from_json(const std::string& text) {
  SlotVocabulary vocab;
  try {
    const json root = json::parse(text);
    for (auto label : kAllConstructions) {
      const std::string key(to_string(label));
      if (!root.contains(key)) throw Error(Errc::invalid_argument, "vocabulary lacks '" + key + "'");
      vocab.slots[index_of(label)] = root.at(key).get<std::vector<std::vector<std::string>>>();
    }
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("malformed vocabulary: ") + e.what());
  }
  check_vocabulary(vocab);
  return vocab;
}

std::string vocabulary_to_json(const SlotVocabulary& vocab) {
  ordered_json root;
  for (auto label : kAllConstructions) root[std::string(to_string(label))] = vocab.for_label(label);
  return root.dump(1) + "\n";
}

}  // namespace asclens
