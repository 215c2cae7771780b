#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "asclens/dataset.hpp"
#include "asclens/error.hpp"
#include "support/support.hpp"

using namespace asclens;

namespace {

SlotVocabulary singleton_vocabulary() {
  SlotVocabulary vocab;
  for (auto label : kAllConstructions) {
    std::vector<std::vector<std::string>> slots;
    for (auto role : schema_for(label).roles) {
      if (role == TokenRole::CLS || role == TokenRole::SEP) continue;
      slots.push_back({std::string(to_string(role)) == "DET" ? "the" : "w" + std::to_string(slots.size())});
    }
    vocab.slots[index_of(label)] = slots;
  }
  return vocab;
}

}  // namespace

TEST(Dataset, SchemasMatchTheConstructionTable) {
  using R = TokenRole;
  EXPECT_EQ(schema_for(ConstructionLabel::transitive).roles,
            (std::vector<R>{R::CLS, R::DET, R::SUBJ, R::VERB, R::DET, R::OBJ, R::SEP}));
  EXPECT_EQ(schema_for(ConstructionLabel::ditransitive).roles,
            (std::vector<R>{R::CLS, R::DET, R::SUBJ, R::VERB, R::INDOBJ, R::OBJ, R::SEP}));
  EXPECT_EQ(schema_for(ConstructionLabel::caused_motion).roles,
            (std::vector<R>{R::CLS, R::DET, R::SUBJ, R::VERB, R::DET, R::OBJ, R::PREP, R::DET, R::OBJPREP, R::SEP}));
  EXPECT_EQ(schema_for(ConstructionLabel::resultative).roles,
            (std::vector<R>{R::CLS, R::DET, R::SUBJ, R::VERB, R::DET, R::OBJ, R::PREP, R::OBJPREP, R::SEP}));
}

TEST(Dataset, FiveHundredPerClassSetIsBalancedAndValid) {
  const auto set = generate_dataset(default_vocabulary(), 500, 2024);
  EXPECT_EQ(set.sentences.size(), 2000u);
  const auto report = validate_dataset(set);
  EXPECT_TRUE(report.pass) << report.summary();
  EXPECT_TRUE(report.balanced);
  for (const auto& c : report.constructions) {
    EXPECT_EQ(c.count, 500u);
    EXPECT_TRUE(c.schema_violations.empty());
  }
  EXPECT_TRUE(report.duplicate_texts.empty());
}

TEST(Dataset, GenerationIsDeterministic) {
  const auto a = sentence_set_to_json(generate_dataset(default_vocabulary(), 50, 9));
  const auto b = sentence_set_to_json(generate_dataset(default_vocabulary(), 50, 9));
  const auto c = sentence_set_to_json(generate_dataset(default_vocabulary(), 50, 10));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Dataset, SingletonSlotsForceOneSentence) {
  const auto vocab = singleton_vocabulary();
  const auto set = generate_dataset(vocab, 1, 0);
  ASSERT_EQ(set.sentences.size(), 4u);
  EXPECT_TRUE(validate_dataset(set).pass);
  EXPECT_EQ(set.sentences[0].label, ConstructionLabel::transitive);
  EXPECT_EQ(set.sentences[0].tokens[1].text, "the");
  try {
    generate_dataset(vocab, 2, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::capacity);
  }
}

TEST(Dataset, ExhaustiveDrawsCoverCapacityExactly) {
  auto vocab = singleton_vocabulary();
  for (auto& slots : vocab.slots) slots[2] = {"a", "b", "c"};
  const auto set = generate_dataset(vocab, 3, 5);
  std::set<std::string> texts;
  for (const auto& s : set.sentences) texts.insert(s.text);
  EXPECT_EQ(texts.size(), 12u);
}

TEST(Dataset, TokensFollowSchemaWithSequentialPositions) {
  const auto set = generate_dataset(default_vocabulary(), 5, 3);
  for (const auto& s : set.sentences) {
    const auto& roles = schema_for(s.label).roles;
    ASSERT_EQ(s.tokens.size(), roles.size());
    EXPECT_EQ(s.tokens.front().text, "[CLS]");
    EXPECT_EQ(s.tokens.back().text, "[SEP]");
    for (std::size_t i = 0; i < roles.size(); ++i) {
      EXPECT_EQ(s.tokens[i].role, roles[i]);
      EXPECT_EQ(s.tokens[i].position, i);
    }
  }
}

TEST(Dataset, SchemaViolationNamesSentence) {
  auto set = generate_dataset(default_vocabulary(), 3, 1);
  auto& victim = set.sentences[1];
  ASSERT_EQ(victim.label, ConstructionLabel::transitive);
  victim.tokens = {{"[CLS]", TokenRole::CLS, 0}, {"the", TokenRole::DET, 1}, {"cat", TokenRole::SUBJ, 2},
                   {"sat", TokenRole::VERB, 3}, {"[SEP]", TokenRole::SEP, 4}};
  const auto report = validate_dataset(set);
  EXPECT_FALSE(report.pass);
  const auto& t = report.constructions[index_of(ConstructionLabel::transitive)];
  ASSERT_EQ(t.schema_violations.size(), 1u);
  EXPECT_EQ(t.schema_violations[0], victim.id);
}

TEST(Dataset, UnbalancedSetFails) {
  auto set = generate_dataset(default_vocabulary(), 10, 1);
  set.sentences.erase(set.sentences.begin());
  const auto report = validate_dataset(set);
  EXPECT_FALSE(report.balanced);
  EXPECT_FALSE(report.pass);
  EXPECT_EQ(report.constructions[0].count, 9u);
}

TEST(Dataset, DuplicateTextsAreReported) {
  auto set = generate_dataset(default_vocabulary(), 4, 1);
  set.sentences[1].text = set.sentences[0].text;
  const auto report = validate_dataset(set);
  EXPECT_FALSE(report.pass);
  EXPECT_EQ(report.duplicate_texts.size(), 1u);
}

TEST(Dataset, JsonRoundTripRestoresPositions) {
  const auto set = generate_dataset(default_vocabulary(), 6, 4);
  const std::string json = sentence_set_to_json(set);
  EXPECT_EQ(json.find("position"), std::string::npos);
  EXPECT_EQ(sentence_set_from_json(json), set);

  testing_support::TempDir dir;
  write_sentence_set(set, dir / "set.json");
  EXPECT_EQ(read_sentence_set(dir / "set.json"), set);
  EXPECT_THROW(read_sentence_set(dir / "missing.json"), Error);
  EXPECT_THROW(sentence_set_from_json("{\"sentences\": [{\"id\": 1}]}"), Error);
}

TEST(Dataset, DefaultVocabularyIsLargeAndClean) {
  const auto& vocab = default_vocabulary();
  check_vocabulary(vocab);
  EXPECT_TRUE(lint_vocabulary(vocab).empty());
  for (auto label : kAllConstructions) EXPECT_GE(vocabulary_capacity(vocab, label), 2000u);
  const auto back = vocabulary_from_json(vocabulary_to_json(vocab));
  EXPECT_EQ(vocabulary_to_json(back), vocabulary_to_json(vocab));
}

TEST(Dataset, LintFlagsMultiPieceCandidates) {
  auto vocab = singleton_vocabulary();
  vocab.slots[0][1].push_back("unbelievableness");
  vocab.slots[0][1].push_back("Cat");
  const auto flagged = lint_vocabulary(vocab);
  EXPECT_NE(std::find(flagged.begin(), flagged.end(), "unbelievableness"), flagged.end());
  EXPECT_NE(std::find(flagged.begin(), flagged.end(), "Cat"), flagged.end());
  EXPECT_EQ(std::find(flagged.begin(), flagged.end(), "the"), flagged.end());
}

TEST(Dataset, MalformedVocabularyRejected) {
  auto vocab = singleton_vocabulary();
  vocab.slots[0][0].clear();
  EXPECT_THROW(check_vocabulary(vocab), Error);
  vocab = singleton_vocabulary();
  vocab.slots[1][1].push_back("two words");
  EXPECT_THROW(check_vocabulary(vocab), Error);
  EXPECT_THROW(generate_dataset(singleton_vocabulary(), 0, 1), Error);
}
