#include <gtest/gtest.h>

#include <cstring>

#include "asclens/archive.hpp"
#include "asclens/dataset.hpp"
#include "asclens/error.hpp"
#include "asclens/fixtures.hpp"
#include "support/support.hpp"

using namespace asclens;
using testing_support::TempDir;

namespace {

ArchiveManifest manifest_for(std::vector<SentenceRecord> sentences, std::size_t layers, std::size_t hidden,
                             std::size_t heads) {
  ArchiveManifest m;
  m.model_id = "test-model";
  m.n_layers = layers;
  m.hidden_size = hidden;
  m.n_heads = heads;
  m.max_tokens = 10;
  m.n_sentences = sentences.size();
  m.sentences = std::move(sentences);
  return m;
}

std::vector<SentenceRecord> first_sentences(std::size_t n, ConstructionLabel label) {
  const auto set = generate_dataset(default_vocabulary(), n, 1);
  std::vector<SentenceRecord> out;
  for (const auto& s : set.sentences) {
    if (s.label == label) out.push_back(s);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<std::int64_t>(i);
  return out;
}

// Hidden states with a distinct value per (layer, sentence, position, dim)
// on valid positions and uniform attention rows.
ActivationArchive patterned_archive(ArchiveManifest m) {
  const std::size_t t = m.max_tokens;
  std::vector<HiddenTensor> hidden(m.n_layers + 1, HiddenTensor(hidden_tensor_size(m), 0.0f));
  for (std::size_t l = 0; l <= m.n_layers; ++l) {
    for (std::size_t s = 0; s < m.n_sentences; ++s) {
      for (std::size_t p = 0; p < m.sentences[s].valid_length(); ++p) {
        for (std::size_t d = 0; d < m.hidden_size; ++d) {
          hidden[l][(s * t + p) * m.hidden_size + d] =
              static_cast<float>(1000.0 * l + 100.0 * s + 10.0 * p + d + 0.25);
        }
      }
    }
  }
  std::vector<AttentionTensor> attention(m.n_layers, AttentionTensor(attention_tensor_size(m), 0.0f));
  for (auto& tensor : attention) {
    for (std::size_t s = 0; s < m.n_sentences; ++s) {
      const std::size_t valid = m.sentences[s].valid_length();
      for (std::size_t h = 0; h < m.n_heads; ++h) {
        for (std::size_t q = 0; q < valid; ++q) {
          for (std::size_t k = 0; k < valid; ++k) {
            tensor[((s * m.n_heads + h) * t + q) * t + k] = 1.0f / static_cast<float>(valid);
          }
        }
      }
    }
  }
  return ActivationArchive(std::move(m), std::move(hidden), std::move(attention));
}

}  // namespace

TEST(Archive, RoundTripIsBitExact) {
  TempDir dir;
  const auto archive =
      patterned_archive(manifest_for(first_sentences(2, ConstructionLabel::transitive), 1, 4, 2));
  write_archive(archive, dir.path());
  const auto back = read_archive(dir.path());
  EXPECT_EQ(back.manifest(), archive.manifest());
  ASSERT_EQ(back.hidden().size(), 2u);
  ASSERT_EQ(back.attention().size(), 1u);
  for (std::size_t l = 0; l < back.hidden().size(); ++l) {
    EXPECT_EQ(std::memcmp(back.hidden()[l].data(), archive.hidden()[l].data(), archive.hidden()[l].size() * 4), 0);
  }
  EXPECT_EQ(std::memcmp(back.attention()[0].data(), archive.attention()[0].data(),
                        archive.attention()[0].size() * 4),
            0);
}

TEST(Archive, WritesRawLittleEndianFloat32) {
  TempDir dir;
  const auto archive =
      patterned_archive(manifest_for(first_sentences(2, ConstructionLabel::transitive), 1, 4, 1));
  write_archive(archive, dir.path());
  const std::string bytes = testing_support::slurp(dir / "hidden/layer_1.f32");
  ASSERT_EQ(bytes.size(), 2u * 10u * 4u * 4u);
  // first element: layer 1, sentence 0, position 0, dim 0 = 1000.25
  const unsigned char expected[4] = {0x00, 0x10, 0x7a, 0x44};
  EXPECT_EQ(std::memcmp(bytes.data(), expected, 4), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));
  EXPECT_FALSE(std::filesystem::exists(dir / "attention/layer_0.f32"));
  EXPECT_TRUE(std::filesystem::exists(dir / "attention/layer_1.f32"));
}

TEST(Archive, BaseModelScaleTensorByteCount) {
  ArchiveManifest m;
  m.n_layers = 12;
  m.hidden_size = 768;
  m.n_heads = 12;
  m.max_tokens = 10;
  m.n_sentences = 2000;
  EXPECT_EQ(hidden_tensor_size(m) * sizeof(float), 2000u * 10u * 768u * 4u);
  EXPECT_EQ(attention_tensor_size(m) * sizeof(float), 2000u * 12u * 10u * 10u * 4u);
}

TEST(Archive, SentenceCountMismatchIsDimensionError) {
  auto m = manifest_for(first_sentences(3, ConstructionLabel::transitive), 1, 4, 1);
  std::vector<HiddenTensor> hidden(2, HiddenTensor(2 * 10 * 4, 0.0f));
  std::vector<AttentionTensor> attention(1, AttentionTensor(2 * 1 * 10 * 10, 0.0f));
  TempDir dir;
  try {
    write_archive(m, hidden, attention, dir.path());
    FAIL() << "expected dimension mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dimension_mismatch);
    EXPECT_NE(std::string(e.what()).find("hidden/layer_0.f32"), std::string::npos) << e.what();
  }
}

TEST(Archive, TruncatedTensorNamesTheFile) {
  TempDir dir;
  write_archive(patterned_archive(manifest_for(first_sentences(2, ConstructionLabel::transitive), 2, 4, 1)),
                dir.path());
  const auto victim = dir / "hidden/layer_2.f32";
  std::filesystem::resize_file(victim, std::filesystem::file_size(victim) - 4);
  try {
    read_archive(dir.path());
    FAIL() << "expected truncation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::truncated_tensor);
    EXPECT_NE(std::string(e.what()).find("layer_2.f32"), std::string::npos) << e.what();
  }
}

TEST(Archive, MissingFileAndMalformedManifestAreDistinct) {
  TempDir dir;
  try {
    read_archive(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_file);
  }
  write_archive(patterned_archive(manifest_for(first_sentences(2, ConstructionLabel::transitive), 1, 4, 1)),
                dir.path());
  std::filesystem::remove(dir / "attention/layer_1.f32");
  try {
    read_archive(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_file);
  }
  testing_support::spit(dir / "manifest.json", "{ not json");
  try {
    read_archive(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::malformed_manifest);
  }
}

TEST(Archive, UnsupportedVersion) {
  TempDir dir;
  write_archive(patterned_archive(manifest_for(first_sentences(2, ConstructionLabel::transitive), 1, 4, 1)),
                dir.path());
  std::string text = testing_support::slurp(dir / "manifest.json");
  const auto pos = text.find("\"format_version\": 1");
  ASSERT_NE(pos, std::string::npos) << text.substr(0, 200);
  text.replace(pos, 19, "\"format_version\": 2");
  testing_support::spit(dir / "manifest.json", text);
  try {
    read_archive(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unsupported_version);
  }
}

TEST(Archive, ManifestRejectsUnknownKeys) {
  const auto m = manifest_for(first_sentences(1, ConstructionLabel::transitive), 1, 4, 1);
  std::string text = manifest_to_json(m);
  EXPECT_EQ(manifest_from_json(text), m);
  text.insert(text.find('{') + 1, "\"extra\": 1,");
  try {
    manifest_from_json(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::malformed_manifest);
  }
}

TEST(Archive, ManifestValidationCatchesSchemaViolations) {
  auto m = manifest_for(first_sentences(1, ConstructionLabel::transitive), 1, 4, 1);
  validate_manifest(m);
  auto broken = m;
  broken.sentences[0].tokens[3].position = 1;
  EXPECT_THROW(validate_manifest(broken), Error);
  broken = m;
  broken.sentences[0].tokens.back().role = TokenRole::OBJ;
  EXPECT_THROW(validate_manifest(broken), Error);
  broken = m;
  broken.n_sentences = 2;
  EXPECT_THROW(validate_manifest(broken), Error);
}

TEST(Archive, SliceCLSReturnsEverySentence) {
  const auto archive = synth_archive(testing_support::small_fixture());
  for (std::size_t layer = 0; layer <= archive.n_layers(); ++layer) {
    const auto slice = slice_role(archive, TokenRole::CLS, layer);
    EXPECT_EQ(slice.features.rows(), archive.n_sentences());
    EXPECT_EQ(slice.features.cols(), archive.hidden_size());
    EXPECT_TRUE(slice.skipped_ids.empty());
    EXPECT_EQ(slice.labels.size(), archive.n_sentences());
  }
}

TEST(Archive, SliceMissingRoleIsEmptySelection) {
  const auto archive =
      patterned_archive(manifest_for(first_sentences(3, ConstructionLabel::transitive), 1, 4, 1));
  try {
    slice_role(archive, TokenRole::INDOBJ, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_selection);
  }
  EXPECT_THROW(slice_role(archive, TokenRole::CLS, 2), Error);
}

TEST(Archive, SliceDetTakesFirstDeterminer) {
  const auto archive =
      patterned_archive(manifest_for(first_sentences(2, ConstructionLabel::ditransitive), 1, 4, 1));
  const auto slice = slice_role(archive, TokenRole::DET, 1);
  // DET sits at position 1 in the ditransitive schema.
  EXPECT_FLOAT_EQ(static_cast<float>(slice.features(1, 0)), 1000.0f + 100.0f + 10.0f + 0.25f);
}

TEST(Archive, SlicingMixedArchiveReportsSkippedSentences) {
  const auto archive = synth_archive(testing_support::small_fixture());
  const auto slice = slice_role(archive, TokenRole::INDOBJ, 1);
  EXPECT_EQ(slice.features.rows(), 20u);
  EXPECT_EQ(slice.skipped_ids.size(), 60u);
  for (auto label : slice.labels) EXPECT_EQ(label, ConstructionLabel::ditransitive);
}

TEST(Archive, ValidationFlagsBadRowsAndPadding) {
  auto m = manifest_for(first_sentences(2, ConstructionLabel::transitive), 1, 4, 1);
  auto archive = patterned_archive(m);
  EXPECT_TRUE(validate_archive(archive).ok());

  auto hidden = archive.hidden();
  auto attention = archive.attention();
  attention[0][0] = 0.5f;          // sentence 0, head 0, query 0 no longer sums to 1
  hidden[0][9 * 4] = 1.0f;         // sentence 0, padding position 9
  const ActivationArchive broken(m, hidden, attention);
  const auto report = validate_archive(broken);
  EXPECT_FALSE(report.ok());
  ASSERT_EQ(report.row_sum_violations.size(), 1u);
  EXPECT_EQ(report.row_sum_violations[0].query, 0u);
  EXPECT_EQ(report.nonzero_hidden_padding, 1u);
}

TEST(Archive, FixtureArchivesRoundTrip) {
  TempDir dir;
  const auto archive = synth_archive(testing_support::small_fixture());
  write_archive(archive, dir.path());
  const auto back = read_archive(dir.path());
  EXPECT_EQ(back.manifest(), archive.manifest());
  EXPECT_EQ(back.hidden(), archive.hidden());
  EXPECT_EQ(back.attention(), archive.attention());
  EXPECT_TRUE(validate_archive(back).ok());
}
