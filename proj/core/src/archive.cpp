#include "asclens/archive.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "asclens/dataset.hpp"
#include "asclens/error.hpp"

namespace asclens {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::optional<std::size_t> SentenceRecord::position_of(TokenRole role) const noexcept {
  for (const auto& token : tokens) {
    if (token.role == role) return token.position;
  }
  return std::nullopt;
}

std::size_t SentenceRecord::valid_length() const noexcept {
  return tokens.empty() ? 0 : tokens.back().position + 1;
}

namespace {

std::string shape_string(std::initializer_list<std::size_t> dims) {
  std::string out = "[";
  bool first = true;
  for (auto d : dims) {
    if (!first) out += ",";
    out += std::to_string(d);
    first = false;
  }
  return out + "]";
}

std::string hidden_name(std::size_t layer) { return "hidden/layer_" + std::to_string(layer) + ".f32"; }
std::string attention_name(std::size_t layer) {
  return "attention/layer_" + std::to_string(layer) + ".f32";
}

void check_tensor_dims(const ArchiveManifest& m, std::span<const HiddenTensor> hidden,
                       std::span<const AttentionTensor> attention) {
  if (hidden.size() != m.n_layers + 1) {
    throw Error(Errc::dimension_mismatch, "expected " + std::to_string(m.n_layers + 1) +
                                              " hidden tensors (layers 0.." +
                                              std::to_string(m.n_layers) + "), got " +
                                              std::to_string(hidden.size()));
  }
  if (attention.size() != m.n_layers) {
    throw Error(Errc::dimension_mismatch, "expected " + std::to_string(m.n_layers) +
                                              " attention tensors (layers 1.." +
                                              std::to_string(m.n_layers) + "), got " +
                                              std::to_string(attention.size()));
  }
  const std::size_t hidden_expected = hidden_tensor_size(m);
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    if (hidden[l].size() != hidden_expected) {
      throw Error(Errc::dimension_mismatch,
                  hidden_name(l) + ": expected shape " +
                      shape_string({m.n_sentences, m.max_tokens, m.hidden_size}) + " (" +
                      std::to_string(hidden_expected) + " values), got " +
                      std::to_string(hidden[l].size()) + " values");
    }
  }
  const std::size_t attention_expected = attention_tensor_size(m);
  for (std::size_t l = 0; l < attention.size(); ++l) {
    if (attention[l].size() != attention_expected) {
      throw Error(Errc::dimension_mismatch,
                  attention_name(l + 1) + ": expected shape " +
                      shape_string({m.n_sentences, m.n_heads, m.max_tokens, m.max_tokens}) +
                      " (" + std::to_string(attention_expected) + " values), got " +
                      std::to_string(attention[l].size()) + " values");
    }
  }
}

void write_floats(const fs::path& path, std::span<const float> values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot open " + path.string() + " for writing");
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
  } else {
    std::vector<char> buffer(values.size() * sizeof(float));
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(values[i]);
      for (int b = 0; b < 4; ++b) buffer[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  }
  if (!out) throw Error(Errc::io_failure, "failed writing " + path.string());
}

std::vector<float> read_floats(const fs::path& dir, const std::string& name, std::size_t count) {
  const fs::path path = dir / name;
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(Errc::missing_file, "missing tensor file " + name);
  const auto bytes = fs::file_size(path, ec);
  if (ec) throw Error(Errc::io_failure, "cannot stat " + name + ": " + ec.message());
  const std::uintmax_t expected = static_cast<std::uintmax_t>(count) * sizeof(float);
  if (bytes != expected) {
    throw Error(Errc::truncated_tensor, "tensor file " + name + " has " + std::to_string(bytes) +
                                            " bytes, expected " + std::to_string(expected));
  }
  std::vector<float> values(count);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open " + name);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(expected));
  if (!in) throw Error(Errc::io_failure, "failed reading " + name);
  if constexpr (std::endian::native != std::endian::little) {
    for (auto& v : values) {
      auto bits = std::bit_cast<std::uint32_t>(v);
      bits = ((bits & 0xffu) << 24) | ((bits & 0xff00u) << 8) | ((bits >> 8) & 0xff00u) | (bits >> 24);
      v = std::bit_cast<float>(bits);
    }
  }
  return values;
}

std::size_t json_size(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
    throw Error(Errc::malformed_manifest, std::string("manifest key '") + key +
                                              "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

std::size_t hidden_tensor_size(const ArchiveManifest& m) noexcept {
  return m.n_sentences * m.max_tokens * m.hidden_size;
}

std::size_t attention_tensor_size(const ArchiveManifest& m) noexcept {
  return m.n_sentences * m.n_heads * m.max_tokens * m.max_tokens;
}

void validate_manifest(const ArchiveManifest& m) {
  auto fail = [](const std::string& msg) { throw Error(Errc::malformed_manifest, msg); };
  if (m.format_version != kArchiveFormatVersion) {
    throw Error(Errc::unsupported_version,
                "unsupported archive format_version " + std::to_string(m.format_version));
  }
  if (m.n_layers == 0 || m.hidden_size == 0 || m.n_heads == 0 || m.max_tokens == 0 ||
      m.n_sentences == 0) {
    fail("manifest sizes must all be positive");
  }
  if (m.sentences.size() != m.n_sentences) {
    fail("manifest n_sentences=" + std::to_string(m.n_sentences) + " but " +
         std::to_string(m.sentences.size()) + " sentence records");
  }
  for (const auto& s : m.sentences) {
    const std::string where = "sentence " + std::to_string(s.id);
    if (s.tokens.empty()) fail(where + ": no tokens");
    if (s.tokens.front().role != TokenRole::CLS) fail(where + ": first token is not CLS");
    if (s.tokens.back().role != TokenRole::SEP) fail(where + ": last token is not SEP");
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
      if (s.tokens[t].position >= m.max_tokens) fail(where + ": position beyond max_tokens");
      if (t > 0 && s.tokens[t].position <= s.tokens[t - 1].position) {
        fail(where + ": positions not strictly increasing");
      }
    }
    const auto& schema = schema_for(s.label).roles;
    bool conforms = schema.size() == s.tokens.size();
    for (std::size_t t = 0; conforms && t < schema.size(); ++t) {
      conforms = schema[t] == s.tokens[t].role;
    }
    if (!conforms) fail(where + ": role sequence does not match the " +
                        std::string(to_string(s.label)) + " schema");
  }
}

ActivationArchive::ActivationArchive(ArchiveManifest manifest, std::vector<HiddenTensor> hidden,
                                     std::vector<AttentionTensor> attention)
    : manifest_(std::move(manifest)), hidden_(std::move(hidden)), attention_(std::move(attention)) {
  check_tensor_dims(manifest_, hidden_, attention_);
  validate_manifest(manifest_);
}

std::span<const float> ActivationArchive::hidden_vector(std::size_t layer, std::size_t sentence,
                                                        std::size_t position) const {
  if (layer > manifest_.n_layers) {
    throw Error(Errc::invalid_argument, "hidden layer " + std::to_string(layer) + " out of range");
  }
  const std::size_t h = manifest_.hidden_size;
  const std::size_t offset = (sentence * manifest_.max_tokens + position) * h;
  return {hidden_[layer].data() + offset, h};
}

std::span<const float> ActivationArchive::attention_row(std::size_t layer, std::size_t sentence,
                                                        std::size_t head, std::size_t query) const {
  if (layer == 0 || layer > manifest_.n_layers) {
    throw Error(Errc::invalid_argument,
                "attention layer " + std::to_string(layer) + " out of range [1, n_layers]");
  }
  const std::size_t t = manifest_.max_tokens;
  const std::size_t offset = ((sentence * manifest_.n_heads + head) * t + query) * t;
  return {attention_[layer - 1].data() + offset, t};
}

std::string manifest_to_json(const ArchiveManifest& m) {
  ordered_json j;
  j["format_version"] = m.format_version;
  j["model_id"] = m.model_id;
  j["n_layers"] = m.n_layers;
  j["hidden_size"] = m.hidden_size;
  j["n_heads"] = m.n_heads;
  j["max_tokens"] = m.max_tokens;
  j["n_sentences"] = m.n_sentences;
  auto sentences = ordered_json::array();
  for (const auto& s : m.sentences) {
    ordered_json js;
    js["id"] = s.id;
    js["text"] = s.text;
    js["label"] = std::string(to_string(s.label));
    auto tokens = ordered_json::array();
    for (const auto& t : s.tokens) {
      ordered_json jt;
      jt["text"] = t.text;
      jt["role"] = std::string(to_string(t.role));
      jt["position"] = t.position;
      tokens.push_back(std::move(jt));
    }
    js["tokens"] = std::move(tokens);
    sentences.push_back(std::move(js));
  }
  j["sentences"] = std::move(sentences);
  return j.dump(1) + "\n";
}

ArchiveManifest manifest_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_manifest, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::malformed_manifest, "manifest must be a JSON object");

  if (!j.contains("format_version") || !j["format_version"].is_number_integer()) {
    throw Error(Errc::malformed_manifest, "manifest lacks an integer format_version");
  }
  const auto version = j["format_version"].get<std::int64_t>();
  if (version != kArchiveFormatVersion) {
    throw Error(Errc::unsupported_version,
                "unsupported archive format_version " + std::to_string(version));
  }

  static const std::set<std::string> kKeys = {"format_version", "model_id",   "n_layers",
                                              "hidden_size",    "n_heads",    "max_tokens",
                                              "n_sentences",    "sentences"};
  for (const auto& key : kKeys) {
    if (!j.contains(key)) throw Error(Errc::malformed_manifest, "manifest lacks key '" + key + "'");
  }
  for (const auto& item : j.items()) {
    if (!kKeys.count(item.key())) {
      throw Error(Errc::malformed_manifest, "unexpected manifest key '" + item.key() + "'");
    }
  }

  ArchiveManifest m;
  try {
    m.format_version = static_cast<int>(version);
    m.model_id = j.at("model_id").get<std::string>();
    m.n_layers = json_size(j, "n_layers");
    m.hidden_size = json_size(j, "hidden_size");
    m.n_heads = json_size(j, "n_heads");
    m.max_tokens = json_size(j, "max_tokens");
    m.n_sentences = json_size(j, "n_sentences");
    for (const auto& js : j.at("sentences")) {
      SentenceRecord s;
      s.id = js.at("id").get<std::int64_t>();
      s.text = js.at("text").get<std::string>();
      const auto label = parse_label(js.at("label").get<std::string>());
      if (!label) throw Error(Errc::malformed_manifest, "sentence " + std::to_string(s.id) + ": unknown label");
      s.label = *label;
      for (const auto& jt : js.at("tokens")) {
        TokenRecord t;
        t.text = jt.at("text").get<std::string>();
        const auto role = parse_role(jt.at("role").get<std::string>());
        if (!role) throw Error(Errc::malformed_manifest, "sentence " + std::to_string(s.id) + ": unknown role");
        t.role = *role;
        const auto pos = jt.at("position").get<std::int64_t>();
        if (pos < 0) throw Error(Errc::malformed_manifest, "negative token position");
        t.position = static_cast<std::size_t>(pos);
        s.tokens.push_back(std::move(t));
      }
      m.sentences.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_manifest, std::string("malformed manifest: ") + e.what());
  }
  validate_manifest(m);
  return m;
}

void write_archive(const ArchiveManifest& manifest, std::span<const HiddenTensor> hidden,
                   std::span<const AttentionTensor> attention, const fs::path& dir) {
  check_tensor_dims(manifest, hidden, attention);
  validate_manifest(manifest);

  std::error_code ec;
  fs::create_directories(dir / "hidden", ec);
  if (ec) throw Error(Errc::io_failure, "cannot create " + (dir / "hidden").string() + ": " + ec.message());
  fs::create_directories(dir / "attention", ec);
  if (ec) throw Error(Errc::io_failure, "cannot create " + (dir / "attention").string() + ": " + ec.message());

  {
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_failure, "cannot write manifest.json in " + dir.string());
    out << manifest_to_json(manifest);
    if (!out) throw Error(Errc::io_failure, "failed writing manifest.json");
  }
  for (std::size_t l = 0; l < hidden.size(); ++l) write_floats(dir / hidden_name(l), hidden[l]);
  for (std::size_t l = 0; l < attention.size(); ++l) {
    write_floats(dir / attention_name(l + 1), attention[l]);
  }
}

void write_archive(const ActivationArchive& archive, const fs::path& dir) {
  write_archive(archive.manifest(), archive.hidden(), archive.attention(), dir);
}

ActivationArchive read_archive(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::error_code ec;
  if (!fs::is_regular_file(manifest_path, ec)) {
    throw Error(Errc::missing_file, "missing manifest.json in " + dir.string());
  }
  std::ifstream in(manifest_path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  ArchiveManifest manifest = manifest_from_json(buffer.str());

  std::vector<HiddenTensor> hidden;
  hidden.reserve(manifest.n_layers + 1);
  for (std::size_t l = 0; l <= manifest.n_layers; ++l) {
    hidden.push_back(read_floats(dir, hidden_name(l), hidden_tensor_size(manifest)));
  }
  std::vector<AttentionTensor> attention;
  attention.reserve(manifest.n_layers);
  for (std::size_t l = 1; l <= manifest.n_layers; ++l) {
    attention.push_back(read_floats(dir, attention_name(l), attention_tensor_size(manifest)));
  }
  return ActivationArchive(std::move(manifest), std::move(hidden), std::move(attention));
}

ArchiveValidation validate_archive(const ActivationArchive& archive, double tolerance) {
  ArchiveValidation report;
  const auto& m = archive.manifest();
  const std::size_t t_max = m.max_tokens;
  for (std::size_t s = 0; s < m.n_sentences; ++s) {
    const std::size_t valid = m.sentences[s].valid_length();
    for (std::size_t layer = 0; layer <= m.n_layers; ++layer) {
      for (std::size_t pos = valid; pos < t_max; ++pos) {
        for (float v : archive.hidden_vector(layer, s, pos)) {
          if (v != 0.0f) ++report.nonzero_hidden_padding;
        }
      }
    }
    for (std::size_t layer = 1; layer <= m.n_layers; ++layer) {
      for (std::size_t h = 0; h < m.n_heads; ++h) {
        for (std::size_t q = 0; q < t_max; ++q) {
          const auto row = archive.attention_row(layer, s, h, q);
          if (q >= valid) {
            for (float v : row) {
              if (v != 0.0f) ++report.nonzero_attention_padding;
            }
            continue;
          }
          double sum = 0.0;
          for (std::size_t k = 0; k < t_max; ++k) {
            sum += row[k];
            if (k >= valid && row[k] != 0.0f) ++report.nonzero_attention_padding;
          }
          if (!(std::abs(sum - 1.0) <= tolerance)) {
            report.row_sum_violations.push_back({layer, s, h, q, sum});
          }
        }
      }
    }
  }
  return report;
}

RoleSlice slice_role(const ActivationArchive& archive, TokenRole role, std::size_t layer) {
  const auto& m = archive.manifest();
  if (layer > m.n_layers) {
    throw Error(Errc::invalid_argument, "layer " + std::to_string(layer) + " outside [0, " +
                                            std::to_string(m.n_layers) + "]");
  }
  std::vector<std::size_t> rows;
  std::vector<std::size_t> positions;
  RoleSlice slice;
  for (std::size_t s = 0; s < m.n_sentences; ++s) {
    const auto pos = m.sentences[s].position_of(role);
    if (!pos) {
      slice.skipped_ids.push_back(m.sentences[s].id);
      continue;
    }
    rows.push_back(s);
    positions.push_back(*pos);
  }
  if (rows.empty()) {
    throw Error(Errc::empty_selection,
                "role " + std::string(to_string(role)) + " is present in zero sentences");
  }
  slice.features = Matrix(rows.size(), m.hidden_size);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto v = archive.hidden_vector(layer, rows[k], positions[k]);
    auto out = slice.features.row(k);
    for (std::size_t d = 0; d < v.size(); ++d) out[d] = v[d];
    slice.labels.push_back(m.sentences[rows[k]].label);
    slice.sentence_ids.push_back(m.sentences[rows[k]].id);
  }
  return slice;
}

}  // namespace asclens
