#include "asclens/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "asclens/dataset.hpp"
#include "asclens/error.hpp"
#include "asclens/rng.hpp"

namespace asclens {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Regular tetrahedron, edge length 2*sqrt(2).
constexpr double kTetrahedron[kNumConstructions][3] = {
    {1.0, 1.0, 1.0}, {1.0, -1.0, -1.0}, {-1.0, 1.0, -1.0}, {-1.0, -1.0, 1.0}};

constexpr std::size_t kFixtureMaxTokens = 10;

TokenRole role_key(const std::string& name) {
  const auto role = parse_role(name);
  if (!role) throw Error(Errc::invalid_argument, "unknown token role '" + name + "' in fixture spec");
  return *role;
}

}  // namespace

double FixtureSpec::separation_at(std::size_t layer, TokenRole role) const {
  const auto it = separation.find(role);
  if (it == separation.end()) return default_separation;
  return it->second.at(layer);
}

void validate_fixture_spec(const FixtureSpec& spec) {
  auto fail = [](const std::string& msg) { throw Error(Errc::invalid_argument, "fixture spec: " + msg); };
  if (spec.sentences_per_class == 0 || spec.n_layers == 0 || spec.n_heads == 0) fail("sizes must be >= 1");
  if (spec.hidden_size < 3) fail("hidden_size must be >= 3 to hold the class simplex");
  if (!(spec.sigma > 0.0)) fail("sigma must be positive");
  if (!(spec.default_separation >= 0.0)) fail("separation must be >= 0");
  if (!(spec.attention_noise >= 0.0)) fail("attention noise must be >= 0");
  for (const auto& [role, values] : spec.separation) {
    if (values.size() != spec.n_layers + 1) {
      fail("separation for " + std::string(to_string(role)) + " needs " + std::to_string(spec.n_layers + 1) +
           " values (layers 0.." + std::to_string(spec.n_layers) + ")");
    }
    for (double v : values) {
      if (!(v >= 0.0)) fail("separation must be >= 0");
    }
  }
  for (const auto& [role, bias] : spec.attention_bias) {
    for (double b : bias) {
      if (!std::isfinite(b)) fail("attention bias must be finite");
    }
  }
}

FixtureSpec fixture_spec_from_json(const std::string& text) {
  FixtureSpec spec;
  try {
    const json root = json::parse(text);
    static const std::set<std::string> kKeys = {"sentences_per_class", "hidden_size", "n_layers", "n_heads",
                                                "sigma",     "seed",        "model_id",   "separation",
                                                "attention"};
    for (const auto& item : root.items()) {
      if (!kKeys.count(item.key())) throw Error(Errc::invalid_argument, "unknown fixture key '" + item.key() + "'");
    }
    spec.sentences_per_class = root.value("sentences_per_class", spec.sentences_per_class);
    spec.hidden_size = root.value("hidden_size", spec.hidden_size);
    spec.n_layers = root.value("n_layers", spec.n_layers);
    spec.n_heads = root.value("n_heads", spec.n_heads);
    spec.sigma = root.value("sigma", spec.sigma);
    spec.seed = root.value("seed", spec.seed);
    spec.model_id = root.value("model_id", spec.model_id);
    if (root.contains("separation")) {
      for (const auto& item : root.at("separation").items()) {
        if (item.key() == "default") {
          spec.default_separation = item.value().get<double>();
          continue;
        }
        const auto role = role_key(item.key());
        if (item.value().is_array()) {
          spec.separation[role] = item.value().get<std::vector<double>>();
        } else {
          spec.separation[role] = std::vector<double>(spec.n_layers + 1, item.value().get<double>());
        }
      }
    }
    if (root.contains("attention")) {
      const auto& att = root.at("attention");
      spec.attention_noise = att.value("noise", spec.attention_noise);
      if (att.contains("bias")) {
        for (const auto& item : att.at("bias").items()) {
          const auto values = item.value().get<std::vector<double>>();
          if (values.size() != kNumConstructions) {
            throw Error(Errc::invalid_argument, "attention bias needs one value per construction");
          }
          std::array<double, kNumConstructions> bias{};
          std::copy(values.begin(), values.end(), bias.begin());
          spec.attention_bias[role_key(item.key())] = bias;
        }
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("malformed fixture spec: ") + e.what());
  }
  validate_fixture_spec(spec);
  return spec;
}

std::string fixture_spec_to_json(const FixtureSpec& spec) {
  ordered_json root;
  root["sentences_per_class"] = spec.sentences_per_class;
  root["hidden_size"] = spec.hidden_size;
  root["n_layers"] = spec.n_layers;
  root["n_heads"] = spec.n_heads;
  root["sigma"] = spec.sigma;
  root["seed"] = spec.seed;
  root["model_id"] = spec.model_id;
  ordered_json sep;
  sep["default"] = spec.default_separation;
  for (const auto& [role, values] : spec.separation) sep[std::string(to_string(role))] = values;
  root["separation"] = std::move(sep);
  ordered_json att;
  att["noise"] = spec.attention_noise;
  ordered_json bias = ordered_json::object();
  for (const auto& [role, values] : spec.attention_bias) bias[std::string(to_string(role))] = values;
  att["bias"] = std::move(bias);
  root["attention"] = std::move(att);
  return root.dump(1) + "\n";
}

ActivationArchive synth_archive(const FixtureSpec& spec) {
  validate_fixture_spec(spec);
  const SentenceSet set = generate_dataset(default_vocabulary(), spec.sentences_per_class,
                                           derive_seed(spec.seed, 0xd5));

  ArchiveManifest manifest;
  manifest.model_id = spec.model_id;
  manifest.n_layers = spec.n_layers;
  manifest.hidden_size = spec.hidden_size;
  manifest.n_heads = spec.n_heads;
  manifest.max_tokens = kFixtureMaxTokens;
  manifest.n_sentences = set.sentences.size();
  manifest.sentences = set.sentences;

  const std::size_t n = manifest.n_sentences;
  const std::size_t t_max = manifest.max_tokens;
  const std::size_t dims = manifest.hidden_size;
  const double edge_scale = spec.sigma / (2.0 * std::sqrt(2.0));

  std::vector<HiddenTensor> hidden(spec.n_layers + 1, HiddenTensor(hidden_tensor_size(manifest), 0.0f));
  for (std::size_t layer = 0; layer <= spec.n_layers; ++layer) {
    Rng rng(derive_seed(spec.seed, 0x1000 + layer));
    auto& tensor = hidden[layer];
    for (std::size_t s = 0; s < n; ++s) {
      const auto& sentence = manifest.sentences[s];
      const auto& vertex = kTetrahedron[index_of(sentence.label)];
      for (const auto& token : sentence.tokens) {
        const double offset = spec.separation_at(layer, token.role) * edge_scale;
        float* out = tensor.data() + (s * t_max + token.position) * dims;
        for (std::size_t d = 0; d < dims; ++d) {
          const double centroid = d < 3 ? vertex[d] * offset : 0.0;
          out[d] = static_cast<float>(centroid + spec.sigma * rng.normal());
        }
      }
    }
  }

  std::vector<AttentionTensor> attention(spec.n_layers, AttentionTensor(attention_tensor_size(manifest), 0.0f));
  std::vector<double> logits(t_max);
  for (std::size_t layer = 1; layer <= spec.n_layers; ++layer) {
    Rng rng(derive_seed(spec.seed, 0x2000 + layer));
    auto& tensor = attention[layer - 1];
    for (std::size_t s = 0; s < n; ++s) {
      const auto& sentence = manifest.sentences[s];
      const std::size_t valid = sentence.valid_length();
      std::vector<double> bias(valid, 0.0);
      for (const auto& token : sentence.tokens) {
        const auto it = spec.attention_bias.find(token.role);
        if (it != spec.attention_bias.end()) bias[token.position] = it->second[index_of(sentence.label)];
      }
      for (std::size_t h = 0; h < spec.n_heads; ++h) {
        for (std::size_t q = 0; q < valid; ++q) {
          double top = -std::numeric_limits<double>::infinity();
          for (std::size_t k = 0; k < valid; ++k) {
            const double noise = spec.attention_noise > 0.0 ? spec.attention_noise * rng.normal() : 0.0;
            logits[k] = noise + bias[k];
            top = std::max(top, logits[k]);
          }
          double sum = 0.0;
          for (std::size_t k = 0; k < valid; ++k) {
            logits[k] = std::exp(logits[k] - top);
            sum += logits[k];
          }
          float* row = tensor.data() + ((s * spec.n_heads + h) * t_max + q) * t_max;
          for (std::size_t k = 0; k < valid; ++k) row[k] = static_cast<float>(logits[k] / sum);
        }
      }
    }
  }
  return ActivationArchive(std::move(manifest), std::move(hidden), std::move(attention));
}

}  // namespace asclens
