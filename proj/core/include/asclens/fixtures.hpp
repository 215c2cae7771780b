#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "asclens/archive.hpp"
#include "asclens/types.hpp"

namespace asclens {

/// Parameters of a synthetic archive.
///
/// Hidden vectors at (sentence, layer, position) are Gaussian with standard
/// deviation `sigma` around a class centroid. The four centroids sit on a
/// regular tetrahedron whose edge is separation(layer, role) * sigma, so one
/// scalar controls every pairwise class distance.
///
/// Attention rows are softmax(noise * z + bias) over the valid key positions,
/// where bias adds attention_bias[role][class] to the key column holding the
/// role.
struct FixtureSpec {
  std::size_t sentences_per_class = 50;
  std::size_t hidden_size = 16;
  std::size_t n_layers = 4;
  std::size_t n_heads = 2;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::string model_id = "synthetic-fixture";

  double default_separation = 0.0;
  /// Per-role separation, one value per layer 0..n_layers.
  std::map<TokenRole, std::vector<double>> separation;

  double attention_noise = 1.0;
  std::map<TokenRole, std::array<double, kNumConstructions>> attention_bias;

  double separation_at(std::size_t layer, TokenRole role) const;
};

/// Throws Error(invalid_argument) for sizes of zero, hidden_size < 3, negative
/// separations or per-layer lists of the wrong length.
void validate_fixture_spec(const FixtureSpec& spec);

/// JSON config; "separation" values may be a scalar or a per-layer list.
FixtureSpec fixture_spec_from_json(const std::string& text);
std::string fixture_spec_to_json(const FixtureSpec& spec);

/// Deterministic in `spec`: identical specs give byte-identical archives.
ActivationArchive synth_archive(const FixtureSpec& spec);

}  // namespace asclens
