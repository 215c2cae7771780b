#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "asclens/archive.hpp"
#include "asclens/types.hpp"

namespace asclens {

/// A statistic that may be unbounded. When `infinite` is set, `value` holds
/// the largest finite double.
struct Statistic {
  double value = 0.0;
  bool infinite = false;

  static Statistic finite(double v) noexcept { return {v, false}; }
  static Statistic unbounded() noexcept;

  friend bool operator==(const Statistic&, const Statistic&) = default;
};

struct AttentionMass {
  std::vector<double> mass;
  std::vector<ConstructionLabel> labels;
  std::vector<std::int64_t> sentence_ids;
  std::vector<std::int64_t> skipped_ids;
};

/// Attention received by the role's position from the valid source
/// positions of each sentence (the position itself only with include_self).
/// Sums are accumulated in double and reported at the archive's float32
/// storage precision, so weights that sum equal in exact arithmetic compare
/// equal.
/// Throws Error(invalid_argument) for a bad layer/head and
/// Error(empty_selection) when no sentence has the role.
AttentionMass attention_mass(const ActivationArchive& archive, std::size_t layer,
                             std::size_t head, TokenRole role, bool include_self = false);

/// Same quantity for an arbitrary key position of one sentence.
double column_mass(const ActivationArchive& archive, std::size_t layer, std::size_t head,
                   std::size_t sentence, std::size_t position, bool include_self);

/// One-way ANOVA F. Zero between-group variance gives 0; zero within-group
/// variance with positive between-group variance gives an unbounded result.
/// Throws Error(group_too_small) unless k >= 2, every group has >= 2 samples
/// and N > k.
Statistic anova_f(std::span<const std::vector<double>> groups);

enum class VarianceMode { population, sample };

/// (mu_a - mu_b)^2 / (var_a + var_b). 0/0 gives 0, x/0 gives unbounded.
/// Throws Error(empty_group), or Error(group_too_small) for a single-element
/// group under the sample estimator.
Statistic fdr_two_class(std::span<const double> a, std::span<const double> b,
                        VarianceMode mode = VarianceMode::population);

struct MulticlassFdr {
  double mean = 0.0;           // over finite pairs
  Statistic max;
  std::size_t infinite_pairs = 0;
};

/// Pairwise FDR over every unordered pair of the groups. Unbounded pairs are
/// excluded from the mean and propagate to the max.
MulticlassFdr fdr_multiclass(std::span<const std::vector<double>> groups,
                             VarianceMode mode = VarianceMode::population);

struct AttentionCell {
  Statistic f_stat;
  double fdr_mean = 0.0;
  Statistic fdr_max;
  std::size_t infinite_fdr_pairs = 0;
  std::array<double, kNumConstructions> group_means{};
  std::array<double, kNumConstructions> group_vars{};
};

struct AttentionStats {
  /// key: (layer, head, role)
  std::map<std::tuple<std::size_t, std::size_t, TokenRole>, AttentionCell> entries;
  /// key: (layer, role); mean of fdr_mean over heads
  std::map<std::pair<std::size_t, TokenRole>, double> layer_mean_fdr;
  std::vector<std::string> notes;
};

struct AttentionOptions {
  bool include_self = false;
  VarianceMode variance = VarianceMode::population;
};

/// Statistics for every layer in [1, n_layers], every head and every role.
/// Throws Error(missing_role) when a role is absent from some construction.
AttentionStats attention_sweep(const ActivationArchive& archive, std::span<const TokenRole> roles,
                               const AttentionOptions& options = {});

/// CSV `layer,head,role,f_stat,fdr_mean,fdr_max`; unbounded values print as
/// `inf`.
std::string attention_heads_to_csv(const AttentionStats& stats);
/// CSV `layer,role,fdr_head_mean`.
std::string attention_layer_mean_to_csv(const AttentionStats& stats);

AttentionStats attention_stats_from_csv(const std::string& heads_csv,
                                        const std::string& layer_mean_csv);

}  // namespace asclens
