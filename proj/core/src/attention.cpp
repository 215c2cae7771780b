#include "asclens/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asclens/error.hpp"
#include "asclens/parallel.hpp"
#include "text_util.hpp"

namespace asclens {

Statistic Statistic::unbounded() noexcept { return {std::numeric_limits<double>::max(), true}; }

namespace {

void check_layer_head(const ActivationArchive& archive, std::size_t layer, std::size_t head) {
  if (layer == 0 || layer > archive.n_layers()) {
    throw Error(Errc::invalid_argument, "attention layer " + std::to_string(layer) + " outside [1, " +
                                            std::to_string(archive.n_layers()) + "]");
  }
  if (head >= archive.n_heads()) {
    throw Error(Errc::invalid_argument, "head " + std::to_string(head) + " outside [0, " +
                                            std::to_string(archive.n_heads()) + ")");
  }
}

// Means closer than this (relative) count as equal.
constexpr double kMeanTolerance = 1e-12;

bool means_equal(double a, double b) {
  return std::abs(a - b) <= kMeanTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance_of(std::span<const double> xs, double mean, VarianceMode mode) {
  double s = 0.0;
  for (double x : xs) s += (x - mean) * (x - mean);
  const double denom = mode == VarianceMode::population ? static_cast<double>(xs.size())
                                                        : static_cast<double>(xs.size()) - 1.0;
  return s / denom;
}

std::string stat_field(const Statistic& s) { return s.infinite ? "inf" : detail::fixed6(s.value); }

Statistic parse_stat(const std::string& field) {
  if (field == "inf") return Statistic::unbounded();
  return Statistic::finite(detail::parse_double(field));
}

}  // namespace

double column_mass(const ActivationArchive& archive, std::size_t layer, std::size_t head,
                   std::size_t sentence, std::size_t position, bool include_self) {
  check_layer_head(archive, layer, head);
  const std::size_t valid = archive.manifest().sentences.at(sentence).valid_length();
  double mass = 0.0;
  for (std::size_t i = 0; i < valid; ++i) {
    if (i == position && !include_self) continue;
    mass += archive.attention_row(layer, sentence, head, i)[position];
  }
  return static_cast<double>(static_cast<float>(mass));
}

AttentionMass attention_mass(const ActivationArchive& archive, std::size_t layer, std::size_t head,
                             TokenRole role, bool include_self) {
  check_layer_head(archive, layer, head);
  const auto& sentences = archive.manifest().sentences;
  AttentionMass out;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto pos = sentences[s].position_of(role);
    if (!pos) {
      out.skipped_ids.push_back(sentences[s].id);
      continue;
    }
    out.mass.push_back(column_mass(archive, layer, head, s, *pos, include_self));
    out.labels.push_back(sentences[s].label);
    out.sentence_ids.push_back(sentences[s].id);
  }
  if (out.mass.empty()) {
    throw Error(Errc::empty_selection,
                "role " + std::string(to_string(role)) + " is present in zero sentences");
  }
  return out;
}

Statistic anova_f(std::span<const std::vector<double>> groups) {
  const std::size_t k = groups.size();
  if (k < 2) throw Error(Errc::group_too_small, "ANOVA needs at least 2 groups");
  std::size_t total = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw Error(Errc::group_too_small, "ANOVA group with fewer than 2 samples");
    total += g.size();
  }
  if (total <= k) throw Error(Errc::group_too_small, "ANOVA needs more samples than groups");

  std::vector<double> means(k);
  double grand = 0.0;
  for (std::size_t g = 0; g < k; ++g) {
    means[g] = mean_of(groups[g]);
    grand += means[g] * static_cast<double>(groups[g].size());
  }
  grand /= static_cast<double>(total);

  const bool equal_means = std::all_of(means.begin(), means.end(), [&](double m) { return means_equal(m, means[0]); });
  double ssb = 0.0;
  double ssw = 0.0;
  for (std::size_t g = 0; g < k; ++g) {
    if (!equal_means) ssb += static_cast<double>(groups[g].size()) * (means[g] - grand) * (means[g] - grand);
    for (double x : groups[g]) ssw += (x - means[g]) * (x - means[g]);
  }
  if (ssb == 0.0) return Statistic::finite(0.0);
  if (ssw == 0.0) return Statistic::unbounded();
  const double between = ssb / static_cast<double>(k - 1);
  const double within = ssw / static_cast<double>(total - k);
  return Statistic::finite(between / within);
}

Statistic fdr_two_class(std::span<const double> a, std::span<const double> b, VarianceMode mode) {
  if (a.empty() || b.empty()) throw Error(Errc::empty_group, "FDR needs two non-empty groups");
  if (mode == VarianceMode::sample && (a.size() < 2 || b.size() < 2)) {
    throw Error(Errc::group_too_small, "sample variance needs at least 2 samples per group");
  }
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double num = means_equal(ma, mb) ? 0.0 : (ma - mb) * (ma - mb);
  const double den = variance_of(a, ma, mode) + variance_of(b, mb, mode);
  if (den == 0.0) return num == 0.0 ? Statistic::finite(0.0) : Statistic::unbounded();
  return Statistic::finite(num / den);
}

MulticlassFdr fdr_multiclass(std::span<const std::vector<double>> groups, VarianceMode mode) {
  if (groups.size() < 2) throw Error(Errc::empty_group, "multiclass FDR needs at least 2 groups");
  MulticlassFdr out;
  double sum = 0.0;
  std::size_t finite_pairs = 0;
  for (std::size_t l = 0; l < groups.size(); ++l) {
    for (std::size_t m = l + 1; m < groups.size(); ++m) {
      const auto f = fdr_two_class(groups[l], groups[m], mode);
      if (f.infinite) {
        ++out.infinite_pairs;
        out.max = Statistic::unbounded();
        continue;
      }
      sum += f.value;
      ++finite_pairs;
      if (!out.max.infinite) out.max.value = std::max(out.max.value, f.value);
    }
  }
  out.mean = finite_pairs > 0 ? sum / static_cast<double>(finite_pairs) : 0.0;
  return out;
}

AttentionStats attention_sweep(const ActivationArchive& archive, std::span<const TokenRole> roles,
                               const AttentionOptions& options) {
  const auto sorted_roles = canonical_roles({roles.begin(), roles.end()});
  const auto& sentences = archive.manifest().sentences;
  for (auto role : sorted_roles) {
    std::array<bool, kNumConstructions> present{};
    std::array<bool, kNumConstructions> seen{};
    for (const auto& s : sentences) {
      seen[index_of(s.label)] = true;
      if (s.position_of(role)) present[index_of(s.label)] = true;
    }
    for (auto label : kAllConstructions) {
      if (seen[index_of(label)] && !present[index_of(label)]) {
        throw Error(Errc::missing_role, "role " + std::string(to_string(role)) + " is absent from " +
                                            std::string(to_string(label)) + " sentences");
      }
    }
  }

  using Key = std::tuple<std::size_t, std::size_t, TokenRole>;
  std::vector<Key> cells;
  for (std::size_t layer = 1; layer <= archive.n_layers(); ++layer) {
    for (std::size_t head = 0; head < archive.n_heads(); ++head) {
      for (auto role : sorted_roles) cells.emplace_back(layer, head, role);
    }
  }

  std::vector<AttentionCell> values(cells.size());
  parallel_for(cells.size(), [&](std::size_t c) {
    const auto [layer, head, role] = cells[c];
    const auto masses = attention_mass(archive, layer, head, role, options.include_self);
    std::vector<std::vector<double>> grouped(kNumConstructions);
    for (std::size_t i = 0; i < masses.mass.size(); ++i) grouped[index_of(masses.labels[i])].push_back(masses.mass[i]);
    std::vector<std::vector<double>> groups;
    AttentionCell cell;
    for (std::size_t g = 0; g < kNumConstructions; ++g) {
      if (grouped[g].empty()) continue;
      const double m = mean_of(grouped[g]);
      cell.group_means[g] = m;
      cell.group_vars[g] = grouped[g].size() > 1 || options.variance == VarianceMode::population
                               ? variance_of(grouped[g], m, options.variance)
                               : 0.0;
      groups.push_back(grouped[g]);
    }
    cell.f_stat = anova_f(groups);
    const auto fdr = fdr_multiclass(groups, options.variance);
    cell.fdr_mean = fdr.mean;
    cell.fdr_max = fdr.max;
    cell.infinite_fdr_pairs = fdr.infinite_pairs;
    values[c] = cell;
  });

  AttentionStats stats;
  std::map<std::pair<std::size_t, TokenRole>, std::pair<double, std::size_t>> layer_sums;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto [layer, head, role] = cells[c];
    const auto& cell = values[c];
    stats.entries[cells[c]] = cell;
    auto& acc = layer_sums[{layer, role}];
    acc.first += cell.fdr_mean;
    ++acc.second;
    if (cell.infinite_fdr_pairs > 0) {
      stats.notes.push_back("layer " + std::to_string(layer) + " head " + std::to_string(head) + " role " +
                            std::string(to_string(role)) + ": " + std::to_string(cell.infinite_fdr_pairs) +
                            " class pair(s) with zero within-class variance excluded from fdr_mean");
    }
  }
  for (const auto& [key, acc] : layer_sums) stats.layer_mean_fdr[key] = acc.first / static_cast<double>(acc.second);
  return stats;
}

std::string attention_heads_to_csv(const AttentionStats& stats) {
  std::string out = "layer,head,role,f_stat,fdr_mean,fdr_max\n";
  for (const auto& [key, cell] : stats.entries) {
    const auto& [layer, head, role] = key;
    out += std::to_string(layer) + "," + std::to_string(head) + "," + std::string(to_string(role)) + "," +
           stat_field(cell.f_stat) + "," + detail::fixed6(cell.fdr_mean) + "," + stat_field(cell.fdr_max) + "\n";
  }
  return out;
}

std::string attention_layer_mean_to_csv(const AttentionStats& stats) {
  std::string out = "layer,role,fdr_head_mean\n";
  for (const auto& [key, value] : stats.layer_mean_fdr) {
    out += std::to_string(key.first) + "," + std::string(to_string(key.second)) + "," + detail::fixed6(value) + "\n";
  }
  return out;
}

AttentionStats attention_stats_from_csv(const std::string& heads_csv, const std::string& layer_mean_csv) {
  AttentionStats stats;
  const auto heads = detail::parse_csv(heads_csv);
  detail::expect_header(heads, {"layer", "head", "role", "f_stat", "fdr_mean", "fdr_max"});
  for (std::size_t i = 1; i < heads.size(); ++i) {
    const auto& row = heads[i];
    if (row.size() != 6) throw Error(Errc::invalid_argument, "attention CSV row with wrong arity");
    const auto role = parse_role(row[2]);
    if (!role) throw Error(Errc::invalid_argument, "unknown role '" + row[2] + "'");
    AttentionCell cell;
    cell.f_stat = parse_stat(row[3]);
    cell.fdr_mean = detail::parse_double(row[4]);
    cell.fdr_max = parse_stat(row[5]);
    stats.entries[{static_cast<std::size_t>(detail::parse_int(row[0])),
                   static_cast<std::size_t>(detail::parse_int(row[1])), *role}] = cell;
  }
  const auto means = detail::parse_csv(layer_mean_csv);
  detail::expect_header(means, {"layer", "role", "fdr_head_mean"});
  for (std::size_t i = 1; i < means.size(); ++i) {
    const auto& row = means[i];
    if (row.size() != 3) throw Error(Errc::invalid_argument, "layer-mean CSV row with wrong arity");
    const auto role = parse_role(row[1]);
    if (!role) throw Error(Errc::invalid_argument, "unknown role '" + row[1] + "'");
    stats.layer_mean_fdr[{static_cast<std::size_t>(detail::parse_int(row[0])), *role}] = detail::parse_double(row[2]);
  }
  return stats;
}

}  // namespace asclens
