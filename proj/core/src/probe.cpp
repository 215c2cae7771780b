#include "asclens/probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "asclens/error.hpp"
#include "asclens/parallel.hpp"
#include "asclens/rng.hpp"
#include "text_util.hpp"

namespace asclens {

namespace {

void check_labels(std::span<const std::size_t> labels, std::size_t n) {
  if (labels.size() != n) {
    throw Error(Errc::length_mismatch, std::to_string(n) + " feature rows but " +
                                           std::to_string(labels.size()) + " labels");
  }
  for (auto l : labels) {
    if (l >= kProbeClasses) throw Error(Errc::invalid_argument, "probe label out of range [0, 4)");
  }
}

Matrix subset(const Matrix& features, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = features.row(rows[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

// Pegasos on one binary head with w = scale * v; the last entry of v is the
// weight of the constant feature.
std::vector<double> train_head(const Matrix& z, std::span<const std::size_t> labels,
                               std::size_t positive, const ProbeOptions& options,
                               std::uint64_t stream_seed) {
  const std::size_t n = z.rows();
  const std::size_t dims = z.cols();
  std::vector<double> v(dims + 1, 0.0);
  double scale = 1.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(stream_seed);

  std::uint64_t t = 0;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (options.lambda * static_cast<double>(t));
      const double y = labels[i] == positive ? 1.0 : -1.0;
      const auto x = z.row(i);
      double dot = v[dims];
      for (std::size_t d = 0; d < dims; ++d) dot += v[d] * x[d];
      const double margin = y * scale * dot;

      const double shrink = 1.0 - eta * options.lambda;
      if (shrink <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        scale = 1.0;
      } else {
        scale *= shrink;
      }
      if (margin < 1.0) {
        const double step = eta * y / scale;
        for (std::size_t d = 0; d < dims; ++d) v[d] += step * x[d];
        v[dims] += step;
      }
      if (scale < 1e-9) {
        for (auto& w : v) w *= scale;
        scale = 1.0;
      }
    }
  }
  for (auto& w : v) w *= scale;
  return v;
}

double population_std(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(values.size()));
}

void finalize(ProbeResult& result) {
  std::int64_t total = 0;
  std::int64_t correct = 0;
  for (std::size_t t = 0; t < kProbeClasses; ++t) {
    for (std::size_t p = 0; p < kProbeClasses; ++p) {
      total += result.confusion[t][p];
      if (t == p) correct += result.confusion[t][p];
    }
  }
  result.mean_accuracy = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  result.std_accuracy = population_std(result.fold_accuracies);
}

}  // namespace

std::vector<std::size_t> predict(const LinearProbeModel& model, const Matrix& features) {
  const std::size_t dims = model.dimension();
  if (features.cols() != dims) {
    throw Error(Errc::dimension_mismatch, "probe expects " + std::to_string(dims) +
                                              " features, got " + std::to_string(features.cols()));
  }
  std::vector<std::size_t> out(features.rows());
  std::vector<double> z(dims);
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto x = features.row(r);
    for (std::size_t d = 0; d < dims; ++d) z[d] = (x[d] - model.feature_mean[d]) * model.feature_scale[d];
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t c = 0; c < kProbeClasses; ++c) {
      double s = model.bias[c];
      for (std::size_t d = 0; d < dims; ++d) s += model.weights[c][d] * z[d];
      if (c == 0 || s > best_score) {
        best = c;
        best_score = s;
      }
    }
    out[r] = best;
  }
  return out;
}

LinearProbeModel fit_probe(const Matrix& features, std::span<const std::size_t> labels,
                           const ProbeOptions& options) {
  const std::size_t n = features.rows();
  const std::size_t dims = features.cols();
  if (dims == 0) throw Error(Errc::invalid_argument, "probe features have dimension 0");
  if (n == 0) throw Error(Errc::invalid_argument, "probe needs at least one sample");
  if (!(options.lambda > 0.0) || options.epochs == 0) {
    throw Error(Errc::invalid_argument, "probe needs lambda > 0 and at least one epoch");
  }
  check_labels(labels, n);

  LinearProbeModel model;
  model.feature_mean.assign(dims, 0.0);
  model.feature_scale.assign(dims, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = features.row(r);
    for (std::size_t d = 0; d < dims; ++d) model.feature_mean[d] += x[d];
  }
  for (auto& m : model.feature_mean) m /= static_cast<double>(n);
  std::vector<double> var(dims, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = features.row(r);
    for (std::size_t d = 0; d < dims; ++d) {
      const double c = x[d] - model.feature_mean[d];
      var[d] += c * c;
    }
  }
  for (std::size_t d = 0; d < dims; ++d) {
    const double sd = std::sqrt(var[d] / static_cast<double>(n));
    model.feature_scale[d] = sd > 0.0 ? 1.0 / sd : 0.0;
  }

  Matrix z(n, dims);
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = features.row(r);
    auto out = z.row(r);
    for (std::size_t d = 0; d < dims; ++d) out[d] = (x[d] - model.feature_mean[d]) * model.feature_scale[d];
  }

  for (std::size_t c = 0; c < kProbeClasses; ++c) {
    auto v = train_head(z, labels, c, options, derive_seed(options.seed, c));
    model.bias[c] = v[dims];
    v.pop_back();
    model.weights[c] = std::move(v);
  }
  return model;
}

std::vector<std::size_t> stratified_folds(std::span<const std::size_t> labels, std::size_t folds,
                                          std::uint64_t seed) {
  std::vector<std::size_t> assignment(labels.size(), 0);
  std::size_t offset = 0;
  for (std::size_t c = 0; c < kProbeClasses; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) members.push_back(i);
    }
    Rng rng(derive_seed(seed, 0x100 + c));
    shuffle(members.begin(), members.end(), rng);
    for (std::size_t r = 0; r < members.size(); ++r) assignment[members[r]] = (offset + r) % folds;
    offset += members.size();
  }
  return assignment;
}

ProbeResult train_probe(const Matrix& features, std::span<const std::size_t> labels,
                        const ProbeOptions& options) {
  const std::size_t n = features.rows();
  if (features.cols() == 0) throw Error(Errc::invalid_argument, "probe features have dimension 0");
  if (options.folds < 2) throw Error(Errc::invalid_argument, "probe needs at least 2 folds");
  check_labels(labels, n);
  std::array<std::size_t, kProbeClasses> counts{};
  for (auto l : labels) ++counts[l];
  for (std::size_t c = 0; c < kProbeClasses; ++c) {
    if (counts[c] == 0) {
      throw Error(Errc::stratification, "class " + std::string(to_string(static_cast<ConstructionLabel>(c))) +
                                            " has no samples");
    }
  }
  if (n < kProbeClasses * options.folds) {
    throw Error(Errc::invalid_argument, "probe needs N >= 4 * folds (N=" + std::to_string(n) + ")");
  }

  const auto assignment = stratified_folds(labels, options.folds, options.seed);
  std::vector<ConfusionMatrix> per_fold(options.folds);
  std::vector<double> accuracy(options.folds, 0.0);

  parallel_for(options.folds, [&](std::size_t f) {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < n; ++i) (assignment[i] == f ? test_rows : train_rows).push_back(i);
    std::vector<std::size_t> train_labels;
    for (auto i : train_rows) train_labels.push_back(labels[i]);

    ProbeOptions fold_options = options;
    fold_options.seed = derive_seed(options.seed, 0x1000 + f);
    const auto model = fit_probe(subset(features, train_rows), train_labels, fold_options);
    const auto predicted = predict(model, subset(features, test_rows));

    ConfusionMatrix confusion{};
    std::size_t correct = 0;
    for (std::size_t k = 0; k < test_rows.size(); ++k) {
      const auto truth = labels[test_rows[k]];
      ++confusion[truth][predicted[k]];
      if (truth == predicted[k]) ++correct;
    }
    per_fold[f] = confusion;
    accuracy[f] = test_rows.empty() ? 0.0
                                    : static_cast<double>(correct) / static_cast<double>(test_rows.size());
  });

  ProbeResult result;
  result.fold_accuracies = accuracy;
  for (const auto& confusion : per_fold) {
    for (std::size_t t = 0; t < kProbeClasses; ++t) {
      for (std::size_t p = 0; p < kProbeClasses; ++p) result.confusion[t][p] += confusion[t][p];
    }
  }
  finalize(result);
  return result;
}

std::vector<ProbeResult> probe_sweep(const ActivationArchive& archive, std::span<const TokenRole> roles,
                                     std::span<const std::size_t> layers, const ProbeOptions& options) {
  std::vector<std::size_t> sorted_layers(layers.begin(), layers.end());
  std::sort(sorted_layers.begin(), sorted_layers.end());
  sorted_layers.erase(std::unique(sorted_layers.begin(), sorted_layers.end()), sorted_layers.end());
  const auto sorted_roles = canonical_roles({roles.begin(), roles.end()});

  std::vector<std::pair<std::size_t, TokenRole>> cells;
  for (auto layer : sorted_layers) {
    for (auto role : sorted_roles) cells.emplace_back(layer, role);
  }
  std::vector<ProbeResult> results(cells.size());
  parallel_for(cells.size(), [&](std::size_t c) {
    const auto slice = slice_role(archive, cells[c].second, cells[c].first);
    std::vector<std::size_t> labels;
    labels.reserve(slice.labels.size());
    for (auto l : slice.labels) labels.push_back(index_of(l));
    results[c] = train_probe(slice.features, labels, options);
    results[c].layer = cells[c].first;
    results[c].role = cells[c].second;
  });
  return results;
}

std::string probe_folds_to_csv(std::span<const ProbeResult> results) {
  std::string out = "layer,role,fold,accuracy\n";
  for (const auto& r : results) {
    for (std::size_t f = 0; f < r.fold_accuracies.size(); ++f) {
      out += std::to_string(r.layer) + "," + std::string(to_string(r.role)) + "," + std::to_string(f) +
             "," + detail::fixed6(r.fold_accuracies[f]) + "\n";
    }
  }
  return out;
}

std::string probe_confusion_to_csv(std::span<const ProbeResult> results) {
  std::string out = "layer,role,true,pred,count\n";
  for (const auto& r : results) {
    for (std::size_t t = 0; t < kProbeClasses; ++t) {
      for (std::size_t p = 0; p < kProbeClasses; ++p) {
        out += std::to_string(r.layer) + "," + std::string(to_string(r.role)) + "," +
               std::string(to_string(static_cast<ConstructionLabel>(t))) + "," +
               std::string(to_string(static_cast<ConstructionLabel>(p))) + "," +
               std::to_string(r.confusion[t][p]) + "\n";
      }
    }
  }
  return out;
}

std::vector<ProbeResult> probe_results_from_csv(const std::string& folds_csv,
                                                const std::string& confusion_csv) {
  std::map<std::pair<std::size_t, TokenRole>, ProbeResult> cells;
  auto cell = [&](const std::string& layer, const std::string& role) -> ProbeResult& {
    const auto parsed = parse_role(role);
    if (!parsed) throw Error(Errc::invalid_argument, "unknown role '" + role + "'");
    const auto key = std::make_pair(static_cast<std::size_t>(detail::parse_int(layer)), *parsed);
    auto& r = cells[key];
    r.layer = key.first;
    r.role = key.second;
    return r;
  };

  const auto folds = detail::parse_csv(folds_csv);
  detail::expect_header(folds, {"layer", "role", "fold", "accuracy"});
  for (std::size_t i = 1; i < folds.size(); ++i) {
    if (folds[i].size() != 4) throw Error(Errc::invalid_argument, "probe CSV row with wrong arity");
    auto& r = cell(folds[i][0], folds[i][1]);
    const auto f = static_cast<std::size_t>(detail::parse_int(folds[i][2]));
    if (r.fold_accuracies.size() <= f) r.fold_accuracies.resize(f + 1, 0.0);
    r.fold_accuracies[f] = detail::parse_double(folds[i][3]);
  }
  const auto confusion = detail::parse_csv(confusion_csv);
  detail::expect_header(confusion, {"layer", "role", "true", "pred", "count"});
  for (std::size_t i = 1; i < confusion.size(); ++i) {
    const auto& row = confusion[i];
    if (row.size() != 5) throw Error(Errc::invalid_argument, "confusion CSV row with wrong arity");
    const auto truth = parse_label(row[2]);
    const auto pred = parse_label(row[3]);
    if (!truth || !pred) throw Error(Errc::invalid_argument, "unknown label in confusion CSV");
    cell(row[0], row[1]).confusion[index_of(*truth)][index_of(*pred)] = detail::parse_int(row[4]);
  }
  std::vector<ProbeResult> out;
  for (auto& [key, r] : cells) {
    finalize(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace asclens
