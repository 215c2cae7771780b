#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "asclens/archive.hpp"
#include "asclens/matrix.hpp"
#include "asclens/types.hpp"

namespace asclens {

inline constexpr std::size_t kProbeClasses = kNumConstructions;

struct ProbeOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  double lambda = 1e-4;
  std::size_t epochs = 20;
};

/// One-vs-rest linear heads over standardized features. The bias is the
/// weight of an implicit constant feature.
struct LinearProbeModel {
  std::array<std::vector<double>, kProbeClasses> weights;
  std::array<double, kProbeClasses> bias{};
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;  // 1 / std, or 0 for constant features

  std::size_t dimension() const noexcept { return feature_mean.size(); }
};

/// Per-class scores are compared with strict '>', so ties resolve to the
/// lowest class index.
/// Throws Error(dimension_mismatch).
std::vector<std::size_t> predict(const LinearProbeModel& model, const Matrix& features);

/// Fits standardization on `features` and trains the heads with a seeded
/// stochastic subgradient schedule (step 1 / (lambda * t)) on the
/// L2-regularized hinge loss.
/// Throws Error(invalid_argument) for D = 0 or a label >= 4.
LinearProbeModel fit_probe(const Matrix& features, std::span<const std::size_t> labels,
                           const ProbeOptions& options);

using ConfusionMatrix = std::array<std::array<std::int64_t, kProbeClasses>, kProbeClasses>;

struct ProbeResult {
  std::size_t layer = 0;
  TokenRole role = TokenRole::CLS;
  std::vector<double> fold_accuracies;
  /// Pooled held-out accuracy, trace(confusion) / total. Equal to the mean of
  /// fold_accuracies whenever the folds have equal sizes.
  double mean_accuracy = 0.0;
  /// Population standard deviation of fold_accuracies.
  double std_accuracy = 0.0;
  ConfusionMatrix confusion{};  // rows = true class, cols = predicted
};

/// Stratified assignment of samples to folds: each class is shuffled with a
/// seeded stream and dealt round-robin.
std::vector<std::size_t> stratified_folds(std::span<const std::size_t> labels,
                                          std::size_t folds, std::uint64_t seed);

/// Stratified k-fold cross-validation of the 4-class probe.
/// Throws Error(stratification) when a class is missing, Error(invalid_argument)
/// when D = 0, folds < 2 or N < 4 * folds.
ProbeResult train_probe(const Matrix& features, std::span<const std::size_t> labels,
                        const ProbeOptions& options = {});

std::vector<ProbeResult> probe_sweep(const ActivationArchive& archive,
                                     std::span<const TokenRole> roles,
                                     std::span<const std::size_t> layers,
                                     const ProbeOptions& options = {});

/// CSV `layer,role,fold,accuracy`.
std::string probe_folds_to_csv(std::span<const ProbeResult> results);
/// CSV `layer,role,true,pred,count`.
std::string probe_confusion_to_csv(std::span<const ProbeResult> results);

/// Rebuilds results from the two CSV tables (mean and std recomputed).
std::vector<ProbeResult> probe_results_from_csv(const std::string& folds_csv,
                                                const std::string& confusion_csv);

}  // namespace asclens
