#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "asclens/matrix.hpp"
#include "asclens/types.hpp"

namespace asclens {

/// Symmetric N x N matrix of Euclidean distances with an exact zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  /// Throws Error(non_symmetric) if the matrix is not square, not symmetric
  /// within 1e-9, has a nonzero diagonal or negative entries.
  explicit DistanceMatrix(Matrix values);

  std::size_t size() const noexcept { return values_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_(i, j); }
  const Matrix& values() const noexcept { return values_; }

 private:
  Matrix values_;
};

DistanceMatrix pairwise_distances(const Matrix& points);

enum class ProjectionMethod { mds, tsne };

std::string_view to_string(ProjectionMethod method) noexcept;

struct TsneParams {
  double perplexity = 100.0;
  std::uint64_t seed = 0;
  std::size_t iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch_iteration = 250;
  double init_scale = 1e-4;
  double perplexity_tolerance = 1e-5;
  std::size_t max_bisection_steps = 50;
};

struct KlCheckpoint {
  std::size_t iteration = 0;
  double kl = 0.0;
};

struct Embedding2D {
  Matrix coords;  // N x out_dim
  ProjectionMethod method = ProjectionMethod::mds;
  std::size_t out_dim = 2;
  TsneParams tsne;                       // only meaningful for t-SNE
  std::vector<double> eigenvalues;       // only meaningful for MDS
  std::vector<KlCheckpoint> kl_history;  // only meaningful for t-SNE
};

/// Torgerson classical MDS. Each output column is negated if needed so that
/// its largest-magnitude entry is positive (ties go to the lowest row).
/// Throws Error(invalid_argument) when out_dim > N - 1 and
/// Error(degenerate_embedding) when no retained eigenvalue is positive.
Embedding2D classical_mds(const DistanceMatrix& dist, std::size_t out_dim = 2);

/// Exact O(N^2) t-SNE with early exaggeration, momentum and per-parameter
/// gains. kl_history records KL(P||Q) every 50 iterations, at the end of
/// exaggeration and at the final iterate.
/// Throws Error(invalid_argument) unless N >= 4 and 1 < perplexity < N.
Embedding2D tsne(const Matrix& points, const TsneParams& params = {});

/// Conditional distribution P(j|i) for one row of squared distances with the
/// bandwidth found by bisection; returns the achieved Shannon entropy (nats).
/// `row` excludes the point itself.
double perplexity_row(std::span<const double> squared_distances, double perplexity,
                      double tolerance, std::size_t max_steps, std::span<double> row);

/// Symmetrized joint affinities P (N x N, zero diagonal, sums to 1).
Matrix joint_probabilities(const Matrix& points, double perplexity, double tolerance = 1e-5,
                           std::size_t max_steps = 50);

/// KL(P || Q) for a 2-D embedding under the Student-t kernel.
double kl_divergence(const Matrix& joint_p, const Matrix& embedding);

/// CSV `sentence_id,x,y,label`.
std::string embedding_to_csv(const Embedding2D& embedding,
                             std::span<const std::int64_t> sentence_ids,
                             std::span<const ConstructionLabel> labels);

struct EmbeddingRows {
  Matrix coords;
  std::vector<std::int64_t> sentence_ids;
  std::vector<ConstructionLabel> labels;
};

EmbeddingRows embedding_from_csv(const std::string& text);

}  // namespace asclens
