#include <gtest/gtest.h>

#include <cmath>

#include "asclens/eigen.hpp"
#include "asclens/error.hpp"
#include "asclens/parallel.hpp"
#include "asclens/projection.hpp"
#include "asclens/rng.hpp"
#include "support/oracle.hpp"
#include "support/support.hpp"

using namespace asclens;

namespace {

Matrix random_points(std::size_t n, std::size_t dims, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Matrix m(n, dims);
  for (double& v : m.values()) v = rng.normal() * scale;
  return m;
}

double max_distance_error(const Matrix& original, const Matrix& embedded) {
  double worst = 0.0;
  for (std::size_t i = 0; i < original.rows(); ++i) {
    for (std::size_t j = i + 1; j < original.rows(); ++j) {
      const double a = euclidean_distance(original.row(i), original.row(j));
      const double b = euclidean_distance(embedded.row(i), embedded.row(j));
      worst = std::max(worst, std::abs(a - b) / (1.0 + a));
    }
  }
  return worst;
}

Matrix equilateral_distances() {
  Matrix d(3, 3, 1.0);
  for (std::size_t i = 0; i < 3; ++i) d(i, i) = 0.0;
  return d;
}

double mean_distance(const Matrix& y, std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = a0; i < a1; ++i) {
    for (std::size_t j = b0; j < b1; ++j) {
      if (i == j) continue;
      sum += euclidean_distance(y.row(i), y.row(j));
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

Matrix two_blobs(std::size_t per_blob, std::size_t dims, double gap, std::uint64_t seed) {
  Matrix m = random_points(2 * per_blob, dims, seed);
  for (std::size_t i = per_blob; i < 2 * per_blob; ++i) m(i, 0) += gap;
  return m;
}

}  // namespace

TEST(Distances, ThreeFourFive) {
  const auto d = pairwise_distances(Matrix(2, 2, {0.0, 0.0, 3.0, 4.0}));
  EXPECT_EQ(d(0, 1), 5.0);
  EXPECT_EQ(d(1, 0), 5.0);
  EXPECT_EQ(d(0, 0), 0.0);
}

TEST(Distances, IdenticalPointsGiveZeros) {
  const auto d = pairwise_distances(Matrix(4, 3, 2.5));
  for (double v : d.values().values()) EXPECT_EQ(v, 0.0);
}

TEST(Distances, UnitTriangle) {
  const auto d = pairwise_distances(Matrix(3, 2, {0.0, 0.0, 1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0}));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) EXPECT_NEAR(d(i, j), 1.0, 1e-12);
    }
  }
}

TEST(Distances, SymmetricAndMetric) {
  const auto d = pairwise_distances(random_points(40, 6, 4));
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = 0; j < 40; ++j) {
      ASSERT_EQ(d(i, j), d(j, i));
      for (std::size_t k = 0; k < 40; ++k) ASSERT_LE(d(i, k), d(i, j) + d(j, k) + 1e-9);
    }
  }
}

TEST(Distances, MatrixValidation) {
  Matrix asym = equilateral_distances();
  asym(0, 1) = 2.0;
  EXPECT_THROW(DistanceMatrix{asym}, Error);
  Matrix diag = equilateral_distances();
  diag(2, 2) = 0.1;
  EXPECT_THROW(DistanceMatrix{diag}, Error);
  Matrix negative = equilateral_distances();
  negative(0, 1) = negative(1, 0) = -1.0;
  EXPECT_THROW(DistanceMatrix{negative}, Error);
  EXPECT_THROW(DistanceMatrix(Matrix(2, 3)), Error);
}

TEST(Eigen, JacobiReconstructsMatrix) {
  const Matrix x = random_points(6, 6, 2);
  Matrix a(6, 6);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) a(i, j) = x(i, j) + x(j, i);
  }
  const auto e = jacobi_eigen(a);
  for (std::size_t k = 1; k < 6; ++k) EXPECT_GE(e.values[k - 1], e.values[k]);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < 6; ++k) sum += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
      EXPECT_NEAR(sum, a(i, j), 1e-10);
    }
  }
}

TEST(Eigen, SubspaceIterationMatchesJacobiOnLargeMatrix) {
  const std::size_t n = 120;
  const Matrix x = random_points(n, 5, 6);
  Matrix gram(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t d = 0; d < 5; ++d) dot += x(i, d) * x(j, d);
      gram(i, j) = dot;
    }
  }
  const auto full = jacobi_eigen(gram);
  const auto top = top_eigenpairs(gram, 3);
  ASSERT_EQ(top.values.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_NEAR(top.values[k], full.values[k], 1e-8 * full.values[0]);
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += top.vectors(i, k) * full.vectors(i, k);
    EXPECT_NEAR(std::abs(dot), 1.0, 1e-8);
  }
}

TEST(Mds, ReproducesPlanarDistances) {
  const Matrix points = random_points(100, 2, 17, 3.0);
  const auto embedding = classical_mds(pairwise_distances(points));
  EXPECT_EQ(embedding.coords.rows(), 100u);
  EXPECT_EQ(embedding.coords.cols(), 2u);
  EXPECT_LE(max_distance_error(points, embedding.coords), 1e-6);
  EXPECT_EQ(embedding.method, ProjectionMethod::mds);
}

TEST(Mds, SmallInputsUseTheExactPath) {
  const Matrix points = random_points(30, 2, 1);
  EXPECT_LE(max_distance_error(points, classical_mds(pairwise_distances(points)).coords), 1e-9);
}

TEST(Mds, UnitTriangle) {
  const auto e = classical_mds(DistanceMatrix(equilateral_distances()));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      EXPECT_NEAR(euclidean_distance(e.coords.row(i), e.coords.row(j)), 1.0, 1e-6);
    }
  }
  EXPECT_NEAR(e.eigenvalues[0], 0.5, 1e-9);
  EXPECT_NEAR(e.eigenvalues[1], 0.5, 1e-9);
}

TEST(Mds, AllZeroDistancesAreDegenerate) {
  try {
    classical_mds(DistanceMatrix(Matrix(5, 5)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_embedding);
  }
}

TEST(Mds, RejectsTooManyOutputDimensions) {
  EXPECT_THROW(classical_mds(DistanceMatrix(equilateral_distances()), 3), Error);
}

TEST(Mds, SignConventionAndDeterminism) {
  const Matrix points = random_points(80, 5, 23);
  const auto a = classical_mds(pairwise_distances(points));
  const auto b = classical_mds(pairwise_distances(points));
  EXPECT_EQ(a.coords, b.coords);
  for (std::size_t c = 0; c < 2; ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < a.coords.rows(); ++r) {
      if (std::abs(a.coords(r, c)) > std::abs(a.coords(best, c))) best = r;
    }
    EXPECT_GT(a.coords(best, c), 0.0);
  }
  // Mirroring the input leaves the output unchanged.
  Matrix mirrored = points;
  for (std::size_t r = 0; r < mirrored.rows(); ++r) mirrored(r, 0) = -mirrored(r, 0);
  const auto c = classical_mds(pairwise_distances(mirrored));
  for (std::size_t i = 0; i < a.coords.values().size(); ++i) {
    EXPECT_NEAR(a.coords.values()[i], c.coords.values()[i], 1e-8);
  }
}

TEST(Tsne, PerplexityRowHitsTarget) {
  Rng rng(5);
  std::vector<double> sq(199);
  for (double& v : sq) v = std::abs(rng.normal()) * 10.0;
  for (double target : {5.0, 30.0, 100.0}) {
    std::vector<double> row(sq.size());
    const double entropy = perplexity_row(sq, target, 1e-5, 50, row);
    double sum = 0.0;
    for (double v : row) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(std::log(oracle::perplexity(row)), std::log(target), 1e-5);
    EXPECT_NEAR(entropy, std::log(target), 1e-5);
  }
}

TEST(Tsne, JointProbabilitiesAreSymmetricAndNormalised) {
  const Matrix p = joint_probabilities(random_points(50, 4, 2), 10.0);
  double total = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(p(i, i), 0.0);
    for (std::size_t j = 0; j < 50; ++j) {
      EXPECT_DOUBLE_EQ(p(i, j), p(j, i));
      total += p(i, j);
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Tsne, SeparatesDistantBlobs) {
  const Matrix points = two_blobs(100, 5, 20.0, 8);
  TsneParams params;
  params.seed = 4;
  const auto e = tsne(points, params);
  const double within = 0.5 * (mean_distance(e.coords, 0, 100, 0, 100) + mean_distance(e.coords, 100, 200, 100, 200));
  const double between = mean_distance(e.coords, 0, 100, 100, 200);
  EXPECT_LT(within, between);
  for (double v : e.coords.values()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Tsne, BitIdenticalAcrossRunsAndThreadCounts) {
  const Matrix points = two_blobs(40, 3, 5.0, 2);
  TsneParams params;
  params.perplexity = 20.0;
  params.iterations = 300;
  params.seed = 77;
  set_thread_limit(1);
  const auto a = tsne(points, params);
  set_thread_limit(8);
  const auto b = tsne(points, params);
  set_thread_limit(0);
  EXPECT_EQ(a.coords, b.coords);
  params.seed = 78;
  EXPECT_NE(tsne(points, params).coords, a.coords);
}

TEST(Tsne, KlDescendsAfterExaggeration) {
  const Matrix points = two_blobs(60, 4, 6.0, 3);
  TsneParams params;
  params.perplexity = 30.0;
  const auto e = tsne(points, params);
  double at_250 = -1.0;
  for (const auto& checkpoint : e.kl_history) {
    EXPECT_TRUE(std::isfinite(checkpoint.kl));
    if (checkpoint.iteration == 250) at_250 = checkpoint.kl;
  }
  ASSERT_GE(at_250, 0.0);
  EXPECT_EQ(e.kl_history.back().iteration, 1000u);
  EXPECT_LE(e.kl_history.back().kl, at_250);
}

TEST(Tsne, ParameterValidation) {
  const Matrix points = random_points(10, 2, 1);
  TsneParams params;
  params.perplexity = 10.0;
  EXPECT_THROW(tsne(points, params), Error);
  params.perplexity = 1.0;
  EXPECT_THROW(tsne(points, params), Error);
  params.perplexity = 2.0;
  EXPECT_THROW(tsne(random_points(3, 2, 1), params), Error);
}

TEST(Projection, EmbeddingCsvRoundTrip) {
  Embedding2D e;
  e.coords = Matrix(2, 2, {0.1234567, -2.0, 3.5, 4.25});
  const std::vector<std::int64_t> ids{7, 9};
  const std::vector<ConstructionLabel> labels{ConstructionLabel::transitive, ConstructionLabel::resultative};
  const std::string csv = embedding_to_csv(e, ids, labels);
  EXPECT_EQ(csv, "sentence_id,x,y,label\n7,0.123457,-2.000000,transitive\n9,3.500000,4.250000,resultative\n");
  const auto back = embedding_from_csv(csv);
  EXPECT_EQ(back.sentence_ids, ids);
  EXPECT_EQ(back.labels, labels);
  EXPECT_NEAR(back.coords(0, 0), 0.123457, 1e-12);
  EXPECT_THROW(embedding_to_csv(e, std::vector<std::int64_t>{1}, labels), Error);
}
