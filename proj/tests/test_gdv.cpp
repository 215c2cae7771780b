#include <gtest/gtest.h>

#include <cmath>

#include "asclens/error.hpp"
#include "asclens/fixtures.hpp"
#include "asclens/gdv.hpp"
#include "asclens/rng.hpp"
#include "support/oracle.hpp"
#include "support/support.hpp"

using namespace asclens;

namespace {

LabeledPointCloud cloud_1d(std::vector<double> xs, std::vector<int> labels) {
  const std::size_t n = xs.size();
  Matrix m(n, 1, std::move(xs));
  return {std::move(m), std::move(labels)};
}

oracle::Points to_points(const Matrix& m) {
  oracle::Points p(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) p[r].assign(m.row(r).begin(), m.row(r).end());
  return p;
}

LabeledPointCloud random_cloud(std::size_t n, std::size_t dims, int classes, std::uint64_t seed) {
  Rng rng(seed);
  LabeledPointCloud cloud{Matrix(n, dims), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    cloud.labels[i] = static_cast<int>(i % static_cast<std::size_t>(classes));
    for (std::size_t d = 0; d < dims; ++d) {
      cloud.points(i, d) = rng.normal() * (1.0 + d) + 0.7 * cloud.labels[i] * (d % 3 == 0);
    }
  }
  return cloud;
}

}  // namespace

TEST(Gdv, RescaleHandValues) {
  const Matrix s = rescale(Matrix(4, 1, {0.0, 1.0, 4.0, 5.0}));
  EXPECT_NEAR(s(0, 0), -0.6063, 1e-3);
  EXPECT_NEAR(s(1, 0), -0.3638, 1e-3);
  EXPECT_NEAR(s(2, 0), 0.3638, 1e-3);
  EXPECT_NEAR(s(3, 0), 0.6063, 1e-3);
}

TEST(Gdv, RescaleZeroVarianceMapsToZero) {
  const Matrix s = rescale(Matrix(3, 1, {3.0, 3.0, 3.0}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(s(i, 0), 0.0);
}

TEST(Gdv, RescaleFixedPoint) {
  // Column with mean 0 and standard deviation 1/2 is left unchanged.
  const Matrix x(4, 1, {-0.5, 0.5, -0.5, 0.5});
  const Matrix s = rescale(x);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(s(i, 0), x(i, 0), 1e-15);
}

TEST(Gdv, RescaledColumnsHaveHalfUnitSpread) {
  const auto cloud = random_cloud(300, 5, 3, 1);
  const Matrix s = rescale(cloud.points);
  for (std::size_t d = 0; d < 5; ++d) {
    double mean = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < s.rows(); ++i) mean += s(i, d);
    mean /= s.rows();
    for (std::size_t i = 0; i < s.rows(); ++i) sq += (s(i, d) - mean) * (s(i, d) - mean);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(std::sqrt(sq / s.rows()), 0.5, 1e-12);
  }
}

TEST(Gdv, HandValuesForTwoPairCloud) {
  const auto cloud = cloud_1d({0.0, 1.0, 4.0, 5.0}, {0, 0, 1, 1});
  const LabeledPointCloud scaled{rescale(cloud.points), cloud.labels};
  const auto intra = mean_intra(scaled);
  ASSERT_EQ(intra.size(), 2u);
  EXPECT_NEAR(intra[0], 0.2425, 1e-3);
  EXPECT_NEAR(intra[1], 0.2425, 1e-3);
  const Matrix inter = mean_inter(scaled);
  EXPECT_NEAR(inter(0, 1), 0.9701, 1e-3);
  EXPECT_DOUBLE_EQ(inter(0, 1), inter(1, 0));
  EXPECT_NEAR(gdv(cloud), -0.7276, 1e-3);
  EXPECT_NEAR(gdv(cloud), oracle::gdv({{0.0}, {1.0}, {4.0}, {5.0}}, {0, 0, 1, 1}), 1e-12);
}

TEST(Gdv, IntraOfCollinearTriple) {
  // Equal spacing t after rescaling, so the pairs are {t, t, 2t}.
  const auto cloud = cloud_1d({0.0, 1.0, 2.0, 10.0, 10.0, 10.0}, {0, 0, 0, 1, 1, 1});
  const LabeledPointCloud scaled{rescale(cloud.points), cloud.labels};
  const double t = scaled.points(1, 0) - scaled.points(0, 0);
  const auto intra = mean_intra(scaled);
  EXPECT_NEAR(intra[0], 4.0 * t / 3.0, 1e-12);
  EXPECT_EQ(intra[1], 0.0);
}

TEST(Gdv, AgreesWithOracleOnRandomClouds) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto cloud = random_cloud(40 + seed * 7, 1 + seed % 6, 2 + static_cast<int>(seed % 3), seed);
    EXPECT_NEAR(gdv(cloud), oracle::gdv(to_points(cloud.points), cloud.labels), 1e-12) << "seed " << seed;
  }
}

TEST(Gdv, NullOverlapIsNearZero) {
  Rng rng(123);
  LabeledPointCloud cloud{Matrix(1000, 10), std::vector<int>(1000)};
  for (std::size_t i = 0; i < 1000; ++i) {
    cloud.labels[i] = i < 500 ? 0 : 1;
    for (std::size_t d = 0; d < 10; ++d) cloud.points(i, d) = rng.normal();
  }
  EXPECT_LT(std::abs(gdv(cloud)), 0.05);
}

TEST(Gdv, InvariantUnderAffineMaps) {
  const auto cloud = random_cloud(120, 4, 4, 5);
  const double base = gdv(cloud);
  auto moved = cloud;
  for (double& v : moved.points.values()) v = 10.0 * v + 7.0;
  EXPECT_NEAR(gdv(moved), base, 1e-9);
  auto per_dim = cloud;
  for (std::size_t i = 0; i < per_dim.points.rows(); ++i) {
    for (std::size_t d = 0; d < 4; ++d) per_dim.points(i, d) = -(d + 2.0) * per_dim.points(i, d) + d;
  }
  EXPECT_NEAR(gdv(per_dim), base, 1e-9);
}

TEST(Gdv, InvariantUnderDimensionAndLabelPermutation) {
  const auto cloud = random_cloud(90, 5, 3, 8);
  const double base = gdv(cloud);
  auto permuted = cloud;
  const std::size_t order[5] = {3, 0, 4, 1, 2};
  for (std::size_t i = 0; i < cloud.points.rows(); ++i) {
    for (std::size_t d = 0; d < 5; ++d) permuted.points(i, d) = cloud.points(i, order[d]);
  }
  EXPECT_NEAR(gdv(permuted), base, 1e-12);
  auto renamed = cloud;
  for (int& l : renamed.labels) l = (l + 1) % 3 + 10;
  EXPECT_NEAR(gdv(renamed), base, 1e-12);
}

TEST(Gdv, MonotoneInSeparation) {
  double previous = 1.0;
  for (double gap : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    std::vector<double> xs;
    std::vector<int> labels;
    for (int i = 0; i < 20; ++i) {
      xs.push_back(0.1 * i);
      labels.push_back(0);
      xs.push_back(0.1 * i + gap);
      labels.push_back(1);
    }
    const double value = gdv(cloud_1d(xs, labels));
    EXPECT_LE(value, previous + 1e-12) << "gap " << gap;
    previous = value;
  }
}

TEST(Gdv, RejectsDegenerateClouds) {
  EXPECT_THROW(gdv(cloud_1d({0.0, 1.0, 2.0}, {0, 0, 1})), Error);
  EXPECT_THROW(gdv(cloud_1d({0.0, 1.0}, {0, 0})), Error);
  EXPECT_THROW(gdv(cloud_1d({0.0, 1.0}, {0})), Error);
}

TEST(Gdv, SweepOnMonotoneFixtureDecreases) {
  FixtureSpec spec;
  spec.sentences_per_class = 60;
  // No pure-noise dimensions, so wide separation can push GDV well below zero.
  spec.hidden_size = 3;
  spec.n_layers = 5;
  spec.seed = 3;
  spec.separation[TokenRole::CLS] = {0.0, 2.0, 4.0, 8.0, 16.0, 32.0};
  const auto archive = synth_archive(spec);
  const std::vector<TokenRole> roles{TokenRole::CLS};
  const std::vector<std::size_t> layers{0, 1, 2, 3, 4, 5};
  const auto table = gdv_sweep(archive, roles, layers);
  for (std::size_t l = 1; l <= 5; ++l) {
    EXPECT_LT(table.entries.at({l, TokenRole::CLS}), table.entries.at({l - 1, TokenRole::CLS}) - 1e-6);
  }
  EXPECT_LE(table.entries.at({5, TokenRole::CLS}), -0.5);
}

TEST(Gdv, SweepOfConstantActivationsIsZero) {
  const auto noisy = synth_archive(testing_support::small_fixture());
  auto hidden = noisy.hidden();
  for (auto& tensor : hidden) {
    for (float& v : tensor) {
      if (v != 0.0f) v = 1.5f;
    }
  }
  const ActivationArchive archive(noisy.manifest(), hidden, noisy.attention());
  const std::vector<TokenRole> roles{TokenRole::CLS, TokenRole::OBJ};
  const std::vector<std::size_t> layers{0, 2};
  const auto table = gdv_sweep(archive, roles, layers);
  for (const auto& [key, value] : table.entries) EXPECT_EQ(value, 0.0);
}

TEST(Gdv, SweepMatchesSlicedOracleAndCsvOrder) {
  const auto archive = synth_archive(testing_support::small_fixture());
  const std::vector<TokenRole> roles{TokenRole::OBJ, TokenRole::CLS};
  const std::vector<std::size_t> layers{1, 0};
  const auto table = gdv_sweep(archive, roles, layers);
  ASSERT_EQ(table.entries.size(), 4u);
  const auto slice = slice_role(archive, TokenRole::OBJ, 1);
  std::vector<int> labels;
  for (auto l : slice.labels) labels.push_back(static_cast<int>(l));
  EXPECT_NEAR(table.entries.at({1, TokenRole::OBJ}), oracle::gdv(to_points(slice.features), labels), 1e-12);

  const std::string csv = gdv_table_to_csv(table);
  EXPECT_EQ(csv.substr(0, 15), "layer,role,gdv\n");
  const auto first = csv.find("0,CLS,");
  const auto second = csv.find("0,OBJ,");
  const auto third = csv.find("1,CLS,");
  EXPECT_LT(first, second);
  EXPECT_LT(second, third);
  const auto back = gdv_table_from_csv(csv);
  for (const auto& [key, value] : table.entries) EXPECT_NEAR(back.entries.at(key), value, 5e-7);
}
