#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "privproj/dataset.hpp"
#include "privproj/error.hpp"
#include "privproj/rng.hpp"

using namespace privproj;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    differs |= x != c.normal();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformRangeAndMoments) {
  Rng rng(1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(Rng, NormalMoments) {
  Rng rng(2);
  double s1 = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, BelowIsInRangeAndCoversIt) {
  Rng rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_NEAR(h, 1000, 150);
}

TEST(Rng, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(derive_seed(7, k));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(derive_seed(7, 0), derive_seed(8, 0));
}

TEST(Rng, SampleWithoutReplacement) {
  Rng rng(4);
  const auto idx = sample_without_replacement(100, 30, rng);
  ASSERT_EQ(idx.size(), 30u);
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
  EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 30u);
  EXPECT_LT(idx.back(), 100u);
  Rng all(5);
  const auto full = sample_without_replacement(10, 10, all);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(full[i], i);
}

TEST(Dataset, ValidateRejectsNonFinite) {
  Matrix x(2, 2, 1.0);
  x(1, 1) = std::nan("");
  EXPECT_THROW(Dataset::from_matrix(x).validate(), Error);
  EXPECT_NO_THROW(Dataset::from_matrix(Matrix(2, 2, 1.0)).validate());
}

TEST(Dataset, DefaultFeatureNames) {
  const auto d = Dataset::from_matrix(Matrix(3, 1));
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"f0", "f1", "f2"}));
}

TEST(LabelSet, Validation) {
  EXPECT_THROW(LabelSet({0, 0}, 1), Error);
  EXPECT_THROW(LabelSet({0, 2}, 2), Error);
  EXPECT_THROW(LabelSet({0, -1}, 2), Error);
  const LabelSet l({0, 2, 2, 1}, 3);
  EXPECT_EQ(l.counts(), (std::vector<std::size_t>{1, 1, 2}));
  EXPECT_NO_THROW(l.require_all_classes(ErrorCode::EmptyClass));
  try {
    LabelSet({0, 0}, 2).require_all_classes(ErrorCode::EmptyTrainClass);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyTrainClass);
  }
}

TEST(Dataset, SelectAndMeans) {
  const auto d = Dataset::from_matrix(Matrix::from_rows({{1, 2, 3}, {4, 5, 9}}));
  const std::size_t idx[] = {2, 0};
  const auto s = select_samples(d, idx);
  EXPECT_EQ(s.x, Matrix::from_rows({{3, 1}, {9, 4}}));
  EXPECT_EQ(feature_means(d), (std::vector<double>{2.0, 6.0}));
  const auto l = select_samples(LabelSet({0, 1, 1}, 2), idx);
  EXPECT_EQ(l.labels(), (std::vector<int>{1, 0}));
}
