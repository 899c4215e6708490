#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sparsehm/errors.hpp"
#include "sparsehm/iforest.hpp"
#include "sparsehm/random.hpp"

namespace fo = sparsehm::iforest;
using sparsehm::Rng;
using Points = std::vector<std::vector<double>>;

namespace {

// Independent reference: recursive traversal and the plain harmonic sum,
// accumulated smallest term first so results compare bit for bit.
double exact_c(std::size_t n) {
  if (n <= 1) return 0.0;
  double h = 0.0;
  for (std::size_t k = n - 1; k >= 1; --k) h += 1.0 / static_cast<double>(k);
  return 2.0 * h - 2.0 * static_cast<double>(n - 1) / static_cast<double>(n);
}

double oracle_path(const fo::IsolationTree& t, int node, const std::vector<double>& p, int depth) {
  const auto& nd = t.nodes[static_cast<std::size_t>(node)];
  if (nd.left < 0) return depth + exact_c(nd.size);
  const int next = p[static_cast<std::size_t>(nd.feature)] < nd.split ? nd.left : nd.right;
  return oracle_path(t, next, p, depth + 1);
}

double oracle_score(const fo::IsolationForest& f, const std::vector<double>& p) {
  double sum = 0.0;
  for (const auto& t : f.trees()) sum += oracle_path(t, 0, p, 0);
  const double mean = sum / static_cast<double>(f.trees().size());
  return std::exp2(-mean / exact_c(f.subsample_size()));
}

fo::TreeNode leaf(std::size_t size) {
  fo::TreeNode n;
  n.size = size;
  return n;
}

fo::TreeNode split(int feature, double value, int left, int right, std::size_t size) {
  fo::TreeNode n;
  n.feature = feature;
  n.split = value;
  n.left = left;
  n.right = right;
  n.size = size;
  return n;
}

Points blob_with_outlier(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  Points pts(n);
  for (auto& p : pts) p = {rng.normal(), rng.normal()};
  pts.push_back({12.0, -12.0});
  return pts;
}

}  // namespace

TEST(PathLength, HarmonicAndAverage) {
  double h = 0.0;
  for (int k = 1; k <= 20; ++k) h += 1.0 / k;
  EXPECT_NEAR(fo::harmonic_number(20), h, 1e-9);
  for (std::size_t k = 21; k < 200; ++k) {
    double e = 0.0;
    for (std::size_t j = 1; j <= k; ++j) e += 1.0 / static_cast<double>(j);
    EXPECT_NEAR(fo::harmonic_number(k), e, 1e-12) << k;
  }
  EXPECT_EQ(fo::average_path_length(1), 0.0);
  EXPECT_EQ(fo::average_path_length(2), 1.0);
  EXPECT_NEAR(fo::average_path_length(3), 5.0 / 3.0, 1e-15);
  EXPECT_NEAR(fo::average_path_length(256), exact_c(256), 1e-12);
}

TEST(Score, HandBuiltThreePointTree) {
  // Points 0, 1, 10: the root splits at 5, the left child at 0.5.
  fo::IsolationTree t;
  t.height_limit = 2;
  t.nodes = {split(0, 5.0, 1, 2, 3), split(0, 0.5, 3, 4, 2), leaf(1), leaf(1), leaf(1)};
  const auto f = fo::IsolationForest::from_trees({t}, 3, 1);
  const double c3 = 5.0 / 3.0;
  EXPECT_EQ(t.path_length(std::vector<double>{10.0}), 1.0);
  EXPECT_EQ(t.path_length(std::vector<double>{0.0}), 2.0);
  EXPECT_EQ(t.height(), 2);
  EXPECT_DOUBLE_EQ(f.score(std::vector<double>{10.0}), std::pow(2.0, -1.0 / c3));
  EXPECT_DOUBLE_EQ(f.score(std::vector<double>{1.0}), std::pow(2.0, -2.0 / c3));
  EXPECT_THROW(f.score(std::vector<double>{1.0, 2.0}), sparsehm::ParameterError);
}

TEST(Score, LeafSizeAdjustment) {
  // An unsplit leaf holding two points adds c(2) = 1.
  fo::IsolationTree t;
  t.height_limit = 1;
  t.nodes = {split(0, 5.0, 1, 2, 3), leaf(2), leaf(1)};
  EXPECT_EQ(t.path_length(std::vector<double>{0.0}), 2.0);
  EXPECT_EQ(t.path_length(std::vector<double>{9.0}), 1.0);
}

TEST(Score, MatchesBruteForceOnSmallFixtures) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.below(7);
    const std::size_t d = 1 + rng.below(3);
    Points pts(n, std::vector<double>(d));
    for (auto& p : pts) {
      for (double& v : p) v = rng.uniform(-5, 5);
    }
    fo::ForestConfig cfg;
    cfg.n_estimators = 1 + static_cast<int>(rng.below(4));
    cfg.max_sample_fraction = 1.0;
    cfg.random_state = seed;
    const auto f = fo::IsolationForest::fit(pts, cfg);
    for (const auto& p : pts) EXPECT_EQ(f.score(p), oracle_score(f, p)) << "seed=" << seed;
    std::vector<double> probe(d, 0.25);
    EXPECT_EQ(f.score(probe), oracle_score(f, probe));
  }
}

TEST(Fit, TreeInvariants) {
  const auto pts = blob_with_outlier(3, 300);
  fo::ForestConfig cfg;
  cfg.n_estimators = 64;
  const auto f = fo::IsolationForest::fit(pts, cfg);
  EXPECT_EQ(f.subsample_size(), static_cast<std::size_t>(std::ceil(0.5 * 301)));
  const int limit = static_cast<int>(std::ceil(std::log2(static_cast<double>(f.subsample_size()))));
  for (const auto& t : f.trees()) {
    EXPECT_EQ(t.height_limit, limit);
    EXPECT_LE(t.height(), limit);
    EXPECT_EQ(t.nodes[0].size, f.subsample_size());
    for (const auto& nd : t.nodes) {
      EXPECT_GE(nd.size, 1u);
      if (!nd.is_leaf()) {
        const auto& l = t.nodes[static_cast<std::size_t>(nd.left)];
        const auto& r = t.nodes[static_cast<std::size_t>(nd.right)];
        EXPECT_EQ(l.size + r.size, nd.size);
      }
    }
  }
}

TEST(Fit, PlantedOutlierHasTopScore) {
  const auto pts = blob_with_outlier(4, 200);
  const auto f = fo::IsolationForest::fit(pts, {});
  const auto s = f.score_all(pts);
  const double outlier = s.back();
  for (std::size_t i = 0; i + 1 < s.size(); ++i) EXPECT_LT(s[i], outlier);
  EXPECT_GT(outlier, 0.6);
  EXPECT_LT(f.score(std::vector<double>{0.0, 0.0}), 0.5);
  EXPECT_EQ(outlier, oracle_score(f, pts.back()));
}

TEST(Fit, IdenticalPointsScoreOneHalf) {
  const Points pts(100, std::vector<double>{3.0, 3.0});
  const auto f = fo::IsolationForest::fit(pts, {});
  for (double s : f.score_all(pts)) EXPECT_NEAR(s, 0.5, 0.05);
}

TEST(Fit, ConfigValidation) {
  const Points pts = {{1.0}, {2.0}, {3.0}};
  fo::ForestConfig c;
  c.max_sample_fraction = 0.0;
  EXPECT_THROW(fo::IsolationForest::fit(pts, c), sparsehm::ParameterError);
  c = {};
  c.max_features_fraction = 1.5;
  EXPECT_THROW(fo::IsolationForest::fit(pts, c), sparsehm::ParameterError);
  c = {};
  c.n_estimators = 0;
  EXPECT_THROW(fo::IsolationForest::fit(pts, c), sparsehm::ParameterError);
  EXPECT_THROW(fo::IsolationForest::fit({{1.0}}, {}), sparsehm::ParameterError);
}

TEST(Fit, SeedDeterminismAcrossJobs) {
  const auto pts = blob_with_outlier(5, 150);
  const auto a = fo::IsolationForest::fit(pts, {}, 1);
  const auto b = fo::IsolationForest::fit(pts, {}, 4);
  ASSERT_EQ(a.trees().size(), b.trees().size());
  for (std::size_t t = 0; t < a.trees().size(); ++t) {
    const auto& x = a.trees()[t].nodes;
    const auto& y = b.trees()[t].nodes;
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      EXPECT_EQ(x[k].feature, y[k].feature);
      EXPECT_EQ(x[k].split, y[k].split);
      EXPECT_EQ(x[k].left, y[k].left);
      EXPECT_EQ(x[k].size, y[k].size);
    }
  }
  EXPECT_EQ(a.score_all(pts, 1), b.score_all(pts, 3));
  fo::ForestConfig other;
  other.random_state = 43;
  EXPECT_NE(fo::IsolationForest::fit(pts, other).score_all(pts), a.score_all(pts));
}

TEST(ScoreProperty, BoundsAndMonotoneInPathLength) {
  const auto pts = blob_with_outlier(6, 100);
  const auto f = fo::IsolationForest::fit(pts, {});
  Rng rng(7);
  std::vector<std::pair<double, double>> hs;
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> p = {rng.uniform(-15, 15), rng.uniform(-15, 15)};
    const double s = f.score(p);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
    hs.emplace_back(f.mean_path_length(p), s);
  }
  std::sort(hs.begin(), hs.end());
  for (std::size_t i = 1; i < hs.size(); ++i) {
    if (hs[i].first > hs[i - 1].first) EXPECT_LT(hs[i].second, hs[i - 1].second);
  }
}

TEST(Stages, NoFlagsOneStage) {
  const auto r = fo::segment_stages(std::vector<double>(50, 0.3), 0.6, 10);
  EXPECT_EQ(r.n_stages, 1u);
  EXPECT_TRUE(r.stage_boundaries.empty());
}

TEST(Stages, TwoPlantedRuns) {
  std::vector<double> s(100, 0.4);
  for (std::size_t i = 30; i < 42; ++i) s[i] = 0.8;
  for (std::size_t i = 70; i < 82; ++i) s[i] = 0.8;
  s[10] = 0.9;  // isolated flag: no boundary
  s[50] = NAN;
  const auto r = fo::segment_stages(s, 0.6, 10);
  EXPECT_EQ(r.n_stages, 3u);
  EXPECT_EQ(r.stage_boundaries, (std::vector<std::size_t>{30, 70}));
  EXPECT_TRUE(r.outlier_flags[10]);
  EXPECT_FALSE(r.outlier_flags[50]);
  for (std::size_t i = 1; i < r.stage_boundaries.size(); ++i) {
    EXPECT_GT(r.stage_boundaries[i], r.stage_boundaries[i - 1]);
  }
}

TEST(Stages, AdaptiveThreshold) {
  std::vector<double> s(200);
  for (std::size_t i = 0; i < 200; ++i) s[i] = static_cast<double>(i) / 200.0;
  const double t = fo::adaptive_threshold(s, 0.01);
  const auto above = std::count_if(s.begin(), s.end(), [&](double v) { return v > t; });
  EXPECT_EQ(above, 2);
  EXPECT_THROW(fo::adaptive_threshold(std::vector<double>{}), sparsehm::ParameterError);
}

TEST(Features, TrailingWindow) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const auto f = fo::windowed_features(x, 3);
  ASSERT_EQ(f.size(), 5u);
  EXPECT_EQ(f[0], (std::vector<double>{1, 1, 0}));
  EXPECT_DOUBLE_EQ(f[1][1], 1.5);
  EXPECT_DOUBLE_EQ(f[4][1], 4.0);
  EXPECT_DOUBLE_EQ(f[4][2], std::sqrt(2.0 / 3.0));
  EXPECT_EQ(fo::raw_features(x)[2], (std::vector<double>{3}));
}
