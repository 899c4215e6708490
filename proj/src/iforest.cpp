#include "sparsehm/iforest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sparsehm/errors.hpp"
#include "sparsehm/parallel.hpp"
#include "sparsehm/random.hpp"

namespace sparsehm::iforest {
namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209;

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& points, std::vector<std::size_t> features,
              int height_limit, Rng& rng)
      : points_(points), features_(std::move(features)), rng_(rng) {
    tree_.height_limit = height_limit;
  }

  IsolationTree build(std::vector<std::size_t> sample) {
    grow(std::move(sample), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> idx, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[id].size = idx.size();
    if (idx.size() <= 1 || depth >= tree_.height_limit) return id;

    struct Candidate {
      std::size_t feature;
      double lo;
      double hi;
    };
    std::vector<Candidate> candidates;
    for (std::size_t f : features_) {
      double lo = points_[idx[0]][f];
      double hi = lo;
      for (std::size_t i : idx) {
        lo = std::min(lo, points_[i][f]);
        hi = std::max(hi, points_[i][f]);
      }
      if (lo < hi) candidates.push_back({f, lo, hi});
    }
    if (candidates.empty()) return id;

    const auto& c = candidates[rng_.below(candidates.size())];
    // (lo, hi] keeps both children non-empty.
    double split = c.lo + (1.0 - rng_.uniform()) * (c.hi - c.lo);
    if (!(split > c.lo)) split = c.hi;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i : idx) (points_[i][c.feature] < split ? left : right).push_back(i);

    tree_.nodes[id].feature = static_cast<int>(c.feature);
    tree_.nodes[id].split = split;
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  const std::vector<std::vector<double>>& points_;
  std::vector<std::size_t> features_;
  Rng& rng_;
  IsolationTree tree_;
};

// First k entries of a seeded partial Fisher-Yates shuffle of [0, n).
std::vector<std::size_t> draw_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + rng.below(n - i)]);
  all.resize(k);
  return all;
}

}  // namespace

void ForestConfig::validate() const {
  if (n_estimators < 1) throw ParameterError("n_estimators must be >= 1");
  if (!(max_sample_fraction > 0.0 && max_sample_fraction <= 1.0)) {
    throw ParameterError("max_sample_fraction must lie in (0, 1]");
  }
  if (!(max_features_fraction > 0.0 && max_features_fraction <= 1.0)) {
    throw ParameterError("max_features_fraction must lie in (0, 1]");
  }
  if (min_consecutive_for_stage < 1) throw ParameterError("min_consecutive_for_stage must be >= 1");
}

double IsolationTree::path_length(std::span<const double> point) const {
  int node = 0;
  int depth = 0;
  while (!nodes[node].is_leaf()) {
    const auto& n = nodes[node];
    node = point[static_cast<std::size_t>(n.feature)] < n.split ? n.left : n.right;
    ++depth;
  }
  return depth + average_path_length(nodes[node].size);
}

int IsolationTree::height() const {
  std::vector<int> depth(nodes.size(), 0);
  int h = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    h = std::max(h, depth[i]);
    if (!nodes[i].is_leaf()) {
      depth[nodes[i].left] = depth[i] + 1;
      depth[nodes[i].right] = depth[i] + 1;
    }
  }
  return h;
}

double harmonic_number(std::size_t k) {
  if (k <= 20) {
    double h = 0.0;
    for (std::size_t i = k; i >= 1; --i) h += 1.0 / static_cast<double>(i);
    return h;
  }
  const double x = static_cast<double>(k);
  const double x2 = x * x;
  return std::log(x) + kEulerGamma + 1.0 / (2.0 * x) - 1.0 / (12.0 * x2) +
         1.0 / (120.0 * x2 * x2) - 1.0 / (252.0 * x2 * x2 * x2);
}

double average_path_length(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  const double m = static_cast<double>(n);
  return 2.0 * harmonic_number(n - 1) - 2.0 * (m - 1.0) / m;
}

IsolationForest IsolationForest::fit(const std::vector<std::vector<double>>& points,
                                     const ForestConfig& config, int jobs) {
  config.validate();
  if (points.size() < 2) throw ParameterError("isolation forest needs at least two points");
  const std::size_t dims = points[0].size();
  if (dims == 0) throw ParameterError("points need at least one feature");
  for (const auto& p : points) {
    if (p.size() != dims) throw ParameterError("points have inconsistent dimensions");
    for (double v : p) {
      if (!std::isfinite(v)) throw ParameterError("features must be finite");
    }
  }

  const std::size_t n = points.size();
  // At least two points per tree so that c(psi) > 0.
  const std::size_t psi = std::min(
      n, std::max<std::size_t>(
             2, static_cast<std::size_t>(std::ceil(config.max_sample_fraction * static_cast<double>(n)))));
  const std::size_t n_features = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(config.max_features_fraction * static_cast<double>(dims))));
  const int height_limit = static_cast<int>(std::ceil(std::log2(static_cast<double>(psi))));

  IsolationForest forest;
  forest.subsample_size_ = psi;
  forest.dimensions_ = dims;
  forest.trees_.resize(static_cast<std::size_t>(config.n_estimators));
  parallel_for(forest.trees_.size(), jobs, [&](std::size_t t) {
    Rng rng(mix_seed(config.random_state, t));
    auto features = draw_without_replacement(dims, n_features, rng);
    std::sort(features.begin(), features.end());
    auto sample = draw_without_replacement(n, psi, rng);
    forest.trees_[t] = TreeBuilder(points, std::move(features), height_limit, rng).build(std::move(sample));
  });
  return forest;
}

IsolationForest IsolationForest::from_trees(std::vector<IsolationTree> trees,
                                            std::size_t subsample_size, std::size_t dimensions) {
  if (trees.empty()) throw ParameterError("forest needs at least one tree");
  if (subsample_size < 2) throw ParameterError("subsample size must be >= 2");
  IsolationForest f;
  f.trees_ = std::move(trees);
  f.subsample_size_ = subsample_size;
  f.dimensions_ = dimensions;
  return f;
}

double IsolationForest::mean_path_length(std::span<const double> point) const {
  if (point.size() != dimensions_) throw ParameterError("point dimension does not match the forest");
  double total = 0.0;
  for (const auto& t : trees_) total += t.path_length(point);
  return total / static_cast<double>(trees_.size());
}

double IsolationForest::score(std::span<const double> point) const {
  return std::exp2(-mean_path_length(point) / average_path_length(subsample_size_));
}

std::vector<double> IsolationForest::score_all(const std::vector<std::vector<double>>& points,
                                               int jobs) const {
  std::vector<double> out(points.size());
  parallel_for(points.size(), jobs, [&](std::size_t i) { out[i] = score(points[i]); });
  return out;
}

StageReport segment_stages(const std::vector<double>& scores, double threshold,
                           std::size_t min_consecutive) {
  if (min_consecutive < 1) throw ParameterError("min_consecutive must be >= 1");
  StageReport r;
  r.scores = scores;
  r.threshold = threshold;
  r.outlier_flags.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) r.outlier_flags[i] = scores[i] > threshold;

  std::size_t i = 0;
  while (i < scores.size()) {
    if (!r.outlier_flags[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < scores.size() && r.outlier_flags[j]) ++j;
    if (j - i >= min_consecutive) r.stage_boundaries.push_back(i);
    i = j;
  }
  r.n_stages = r.stage_boundaries.size() + 1;
  return r;
}

double adaptive_threshold(std::span<const double> baseline_scores, double outlier_fraction) {
  if (baseline_scores.empty()) throw ParameterError("adaptive threshold needs baseline scores");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    throw ParameterError("outlier fraction must lie in [0, 1)");
  }
  std::vector<double> s(baseline_scores.begin(), baseline_scores.end());
  std::sort(s.begin(), s.end());
  const auto keep = static_cast<std::size_t>(
      std::ceil((1.0 - outlier_fraction) * static_cast<double>(s.size())));
  return s[std::clamp<std::size_t>(keep, 1, s.size()) - 1];
}

std::vector<std::vector<double>> windowed_features(std::span<const double> series, std::size_t width) {
  if (width < 1) throw ParameterError("feature window must be >= 1");
  std::vector<std::vector<double>> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t begin = i + 1 >= width ? i + 1 - width : 0;
    const double n = static_cast<double>(i + 1 - begin);
    double mean = 0.0;
    for (std::size_t k = begin; k <= i; ++k) mean += series[k];
    mean /= n;
    double ss = 0.0;
    for (std::size_t k = begin; k <= i; ++k) ss += (series[k] - mean) * (series[k] - mean);
    out[i] = {series[i], mean, std::sqrt(ss / n)};
  }
  return out;
}

std::vector<std::vector<double>> raw_features(std::span<const double> series) {
  std::vector<std::vector<double>> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = {series[i]};
  return out;
}

}  // namespace sparsehm::iforest
