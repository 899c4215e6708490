#pragma once

// Isolation forest (Liu, Ting & Zhou) and consecutive-outlier stage
// segmentation of a health-index series.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sparsehm::iforest {

struct ForestConfig {
  int n_estimators = 256;
  double max_sample_fraction = 0.5;
  double max_features_fraction = 1.0;
  std::uint64_t random_state = 42;
  /// Scores above this are outliers. Unset: chosen from the baseline region
  /// by adaptive_threshold().
  std::optional<double> outlier_threshold;
  std::size_t min_consecutive_for_stage = 10;

  void validate() const;
};

struct TreeNode {
  int feature = -1;   // split feature; -1 for a leaf
  double split = 0.0; // left: value < split, right: value >= split
  int left = -1;
  int right = -1;
  std::size_t size = 0;  // training points that reached this node

  bool is_leaf() const { return left < 0; }
};

/// Nodes are stored flat; nodes[0] is the root.
struct IsolationTree {
  std::vector<TreeNode> nodes;
  int height_limit = 0;

  /// Edge count to the terminating leaf plus c(leaf size).
  double path_length(std::span<const double> point) const;
  int height() const;
};

/// Harmonic number H(k): exact sum up to k = 20, asymptotic series above.
double harmonic_number(std::size_t k);

/// Average unsuccessful-search path length in a BST of n points:
/// c(n) = 2 H(n-1) - 2 (n-1) / n, with c(1) = 0 and c(2) = 1.
double average_path_length(std::size_t n);

class IsolationForest {
 public:
  /// Grows config.n_estimators trees. Tree t draws from a generator seeded
  /// by (random_state, t), so the forest does not depend on `jobs`.
  static IsolationForest fit(const std::vector<std::vector<double>>& points,
                             const ForestConfig& config, int jobs = 1);

  /// Wraps hand-built trees; `subsample_size` fixes the normalizer c(psi).
  static IsolationForest from_trees(std::vector<IsolationTree> trees, std::size_t subsample_size,
                                    std::size_t dimensions);

  double mean_path_length(std::span<const double> point) const;
  /// s = 2^(-E[h(x)] / c(psi)), in (0, 1).
  double score(std::span<const double> point) const;
  std::vector<double> score_all(const std::vector<std::vector<double>>& points, int jobs = 1) const;

  const std::vector<IsolationTree>& trees() const { return trees_; }
  std::size_t subsample_size() const { return subsample_size_; }
  std::size_t dimensions() const { return dimensions_; }

 private:
  std::vector<IsolationTree> trees_;
  std::size_t subsample_size_ = 0;
  std::size_t dimensions_ = 0;
};

struct StageReport {
  std::vector<double> scores;
  std::vector<bool> outlier_flags;
  std::vector<std::size_t> stage_boundaries;  // positions into scores
  std::size_t n_stages = 1;
  double threshold = 0.0;
};

/// Flags score > threshold; every maximal run of at least `min_consecutive`
/// flags opens a new stage at its first position. NaN scores are never
/// flagged.
StageReport segment_stages(const std::vector<double>& scores, double threshold,
                           std::size_t min_consecutive);

/// Score quantile leaving `outlier_fraction` of the baseline scores above it.
double adaptive_threshold(std::span<const double> baseline_scores, double outlier_fraction = 0.01);

inline constexpr std::size_t kFeatureWindow = 25;

/// Per point: value, trailing-window mean, trailing-window std over the last
/// `width` points including the current one.
std::vector<std::vector<double>> windowed_features(std::span<const double> series,
                                                   std::size_t width = kFeatureWindow);

/// One feature per point: the value itself.
std::vector<std::vector<double>> raw_features(std::span<const double> series);

}  // namespace sparsehm::iforest
