#pragma once

// Healthy-baseline modelling and first-fault-occurrence-time (FFOT)
// detection on a health-index series with 3-sigma thresholds.

#include <cstdint>
#include <optional>
#include <span>

#include "sparsehm/health_index.hpp"

namespace sparsehm::detect {

inline constexpr std::size_t kMinBaseline = 30;

struct LillieforsResult {
  double statistic = 0.0;
  double critical_value = 0.0;
  bool pass = false;
};

/// Kolmogorov-Smirnov distance between the empirical CDF and a normal CDF
/// with the sample mean and (n-1) standard deviation.
double lilliefors_statistic(std::span<const double> samples);

/// Lilliefors normality test. The critical value is the (1 - alpha)
/// quantile of the statistic over `mc_runs` seeded standard-normal samples
/// of the same size. Requires n >= 30; throws DegenerateError on zero
/// variance.
LillieforsResult lilliefors_test(std::span<const double> samples, double alpha = 0.05,
                                 int mc_runs = 10000, std::uint64_t seed = 42, int jobs = 1);

struct BaselineModel {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
  double lilliefors_statistic = 0.0;
  double lilliefors_critical = 0.0;
  bool lilliefors_pass = false;
};

struct BaselineOptions {
  double alpha = 0.05;
  int mc_runs = 10000;
  std::uint64_t seed = 42;
  int jobs = 1;
};

/// Fits mean/std over the first `k` entries of the series (gaps skipped).
BaselineModel fit_baseline(const health_index::HiSeries& series, std::size_t k,
                           const BaselineOptions& options = {});

struct FfotResult {
  std::optional<std::size_t> position;  // index into the series
  std::optional<long> file_index;       // file number at that position
  double upper = 0.0;
  double lower = 0.0;
  std::size_t exceedance_run = 0;       // consecutive exceedances required
};

/// First position that starts `run_length` consecutive points outside
/// [mean - 3 std, mean + 3 std]. Gaps break a run.
FfotResult detect_ffot(const health_index::HiSeries& series, const BaselineModel& baseline,
                       std::size_t run_length = 3);

}  // namespace sparsehm::detect
