#include "sparsehm/detect.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sparsehm/errors.hpp"
#include "sparsehm/parallel.hpp"
#include "sparsehm/random.hpp"

namespace sparsehm::detect {
namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments sample_moments(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

// Rounding in the mean leaves a tiny nonzero spread on constant input.
bool zero_variance(std::span<const double> x, const Moments& m) {
  return !(m.std > 0.0) || std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

}  // namespace

double lilliefors_statistic(std::span<const double> samples) {
  if (samples.size() < 2) throw ParameterError("Lilliefors statistic needs at least two samples");
  const auto m = sample_moments(samples);
  if (zero_variance(samples, m)) throw DegenerateError("baseline has zero variance");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf((sorted[i] - m.mean) / m.std);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return d;
}

LillieforsResult lilliefors_test(std::span<const double> samples, double alpha, int mc_runs,
                                 std::uint64_t seed, int jobs) {
  if (samples.size() < kMinBaseline) {
    throw ParameterError("Lilliefors test needs at least 30 samples");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (mc_runs < 1) throw ParameterError("mc_runs must be >= 1");

  LillieforsResult r;
  r.statistic = lilliefors_statistic(samples);

  const std::size_t n = samples.size();
  std::vector<double> null_stats(static_cast<std::size_t>(mc_runs));
  parallel_for(null_stats.size(), jobs, [&](std::size_t run) {
    Rng rng(mix_seed(seed, run));
    std::vector<double> draw(n);
    for (double& v : draw) v = rng.normal();
    null_stats[run] = lilliefors_statistic(draw);
  });
  std::sort(null_stats.begin(), null_stats.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil((1.0 - alpha) * static_cast<double>(null_stats.size())));
  r.critical_value = null_stats[std::clamp<std::size_t>(rank, 1, null_stats.size()) - 1];
  r.pass = r.statistic < r.critical_value;
  return r;
}

BaselineModel fit_baseline(const health_index::HiSeries& series, std::size_t k,
                           const BaselineOptions& options) {
  if (k < kMinBaseline) throw ParameterError("baseline needs at least 30 files");
  if (k > series.size()) throw ParameterError("baseline range exceeds the series length");
  std::vector<double> values;
  for (std::size_t i = 0; i < k; ++i) {
    if (!series.is_gap(i)) values.push_back(series.value[i]);
  }
  if (values.size() < kMinBaseline) {
    throw DegenerateError("baseline range holds fewer than 30 valid values");
  }
  const auto m = sample_moments(values);
  if (zero_variance(values, m)) throw DegenerateError("baseline has zero variance");

  BaselineModel b;
  b.mean = m.mean;
  b.std = m.std;
  b.n = values.size();
  const auto lf = lilliefors_test(values, options.alpha, options.mc_runs, options.seed, options.jobs);
  b.lilliefors_statistic = lf.statistic;
  b.lilliefors_critical = lf.critical_value;
  b.lilliefors_pass = lf.pass;
  return b;
}

FfotResult detect_ffot(const health_index::HiSeries& series, const BaselineModel& baseline,
                       std::size_t run_length) {
  if (!(baseline.std > 0.0)) throw ParameterError("baseline std must be positive");
  if (run_length < 1) throw ParameterError("run_length must be >= 1");
  FfotResult r;
  r.upper = baseline.mean + 3.0 * baseline.std;
  r.lower = baseline.mean - 3.0 * baseline.std;
  r.exceedance_run = run_length;
  std::size_t run = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const bool outside =
        !series.is_gap(i) && (series.value[i] > r.upper || series.value[i] < r.lower);
    run = outside ? run + 1 : 0;
    if (run == run_length) {
      const std::size_t start = i + 1 - run_length;
      r.position = start;
      r.file_index = series.file_index[start];
      break;
    }
  }
  return r;
}

}  // namespace sparsehm::detect
