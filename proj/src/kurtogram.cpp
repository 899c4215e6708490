#include "sparsehm/kurtogram.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "sparsehm/errors.hpp"
#include "sparsehm/parallel.hpp"
#include "sparsehm/sparsity.hpp"

namespace sparsehm::kurtogram {
namespace {

bool better(const KurtogramCell& a, const KurtogramCell& b) {
  if (a.sk_value != b.sk_value) return a.sk_value > b.sk_value;
  if (a.bandwidth != b.bandwidth) return a.bandwidth > b.bandwidth;
  return a.center < b.center;
}

bool is_local_max(const std::vector<double>& a, std::size_t k) {
  const bool left = k == 0 || a[k] >= a[k - 1];
  const bool right = k + 1 == a.size() || a[k] > a[k + 1];
  return left && right;
}

}  // namespace

std::size_t edge_guard(int level) { return std::size_t{1} << (level + 4); }

Kurtogram fast_kurtogram(const sigprep::Signal& x, int max_level, int jobs) {
  x.validate();
  if (max_level < 1) throw ParameterError("kurtogram max_level must be >= 1");
  if (max_level > 24 || x.samples.size() < (std::size_t{1} << (max_level + 6))) {
    throw ParameterError("signal too short for kurtogram level " + std::to_string(max_level));
  }
  const double nyquist = x.sample_rate / 2.0;

  Kurtogram k;
  for (int level = 1; level <= max_level; ++level) {
    const std::size_t bands = std::size_t{1} << level;
    const double width = nyquist / static_cast<double>(bands);
    for (std::size_t b = 0; b < bands; ++b) {
      KurtogramCell c;
      c.level = level;
      c.bandwidth = width;
      // Edges are exact multiples of fs / 2^(level+1).
      const double lo = nyquist * static_cast<double>(b) / static_cast<double>(bands);
      const double hi = nyquist * static_cast<double>(b + 1) / static_cast<double>(bands);
      c.low = lo;
      c.high = hi;
      c.center = (lo + hi) / 2.0;
      k.cells.push_back(c);
    }
  }

  parallel_for(k.cells.size(), jobs, [&](std::size_t i) {
    auto& c = k.cells[i];
    try {
      const auto se = sigprep::squared_envelope(x, c.band());
      const std::size_t guard = edge_guard(c.level);
      c.sk_value = sparsity::spectral_kurtosis_value(
          std::span<const double>(se).subspan(guard, se.size() - 2 * guard));
    } catch (const DegenerateError&) {
      c.sk_value = 0.0;
    }
  });

  k.best = k.cells.front();
  for (const auto& c : k.cells) {
    if (better(c, k.best)) k.best = c;
  }
  return k;
}

DiagnosisReport diagnose(const sigprep::Signal& x, const sigprep::Band& band,
                         const std::vector<double>& targets, double tolerance_hz, int n_harmonics) {
  if (n_harmonics < 1) throw ParameterError("n_harmonics must be >= 1");
  if (!(tolerance_hz >= 0.0)) throw ParameterError("tolerance must be >= 0");
  const auto se = sigprep::squared_envelope(x, band);
  const auto spec = sigprep::envelope_spectrum(se, x.sample_rate);
  const auto& amp = spec.amplitudes;

  DiagnosisReport r;
  r.band = band;
  r.resolution = x.sample_rate / static_cast<double>(se.size());
  if (tolerance_hz == 0.0) tolerance_hz = r.resolution;
  // The squared envelope of a band of width B has no content above B, and
  // its noise level falls off toward B, so each bin is judged against the
  // median of its neighbours inside (0, B]. DC is removed before the transform.
  const auto support = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil((band.high - band.low) / r.resolution)), 1, amp.size() - 1);
  r.floor.assign(amp.size(), 0.0);
  std::vector<double> window;
  for (std::size_t k = 1; k < amp.size(); ++k) {
    const std::size_t c = std::min(k, support);
    const std::size_t lo = c > kFloorHalfWidth ? c - kFloorHalfWidth : 1;
    const std::size_t hi = std::min(support, c + kFloorHalfWidth);
    window.assign(amp.begin() + static_cast<std::ptrdiff_t>(lo), amp.begin() + static_cast<std::ptrdiff_t>(hi + 1));
    std::nth_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2), window.end());
    r.floor[k] = kProminenceFactor * window[window.size() / 2];
  }
  const auto is_peak = [&](std::size_t k) { return amp[k] > r.floor[k] && is_local_max(amp, k); };

  for (std::size_t k = 1; k < amp.size(); ++k) {
    if (is_peak(k)) r.peaks.push_back({spec.frequencies[k], amp[k], r.floor[k]});
  }
  std::stable_sort(r.peaks.begin(), r.peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.amplitude > b.amplitude; });

  for (double target : targets) {
    for (int order = 1; order <= n_harmonics; ++order) {
      const double want = target * order;
      const auto lo = static_cast<std::size_t>(
          std::max(1.0, std::ceil((want - tolerance_hz) / r.resolution)));
      const auto hi = std::min(amp.size() - 1,
                               static_cast<std::size_t>(std::floor((want + tolerance_hz) / r.resolution)));
      std::size_t best = 0;
      for (std::size_t k = lo; k <= hi && k < amp.size(); ++k) {
        if (is_peak(k) && (best == 0 || amp[k] > amp[best])) {
          best = k;
        }
      }
      if (best != 0) r.matches.push_back({target, order, spec.frequencies[best], amp[best], r.floor[best]});
    }
  }
  return r;
}

}  // namespace sparsehm::kurtogram
