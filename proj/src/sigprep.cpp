#include "sparsehm/sigprep.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "fft.hpp"
#include "sparsehm/errors.hpp"

namespace sparsehm::sigprep {
namespace {

// Band energy below this fraction of the input energy counts as empty.
constexpr double kDegenerateEnergyRatio = 1e-20;

double energy(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0, [](double s, double v) { return s + v * v; });
}

}  // namespace

void Signal::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw ParameterError("sample rate must be positive");
  }
  if (samples.size() < kMinSignalLength) {
    throw ParameterError("signal needs at least " + std::to_string(kMinSignalLength) +
                         " samples, got " + std::to_string(samples.size()));
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw ParameterError("signal contains a non-finite sample");
  }
}

void Band::validate(double sample_rate) const {
  if (!(low >= 0.0) || !(low < high) || !(high <= sample_rate / 2.0)) {
    throw ParameterError("invalid band [" + std::to_string(low) + ", " + std::to_string(high) +
                         "] Hz for sample rate " + std::to_string(sample_rate) + " Hz");
  }
}

Signal bandpass(const Signal& x, const Band& band) {
  x.validate();
  band.validate(x.sample_rate);
  const std::size_t n = x.samples.size();
  auto spectrum = fft::forward_real(x.samples);
  const double df = x.sample_rate / static_cast<double>(n);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    if (!band.contains(static_cast<double>(k) * df)) spectrum[k] = 0.0;
  }
  return {fft::inverse_real(spectrum, n), x.sample_rate};
}

AnalyticSignal analytic(const Signal& x) {
  x.validate();
  const std::size_t n = x.samples.size();
  const auto half = fft::forward_real(x.samples);
  std::vector<fft::Complex> full(n, 0.0);
  full[0] = half[0];
  const std::size_t last = (n % 2 == 0) ? n / 2 : (n - 1) / 2 + 1;
  for (std::size_t k = 1; k < last; ++k) full[k] = 2.0 * half[k];
  if (n % 2 == 0) full[n / 2] = half[n / 2];
  return fft::inverse_complex(full);
}

std::vector<double> squared_envelope(const Signal& x, const Band& band) {
  const Signal filtered = bandpass(x, band);
  const double e_in = energy(x.samples);
  const double e_out = energy(filtered.samples);
  if (e_in == 0.0 || e_out <= kDegenerateEnergyRatio * e_in) {
    throw DegenerateError("band [" + std::to_string(band.low) + ", " + std::to_string(band.high) +
                          "] Hz carries no energy; squared envelope is degenerate");
  }
  const auto z = analytic(filtered);
  std::vector<double> se(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) se[i] = std::norm(z[i]);
  return se;
}

Spectrum envelope_spectrum(const std::vector<double>& squared_envelope, double sample_rate) {
  const std::size_t n = squared_envelope.size();
  if (n < kMinSignalLength) throw ParameterError("envelope spectrum needs at least 16 samples");
  if (!(sample_rate > 0.0)) throw ParameterError("sample rate must be positive");
  const double mean =
      std::accumulate(squared_envelope.begin(), squared_envelope.end(), 0.0) / static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = squared_envelope[i] - mean;
  const auto bins = fft::forward_real(centered);

  Spectrum out;
  out.frequencies.resize(bins.size());
  out.amplitudes.resize(bins.size());
  const double df = sample_rate / static_cast<double>(n);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    out.frequencies[k] = static_cast<double>(k) * df;
    const bool single = (k == 0) || (n % 2 == 0 && k == n / 2);
    out.amplitudes[k] = (single ? 1.0 : 2.0) * std::abs(bins[k]) / static_cast<double>(n);
  }
  return out;
}

}  // namespace sparsehm::sigprep
