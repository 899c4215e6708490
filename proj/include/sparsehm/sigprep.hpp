#pragma once

// Raw vibration record -> band-limited squared envelope -> envelope spectrum.

#include <complex>
#include <vector>

namespace sparsehm::sigprep {

inline constexpr std::size_t kMinSignalLength = 16;

/// Uniformly sampled real record.
struct Signal {
  std::vector<double> samples;
  double sample_rate = 0.0;  // Hz

  /// Throws ParameterError unless sample_rate > 0, every sample is finite and
  /// there are at least kMinSignalLength samples.
  void validate() const;
};

/// Passband [low, high] in Hz.
struct Band {
  double low = 0.0;
  double high = 0.0;

  /// Throws ParameterError unless 0 <= low < high <= sample_rate / 2.
  void validate(double sample_rate) const;
  bool contains(double f) const { return f >= low && f <= high; }
};

using AnalyticSignal = std::vector<std::complex<double>>;

/// Ideal brick-wall filter: DFT bins with |f| in [low, high] kept, all
/// others zeroed. Linear and zero-phase.
Signal bandpass(const Signal& x, const Band& band);

/// x + j*Hilbert{x} via the one-sided spectrum (DC and Nyquist kept once,
/// positive frequencies doubled, negative frequencies zeroed).
AnalyticSignal analytic(const Signal& x);

/// |analytic(bandpass(x, band))|^2. Nonnegative; no positivity floor is
/// applied. Throws DegenerateError when the band holds no energy.
std::vector<double> squared_envelope(const Signal& x, const Band& band);

struct Spectrum {
  std::vector<double> frequencies;  // Hz, k * fs / N for k = 0..N/2
  std::vector<double> amplitudes;
};

/// Single-sided amplitude spectrum of the mean-removed squared envelope.
Spectrum envelope_spectrum(const std::vector<double>& squared_envelope, double sample_rate);

}  // namespace sparsehm::sigprep
