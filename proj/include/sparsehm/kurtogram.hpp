#pragma once

// Dyadic fast kurtogram over ideal-mask bands, and envelope-spectrum
// diagnosis of fault repetition frequencies.

#include <cstddef>
#include <vector>

#include "sparsehm/sigprep.hpp"

namespace sparsehm::kurtogram {

struct KurtogramCell {
  int level = 0;
  double center = 0.0;     // Hz
  double bandwidth = 0.0;  // Hz, fs / 2^(level + 1)
  double sk_value = 0.0;   // [Gamma(SE,2) / Gamma(SE,1)]^2 past the edge guard; 0 for an empty band
  double low = 0.0;        // band edges, exact multiples of the bandwidth
  double high = 0.0;

  sigprep::Band band() const { return {low, high}; }
};

struct Kurtogram {
  std::vector<KurtogramCell> cells;  // level-major, ascending center
  KurtogramCell best;
};

/// Samples dropped from each end of a level's squared envelope before its
/// SK is taken: 8 * fs / bandwidth = 2^(level + 4). The brick-wall filter
/// is circular, so the jump between the last and first sample rings into
/// every band; strong signals make that ringing look impulsive.
std::size_t edge_guard(int level);

/// Levels 1..max_level; level l splits [0, fs/2] into 2^l equal bands.
/// Ties in sk_value go to the wider band, then the lower center. Requires
/// max_level >= 1 and at least 2^(max_level + 6) samples.
Kurtogram fast_kurtogram(const sigprep::Signal& x, int max_level, int jobs = 1);

struct Peak {
  double frequency = 0.0;
  double amplitude = 0.0;
  double floor = 0.0;  // prominence floor at this bin
};

struct Match {
  double target = 0.0;
  int order = 1;
  double found = 0.0;
  double amplitude = 0.0;
  double floor = 0.0;
};

struct DiagnosisReport {
  sigprep::Band band;
  double resolution = 0.0;  // Hz per spectral bin
  std::vector<double> floor;  // prominence floor per envelope-spectrum bin
  std::vector<Peak> peaks;  // local maxima above the floor, strongest first
  std::vector<Match> matches;
};

/// A peak must exceed this multiple of the median amplitude of the bins
/// within kFloorHalfWidth of it, taken over (0, band width] where the
/// squared envelope has its content.
inline constexpr double kProminenceFactor = 3.0;
inline constexpr std::size_t kFloorHalfWidth = 64;

/// Envelope spectrum of the band's squared envelope; for each target and
/// harmonic order 1..n_harmonics, the strongest local maximum within
/// tolerance_hz of order * target is a match if it clears the floor. A
/// tolerance of 0 means one spectral bin.
DiagnosisReport diagnose(const sigprep::Signal& x, const sigprep::Band& band,
                         const std::vector<double>& targets, double tolerance_hz, int n_harmonics);

}  // namespace sparsehm::kurtogram
