#pragma once

// Run-to-failure datasets: IMS (ASCII, whitespace-delimited, one column per
// channel, 20 kHz), XJTU-SY (CSV with a header and two acceleration
// columns, 25.6 kHz) and a seeded synthetic outer-race degradation run.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sparsehm/sigprep.hpp"

namespace sparsehm::datasets {

inline constexpr double kImsSampleRate = 20000.0;
inline constexpr std::size_t kImsPointsPerFile = 20480;
inline constexpr double kXjtuSampleRate = 25600.0;
inline constexpr std::size_t kXjtuPointsPerFile = 32768;

struct RunFile {
  long file_index = 0;  // 1-based position in the chronological listing
  std::string file_id;  // file name
  sigprep::Signal signal;
};

struct SkippedFile {
  long file_index = 0;
  std::string file_id;
  std::string reason;
};

struct RunToFailureRun {
  std::vector<RunFile> files;
  std::vector<SkippedFile> skipped;
  double sample_rate = 0.0;
  int channel = 1;
  std::map<std::string, std::string> metadata;
};

/// Sort key that orders names by their embedded numbers: every digit run
/// is left-padded with zeros to a fixed width.
std::string chronological_key(const std::string& name);

/// One IMS file; channel is 1-based. Throws FormatError when a row has too
/// few columns for the channel, MalformedRowError on an unparsable row.
sigprep::Signal read_ims_file(const std::filesystem::path& path, int channel);

/// Every regular file in `dir`, ordered by chronological_key. Files with
/// malformed rows are skipped and recorded; other format errors propagate.
/// Throws DataError for a missing or empty directory.
RunToFailureRun read_ims(const std::filesystem::path& dir, int channel);

enum class Axis { kHorizontal, kVertical };

/// One XJTU-SY CSV file. Throws FormatError for a file with no data rows or
/// the wrong column count, MalformedRowError on an unparsable row.
sigprep::Signal read_xjtu_file(const std::filesystem::path& path, Axis axis);

/// Every *.csv in `dir`, ordered by chronological_key.
RunToFailureRun read_xjtu(const std::filesystem::path& dir, Axis axis);

/// Writes the XJTU-SY layout with 17 significant digits so values read
/// back bit-exact.
void write_xjtu_file(const std::filesystem::path& path, const std::vector<double>& horizontal,
                     const std::vector<double>& vertical);

struct SynthSpec {
  double fs = kImsSampleRate;
  std::size_t points_per_file = kImsPointsPerFile;
  std::size_t n_files = 200;
  std::size_t ffot_index = 120;  // 1-based; files after ffot_index carry the fault
  double fault_freq = 236.4;     // Hz
  double resonance_freq = 4000.0;
  double resonance_decay = 4000.0;  // 1/s
  double noise_std = 1.0;
  double fault_amplitude = 1000.0;  // impulse peak amplitude at full severity
  double severity_ramp = 1.5;
  unsigned onset_order = 2;  // impulse envelope (d t)^n e^{-d t}; 0 is a bare decaying sinusoid
  std::uint64_t seed = 42;

  void validate() const;
};

/// Severity multiplier for 1-based file i: 0 up to and including ffot,
/// then ((i - ffot) / (n - ffot))^ramp, reaching 1 at the last file.
double synth_severity(const SynthSpec& spec, std::size_t file_index);

/// Healthy files are Gaussian noise. Faulty files add a train of impulses
/// at fault_freq, each a sinusoid at resonance_freq under the envelope
/// (d t)^n e^{-d t} (d = resonance_decay, n = onset_order, peak scaled to
/// 1), times fault_amplitude * severity. Impulse times
/// are exact multiples of 1/fault_freq (evaluated in continuous time).
RunToFailureRun synth_run(const SynthSpec& spec, int jobs = 1);

/// Writes the run in XJTU-SY layout (1.csv .. n.csv); the one synthetic
/// channel fills both columns.
void write_run_xjtu(const RunToFailureRun& run, const std::filesystem::path& dir);

}  // namespace sparsehm::datasets
