#include "sparsehm/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sparsehm/errors.hpp"
#include "sparsehm/parallel.hpp"
#include "sparsehm/random.hpp"

namespace sparsehm::datasets {
namespace fs = std::filesystem;
namespace {

constexpr std::size_t kKeyDigitWidth = 20;

// Splits on any of `delims`, collapsing runs of whitespace when `collapse`.
std::vector<std::string_view> split(std::string_view line, std::string_view delims, bool collapse) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i <= line.size()) {
    const std::size_t j = line.find_first_of(delims, i);
    const std::size_t end = j == std::string_view::npos ? line.size() : j;
    if (!(collapse && end == i)) out.push_back(line.substr(i, end - i));
    if (j == std::string_view::npos) break;
    i = j + 1;
  }
  return out;
}

bool parse_number(std::string_view field, double& out) {
  while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front()))) field.remove_prefix(1);
  while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back()))) field.remove_suffix(1);
  if (field.empty()) return false;
  const std::string s(field);
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE && std::isfinite(out);
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& extension) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw DataError("dataset directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (!extension.empty() && entry.path().extension() != extension) continue;
    files.push_back(entry.path());
  }
  if (files.empty()) throw DataError("no data files in " + dir.string());
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    const auto ka = chronological_key(a.filename().string());
    const auto kb = chronological_key(b.filename().string());
    return ka != kb ? ka < kb : a.filename() < b.filename();
  });
  return files;
}

template <typename ReadOne>
RunToFailureRun read_directory(const std::vector<fs::path>& files, double sample_rate, int channel,
                               ReadOne&& read_one) {
  RunToFailureRun run;
  run.sample_rate = sample_rate;
  run.channel = channel;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const long index = static_cast<long>(i + 1);
    const std::string id = files[i].filename().string();
    try {
      run.files.push_back({index, id, read_one(files[i])});
    } catch (const MalformedRowError& e) {
      run.skipped.push_back({index, id, e.what()});
    }
  }
  if (run.files.empty()) throw DataError("every file in the run was unreadable");
  return run;
}

}  // namespace

std::string chronological_key(const std::string& name) {
  std::string key;
  std::size_t i = 0;
  while (i < name.size()) {
    if (std::isdigit(static_cast<unsigned char>(name[i]))) {
      std::size_t j = i;
      while (j < name.size() && std::isdigit(static_cast<unsigned char>(name[j]))) ++j;
      std::string digits = name.substr(i, j - i);
      if (digits.size() < kKeyDigitWidth) digits.insert(0, kKeyDigitWidth - digits.size(), '0');
      key += digits;
      i = j;
    } else {
      key += name[i++];
    }
  }
  return key;
}

sigprep::Signal read_ims_file(const fs::path& path, int channel) {
  if (channel < 1) throw ParameterError("IMS channel is 1-based");
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  sigprep::Signal s;
  s.sample_rate = kImsSampleRate;
  s.samples.reserve(kImsPointsPerFile);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (blank(line)) continue;
    const auto fields = split(line, " \t", true);
    if (fields.size() < static_cast<std::size_t>(channel)) {
      throw FormatError(path.string() + ": row " + std::to_string(row) + " has " +
                        std::to_string(fields.size()) + " columns, channel " +
                        std::to_string(channel) + " requested");
    }
    double v = 0.0;
    if (!parse_number(fields[static_cast<std::size_t>(channel - 1)], v)) {
      throw MalformedRowError(path.string() + ": unparsable row " + std::to_string(row));
    }
    s.samples.push_back(v);
  }
  if (s.samples.empty()) throw FormatError(path.string() + ": no data rows");
  return s;
}

RunToFailureRun read_ims(const fs::path& dir, int channel) {
  auto run = read_directory(sorted_files(dir, ""), kImsSampleRate, channel,
                            [&](const fs::path& p) { return read_ims_file(p, channel); });
  run.metadata["format"] = "ims";
  run.metadata["path"] = dir.string();
  return run;
}

sigprep::Signal read_xjtu_file(const fs::path& path, Axis axis) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  sigprep::Signal s;
  s.sample_rate = kXjtuSampleRate;
  s.samples.reserve(kXjtuPointsPerFile);
  const std::size_t column = axis == Axis::kHorizontal ? 0 : 1;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (blank(line)) continue;
    const auto fields = split(line, ",", false);
    if (fields.size() != 2) {
      throw FormatError(path.string() + ": row " + std::to_string(row) + " has " +
                        std::to_string(fields.size()) + " columns, expected 2");
    }
    double v = 0.0;
    if (!parse_number(fields[column], v)) {
      throw MalformedRowError(path.string() + ": unparsable row " + std::to_string(row));
    }
    s.samples.push_back(v);
  }
  if (s.samples.empty()) throw FormatError(path.string() + ": header only, no data rows");
  return s;
}

RunToFailureRun read_xjtu(const fs::path& dir, Axis axis) {
  auto run = read_directory(sorted_files(dir, ".csv"), kXjtuSampleRate,
                            axis == Axis::kHorizontal ? 1 : 2,
                            [&](const fs::path& p) { return read_xjtu_file(p, axis); });
  run.metadata["format"] = "xjtu";
  run.metadata["axis"] = axis == Axis::kHorizontal ? "horizontal" : "vertical";
  run.metadata["path"] = dir.string();
  return run;
}

void write_xjtu_file(const fs::path& path, const std::vector<double>& horizontal,
                     const std::vector<double>& vertical) {
  if (horizontal.size() != vertical.size()) throw ParameterError("XJTU columns differ in length");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "Horizontal_vibration_signals,Vertical_vibration_signals\n";
  char buf[64];
  for (std::size_t i = 0; i < horizontal.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,", horizontal[i]);
    out << buf;
    std::snprintf(buf, sizeof buf, "%.17g\n", vertical[i]);
    out << buf;
  }
  if (!out) throw DataError("failed writing " + path.string());
}

void SynthSpec::validate() const {
  if (!(fs > 0.0)) throw ParameterError("synth: fs must be positive");
  if (points_per_file < sigprep::kMinSignalLength) throw ParameterError("synth: points_per_file too small");
  if (n_files < 1) throw ParameterError("synth: n_files must be >= 1");
  if (ffot_index < 1 || ffot_index >= n_files) {
    throw ParameterError("synth: ffot_index must lie in [1, n_files)");
  }
  if (!(fault_freq > 0.0 && fault_freq < fs / 2.0)) {
    throw ParameterError("synth: fault_freq must lie in (0, fs/2)");
  }
  if (!(resonance_freq > 0.0 && resonance_freq < fs / 2.0)) {
    throw ParameterError("synth: resonance_freq must lie in (0, fs/2)");
  }
  if (!(resonance_decay > 0.0)) throw ParameterError("synth: resonance_decay must be positive");
  if (!(noise_std >= 0.0)) throw ParameterError("synth: noise_std must be >= 0");
  if (!(fault_amplitude >= 0.0)) throw ParameterError("synth: fault_amplitude must be >= 0");
  if (!(severity_ramp >= 0.0)) throw ParameterError("synth: severity_ramp must be >= 0");
  if (onset_order > 8) throw ParameterError("synth: onset_order must lie in [0, 8]");
}

double synth_severity(const SynthSpec& spec, std::size_t file_index) {
  if (file_index <= spec.ffot_index) return 0.0;
  const double r = static_cast<double>(file_index - spec.ffot_index) /
                   static_cast<double>(spec.n_files - spec.ffot_index);
  return std::pow(r, spec.severity_ramp);
}

RunToFailureRun synth_run(const SynthSpec& spec, int jobs) {
  spec.validate();
  RunToFailureRun run;
  run.sample_rate = spec.fs;
  run.channel = 1;
  run.metadata["format"] = "synthetic";
  run.files.resize(spec.n_files);

  // Impulses that start before the file are included while they still ring.
  const double ring = (40.0 + 2.0 * spec.onset_order) / spec.resonance_decay;
  const double two_pi_fr = 2.0 * std::numbers::pi * spec.resonance_freq;
  const double order = static_cast<double>(spec.onset_order);
  // (d t)^n e^{-d t} peaks at d t = n; scale that peak to 1.
  const double peak = spec.onset_order == 0 ? 1.0 : std::pow(order, order) * std::exp(-order);

  parallel_for(spec.n_files, jobs, [&](std::size_t f) {
    const std::size_t index = f + 1;
    Rng rng(mix_seed(spec.seed, f));
    std::vector<double> x(spec.points_per_file);
    for (double& v : x) v = spec.noise_std * rng.normal();

    const double amplitude = spec.fault_amplitude * synth_severity(spec, index);
    if (amplitude > 0.0) {
      const double duration = static_cast<double>(spec.points_per_file) / spec.fs;
      const auto first = static_cast<long>(std::floor(-ring * spec.fault_freq));
      const auto last = static_cast<long>(std::ceil(duration * spec.fault_freq));
      for (long k = first; k <= last; ++k) {
        const double t0 = static_cast<double>(k) / spec.fault_freq;
        const auto begin = static_cast<long>(std::max(0.0, std::ceil(t0 * spec.fs)));
        const auto end = std::min(static_cast<long>(spec.points_per_file),
                                  static_cast<long>(std::ceil((t0 + ring) * spec.fs)));
        for (long n = begin; n < end; ++n) {
          const double dt = static_cast<double>(n) / spec.fs - t0;
          if (dt < 0.0) continue;
          const double u = spec.resonance_decay * dt;
          const double envelope = std::pow(u, order) * std::exp(-u) / peak;
          x[static_cast<std::size_t>(n)] += amplitude * envelope * std::sin(two_pi_fr * dt);
        }
      }
    }
    run.files[f] = {static_cast<long>(index), std::to_string(index) + ".csv",
                    sigprep::Signal{std::move(x), spec.fs}};
  });
  return run;
}

void write_run_xjtu(const RunToFailureRun& run, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& f : run.files) {
    write_xjtu_file(dir / (std::to_string(f.file_index) + ".csv"), f.signal.samples, f.signal.samples);
  }
}

}  // namespace sparsehm::datasets
