#pragma once

// Batch pipeline behind the command-line front end. Each cmd_* reads a
// PipelineConfig, writes its artifacts into config.out_dir and returns the
// computed result so callers can inspect it without reparsing files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparsehm/attributes.hpp"
#include "sparsehm/datasets.hpp"
#include "sparsehm/detect.hpp"
#include "sparsehm/health_index.hpp"
#include "sparsehm/iforest.hpp"
#include "sparsehm/kurtogram.hpp"

namespace sparsehm::pipeline {

enum class DatasetKind { kSynth, kIms, kXjtu };

struct PipelineConfig {
  DatasetKind kind = DatasetKind::kSynth;
  std::filesystem::path path;
  int channel = 1;
  datasets::Axis axis = datasets::Axis::kHorizontal;
  datasets::SynthSpec synth;
  bool synth_seed_set = false;

  std::optional<sigprep::Band> band;  // empty means "auto"
  long reference_file = 0;            // required when band is auto
  int kurtogram_level = 4;

  int index = 1;  // 1..4; 0 selects custom_index
  std::optional<health_index::IndexSpec> custom_index;
  health_index::HiOptions hi;

  std::optional<std::size_t> baseline;  // default: IMS 300, XJTU 20% of the run, synth 100
  std::size_t run_length = 3;
  double alpha = 0.05;
  int mc_runs = 10000;

  iforest::ForestConfig forest;
  std::size_t feature_window = iforest::kFeatureWindow;

  long file = 0;  // kurtogram target file
  std::vector<double> targets;
  double tolerance_hz = 0.0;  // 0 means one spectral bin
  int harmonics = 3;

  std::vector<std::string> measures = {"SI", "SNE"};
  std::size_t trials = 10000;
  attributes::InequalityMode mode = attributes::InequalityMode::kLiteral;

  std::uint64_t seed = 42;
  int jobs = 1;
  std::filesystem::path out_dir = ".";

  /// Pushes the global seed into every stochastic component.
  void apply_seed(std::uint64_t s);
  void validate() const;
};

/// Parses the INI text; unknown sections or keys raise ParameterError.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// 0 success; 2 usage or configuration; 3 data; 4 internal invariant.
int exit_code_for(const std::exception& e);

std::string format_number(double v);  // %.12g; "nan" for NaN

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

datasets::RunToFailureRun load_run(const PipelineConfig& c);

/// Baseline length in files: the configured value or the per-kind default.
std::size_t baseline_files(const PipelineConfig& c, std::size_t series_length);

/// The configured band, or the kurtogram's best band on the reference file.
sigprep::Band resolve_band(const PipelineConfig& c, const datasets::RunToFailureRun& run);

health_index::HiSeries compute_series(const PipelineConfig& c, const datasets::RunToFailureRun& run,
                                      const sigprep::Band& band);

struct AnalyzeResult {
  health_index::HiSeries series;
  sigprep::Band band;
  double min = 0.0;
  double max = 0.0;
  double spearman = 0.0;
};
AnalyzeResult cmd_analyze(const PipelineConfig& c);

struct FfotReport {
  health_index::HiSeries series;
  sigprep::Band band;
  detect::BaselineModel baseline;
  detect::FfotResult ffot;
};
FfotReport cmd_ffot(const PipelineConfig& c);

struct StagesResult {
  health_index::HiSeries series;
  std::vector<long> file_index;  // valid files, aligned with report.scores
  iforest::StageReport report;
  std::vector<long> boundary_files;
};
StagesResult cmd_stages(const PipelineConfig& c);

struct KurtogramResult {
  long file_index = 0;
  kurtogram::Kurtogram grid;
  std::optional<kurtogram::DiagnosisReport> diagnosis;  // when targets are set
};
KurtogramResult cmd_kurtogram(const PipelineConfig& c);

/// Writes the synthetic run in XJTU-SY layout under out_dir/run.
std::size_t cmd_synth(const PipelineConfig& c);

attributes::AttributeTable cmd_attributes(const PipelineConfig& c);

}  // namespace sparsehm::pipeline
