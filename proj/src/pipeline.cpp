#include "sparsehm/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "sparsehm/errors.hpp"

namespace sparsehm::pipeline {
namespace fs = std::filesystem;
namespace {

using Section = std::map<std::string, std::string>;

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ParameterError("config: " + key + " expects a number, got '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e15) {
    throw ParameterError("config: " + key + " expects an integer, got '" + v + "'");
  }
  return static_cast<long>(d);
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const long n = to_long(key, v);
  if (n < 0) throw ParameterError("config: " + key + " must be >= 0");
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ParameterError("config: " + key + " expects true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void apply_dataset(PipelineConfig& c, const Section& s) {
  for (const auto& [k, v] : s) {
    if (k == "kind") {
      if (v == "synth") {
        c.kind = DatasetKind::kSynth;
      } else if (v == "ims") {
        c.kind = DatasetKind::kIms;
      } else if (v == "xjtu") {
        c.kind = DatasetKind::kXjtu;
      } else {
        throw ParameterError("config: dataset.kind must be synth, ims or xjtu");
      }
    } else if (k == "path") {
      c.path = v;
    } else if (k == "channel") {
      c.channel = static_cast<int>(to_long(k, v));
    } else if (k == "axis") {
      if (v == "horizontal") {
        c.axis = datasets::Axis::kHorizontal;
      } else if (v == "vertical") {
        c.axis = datasets::Axis::kVertical;
      } else {
        throw ParameterError("config: dataset.axis must be horizontal or vertical");
      }
    } else {
      throw ParameterError("config: unknown key dataset." + k);
    }
  }
}

void apply_synth(PipelineConfig& c, const Section& s) {
  auto& p = c.synth;
  for (const auto& [k, v] : s) {
    if (k == "fs") {
      p.fs = to_double(k, v);
    } else if (k == "points_per_file") {
      p.points_per_file = to_count(k, v);
    } else if (k == "n_files") {
      p.n_files = to_count(k, v);
    } else if (k == "ffot_index") {
      p.ffot_index = to_count(k, v);
    } else if (k == "fault_freq") {
      p.fault_freq = to_double(k, v);
    } else if (k == "resonance_freq") {
      p.resonance_freq = to_double(k, v);
    } else if (k == "resonance_decay") {
      p.resonance_decay = to_double(k, v);
    } else if (k == "noise_std") {
      p.noise_std = to_double(k, v);
    } else if (k == "fault_amplitude") {
      p.fault_amplitude = to_double(k, v);
    } else if (k == "severity_ramp") {
      p.severity_ramp = to_double(k, v);
    } else if (k == "onset_order") {
      p.onset_order = static_cast<unsigned>(to_count(k, v));
    } else if (k == "seed") {
      p.seed = static_cast<std::uint64_t>(to_long(k, v));
      c.synth_seed_set = true;
    } else {
      throw ParameterError("config: unknown key synth." + k);
    }
  }
}

void apply_analysis(PipelineConfig& c, const Section& s) {
  for (const auto& [k, v] : s) {
    if (k == "band") {
      if (v == "auto") {
        c.band.reset();
      } else {
        const auto parts = split_list(v);
        if (parts.size() != 2) throw ParameterError("config: analysis.band must be low,high or auto");
        c.band = sigprep::Band{to_double(k, parts[0]), to_double(k, parts[1])};
      }
    } else if (k == "reference_file") {
      c.reference_file = to_long(k, v);
    } else if (k == "kurtogram_level") {
      c.kurtogram_level = static_cast<int>(to_long(k, v));
    } else if (k == "index") {
      if (v == "custom") {
        c.index = 0;
      } else if (v.size() == 3 && v.rfind("HI", 0) == 0 && v[2] >= '1' && v[2] <= '4') {
        c.index = v[2] - '0';
      } else {
        throw ParameterError("config: analysis.index must be HI1..HI4 or custom");
      }
    } else if (k == "tau") {
      c.hi.tau = to_double(k, v);
    } else if (k == "normalize") {
      c.hi.normalize = to_bool(k, v);
    } else if (k == "hi2") {
      if (v == "as_printed") {
        c.hi.hi2 = health_index::Hi2Variant::kAsPrinted;
      } else if (v == "second_term_minus1") {
        c.hi.hi2 = health_index::Hi2Variant::kSecondTermMinus1;
      } else {
        throw ParameterError("config: analysis.hi2 must be as_printed or second_term_minus1");
      }
    } else if (k == "baseline") {
      c.baseline = to_count(k, v);
    } else if (k == "run_length") {
      c.run_length = to_count(k, v);
    } else if (k == "alpha") {
      c.alpha = to_double(k, v);
    } else if (k == "mc_runs") {
      c.mc_runs = static_cast<int>(to_long(k, v));
    } else if (k == "file") {
      c.file = to_long(k, v);
    } else if (k == "targets") {
      c.targets.clear();
      for (const auto& t : split_list(v)) c.targets.push_back(to_double(k, t));
    } else if (k == "tolerance") {
      c.tolerance_hz = to_double(k, v);
    } else if (k == "harmonics") {
      c.harmonics = static_cast<int>(to_long(k, v));
    } else {
      throw ParameterError("config: unknown key analysis." + k);
    }
  }
}

void apply_forest(PipelineConfig& c, const Section& s) {
  auto& f = c.forest;
  for (const auto& [k, v] : s) {
    if (k == "n_estimators") {
      f.n_estimators = static_cast<int>(to_long(k, v));
    } else if (k == "max_sample_fraction") {
      f.max_sample_fraction = to_double(k, v);
    } else if (k == "max_features_fraction") {
      f.max_features_fraction = to_double(k, v);
    } else if (k == "outlier_threshold") {
      if (v == "auto") {
        f.outlier_threshold.reset();
      } else {
        f.outlier_threshold = to_double(k, v);
      }
    } else if (k == "min_consecutive") {
      f.min_consecutive_for_stage = to_count(k, v);
    } else if (k == "feature_window") {
      c.feature_window = to_count(k, v);
    } else {
      throw ParameterError("config: unknown key forest." + k);
    }
  }
}

void apply_attributes(PipelineConfig& c, const Section& s) {
  for (const auto& [k, v] : s) {
    if (k == "measures") {
      c.measures = split_list(v);
    } else if (k == "trials") {
      c.trials = to_count(k, v);
    } else if (k == "mode") {
      if (v == "literal") {
        c.mode = attributes::InequalityMode::kLiteral;
      } else if (v == "orientation") {
        c.mode = attributes::InequalityMode::kOrientationAdjusted;
      } else {
        throw ParameterError("config: attributes.mode must be literal or orientation");
      }
    } else {
      throw ParameterError("config: unknown key attributes." + k);
    }
  }
}

void apply_run(PipelineConfig& c, const Section& s) {
  for (const auto& [k, v] : s) {
    if (k == "seed") {
      c.apply_seed(static_cast<std::uint64_t>(to_long(k, v)));
    } else if (k == "jobs") {
      c.jobs = static_cast<int>(to_long(k, v));
    } else if (k == "out") {
      c.out_dir = v;
    } else {
      throw ParameterError("config: unknown key run." + k);
    }
  }
}

std::ofstream open_output(const PipelineConfig& c, const std::string& name) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw DataError("cannot create " + c.out_dir.string() + ": " + ec.message());
  std::ofstream out(c.out_dir / name, std::ios::binary);
  if (!out) throw DataError("cannot write " + (c.out_dir / name).string());
  return out;
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

std::string band_text(const sigprep::Band& b) { return format_number(b.low) + "," + format_number(b.high); }

struct ValidPoints {
  std::vector<double> value;
  std::vector<long> file_index;
};

ValidPoints valid_points(const health_index::HiSeries& s) {
  ValidPoints v;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.is_gap(i)) continue;
    v.value.push_back(s.value[i]);
    v.file_index.push_back(s.file_index[i]);
  }
  return v;
}

health_index::HiSeries series_for(const PipelineConfig& c, sigprep::Band* band_out = nullptr) {
  const auto run = load_run(c);
  const auto band = resolve_band(c, run);
  if (band_out) *band_out = band;
  return compute_series(c, run, band);
}

}  // namespace

void PipelineConfig::apply_seed(std::uint64_t s) {
  seed = s;
  forest.random_state = s;
  if (!synth_seed_set) synth.seed = s;
}

void PipelineConfig::validate() const {
  if (jobs < 1) throw ParameterError("jobs must be >= 1");
  if (kind != DatasetKind::kSynth && path.empty()) throw ParameterError("dataset.path is required");
  if (kind == DatasetKind::kIms && channel < 1) throw ParameterError("dataset.channel is 1-based");
  if (kind == DatasetKind::kSynth) synth.validate();
  if (kurtogram_level < 1) throw ParameterError("analysis.kurtogram_level must be >= 1");
  if (index == 0) {
    if (!custom_index) throw ParameterError("index = custom requires an [index] section");
  } else if (index < 1 || index > 4) {
    throw ParameterError("analysis.index must be HI1..HI4 or custom");
  }
  if (!(hi.tau >= 0.0)) throw ParameterError("analysis.tau must be >= 0");
  if (run_length < 1) throw ParameterError("analysis.run_length must be >= 1");
  if (mc_runs < 1) throw ParameterError("analysis.mc_runs must be >= 1");
  if (harmonics < 1) throw ParameterError("analysis.harmonics must be >= 1");
  if (!(tolerance_hz >= 0.0)) throw ParameterError("analysis.tolerance must be >= 0");
  forest.validate();
  if (feature_window < 1) throw ParameterError("forest.feature_window must be >= 1");
}

PipelineConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  std::map<std::string, Section> sections;
  try {
    for (const auto& item : CLI::ConfigINI().from_config(in)) {
      if (item.name == "++" || item.name == "--") continue;
      if (item.parents.size() != 1) {
        throw ParameterError("config: key '" + item.fullname() + "' must sit inside one [section]");
      }
      std::string value;
      for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? "," : "") + item.inputs[i];
      sections[item.parents[0]][item.name] = value;
    }
  } catch (const CLI::Error& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }

  PipelineConfig c;
  for (const auto& [name, kv] : sections) {
    if (name == "dataset") {
      apply_dataset(c, kv);
    } else if (name == "synth") {
      apply_synth(c, kv);
    } else if (name == "analysis") {
      apply_analysis(c, kv);
    } else if (name == "forest") {
      apply_forest(c, kv);
    } else if (name == "index") {
      c.custom_index = health_index::spec_from_config(kv);
    } else if (name == "attributes") {
      apply_attributes(c, kv);
    } else if (name != "run") {
      throw ParameterError("config: unknown section [" + name + "]");
    }
  }
  // [run] last so its seed reaches sections parsed earlier.
  if (sections.count("run")) apply_run(c, sections.at("run"));
  else c.apply_seed(c.seed);
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParameterError*>(&e)) return 2;
  if (dynamic_cast<const InvariantError*>(&e)) return 4;
  if (dynamic_cast<const Error*>(&e)) return 3;
  return 4;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("spearman: lengths differ");
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

std::size_t baseline_files(const PipelineConfig& c, std::size_t series_length) {
  if (c.baseline) return *c.baseline;
  switch (c.kind) {
    case DatasetKind::kIms:
      return 300;
    case DatasetKind::kXjtu:
      return std::max(detect::kMinBaseline, series_length / 5);
    case DatasetKind::kSynth:
      return 100;
  }
  return 100;
}

datasets::RunToFailureRun load_run(const PipelineConfig& c) {
  c.validate();
  if (c.kind == DatasetKind::kSynth) return datasets::synth_run(c.synth, c.jobs);
  std::error_code ec;
  if (!fs::is_directory(c.path, ec)) throw ParameterError("dataset path is not a directory: " + c.path.string());
  if (c.kind == DatasetKind::kIms) return datasets::read_ims(c.path, c.channel);
  return datasets::read_xjtu(c.path, c.axis);
}

sigprep::Band resolve_band(const PipelineConfig& c, const datasets::RunToFailureRun& run) {
  if (c.band) {
    c.band->validate(run.sample_rate);
    return *c.band;
  }
  if (c.reference_file < 1) throw ParameterError("band = auto requires analysis.reference_file");
  for (const auto& f : run.files) {
    if (f.file_index == c.reference_file) {
      return kurtogram::fast_kurtogram(f.signal, c.kurtogram_level, c.jobs).best.band();
    }
  }
  throw ParameterError("reference_file " + std::to_string(c.reference_file) + " is not in the run");
}

health_index::HiSeries compute_series(const PipelineConfig& c, const datasets::RunToFailureRun& run,
                                      const sigprep::Band& band) {
  std::vector<health_index::SeriesInput> inputs;
  inputs.reserve(run.files.size() + run.skipped.size());
  for (const auto& f : run.files) inputs.push_back({f.file_index, f.signal, ""});
  for (const auto& s : run.skipped) inputs.push_back({s.file_index, std::nullopt, s.reason});
  std::stable_sort(inputs.begin(), inputs.end(),
                   [](const auto& a, const auto& b) { return a.file_index < b.file_index; });
  if (c.index == 0) {
    const auto spec = *c.custom_index;
    return health_index::hi_series(
        inputs, band, [&](const std::vector<double>& se) { return health_index::eval_spec(spec, se); },
        "custom", c.jobs);
  }
  return health_index::hi_series(inputs, band, c.index, c.hi, c.jobs);
}

AnalyzeResult cmd_analyze(const PipelineConfig& c) {
  AnalyzeResult r;
  r.series = series_for(c, &r.band);
  const auto v = valid_points(r.series);
  if (v.value.empty()) throw DataError("no valid health index values");
  r.min = *std::min_element(v.value.begin(), v.value.end());
  r.max = *std::max_element(v.value.begin(), v.value.end());
  const std::vector<double> idx(v.file_index.begin(), v.file_index.end());
  r.spearman = spearman(idx, v.value);

  auto csv = open_output(c, "hi_series.csv");
  csv << "file_index," << r.series.index_name << '\n';
  for (std::size_t i = 0; i < r.series.size(); ++i) {
    csv << r.series.file_index[i] << ',' << format_number(r.series.value[i]) << '\n';
  }
  auto txt = open_output(c, "summary.txt");
  txt << "index=" << r.series.index_name << '\n'
      << "band=" << band_text(r.band) << '\n'
      << "files=" << r.series.size() << '\n'
      << "gaps=" << r.series.size() - v.value.size() << '\n'
      << "min=" << format_number(r.min) << '\n'
      << "max=" << format_number(r.max) << '\n'
      << "spearman=" << format_number(r.spearman) << '\n';
  for (std::size_t i = 0; i < r.series.size(); ++i) {
    if (r.series.is_gap(i)) txt << "gap " << r.series.file_index[i] << ": " << r.series.gap_reason[i] << '\n';
  }
  return r;
}

FfotReport cmd_ffot(const PipelineConfig& c) {
  FfotReport r;
  r.series = series_for(c, &r.band);
  r.baseline = detect::fit_baseline(r.series, baseline_files(c, r.series.size()),
                                    {c.alpha, c.mc_runs, c.seed, c.jobs});
  r.ffot = detect::detect_ffot(r.series, r.baseline, c.run_length);

  auto csv = open_output(c, "ffot.csv");
  csv << "key,value\n"
      << "index," << r.series.index_name << '\n'
      << "band," << band_text(r.band) << '\n'
      << "baseline_files," << r.baseline.n << '\n'
      << "baseline_mean," << format_number(r.baseline.mean) << '\n'
      << "baseline_std," << format_number(r.baseline.std) << '\n'
      << "upper," << format_number(r.ffot.upper) << '\n'
      << "lower," << format_number(r.ffot.lower) << '\n'
      << "lilliefors_statistic," << format_number(r.baseline.lilliefors_statistic) << '\n'
      << "lilliefors_critical," << format_number(r.baseline.lilliefors_critical) << '\n'
      << "lilliefors_gaussian," << (r.baseline.lilliefors_pass ? "yes" : "no") << '\n'
      << "run_length," << c.run_length << '\n'
      << "ffot_file," << (r.ffot.file_index ? std::to_string(*r.ffot.file_index) : "none") << '\n';
  return r;
}

StagesResult cmd_stages(const PipelineConfig& c) {
  StagesResult r;
  r.series = series_for(c);
  const auto v = valid_points(r.series);
  if (v.value.size() < 2) throw DataError("stage assessment needs at least two valid values");
  r.file_index = v.file_index;
  const auto features = iforest::windowed_features(v.value, c.feature_window);
  const auto forest = iforest::IsolationForest::fit(features, c.forest, c.jobs);
  const auto scores = forest.score_all(features, c.jobs);
  double threshold = 0.0;
  if (c.forest.outlier_threshold) {
    threshold = *c.forest.outlier_threshold;
  } else {
    const std::size_t k = std::min(baseline_files(c, r.series.size()), scores.size());
    threshold = iforest::adaptive_threshold(std::span<const double>(scores.data(), k));
  }
  r.report = iforest::segment_stages(scores, threshold, c.forest.min_consecutive_for_stage);
  for (std::size_t b : r.report.stage_boundaries) r.boundary_files.push_back(v.file_index[b]);

  auto csv = open_output(c, "stages.csv");
  csv << "file_index," << r.series.index_name << ",score,outlier,stage\n";
  std::size_t stage = 1;
  std::size_t next = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (next < r.report.stage_boundaries.size() && r.report.stage_boundaries[next] == i) {
      ++stage;
      ++next;
    }
    csv << v.file_index[i] << ',' << format_number(v.value[i]) << ',' << format_number(scores[i]) << ','
        << (r.report.outlier_flags[i] ? 1 : 0) << ',' << stage << '\n';
  }
  auto txt = open_output(c, "stages_summary.txt");
  txt << "threshold=" << format_number(threshold) << '\n' << "stages=" << r.report.n_stages << '\n';
  txt << "boundaries=";
  for (std::size_t i = 0; i < r.boundary_files.size(); ++i) txt << (i ? "," : "") << r.boundary_files[i];
  txt << '\n';
  return r;
}

KurtogramResult cmd_kurtogram(const PipelineConfig& c) {
  const auto run = load_run(c);
  KurtogramResult r;
  r.file_index = c.file;
  const datasets::RunFile* target = nullptr;
  for (const auto& f : run.files) {
    if (f.file_index == c.file) target = &f;
  }
  if (!target) throw ParameterError("file " + std::to_string(c.file) + " is not in the run");
  r.grid = kurtogram::fast_kurtogram(target->signal, c.kurtogram_level, c.jobs);

  auto csv = open_output(c, "kurtogram.csv");
  csv << "level,low,high,center,bandwidth,sk\n";
  for (const auto& cell : r.grid.cells) {
    csv << cell.level << ',' << format_number(cell.low) << ',' << format_number(cell.high) << ','
        << format_number(cell.center) << ',' << format_number(cell.bandwidth) << ','
        << format_number(cell.sk_value) << '\n';
  }
  auto best = open_output(c, "best_band.txt");
  const auto& b = r.grid.best;
  best << "file=" << c.file << '\n'
       << "level=" << b.level << '\n'
       << "band=" << band_text(b.band()) << '\n'
       << "center=" << format_number(b.center) << '\n'
       << "sk=" << format_number(b.sk_value) << '\n';

  if (!c.targets.empty()) {
    const sigprep::Band band = c.band ? *c.band : b.band();
    r.diagnosis = kurtogram::diagnose(target->signal, band, c.targets, c.tolerance_hz, c.harmonics);
    auto d = open_output(c, "diagnosis.csv");
    d << "target,order,expected,found,amplitude\n";
    for (const auto& m : r.diagnosis->matches) {
      d << format_number(m.target) << ',' << m.order << ',' << format_number(m.target * m.order) << ','
        << format_number(m.found) << ',' << format_number(m.amplitude) << '\n';
    }
  }
  return r;
}

std::size_t cmd_synth(const PipelineConfig& c) {
  c.synth.validate();
  const auto run = datasets::synth_run(c.synth, c.jobs);
  datasets::write_run_xjtu(run, c.out_dir / "run");
  return run.files.size();
}

attributes::AttributeTable cmd_attributes(const PipelineConfig& c) {
  std::vector<attributes::MeasureUnderTest> measures;
  for (const auto& name : c.measures) measures.push_back(attributes::measure_by_name(name));
  attributes::LabOptions o;
  o.trials = c.trials;
  o.seed = c.seed;
  o.mode = c.mode;
  const auto table = attributes::attribute_table(measures, o, c.jobs);
  open_output(c, "attributes.csv") << attributes::render_csv(table);
  open_output(c, "attributes.txt") << attributes::render_text(table);
  return table;
}

}  // namespace sparsehm::pipeline
