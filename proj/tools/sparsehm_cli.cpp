// sparsehm: batch front end for the health-monitoring pipeline.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "sparsehm/errors.hpp"
#include "sparsehm/pipeline.hpp"

namespace pl = sparsehm::pipeline;

int main(int argc, char** argv) {
  CLI::App app{"Sparsity-measure health indexes for run-to-failure vibration data"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int jobs = 0;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Seed for every stochastic component");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "Health index series and trend summary");
  auto* attributes = app.add_subcommand("attributes", "Sparse-attribute verdict table");
  std::vector<std::string> measures;
  std::optional<std::size_t> trials;
  attributes->add_option("--measures", measures, "Measures (SI, SNE, SK, GI, LPLQ, PQ)")->delimiter(',');
  attributes->add_option("--trials", trials, "Randomized trials per attribute");
  auto* ffot = app.add_subcommand("ffot", "First fault occurrence time");
  auto* stages = app.add_subcommand("stages", "Isolation-forest degradation stages");
  auto* kurt = app.add_subcommand("kurtogram", "Kurtogram grid and best band for one file");
  std::optional<long> file;
  kurt->add_option("--file", file, "1-based file index");
  auto* synth = app.add_subcommand("synth", "Write a synthetic run in XJTU-SY layout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    pl::PipelineConfig c = config_path.empty() ? pl::PipelineConfig{} : pl::load_config(config_path);
    if (const char* env = std::getenv("SPARSEHM_SEED")) {
      try {
        c.apply_seed(std::stoull(env));
      } catch (const std::exception&) {
        throw sparsehm::ParameterError("SPARSEHM_SEED must be an unsigned integer");
      }
    }
    if (seed) c.apply_seed(*seed);
    if (!out_dir.empty()) c.out_dir = out_dir;
    if (jobs > 0) c.jobs = jobs;
    if (!measures.empty()) c.measures = measures;
    if (trials) c.trials = *trials;
    if (file) c.file = *file;

    if (analyze->parsed()) {
      const auto r = pl::cmd_analyze(c);
      std::cout << r.series.index_name << ": " << r.series.size() << " files, spearman "
                << pl::format_number(r.spearman) << '\n';
    } else if (attributes->parsed()) {
      std::cout << sparsehm::attributes::render_text(pl::cmd_attributes(c));
    } else if (ffot->parsed()) {
      const auto r = pl::cmd_ffot(c);
      std::cout << "ffot: " << (r.ffot.file_index ? std::to_string(*r.ffot.file_index) : "none") << '\n';
    } else if (stages->parsed()) {
      const auto r = pl::cmd_stages(c);
      std::cout << "stages: " << r.report.n_stages << '\n';
    } else if (kurt->parsed()) {
      const auto r = pl::cmd_kurtogram(c);
      std::cout << "best band: " << pl::format_number(r.grid.best.low) << '-'
                << pl::format_number(r.grid.best.high) << " Hz, sk "
                << pl::format_number(r.grid.best.sk_value) << '\n';
    } else if (synth->parsed()) {
      std::cout << "wrote " << pl::cmd_synth(c) << " files\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "sparsehm: " << e.what() << '\n';
    return pl::exit_code_for(e);
  }
  return 0;
}
