#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "promptbench/error.hpp"
#include "promptbench/report.hpp"
#include "promptbench/runner.hpp"

#ifndef PROMPTBENCH_DEFAULT_BASELINES
#define PROMPTBENCH_DEFAULT_BASELINES "data/static_baselines.tsv"
#endif

namespace pb = promptbench;

namespace {

std::vector<pb::ReportFormat> parse_formats(const std::vector<std::string>& names) {
  std::vector<pb::ReportFormat> out;
  for (const auto& n : names) {
    auto f = pb::report_format_from_string(n);
    if (!f) throw pb::Error(pb::ErrorCode::ConfigInvalid, "unknown report format '" + n + "'");
    out.push_back(*f);
  }
  return out;
}

std::vector<pb::StaticBaseline> baselines_or_empty(const std::string& path) {
  if (path.empty()) return {};
  try {
    return pb::load_static_baselines(path);
  } catch (const pb::Error& e) {
    std::cerr << "warning: " << e.what() << "; SOTA table will list models only\n";
    return {};
  }
}

int report_problems(const std::vector<std::string>& problems) {
  for (const auto& p : problems) std::cerr << "report: " << p << '\n';
  return problems.empty() ? 0 : 1;
}

void print_probe(const pb::SensitivityReport& r) {
  std::cout << r.model_key << '\n';
  if (r.whitespace) {
    std::cout << "  whitespace: " << (r.whitespace->sensitive ? "sensitive" : "insensitive")
              << " (max gap " << r.whitespace->max_gap << " at '" << r.whitespace->worst_word
              << "' / " << r.whitespace->worst_condition << ")\n";
  }
  if (r.bare_word_degenerate) {
    std::cout << "  bare-word degenerate: " << (*r.bare_word_degenerate ? "yes" : "no") << '\n';
  }
  for (const auto& e : r.errors) std::cout << "  error: " << e << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-similarity benchmark harness for prompted text embeddings"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> models, datasets, conditions;
  std::string cache_dir, output_dir;
  bool offline = false;
  bool quiet = false;
  std::vector<std::string> formats{"md", "csv", "tex"};
  std::string baselines_path = PROMPTBENCH_DEFAULT_BASELINES;

  auto* run = app.add_subcommand("run", "Evaluate every model x condition x dataset cell");
  run->add_option("--config", config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--models", models, "Only these models (label or model id)")->delimiter(',');
  run->add_option("--datasets", datasets, "Only these datasets")->delimiter(',');
  run->add_option("--conditions", conditions, "Only these conditions")->delimiter(',');
  run->add_option("--cache-dir", cache_dir, "Override cache directory");
  run->add_option("--output-dir", output_dir, "Override output directory");
  run->add_flag("--offline", offline, "Serve from cache only; a miss fails the cell");
  run->add_option("--formats", formats, "Report formats to write")->delimiter(',');
  run->add_option("--baselines", baselines_path, "Static baselines file");
  run->add_flag("--quiet", quiet, "Do not log per-cell progress");

  std::string from_dir, report_out;
  std::string report_format;
  auto* report = app.add_subcommand("report", "Render tables from a finished run");
  report->add_option("--from", from_dir, "Run output directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--format", report_format, "md, csv or tex (default: all)");
  report->add_option("--out", report_out, "Where to write (default: --from)");
  report->add_option("--baselines", baselines_path, "Static baselines file");

  auto* probe = app.add_subcommand("probe", "Whitespace sensitivity probe per model");
  probe->add_option("--config", config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  probe->add_option("--models", models, "Only these models")->delimiter(',');
  probe->add_option("--cache-dir", cache_dir, "Override cache directory");
  probe->add_flag("--offline", offline, "Serve from cache only");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed() || probe->parsed()) {
      auto config = pb::load_run_config(config_path);
      pb::apply_filters(config, models, datasets, conditions);
      if (!cache_dir.empty()) config.cache_dir = cache_dir;
      if (!output_dir.empty()) config.output_dir = output_dir;
      config.offline = offline;

      pb::RunnerOptions options;
      if (!quiet) options.log = [](const std::string& line) { std::cerr << line << '\n'; };
      pb::Runner runner(std::move(config), std::move(options));

      if (probe->parsed()) {
        int status = 0;
        for (const auto& r : runner.probe()) {
          print_probe(r);
          if (!r.errors.empty()) status = 1;
        }
        return status;
      }

      const auto result = runner.execute();
      const auto matrix = pb::ReportMatrix::from_run_output({result.cells, result.manifest});
      const auto fmts = parse_formats(formats);
      const int report_status = report_problems(
          pb::write_reports(matrix, baselines_or_empty(baselines_path), runner.config().output_dir, fmts));
      for (const auto& r : result.probes) print_probe(r);

      std::size_t failed = 0;
      for (const auto& c : result.cells) failed += c.ok() ? 0 : 1;
      std::cout << result.cells.size() - failed << "/" << result.cells.size()
                << " cells succeeded; results in " << runner.config().output_dir.string() << '\n';
      return failed == 0 && report_status == 0 ? 0 : 1;
    }

    if (report->parsed()) {
      const auto output = pb::read_run_output(from_dir);
      const auto matrix = pb::ReportMatrix::from_run_output(output);
      const auto fmts = report_format.empty() ? parse_formats({"md", "csv", "tex"})
                                              : parse_formats({report_format});
      return report_problems(pb::write_reports(matrix, baselines_or_empty(baselines_path),
                                               report_out.empty() ? from_dir : report_out, fmts));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
