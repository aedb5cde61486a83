#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "promptbench/datasets.hpp"
#include "promptbench/metrics.hpp"
#include "promptbench/runner.hpp"

namespace promptbench {

enum class ReportFormat { md, csv, tex };

std::string_view to_string(ReportFormat format);
std::optional<ReportFormat> report_format_from_string(std::string_view name);

/// Fixed-point display with half-away-from-zero rounding of the decimal
/// value. Binary noise below 1e-6 of the last displayed digit is ignored, so
/// 0.855 shows as 0.86 at two places. Never prints "-0.000".
std::string format_fixed(double value, int decimals);
/// As format_fixed with an explicit sign: +0.092, -0.170, +0.000.
std::string format_signed(double value, int decimals);

struct ModelRow {
  std::string model_key;
  std::string label;
};

/// Best condition of one grid row, independent of the bare cell.
struct RowBest {
  std::string condition_id;
  double rho = 0.0;
  std::vector<std::string> tied;
};

/// Cells indexed by (model, condition, dataset) with derived best/delta.
class ReportMatrix {
 public:
  /// Empty `models` / `conditions` are derived from the cells (first
  /// appearance; conditions in canonical order).
  explicit ReportMatrix(std::vector<RunCell> cells, std::vector<ModelRow> models = {},
                        std::vector<std::string> conditions = {});

  static ReportMatrix from_run_output(const RunOutput& output);

  const std::vector<ModelRow>& models() const { return models_; }
  const std::vector<std::string>& conditions() const { return conditions_; }
  std::vector<DatasetName> datasets() const;

  const RunCell* cell(std::string_view model_key, std::string_view condition,
                      DatasetName dataset) const;
  bool has_row(std::string_view model_key, DatasetName dataset) const;

  std::optional<RowBest> row_best(std::string_view model_key, DatasetName dataset) const;
  /// Throws MissingBareCell when the row has cells but no successful bare.
  std::optional<DeltaSummary> delta(std::string_view model_key, DatasetName dataset) const;
  /// Model key with the highest best rho on a dataset (first in model order
  /// on ties).
  std::optional<std::string> best_overall_model(DatasetName dataset) const;

 private:
  std::vector<RunCell> cells_;
  std::vector<ModelRow> models_;
  std::vector<std::string> conditions_;
};

struct StaticBaseline {
  std::string method;
  std::optional<double> simlex;
  std::optional<double> wordsim;
  std::optional<double> men;
  std::string type;
};

/// Tab-separated: method, type, simlex, wordsim, men; `-` for an unreported
/// score; `#` starts a comment.
std::vector<StaticBaseline> load_static_baselines(const std::filesystem::path& path);
std::vector<StaticBaseline> parse_static_baselines(std::string_view text);

/// Rows are models, columns the matrix conditions, values at 3 decimals with
/// the row maximum emphasized. CSV adds a full-precision shadow column per
/// condition. Throws UnknownDataset when the matrix has no cells for it.
std::string render_full_grid(const ReportMatrix& matrix, DatasetName dataset, ReportFormat format);

/// Per dataset: (model, bare, best, delta) sorted by best descending; best
/// overall emphasized.
std::string render_summary(const ReportMatrix& matrix, ReportFormat format);

/// Baseline rows followed by each model's best rho per dataset at 2
/// decimals.
std::string render_sota(const ReportMatrix& matrix, std::span<const StaticBaseline> baselines,
                        ReportFormat format);

/// Writes <dataset>_grid, summary and sota files for each format. Returns
/// one message per document that could not be rendered.
std::vector<std::string> write_reports(const ReportMatrix& matrix,
                                       std::span<const StaticBaseline> baselines,
                                       const std::filesystem::path& dir,
                                       std::span<const ReportFormat> formats);

}  // namespace promptbench
