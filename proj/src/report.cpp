#include "promptbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "promptbench/error.hpp"

namespace promptbench {

using nlohmann::json;

std::string_view to_string(ReportFormat format) {
  switch (format) {
    case ReportFormat::md: return "md";
    case ReportFormat::csv: return "csv";
    case ReportFormat::tex: return "tex";
  }
  return "md";
}

std::optional<ReportFormat> report_format_from_string(std::string_view name) {
  for (auto f : {ReportFormat::md, ReportFormat::csv, ReportFormat::tex}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

std::string format_fixed(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double scaled = value * scale;
  const double snapped = std::round(scaled * 1e6) / 1e6;
  double units = std::round(snapped);
  if (units == 0.0) units = 0.0;  // drop the sign of -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, units / scale);
  return buf;
}

std::string format_signed(double value, int decimals) {
  auto text = format_fixed(value, decimals);
  return text.front() == '-' ? text : "+" + text;
}

namespace {

std::string full_precision(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += '\n';
  return out;
}

std::string tex_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '_': out += "\\_"; break;
      case '&': out += "\\&"; break;
      case '%': out += "\\%"; break;
      case '#': out += "\\#"; break;
      case '$': out += "\\$"; break;
      case '{': out += "\\{"; break;
      case '}': out += "\\}"; break;
      case '~': out += "\\textasciitilde{}"; break;
      case '^': out += "\\textasciicircum{}"; break;
      case '\\': out += "\\textbackslash{}"; break;
      default: out += c;
    }
  }
  return out;
}

std::string md_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

std::string text_cell(std::string_view s, ReportFormat f) {
  return f == ReportFormat::tex ? tex_escape(s) : f == ReportFormat::md ? md_escape(s) : std::string(s);
}

std::string emphasize(const std::string& s, ReportFormat f) {
  switch (f) {
    case ReportFormat::md: return "**" + s + "**";
    case ReportFormat::tex: return "\\textbf{" + s + "}";
    case ReportFormat::csv: return s;
  }
  return s;
}

std::string error_token(const RunCell* cell) {
  if (cell == nullptr) return "ERR(MissingCell)";
  return "ERR(" + std::string(to_string(cell->error ? cell->error->code : ErrorCode::ProviderError)) + ")";
}

void md_table(std::ostringstream& out, const std::vector<std::string>& header,
              const std::vector<std::vector<std::string>>& rows) {
  out << '|';
  for (const auto& h : header) out << ' ' << h << " |";
  out << "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) out << (i == 0 ? "---|" : "---:|");
  out << '\n';
  for (const auto& row : rows) {
    out << '|';
    for (const auto& c : row) out << ' ' << c << " |";
    out << '\n';
  }
}

void tex_row(std::ostringstream& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " & " : "") << row[i];
  out << " \\\\\n";
}

std::string tex_column_spec(std::size_t value_columns) {
  return "l|" + std::string(value_columns, 'c');
}

std::vector<DatasetName> ordered_datasets(const std::vector<RunCell>& cells) {
  std::vector<DatasetName> out;
  for (auto d : kAllDatasets) {
    if (std::any_of(cells.begin(), cells.end(), [&](const RunCell& c) { return c.dataset == d; })) {
      out.push_back(d);
    }
  }
  return out;
}

}  // namespace

ReportMatrix::ReportMatrix(std::vector<RunCell> cells, std::vector<ModelRow> models,
                           std::vector<std::string> conditions)
    : cells_(std::move(cells)), models_(std::move(models)), conditions_(std::move(conditions)) {
  for (const auto& c : cells_) {
    if (std::none_of(models_.begin(), models_.end(),
                     [&](const ModelRow& m) { return m.model_key == c.model_key; })) {
      models_.push_back({c.model_key, c.model_label.empty() ? c.model_key : c.model_label});
    }
  }
  std::vector<std::string> seen;
  for (const auto& c : cells_) {
    if (std::find(conditions_.begin(), conditions_.end(), c.condition_id) == conditions_.end() &&
        std::find(seen.begin(), seen.end(), c.condition_id) == seen.end()) {
      seen.push_back(c.condition_id);
    }
  }
  std::stable_sort(seen.begin(), seen.end(), [](const auto& a, const auto& b) {
    return canonical_rank(a) < canonical_rank(b);
  });
  conditions_.insert(conditions_.end(), seen.begin(), seen.end());
}

ReportMatrix ReportMatrix::from_run_output(const RunOutput& output) {
  std::vector<ModelRow> models;
  std::vector<std::string> conditions;
  const auto& m = output.manifest;
  if (m.is_object() && m.contains("config")) {
    const auto& config = m["config"];
    for (const auto& model : config.value("models", json::array())) {
      models.push_back({model.value("model_key", ""), model.value("label", "")});
    }
    for (const auto& c : config.value("conditions", json::array())) {
      conditions.push_back(c.value("id", ""));
    }
  }
  std::erase_if(models, [](const ModelRow& r) { return r.model_key.empty(); });
  std::erase_if(conditions, [](const std::string& c) { return c.empty(); });
  return ReportMatrix(output.cells, std::move(models), std::move(conditions));
}

std::vector<DatasetName> ReportMatrix::datasets() const { return ordered_datasets(cells_); }

const RunCell* ReportMatrix::cell(std::string_view model_key, std::string_view condition,
                                  DatasetName dataset) const {
  for (const auto& c : cells_) {
    if (c.model_key == model_key && c.condition_id == condition && c.dataset == dataset) return &c;
  }
  return nullptr;
}

bool ReportMatrix::has_row(std::string_view model_key, DatasetName dataset) const {
  return std::any_of(cells_.begin(), cells_.end(), [&](const RunCell& c) {
    return c.model_key == model_key && c.dataset == dataset;
  });
}

std::optional<RowBest> ReportMatrix::row_best(std::string_view model_key, DatasetName dataset) const {
  std::optional<RowBest> best;
  for (const auto& condition : conditions_) {
    const auto* c = cell(model_key, condition, dataset);
    if (c == nullptr || !c->ok()) continue;
    const double rho = c->correlation->rho;
    if (!best || rho > best->rho) {
      best = RowBest{condition, rho, {}};
    } else if (rho == best->rho) {
      best->tied.push_back(condition);
    }
  }
  return best;
}

std::optional<DeltaSummary> ReportMatrix::delta(std::string_view model_key, DatasetName dataset) const {
  std::vector<ConditionScore> scores;
  for (const auto& condition : conditions_) {
    const auto* c = cell(model_key, condition, dataset);
    if (c != nullptr && c->ok()) scores.push_back({condition, c->correlation->rho});
  }
  if (scores.empty()) return std::nullopt;
  return delta_vs_bare(scores);
}

std::optional<std::string> ReportMatrix::best_overall_model(DatasetName dataset) const {
  std::optional<std::string> best_key;
  double best_rho = 0.0;
  for (const auto& m : models_) {
    auto b = row_best(m.model_key, dataset);
    if (b && (!best_key || b->rho > best_rho)) {
      best_key = m.model_key;
      best_rho = b->rho;
    }
  }
  return best_key;
}

std::vector<StaticBaseline> parse_static_baselines(std::string_view text) {
  std::vector<StaticBaseline> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> fields;
    std::string field;
    std::istringstream row(line);
    while (std::getline(row, field, '\t')) {
      auto b = field.find_first_not_of(' ');
      auto e = field.find_last_not_of(' ');
      fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    while (!fields.empty() && fields.back().empty()) fields.pop_back();
    if (fields.size() != 5) {
      throw Error(ErrorCode::MalformedRow, "expected 5 tab-separated fields", number);
    }
    auto score = [&](const std::string& s) -> std::optional<double> {
      if (s == "-" || s == "--") return std::nullopt;
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v) || v < -1.0 || v > 1.0) throw std::out_of_range(s);
        return v;
      } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedRow, "bad score '" + s + "'", number);
      }
    };
    out.push_back({fields[0], score(fields[2]), score(fields[3]), score(fields[4]), fields[1]});
  }
  return out;
}

std::vector<StaticBaseline> load_static_baselines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open baselines " + path.string());
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_static_baselines(text);
}

std::string render_full_grid(const ReportMatrix& matrix, DatasetName dataset, ReportFormat format) {
  std::vector<const ModelRow*> rows;
  for (const auto& m : matrix.models()) {
    if (matrix.has_row(m.model_key, dataset)) rows.push_back(&m);
  }
  if (rows.empty()) {
    throw Error(ErrorCode::UnknownDataset, "no cells for " + std::string(to_string(dataset)));
  }
  const auto& conditions = matrix.conditions();
  std::ostringstream out;
  std::vector<std::string> tie_notes;

  if (format == ReportFormat::csv) {
    std::vector<std::string> header{"model", "model_key"};
    for (const auto& c : conditions) {
      header.push_back(c);
      header.push_back(c + "_full");
    }
    header.push_back("best_condition");
    out << csv_line(header);
    for (const auto* m : rows) {
      const auto best = matrix.row_best(m->model_key, dataset);
      std::vector<std::string> line{m->label, m->model_key};
      for (const auto& c : conditions) {
        const auto* cell = matrix.cell(m->model_key, c, dataset);
        if (cell && cell->ok()) {
          line.push_back(format_fixed(cell->correlation->rho, 3));
          line.push_back(full_precision(cell->correlation->rho));
        } else {
          line.push_back(error_token(cell));
          line.push_back("");
        }
      }
      line.push_back(best ? best->condition_id : "");
      out << csv_line(line);
    }
    return out.str();
  }

  std::vector<std::string> header{format == ReportFormat::tex ? "\\textbf{Model}" : "Model"};
  for (const auto& c : conditions) {
    header.push_back(format == ReportFormat::tex ? "\\textbf{" + tex_escape(c) + "}" : c);
  }
  std::vector<std::vector<std::string>> body;
  for (const auto* m : rows) {
    const auto best = matrix.row_best(m->model_key, dataset);
    std::vector<std::string> line{text_cell(m->label, format)};
    for (const auto& c : conditions) {
      const auto* cell = matrix.cell(m->model_key, c, dataset);
      if (cell && cell->ok()) {
        auto text = format_fixed(cell->correlation->rho, 3);
        line.push_back(best && best->condition_id == c ? emphasize(text, format) : text);
      } else {
        line.push_back(error_token(cell));
      }
    }
    if (best && !best->tied.empty()) {
      std::string note = m->label + ": " + best->condition_id;
      for (const auto& t : best->tied) note += " = " + t;
      note += " (emphasis on " + best->condition_id + ")";
      tie_notes.push_back(note);
    }
    body.push_back(std::move(line));
  }

  const std::string title = std::string(to_string(dataset)) + ": Spearman rho for every condition";
  if (format == ReportFormat::md) {
    out << "## " << title << "\n\n";
    md_table(out, header, body);
    if (!tie_notes.empty()) {
      out << '\n';
      for (const auto& n : tie_notes) out << "Tie for row maximum: " << md_escape(n) << '\n';
    }
  } else {
    out << "% " << title << '\n';
    out << "\\begin{tabular}{" << tex_column_spec(conditions.size()) << "}\n\\toprule\n";
    tex_row(out, header);
    out << "\\midrule\n";
    for (const auto& line : body) tex_row(out, line);
    out << "\\bottomrule\n\\end{tabular}\n";
    for (const auto& n : tie_notes) out << "% Tie for row maximum: " << n << '\n';
  }
  return out.str();
}

namespace {

struct SummaryRow {
  const ModelRow* model;
  DeltaSummary delta;
};

std::vector<SummaryRow> summary_rows(const ReportMatrix& matrix, DatasetName dataset) {
  std::vector<SummaryRow> rows;
  for (const auto& m : matrix.models()) {
    if (!matrix.has_row(m.model_key, dataset)) continue;
    auto d = matrix.delta(m.model_key, dataset);
    if (!d) continue;  // every cell in the row failed
    rows.push_back({&m, std::move(*d)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return a.delta.best_rho > b.delta.best_rho;
  });

  // Re-derive each row by scanning the grid directly.
  for (const auto& row : rows) {
    const auto* bare = matrix.cell(row.model->model_key, condition_id::bare, dataset);
    std::optional<double> max;
    for (const auto& c : matrix.conditions()) {
      const auto* cell = matrix.cell(row.model->model_key, c, dataset);
      if (cell && cell->ok() && (!max || cell->correlation->rho > *max)) max = cell->correlation->rho;
    }
    const bool consistent = bare && bare->ok() && bare->correlation->rho == row.delta.bare_rho &&
                            max && *max == row.delta.best_rho &&
                            row.delta.delta == row.delta.best_rho - row.delta.bare_rho;
    if (!consistent) {
      throw Error(ErrorCode::InconsistentReport,
                  "summary row for " + row.model->label + " on " +
                      std::string(to_string(dataset)) + " does not match the grid");
    }
  }
  return rows;
}

}  // namespace

std::string render_summary(const ReportMatrix& matrix, ReportFormat format) {
  const auto datasets = matrix.datasets();
  if (std::find(matrix.conditions().begin(), matrix.conditions().end(), condition_id::bare) ==
      matrix.conditions().end()) {
    throw Error(ErrorCode::MissingBareCell, "no bare cells in the matrix");
  }
  std::ostringstream out;

  if (format == ReportFormat::csv) {
    out << csv_line({"dataset", "model", "model_key", "bare", "best", "delta", "best_condition",
                     "bare_full", "best_full", "delta_full", "best_overall"});
  } else if (format == ReportFormat::md) {
    out << "## Bare word vs. best condition (Spearman rho)\n";
  } else {
    out << "\\begin{tabular}{l|ccc}\n\\toprule\n";
    tex_row(out, {"\\textbf{Model}", "\\textbf{Bare}", "\\textbf{Best}", "\\textbf{$\\Delta$}"});
  }

  for (auto dataset : datasets) {
    const auto rows = summary_rows(matrix, dataset);
    const auto overall = matrix.best_overall_model(dataset);
    const std::string name{to_string(dataset)};

    if (format == ReportFormat::md) {
      out << "\n### " << name << "\n\n";
      std::vector<std::vector<std::string>> body;
      for (const auto& r : rows) {
        const bool top = overall && *overall == r.model->model_key;
        auto best = format_fixed(r.delta.best_rho, 3);
        body.push_back({md_escape(r.model->label), format_fixed(r.delta.bare_rho, 3),
                        top ? emphasize(best, format) : best, format_signed(r.delta.delta, 3),
                        r.delta.best_condition});
      }
      md_table(out, {"Model", "Bare", "Best", "Delta", "Best condition"}, body);
    } else if (format == ReportFormat::tex) {
      out << "\\midrule\n\\multicolumn{4}{c}{\\textit{" << tex_escape(name) << "}} \\\\\n\\midrule\n";
      for (const auto& r : rows) {
        const bool top = overall && *overall == r.model->model_key;
        auto best = format_fixed(r.delta.best_rho, 3);
        tex_row(out, {tex_escape(r.model->label), format_fixed(r.delta.bare_rho, 3),
                      top ? emphasize(best, format) : best, format_signed(r.delta.delta, 3)});
      }
    } else {
      for (const auto& r : rows) {
        const bool top = overall && *overall == r.model->model_key;
        out << csv_line({name, r.model->label, r.model->model_key, format_fixed(r.delta.bare_rho, 3),
                         format_fixed(r.delta.best_rho, 3), format_signed(r.delta.delta, 3),
                         r.delta.best_condition, full_precision(r.delta.bare_rho),
                         full_precision(r.delta.best_rho), full_precision(r.delta.delta),
                         top ? "true" : "false"});
      }
    }
  }
  if (format == ReportFormat::tex) out << "\\bottomrule\n\\end{tabular}\n";
  return out.str();
}

std::string render_sota(const ReportMatrix& matrix, std::span<const StaticBaseline> baselines,
                        ReportFormat format) {
  auto score = [](const std::optional<double>& v) { return v ? format_fixed(*v, 2) : std::string("-"); };
  auto model_score = [&](const ModelRow& m, DatasetName d) {
    auto best = matrix.row_best(m.model_key, d);
    return best ? format_fixed(best->rho, 2) : std::string("-");
  };

  std::vector<std::vector<std::string>> baseline_rows;
  for (const auto& b : baselines) {
    baseline_rows.push_back({text_cell(b.method, format), score(b.simlex), score(b.wordsim),
                             score(b.men), text_cell(b.type, format)});
  }
  std::vector<std::vector<std::string>> model_rows;
  for (const auto& m : matrix.models()) {
    model_rows.push_back({text_cell(m.label, format), model_score(m, DatasetName::simlex999),
                          model_score(m, DatasetName::wordsim353),
                          model_score(m, DatasetName::men3000), "Prompted"});
  }

  std::ostringstream out;
  switch (format) {
    case ReportFormat::csv:
      out << csv_line({"method", "simlex999", "wordsim353", "men3000", "type"});
      for (const auto& r : baseline_rows) out << csv_line(r);
      for (const auto& r : model_rows) out << csv_line(r);
      break;
    case ReportFormat::md: {
      out << "## Best condition vs. static baselines (Spearman rho)\n\n";
      auto all = baseline_rows;
      all.insert(all.end(), model_rows.begin(), model_rows.end());
      md_table(out, {"Method", "SimLex-999", "WordSim-353", "MEN-3000", "Type"}, all);
      break;
    }
    case ReportFormat::tex:
      out << "\\begin{tabular}{l|ccc|l}\n\\toprule\n";
      tex_row(out, {"\\textbf{Method}", "\\textbf{SL}", "\\textbf{WS}", "\\textbf{MEN}",
                    "\\textbf{Type}"});
      if (!baseline_rows.empty()) {
        out << "\\midrule\n";
        for (const auto& r : baseline_rows) tex_row(out, r);
      }
      out << "\\midrule\n";
      for (const auto& r : model_rows) tex_row(out, r);
      out << "\\bottomrule\n\\end{tabular}\n";
      break;
  }
  return out.str();
}

std::vector<std::string> write_reports(const ReportMatrix& matrix,
                                       std::span<const StaticBaseline> baselines,
                                       const std::filesystem::path& dir,
                                       std::span<const ReportFormat> formats) {
  std::vector<std::string> problems;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto emit = [&](const std::string& stem, ReportFormat f, const auto& render) {
    const auto path = dir / (stem + "." + std::string(to_string(f)));
    try {
      const std::string doc = render();
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out << doc;
      if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    } catch (const std::exception& e) {
      problems.push_back(path.filename().string() + ": " + e.what());
    }
  };
  for (auto f : formats) {
    for (auto d : matrix.datasets()) {
      emit(std::string(to_string(d)) + "_grid", f, [&] { return render_full_grid(matrix, d, f); });
    }
    emit("summary", f, [&] { return render_summary(matrix, f); });
    emit("sota", f, [&] { return render_sota(matrix, baselines, f); });
  }
  return problems;
}

}  // namespace promptbench
