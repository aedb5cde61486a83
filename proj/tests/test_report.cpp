#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "reference_tables.hpp"
#include "promptbench/error.hpp"
#include "promptbench/report.hpp"

using namespace promptbench;
namespace t = promptbench::testing;

namespace {

std::vector<std::string> lines_of(const std::string& doc) {
  std::vector<std::string> out;
  std::istringstream in(doc);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, delim)) out.push_back(field);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(' ');
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(' ') - b + 1);
}

/// Cells of the markdown row whose first cell is `label`.
std::vector<std::string> md_row(const std::string& doc, const std::string& label) {
  for (const auto& line : lines_of(doc)) {
    auto cells = split(line, '|');
    if (cells.size() > 2 && trim(cells[1]) == label) {
      std::vector<std::string> out;
      for (std::size_t i = 2; i < cells.size(); ++i) out.push_back(trim(cells[i]));
      return out;
    }
  }
  return {};
}

RunCell ok_cell(const std::string& model, const std::string& condition, DatasetName d, double rho) {
  RunCell c;
  c.model_key = model;
  c.model_label = model;
  c.condition_id = condition;
  c.dataset = d;
  c.correlation = CorrelationResult{rho, 10, 0, 0};
  return c;
}

ReportMatrix reference_matrix() { return ReportMatrix(t::reference_cells()); }

}  // namespace

TEST(Format, HalfAwayFromZeroOnDecimalValue) {
  EXPECT_EQ(format_fixed(0.692, 2), "0.69");
  EXPECT_EQ(format_fixed(0.654, 2), "0.65");
  EXPECT_EQ(format_fixed(0.650, 2), "0.65");
  EXPECT_EQ(format_fixed(0.758, 2), "0.76");
  EXPECT_EQ(format_fixed(0.855, 2), "0.86");
  EXPECT_EQ(format_fixed(0.805, 2), "0.81");
  EXPECT_EQ(format_fixed(-0.0004, 3), "0.000");
  EXPECT_EQ(format_fixed(-0.071, 3), "-0.071");
  EXPECT_EQ(format_signed(0.092, 3), "+0.092");
  EXPECT_EQ(format_signed(-0.17, 3), "-0.170");
  EXPECT_EQ(format_signed(0.0, 3), "+0.000");
  EXPECT_EQ(format_signed(0.587 - -0.071, 3), "+0.658");
}

TEST(Grid, ReferenceSimLexRow) {
  const auto doc = render_full_grid(reference_matrix(), DatasetName::simlex999, ReportFormat::md);
  const auto row = md_row(doc, "text-embed-3-small");
  ASSERT_EQ(row.size(), 8u);
  EXPECT_EQ(row[0], "0.502");
  EXPECT_EQ(row[6], "**0.671**");
  EXPECT_EQ(std::count_if(row.begin(), row.end(), [](const auto& c) { return c.starts_with("**"); }), 1);
}

TEST(Grid, ReferenceGridsValuesAndEmphasis) {
  const auto m = reference_matrix();
  for (auto d : kAllDatasets) {
    const auto doc = render_full_grid(m, d, ReportFormat::md);
    for (const auto& golden : t::reference_grid(d)) {
      const auto row = md_row(doc, golden.label);
      ASSERT_EQ(row.size(), 8u) << golden.label;
      for (std::size_t i = 0; i < 8; ++i) {
        const bool bold = row[i].starts_with("**");
        const auto value = bold ? row[i].substr(2, row[i].size() - 4) : row[i];
        EXPECT_NEAR(std::stod(value), golden.rho[i], 1e-3) << golden.label << " " << i;
        EXPECT_EQ(bold, static_cast<int>(i) == golden.bold) << golden.label << " " << i;
      }
    }
  }
}

TEST(Grid, TieEmphasizesEarliestAndAddsNote) {
  std::vector<RunCell> cells;
  const std::vector<double> rho{0.5, 0.6, 0.7, 0.7, 0.1, 0.2, 0.3, 0.4};
  for (std::size_t i = 0; i < 8; ++i) {
    cells.push_back(ok_cell("tie-model", all_conditions()[i].id, DatasetName::men3000, rho[i]));
  }
  const ReportMatrix m(cells);
  const auto md = render_full_grid(m, DatasetName::men3000, ReportFormat::md);
  const auto row = md_row(md, "tie-model");
  EXPECT_EQ(row[2], "**0.700**");
  EXPECT_EQ(row[3], "0.700");
  EXPECT_NE(md.find("Tie for row maximum: tie-model: trailing_space = both_spaces"), std::string::npos);
  const auto tex = render_full_grid(m, DatasetName::men3000, ReportFormat::tex);
  EXPECT_NE(tex.find("\\textbf{0.700}"), std::string::npos);
  EXPECT_NE(tex.find("% Tie for row maximum"), std::string::npos);
}

TEST(Grid, SingleMockRowInEveryFormat) {
  std::vector<RunCell> cells;
  for (const auto& c : all_conditions()) {
    cells.push_back(ok_cell("mock:a", c.id, DatasetName::simlex999, 0.1 * (canonical_rank(c.id) + 1)));
  }
  const ReportMatrix m(cells);

  const auto md = lines_of(render_full_grid(m, DatasetName::simlex999, ReportFormat::md));
  std::vector<std::string> table;
  for (const auto& l : md) {
    if (l.starts_with("|")) table.push_back(l);
  }
  ASSERT_EQ(table.size(), 3u);
  for (const auto& l : table) EXPECT_EQ(std::count(l.begin(), l.end(), '|'), 10);

  const auto csv = lines_of(render_full_grid(m, DatasetName::simlex999, ReportFormat::csv));
  ASSERT_EQ(csv.size(), 2u);
  EXPECT_EQ(split(csv[0], ',').size(), 19u);
  EXPECT_EQ(split(csv[1], ',').size(), 19u);
  EXPECT_EQ(split(csv[1], ',').back(), "instruct_semantic");
  EXPECT_EQ(split(csv[1], ',')[3], "0.10000000000000001");

  const auto tex = render_full_grid(m, DatasetName::simlex999, ReportFormat::tex);
  EXPECT_NE(tex.find("\\begin{tabular}{l|cccccccc}"), std::string::npos);
  EXPECT_NE(tex.find("\\end{tabular}"), std::string::npos);
  EXPECT_NE(tex.find("instruct\\_semantic"), std::string::npos);
  EXPECT_NE(tex.find("mock:a & 0.100"), std::string::npos);
}

TEST(Grid, ErrorCellsAndUnknownDataset) {
  std::vector<RunCell> cells{ok_cell("k", "bare", DatasetName::simlex999, 0.3)};
  RunCell failed = ok_cell("k", "the_word", DatasetName::simlex999, 0);
  failed.correlation.reset();
  failed.error = CellError{ErrorCode::RetriesExhausted, "x"};
  cells.push_back(failed);
  const ReportMatrix m(cells, {}, {"bare", "leading_space", "the_word"});
  const auto row = md_row(render_full_grid(m, DatasetName::simlex999, ReportFormat::md), "k");
  EXPECT_EQ(row, (std::vector<std::string>{"**0.300**", "ERR(MissingCell)", "ERR(RetriesExhausted)"}));
  try {
    render_full_grid(m, DatasetName::men3000, ReportFormat::md);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownDataset);
  }
}

TEST(Summary, ReferenceRowsPerModel) {
  const auto doc = render_summary(reference_matrix(), ReportFormat::csv);
  const auto lines = lines_of(doc);
  for (auto d : kAllDatasets) {
    for (const auto& golden : t::reference_summary(d)) {
      bool found = false;
      for (const auto& l : lines) {
        const auto f = split(l, ',');
        if (f[0] != to_string(d) || f[1] != golden.label) continue;
        found = true;
        EXPECT_EQ(f[3], format_fixed(golden.bare, 3)) << golden.label;
        EXPECT_EQ(f[4], format_fixed(golden.best, 3)) << golden.label;
        EXPECT_EQ(f[5], format_signed(golden.delta, 3)) << golden.label << " " << to_string(d);
        EXPECT_EQ(f[10], golden.bold ? "true" : "false") << golden.label;
      }
      EXPECT_TRUE(found) << golden.label;
    }
  }
}

TEST(Summary, MenVoyageRowInTex) {
  const auto tex = render_summary(reference_matrix(), ReportFormat::tex);
  EXPECT_NE(tex.find("voyage-3 & 0.096 & 0.826 & +0.730 \\\\"), std::string::npos);
  EXPECT_NE(tex.find("text-embed-3-large & 0.784 & \\textbf{0.855} & +0.071"), std::string::npos);
}

TEST(Summary, QwenDeltaMatchesGrid) {
  const auto m = reference_matrix();
  const auto key = t::reference_model_key("Qwen3-Embed-8B");
  const double recomputed = m.cell(key, "instruct_semantic", DatasetName::simlex999)->correlation->rho -
                            m.cell(key, "bare", DatasetName::simlex999)->correlation->rho;
  EXPECT_EQ(format_signed(recomputed, 3), "+0.281");
  const auto row = md_row(render_summary(m, ReportFormat::md), "Qwen3-Embed-8B");
  EXPECT_EQ(row.at(2), format_signed(recomputed, 3));
}

TEST(Summary, SortedByBestDescending) {
  const auto doc = render_summary(reference_matrix(), ReportFormat::csv);
  double previous = 2.0;
  std::string dataset;
  for (const auto& l : lines_of(doc)) {
    const auto f = split(l, ',');
    if (f[0] == "dataset") continue;
    if (f[0] != dataset) {
      dataset = f[0];
      previous = 2.0;
    }
    const double best = std::stod(f[8]);
    EXPECT_LE(best, previous);
    previous = best;
  }
}

TEST(Summary, AllEqualCellsGiveZeroDelta) {
  std::vector<RunCell> cells;
  for (const auto& model : {"a", "b"}) {
    for (const auto& c : all_conditions()) cells.push_back(ok_cell(model, c.id, DatasetName::wordsim353, 0.42));
  }
  const auto doc = render_summary(ReportMatrix(cells), ReportFormat::md);
  EXPECT_EQ(md_row(doc, "a").at(2), "+0.000");
  EXPECT_EQ(md_row(doc, "b").at(2), "+0.000");
}

TEST(Summary, MissingBareCell) {
  std::vector<RunCell> cells{ok_cell("k", "bare", DatasetName::men3000, 0.2),
                             ok_cell("k", "the_word", DatasetName::men3000, 0.3)};
  cells[0].correlation.reset();
  cells[0].error = CellError{ErrorCode::ProviderError, "x"};
  try {
    render_summary(ReportMatrix(cells), ReportFormat::md);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingBareCell);
  }
}

TEST(Sota, EmbedEnglishSimLexAndEmptyBaselines) {
  const auto m = reference_matrix();
  const auto doc = render_sota(m, {}, ReportFormat::md);
  const auto row = md_row(doc, "embed-english-v3.0");
  EXPECT_EQ(row.at(0), "0.69");
  EXPECT_EQ(row.at(3), "Prompted");
  EXPECT_TRUE(md_row(doc, "GloVe").empty());
}

TEST(Sota, BaselinesFileRows) {
  const auto baselines = load_static_baselines(PROMPTBENCH_BASELINES_FILE);
  ASSERT_EQ(baselines.size(), 5u);
  const auto doc = render_sota(reference_matrix(), baselines, ReportFormat::md);
  EXPECT_EQ(md_row(doc, "fastText"), (std::vector<std::string>{"0.42", "-", "0.81", "Static"}));
  EXPECT_EQ(md_row(doc, "Numberbatch"), (std::vector<std::string>{"0.64", "0.83", "0.86", "+KG"}));
  const auto tex = render_sota(reference_matrix(), baselines, ReportFormat::tex);
  EXPECT_NE(tex.find("GloVe & 0.37 & 0.52 & 0.74 & Static \\\\"), std::string::npos);
}

TEST(Baselines, ParseErrors) {
  EXPECT_EQ(parse_static_baselines("# only comments\n\n").size(), 0u);
  for (const auto* bad : {"GloVe\tStatic\t0.37\t0.52\n", "GloVe\tStatic\tx\t0.52\t0.74\n",
                          "GloVe\tStatic\t1.5\t0.52\t0.74\n"}) {
    try {
      parse_static_baselines(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::MalformedRow);
      EXPECT_EQ(e.line(), 1u);
    }
  }
}

TEST(WriteReports, AllDocumentsInAllFormats) {
  t::TempDir dir;
  const std::vector<ReportFormat> formats{ReportFormat::md, ReportFormat::csv, ReportFormat::tex};
  const auto problems = write_reports(reference_matrix(), {}, dir.path(), formats);
  EXPECT_TRUE(problems.empty());
  for (const auto* ext : {"md", "csv", "tex"}) {
    for (const auto* stem : {"simlex999_grid", "wordsim353_grid", "men3000_grid", "summary", "sota"}) {
      EXPECT_TRUE(std::filesystem::exists(dir / (std::string(stem) + "." + ext))) << stem << "." << ext;
    }
  }
}

TEST(Matrix, FromRunOutputKeepsManifestOrder) {
  RunOutput out;
  out.cells = {ok_cell("b", "bare", DatasetName::men3000, 0.1), ok_cell("a", "bare", DatasetName::men3000, 0.2)};
  out.manifest = {{"config",
                   {{"models", {{{"model_key", "a"}, {"label", "A"}}, {{"model_key", "b"}, {"label", "B"}}}},
                    {"conditions", {{{"id", "bare"}}}}}}};
  const auto m = ReportMatrix::from_run_output(out);
  ASSERT_EQ(m.models().size(), 2u);
  EXPECT_EQ(m.models()[0].label, "A");
  EXPECT_EQ(m.best_overall_model(DatasetName::men3000), "a");
}
