#include "promptbench/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "promptbench/error.hpp"

namespace promptbench {

namespace {

struct Line {
  std::string_view text;
  std::size_t number;
};

std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::MissingFile, "no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open: " + path.string());
  std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (content.starts_with("\xEF\xBB\xBF")) content.erase(0, 3);
  return content;
}

/// Splits into lines, dropping '\r' before '\n'. Blank lines are skipped but
/// still counted so reported line numbers match the file.
std::vector<Line> split_lines(std::string_view content) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++number;
    if (line.find_first_not_of(" \t") != std::string_view::npos) lines.push_back({line, number});
    pos = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_on(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto end = line.find(delim, pos);
    if (end == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, end - pos));
    pos = end + 1;
  }
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    auto start = line.find_first_not_of(" \t", pos);
    if (start == std::string_view::npos) break;
    auto end = line.find_first_of(" \t", start);
    if (end == std::string_view::npos) end = line.size();
    out.push_back(line.substr(start, end - start));
    pos = end;
  }
  return out;
}

std::string_view trim_blanks(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(std::string_view field) {
  field = trim_blanks(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

WordPair make_pair(DatasetName name, std::string_view a, std::string_view b,
                   std::string_view score_field, std::size_t line) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::MalformedRow, "empty word", line);
  for (auto w : {a, b}) {
    if (w.find_first_of("\t\n") != std::string_view::npos) {
      throw Error(ErrorCode::MalformedRow, "word contains a tab or newline", line);
    }
  }
  auto score = parse_number(score_field);
  if (!score) {
    throw Error(ErrorCode::MalformedRow, "non-numeric score '" + std::string(score_field) + "'",
                line);
  }
  auto scale = native_scale(name);
  if (!scale.contains(*score)) {
    std::ostringstream msg;
    msg << "score " << *score << " outside native scale [" << scale.low << ", " << scale.high
        << "]";
    throw Error(ErrorCode::MalformedRow, msg.str(), line);
  }
  return WordPair{std::string(a), std::string(b), *score, line};
}

Benchmark finish(DatasetName name, std::vector<WordPair> pairs, const LoadOptions& options) {
  auto expected = canonical_pair_count(name);
  if (options.enforce_pair_count && pairs.size() != expected) {
    throw Error(ErrorCode::WrongPairCount,
                std::string(to_string(name)) + ": " + std::to_string(pairs.size()) +
                    " pairs found, " + std::to_string(expected) + " required");
  }
  return Benchmark{name, std::move(pairs), native_scale(name)};
}

}  // namespace

std::string_view to_string(DatasetName name) {
  switch (name) {
    case DatasetName::simlex999: return "simlex999";
    case DatasetName::wordsim353: return "wordsim353";
    case DatasetName::men3000: return "men3000";
  }
  return "unknown";
}

std::optional<DatasetName> dataset_from_string(std::string_view name) {
  for (auto d : kAllDatasets) {
    if (to_string(d) == name) return d;
  }
  return std::nullopt;
}

NativeScale native_scale(DatasetName name) {
  switch (name) {
    case DatasetName::simlex999:
    case DatasetName::wordsim353: return {0.0, 10.0};
    case DatasetName::men3000: return {0.0, 50.0};
  }
  return {0.0, 0.0};
}

std::size_t canonical_pair_count(DatasetName name) {
  switch (name) {
    case DatasetName::simlex999: return 999;
    case DatasetName::wordsim353: return 353;
    case DatasetName::men3000: return 3000;
  }
  return 0;
}

Benchmark load_simlex(const std::filesystem::path& path, LoadOptions options) {
  const auto content = read_file(path);
  const auto lines = split_lines(content);
  if (lines.empty()) throw Error(ErrorCode::MalformedHeader, "file is empty", 1);

  const auto header = split_on(lines.front().text, '\t');
  auto score_col = std::find(header.begin(), header.end(), std::string_view("SimLex999"));
  if (score_col == header.end() || header.size() < 3) {
    throw Error(ErrorCode::MalformedHeader, "no SimLex999 column", lines.front().number);
  }
  const auto score_index = static_cast<std::size_t>(score_col - header.begin());

  std::vector<WordPair> pairs;
  pairs.reserve(lines.size());
  for (auto it = std::next(lines.begin()); it != lines.end(); ++it) {
    auto fields = split_on(it->text, '\t');
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::MalformedRow,
                  "expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()),
                  it->number);
    }
    pairs.push_back(make_pair(DatasetName::simlex999, fields[0], fields[1], fields[score_index],
                              it->number));
  }
  return finish(DatasetName::simlex999, std::move(pairs), options);
}

Benchmark load_wordsim(const std::filesystem::path& path, LoadOptions options) {
  const auto content = read_file(path);
  const auto lines = split_lines(content);

  std::vector<WordPair> pairs;
  pairs.reserve(lines.size());
  bool first = true;
  for (const auto& line : lines) {
    const char delim = line.text.find('\t') != std::string_view::npos ? '\t' : ',';
    auto fields = split_on(line.text, delim);
    if (first) {
      first = false;
      if (fields.size() >= 3 && !parse_number(fields[2])) continue;  // header row
    }
    if (fields.size() != 3) {
      throw Error(ErrorCode::MalformedRow,
                  "expected 3 fields, got " + std::to_string(fields.size()), line.number);
    }
    pairs.push_back(
        make_pair(DatasetName::wordsim353, fields[0], fields[1], fields[2], line.number));
  }
  return finish(DatasetName::wordsim353, std::move(pairs), options);
}

Benchmark load_men(const std::filesystem::path& path, LoadOptions options) {
  const auto content = read_file(path);
  const auto lines = split_lines(content);

  std::vector<WordPair> pairs;
  pairs.reserve(lines.size());
  for (const auto& line : lines) {
    auto fields = split_whitespace(line.text);
    if (fields.size() != 3) {
      throw Error(ErrorCode::MalformedRow,
                  "expected 3 fields, got " + std::to_string(fields.size()), line.number);
    }
    pairs.push_back(make_pair(DatasetName::men3000, fields[0], fields[1], fields[2], line.number));
  }
  return finish(DatasetName::men3000, std::move(pairs), options);
}

Benchmark load_benchmark(DatasetName name, const std::filesystem::path& path,
                         LoadOptions options) {
  switch (name) {
    case DatasetName::simlex999: return load_simlex(path, options);
    case DatasetName::wordsim353: return load_wordsim(path, options);
    case DatasetName::men3000: return load_men(path, options);
  }
  throw Error(ErrorCode::UnknownDataset, "unknown dataset");
}

Vocabulary vocabulary(const Benchmark& benchmark) {
  Vocabulary words;
  words.reserve(benchmark.pairs.size() * 2);
  for (const auto& p : benchmark.pairs) {
    words.push_back(p.word_a);
    words.push_back(p.word_b);
  }
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return words;
}

}  // namespace promptbench
