#include "teamviab/feature_matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <unordered_map>

#include "teamviab/error.hpp"
#include "teamviab/parallel.hpp"

namespace teamviab {

std::size_t FeatureMatrix::column_index(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ValidationError("feature matrix has no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::size_t FeatureMatrix::row_index(std::string_view team_id) const {
  const auto it = std::find(team_ids.begin(), team_ids.end(), team_id);
  if (it == team_ids.end()) throw ValidationError("feature matrix has no team '" + std::string(team_id) + "'");
  return static_cast<std::size_t>(it - team_ids.begin());
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<std::string>& names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) idx.push_back(column_index(n));
  FeatureMatrix out;
  out.team_ids = team_ids;
  out.columns = names;
  out.rows.reserve(rows.size());
  for (const auto& r : rows) {
    std::vector<double> row;
    row.reserve(idx.size());
    for (auto i : idx) row.push_back(r[i]);
    out.rows.push_back(std::move(row));
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<std::size_t>& indices) const {
  FeatureMatrix out;
  out.columns = columns;
  for (auto i : indices) {
    out.team_ids.push_back(team_ids.at(i));
    out.rows.push_back(rows.at(i));
  }
  return out;
}

FeatureVector FeatureMatrix::vector(std::size_t row) const { return {columns, rows.at(row)}; }

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

void write_csv(const FeatureMatrix& matrix, std::ostream& out) {
  out << "team_id";
  for (const auto& c : matrix.columns) out << ',' << csv_field(c);
  out << '\n';
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    out << csv_field(matrix.team_ids[r]);
    for (double v : matrix.rows[r]) out << ',' << format_number(v);
    out << '\n';
  }
}

void write_csv(const FeatureMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_csv(matrix, out);
}

FeatureMatrix read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  const std::string file = path.string();
  if (!in) throw ValidationError("cannot open " + file);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(file, 1, "empty feature file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv(line);
  if (header.empty() || header[0] != "team_id") throw ValidationError(file, 1, "first column must be team_id");
  FeatureMatrix m;
  m.columns.assign(header.begin() + 1, header.end());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw ValidationError(file, line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                               std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(m.columns.size());
    for (std::size_t i = 1; i < fields.size(); ++i) {
      double v = 0.0;
      const auto& f = fields[i];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw ValidationError(file, line_no, "bad value '" + f + "' in column " + header[i]);
      }
      row.push_back(v);
    }
    m.team_ids.push_back(fields[0]);
    m.rows.push_back(std::move(row));
  }
  return m;
}

FeatureMatrix merge_columns(const FeatureMatrix& base, const FeatureMatrix& extra) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < extra.team_ids.size(); ++i) index.emplace(extra.team_ids[i], i);
  FeatureMatrix out = base;
  out.columns.insert(out.columns.end(), extra.columns.begin(), extra.columns.end());
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    const auto it = index.find(out.team_ids[r]);
    if (it == index.end()) throw ValidationError("no values to merge for team " + out.team_ids[r]);
    const auto& add = extra.rows[it->second];
    out.rows[r].insert(out.rows[r].end(), add.begin(), add.end());
  }
  return out;
}

std::vector<PreparedTranscript> prepare_corpus(const Corpus& corpus, const LexiconSet& lexicons,
                                               unsigned threads) {
  std::vector<std::optional<PreparedTranscript>> slots(corpus.size());
  parallel_for(corpus.size(), threads,
               [&](std::size_t i) { slots[i].emplace(corpus.transcripts[i], lexicons); });
  std::vector<PreparedTranscript> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

ExtractionResult extract_features(const std::vector<PreparedTranscript>& prepared, const Window& window,
                                  const FeatureOptions& options, unsigned threads) {
  std::vector<std::optional<FeatureVector>> slots(prepared.size());
  parallel_for(prepared.size(), threads, [&](std::size_t i) {
    if (prepared[i].has_messages(window)) slots[i] = prepared[i].features(window, options);
  });
  ExtractionResult result;
  result.matrix.columns = computational_feature_names();
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    if (!slots[i]) {
      result.dropped.push_back(prepared[i].team_id());
      continue;
    }
    result.matrix.team_ids.push_back(prepared[i].team_id());
    result.matrix.rows.push_back(std::move(slots[i]->values));
  }
  return result;
}

}  // namespace teamviab
