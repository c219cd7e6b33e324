#include "seqcfa/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "seqcfa/error.hpp"

namespace seqcfa {

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  bool line_has_content = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    if (line_has_content) {
      end_field();
      records.push_back(std::move(record));
    }
    record.clear();
    field.clear();
    field_started = false;
    line_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started && !field.empty()) throw DataError("CSV: stray quote inside unquoted field");
        quoted = true;
        field_started = true;
        line_has_content = true;
        break;
      case ',':
        line_has_content = true;
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field += ch;
        field_started = true;
        line_has_content = true;
    }
  }
  if (quoted) throw DataError("CSV: unterminated quoted field");
  end_record();

  if (records.empty()) throw DataError("CSV has no header row");
  CsvTable t;
  t.header = std::move(records.front());
  if (!t.header.empty() && t.header[0].starts_with("\xEF\xBB\xBF")) t.header[0].erase(0, 3);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size())
      throw DataError("CSV row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                      " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text_file(path)); }

namespace {

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

bool GroupKeyLess::operator()(const std::string& a, const std::string& b) const {
  const auto na = parse_double(a);
  const auto nb = parse_double(b);
  if (na && nb) return *na != *nb ? *na < *nb : a < b;
  if (na != nb) return static_cast<bool>(na);  // numeric keys first
  return a < b;
}

PanelData parse_panel(const CsvTable& table, const LoadOptions& options) {
  auto index_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw DataError("CSV has no column named '" + name + "'");
    return static_cast<std::size_t>(it - table.header.begin());
  };

  const std::optional<std::size_t> id_col =
      options.id_column.empty() ? std::nullopt : std::optional(index_of(options.id_column));
  const std::optional<std::size_t> group_col =
      options.group_column.empty() ? std::nullopt : std::optional(index_of(options.group_column));

  std::vector<std::string> names = options.value_columns;
  if (names.empty())
    for (const auto& h : table.header)
      if (h != options.id_column && h != options.group_column) names.push_back(h);
  if (names.empty()) throw DataError("CSV has no value columns");
  std::vector<std::size_t> cols;
  for (const auto& n : names) cols.push_back(index_of(n));

  struct Acc {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> ids;
    int rows_in = 0;
  };
  std::map<std::string, Acc, GroupKeyLess> acc;

  PanelData panel;
  panel.id_column = options.id_column;
  panel.group_column = options.group_column;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string key = group_col ? row[*group_col] : std::string("all");
    Acc& a = acc[key];
    ++a.rows_in;
    std::vector<double> vals;
    vals.reserve(cols.size());
    bool complete = true;
    for (auto c : cols) {
      const auto v = parse_double(row[c]);
      if (!v) {
        complete = false;
        break;
      }
      vals.push_back(*v);
    }
    if (!complete) continue;
    const std::string id = id_col ? row[*id_col] : std::to_string(r + 1);
    if (options.range) {
      const auto [lo, hi] = *options.range;
      for (std::size_t k = 0; k < vals.size(); ++k)
        if (vals[k] < lo || vals[k] > hi)
          panel.warnings.push_back("row " + std::to_string(r + 2) + " (id " + id + "): " + names[k] + " = " +
                                   format_number(vals[k]) + " outside [" + format_number(lo) + ", " +
                                   format_number(hi) + "]");
    }
    a.rows.push_back(std::move(vals));
    a.ids.push_back(id);
  }

  for (auto& [key, a] : acc) {
    if (a.rows.empty()) throw DataError("group '" + key + "' is empty after dropping incomplete rows");
    if (a.rows.size() < 2)
      throw DataError("group '" + key + "' has fewer than two complete rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(a.rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < a.rows.size(); ++i)
      for (std::size_t j = 0; j < names.size(); ++j)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a.rows[i][j];
    PanelGroup g{DataMatrix(std::move(m), names), std::move(a.ids), a.rows_in,
                 a.rows_in - static_cast<int>(a.rows.size())};
    panel.groups.emplace(key, std::move(g));
  }
  if (panel.groups.empty()) throw DataError("CSV has no data rows");
  return panel;
}

PanelData load_panel(const std::filesystem::path& path, const LoadOptions& options) {
  return parse_panel(read_csv(path), options);
}

std::string format_number(double value) {
  if (std::isnan(value)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_panel(const std::filesystem::path& path, const PanelData& panel) {
  if (panel.groups.empty()) throw Error("panel has no groups");
  const auto& names = panel.groups.begin()->second.data.column_names();
  const std::string id_name = panel.id_column.empty() ? "id" : panel.id_column;
  const std::string group_name = panel.group_column.empty() ? "group" : panel.group_column;
  std::string out = csv_field(id_name) + "," + csv_field(group_name);
  for (const auto& n : names) out += "," + csv_field(n);
  out += "\n";
  for (const auto& [key, g] : panel.groups) {
    const auto& v = g.data.values();
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      out += csv_field(g.ids[static_cast<std::size_t>(r)]) + "," + csv_field(key);
      for (Eigen::Index c = 0; c < v.cols(); ++c) out += "," + format_number(v(r, c));
      out += "\n";
    }
  }
  write_text_file(path, out);
}

void write_scores_csv(const std::filesystem::path& path, const Eigen::MatrixXd& scores,
                      const std::vector<std::string>& factor_names, const std::vector<std::string>& ids) {
  if (static_cast<Eigen::Index>(factor_names.size()) != scores.cols())
    throw Error("score column names do not match score matrix");
  if (!ids.empty() && static_cast<Eigen::Index>(ids.size()) != scores.rows())
    throw Error("score ids do not match score rows");
  std::string out = "id";
  for (const auto& n : factor_names) out += "," + csv_field(n);
  out += "\n";
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    out += ids.empty() ? std::to_string(r + 1) : csv_field(ids[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < scores.cols(); ++c) out += "," + format_number(scores(r, c));
    out += "\n";
  }
  write_text_file(path, out);
}

void write_data_csv(const std::filesystem::path& path, const DataMatrix& data, const std::vector<std::string>& ids) {
  write_scores_csv(path, data.values(), data.column_names(), ids);
}

}  // namespace seqcfa
