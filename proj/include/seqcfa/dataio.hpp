#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seqcfa/data.hpp"
#include "seqcfa/scoring.hpp"

namespace seqcfa {

/// Header plus string cells. Handles quoted fields with embedded commas,
/// doubled quotes and CRLF line endings.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// Orders numeric keys by value ("2" before "10"); other keys lexicographically after.
struct GroupKeyLess {
  bool operator()(const std::string& a, const std::string& b) const;
};

struct PanelGroup {
  DataMatrix data;
  std::vector<std::string> ids;
  int rows_in = 0;
  int rows_dropped = 0;
};

struct PanelData {
  std::map<std::string, PanelGroup, GroupKeyLess> groups;
  std::string id_column;
  std::string group_column;
  std::vector<std::string> warnings;
};

struct LoadOptions {
  std::string id_column;     // empty: row numbers are used as ids
  std::string group_column;  // empty: a single group named "all"
  /// Value columns to keep; empty keeps every column except id and group.
  std::vector<std::string> value_columns;
  /// Inclusive plausible range. Values outside it only produce warnings.
  std::optional<std::pair<double, double>> range;
};

/// Splits rows by group and drops rows with any missing or non-numeric value
/// (complete-case analysis). Throws DataError when a required column is
/// absent or a group has fewer than two complete rows.
PanelData parse_panel(const CsvTable& table, const LoadOptions& options);
PanelData load_panel(const std::filesystem::path& path, const LoadOptions& options);

/// Numbers with 12 significant digits.
std::string format_number(double value);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(std::string_view text);

/// Long-form CSV with id, group and value columns.
void write_panel(const std::filesystem::path& path, const PanelData& panel);

/// Writes `id` followed by one column per factor.
void write_scores_csv(const std::filesystem::path& path, const Eigen::MatrixXd& scores,
                      const std::vector<std::string>& factor_names, const std::vector<std::string>& ids);

/// Writes data CSV; ids default to 1..n.
void write_data_csv(const std::filesystem::path& path, const DataMatrix& data,
                    const std::vector<std::string>& ids = {});

/// Writes `text` to `path`, creating parent directories. Throws Error on I/O failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace seqcfa
