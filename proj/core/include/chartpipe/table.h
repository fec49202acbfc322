#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chartpipe {

enum class ColumnType { nominal, quantitative, temporal };

std::string_view to_string(ColumnType type);
std::optional<ColumnType> column_type_from_string(std::string_view s);

/// One CSV cell: the raw text plus the typed views filters compare on.
/// An empty raw string is null.
struct Cell {
  std::string raw;
  std::optional<double> number;
  /// Orderable time value: ISO dates carry a day ordinal, bare years only
  /// the year.
  std::optional<int> year;
  std::optional<double> day_ordinal;

  static Cell from_text(std::string raw);

  bool is_null() const { return raw.empty(); }
  bool operator==(const Cell& other) const { return raw == other.raw; }
};

struct Column {
  std::string name;
  ColumnType type = ColumnType::nominal;

  bool operator==(const Column&) const = default;
};

/// Immutable table. Construction validates the invariants (unique trimmed
/// names, rectangular rows); after that nothing mutates it, so one instance
/// may be shared freely between threads.
class DataTable {
 public:
  DataTable(std::string name, std::vector<Column> columns, std::vector<std::vector<Cell>> rows);

  const std::string& name() const { return name_; }
  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  size_t n_rows() const { return rows_.size(); }
  size_t n_columns() const { return columns_.size(); }

  const Cell& cell(size_t row, size_t column) const { return rows_[row][column]; }

  /// Case-insensitive, whitespace-normalized lookup.
  std::optional<size_t> find_column(std::string_view name) const;
  /// Same as find_column but throws UnknownColumn.
  size_t column_index(std::string_view name) const;
  const Column& column(std::string_view name) const { return columns_[column_index(name)]; }

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// Reads RFC-4180 CSV (header row required) and infers one type per column.
DataTable load_csv(std::istream& source, std::string name);
DataTable load_csv_text(std::string_view source, std::string name);
DataTable load_csv_file(const std::string& path);

/// Writes the table back out as RFC-4180 CSV with a header row.
std::string to_csv(const DataTable& table);

/// Quotes a single field when it contains a delimiter, quote or newline.
std::string csv_escape(std::string_view field);

/// Nominal unless at least 95% of the non-null values vote otherwise.
/// Temporal votes: ISO dates, or four-digit years in [1500, 2500] when the
/// header names a date unit. Temporal wins over quantitative.
ColumnType infer_column_type(std::string_view header, const std::vector<std::string>& values);

/// Column lines `<name> (<type>)` followed by up to two data rows as CSV.
std::string prompt_snippet(const DataTable& table);

}  // namespace chartpipe
