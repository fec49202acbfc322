#include "chartpipe/table.h"

#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "chartpipe/errors.h"
#include "chartpipe/text.h"

namespace chartpipe {

namespace {

constexpr double kTypeVoteThreshold = 0.95;
constexpr std::array<std::string_view, 5> kDateWords{"year", "date", "time", "month", "day"};

bool header_names_date_unit(std::string_view header) {
  for (const auto& tok : text::word_tokens(header)) {
    for (auto w : kDateWords) {
      // "years", "dates" etc. count as well.
      if (tok == w || (tok.size() == w.size() + 1 && tok.starts_with(w) && tok.back() == 's')) {
        return true;
      }
    }
  }
  return false;
}

std::vector<std::vector<std::string>> parse_records(std::string_view in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool any_char_in_record = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // Fully blank lines are skipped.
    if (!(record.size() == 1 && record[0].empty() && !any_char_in_record)) {
      records.push_back(std::move(record));
    }
    record.clear();
    any_char_in_record = false;
  };

  if (in.starts_with("\xEF\xBB\xBF")) in.remove_prefix(3);

  for (size_t i = 0; i < in.size(); ++i) {
    const char c = in[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < in.size() && in[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
          any_char_in_record = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        any_char_in_record = true;
        end_field();
        break;
      case '\r':
        if (i + 1 < in.size() && in[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
        any_char_in_record = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::SyntaxError, "unterminated quoted field in CSV");
  }
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

}  // namespace

std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::nominal: return "nominal";
    case ColumnType::quantitative: return "quantitative";
    case ColumnType::temporal: return "temporal";
  }
  return "nominal";
}

std::optional<ColumnType> column_type_from_string(std::string_view s) {
  if (s == "nominal") return ColumnType::nominal;
  if (s == "quantitative") return ColumnType::quantitative;
  if (s == "temporal") return ColumnType::temporal;
  return std::nullopt;
}

Cell Cell::from_text(std::string raw) {
  Cell c;
  c.raw = std::move(raw);
  if (c.raw.empty()) return c;
  c.number = text::parse_number(c.raw);
  if (auto d = text::parse_iso_date(c.raw)) {
    c.year = d->year;
    c.day_ordinal = d->ordinal;
  } else if (auto y = text::parse_year(c.raw)) {
    c.year = *y;
  }
  return c;
}

DataTable::DataTable(std::string name, std::vector<Column> columns,
                     std::vector<std::vector<Cell>> rows)
    : name_(std::move(name)), columns_(std::move(columns)), rows_(std::move(rows)) {
  if (columns_.empty()) throw Error(ErrorCode::EmptyInput, "table has no columns");
  std::set<std::string> seen;
  for (auto& col : columns_) {
    col.name = text::trim(col.name);
    if (!seen.insert(text::to_lower(text::normalize_space(col.name))).second) {
      throw Error(ErrorCode::DuplicateColumn, "duplicate column name '" + col.name + "'");
    }
  }
  for (size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() != columns_.size()) {
      throw Error(ErrorCode::RaggedRow, "row " + std::to_string(r + 1) + " has " +
                                            std::to_string(rows_[r].size()) + " cells, expected " +
                                            std::to_string(columns_.size()));
    }
  }
}

std::optional<size_t> DataTable::find_column(std::string_view name) const {
  const std::string wanted = text::normalize_space(name);
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (text::iequals(text::normalize_space(columns_[i].name), wanted)) return i;
  }
  return std::nullopt;
}

size_t DataTable::column_index(std::string_view name) const {
  if (auto idx = find_column(name)) return *idx;
  throw Error(ErrorCode::UnknownColumn,
              "column '" + std::string(name) + "' not found in table '" + name_ + "'");
}

ColumnType infer_column_type(std::string_view header, const std::vector<std::string>& values) {
  const bool date_header = header_names_date_unit(header);
  size_t non_null = 0;
  size_t numeric = 0;
  size_t temporal = 0;
  for (const auto& v : values) {
    if (v.empty()) continue;
    ++non_null;
    if (text::parse_number(v)) ++numeric;
    if (text::parse_iso_date(v) || (date_header && text::parse_year(v))) ++temporal;
  }
  if (non_null == 0) return ColumnType::nominal;
  const double n = static_cast<double>(non_null);
  if (static_cast<double>(temporal) >= kTypeVoteThreshold * n) return ColumnType::temporal;
  if (static_cast<double>(numeric) >= kTypeVoteThreshold * n) return ColumnType::quantitative;
  return ColumnType::nominal;
}

DataTable load_csv_text(std::string_view source, std::string name) {
  auto records = parse_records(source);
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "CSV input has no header row");

  const auto& header = records.front();
  const size_t width = header.size();
  for (size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != width) {
      throw Error(ErrorCode::RaggedRow, "CSV line " + std::to_string(r + 1) + " has " +
                                            std::to_string(records[r].size()) +
                                            " cells, header has " + std::to_string(width));
    }
  }

  std::vector<Column> columns;
  columns.reserve(width);
  for (size_t c = 0; c < width; ++c) {
    std::vector<std::string> values;
    values.reserve(records.size() - 1);
    for (size_t r = 1; r < records.size(); ++r) values.push_back(records[r][c]);
    columns.push_back({text::trim(header[c]), infer_column_type(header[c], values)});
  }

  std::vector<std::vector<Cell>> rows;
  rows.reserve(records.size() - 1);
  for (size_t r = 1; r < records.size(); ++r) {
    std::vector<Cell> row;
    row.reserve(width);
    for (auto& v : records[r]) row.push_back(Cell::from_text(std::move(v)));
    rows.push_back(std::move(row));
  }
  return DataTable(std::move(name), std::move(columns), std::move(rows));
}

DataTable load_csv(std::istream& source, std::string name) {
  std::ostringstream buf;
  buf << source.rdbuf();
  return load_csv_text(buf.str(), std::move(name));
}

DataTable load_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::string name = path;
  if (auto slash = name.find_last_of("/\\"); slash != std::string::npos) name = name.substr(slash + 1);
  if (auto dot = name.rfind('.'); dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return load_csv(in, name);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos &&
      (field.empty() || (field.front() != ' ' && field.back() != ' '))) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

std::string to_csv(const DataTable& table) {
  std::string out;
  for (size_t c = 0; c < table.n_columns(); ++c) {
    if (c) out += ',';
    out += csv_escape(table.columns()[c].name);
  }
  out += "\r\n";
  for (const auto& row : table.rows()) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_escape(row[c].raw);
    }
    out += "\r\n";
  }
  return out;
}

std::string prompt_snippet(const DataTable& table) {
  std::string out;
  for (const auto& col : table.columns()) {
    out += col.name;
    out += " (";
    out += to_string(col.type);
    out += ")\n";
  }
  const size_t shown = std::min<size_t>(2, table.n_rows());
  for (size_t r = 0; r < shown; ++r) {
    const auto& row = table.rows()[r];
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      // Keep each row on one line inside the prompt.
      std::string v = csv_escape(row[c].raw);
      for (auto& ch : v) {
        if (ch == '\n' || ch == '\r') ch = ' ';
      }
      out += v;
    }
    out += '\n';
  }
  return out;
}

}  // namespace chartpipe
