#include "chartpipe/dsl.h"

#include <algorithm>
#include <regex>

#include "chartpipe/errors.h"
#include "chartpipe/text.h"

namespace chartpipe {

namespace {

std::string resolve_column(std::string_view name, const DataTable& table) {
  return table.columns()[table.column_index(text::trim(name))].name;
}

// Splits a comma list of column names. A piece that does not name a column
// is glued to the following piece(s) so that names containing commas still
// resolve.
std::vector<std::string> split_column_list(std::string_view list, const DataTable& table) {
  const auto pieces = text::split(list, ',');
  std::vector<std::string> out;
  size_t i = 0;
  while (i < pieces.size()) {
    std::string acc;
    std::optional<size_t> last;
    for (size_t j = i; j < pieces.size(); ++j) {
      if (j > i) acc += ',';
      acc += pieces[j];
      if (table.find_column(text::trim(acc))) {
        last = j;
        break;
      }
    }
    if (!last) {
      const std::string name = text::trim(pieces[i]);
      if (name.empty()) throw Error(ErrorCode::SyntaxError, "empty entry in column list");
      resolve_column(name, table);  // throws UnknownColumn
    }
    out.push_back(resolve_column(acc, table));
    i = *last + 1;
  }
  return out;
}

void check_columns(const std::vector<std::string>& cols) {
  if (cols.empty() || cols.size() > 3) {
    throw Error(ErrorCode::SyntaxError,
                "expected 1-3 selected columns, got " + std::to_string(cols.size()));
  }
  for (size_t i = 0; i < cols.size(); ++i) {
    for (size_t j = i + 1; j < cols.size(); ++j) {
      if (text::iequals(cols[i], cols[j])) {
        throw Error(ErrorCode::SyntaxError, "column '" + cols[i] + "' selected twice");
      }
    }
  }
}

void check_aggregations(const std::vector<Aggregation>& items) {
  for (size_t i = 0; i < items.size(); ++i) {
    for (size_t j = i + 1; j < items.size(); ++j) {
      if (items[i].fn == items[j].fn && text::iequals(items[i].column, items[j].column)) {
        throw Error(ErrorCode::SyntaxError, "aggregation '" + std::string(to_string(items[i].fn)) +
                                                " " + items[i].column + "' listed twice");
      }
    }
  }
}

bool is_none(std::string_view t) { return text::iequals(text::trim(t), "none"); }

ColumnsAnswer parse_columns(std::string_view t, const DataTable& table) {
  ColumnsAnswer a{split_column_list(t, table)};
  check_columns(a.columns);
  return a;
}

AggregationsAnswer parse_aggregations(std::string_view t, const DataTable& table) {
  AggregationsAnswer a;
  if (is_none(t)) return a;
  const auto pieces = text::split(t, ',');
  size_t i = 0;
  while (i < pieces.size()) {
    const std::string first = text::trim(pieces[i]);
    const auto space = first.find_first_of(" \t");
    if (first.empty() || space == std::string::npos) {
      throw Error(ErrorCode::SyntaxError, "expected 'aggr column', got '" + first + "'");
    }
    const std::string fn_word = first.substr(0, space);
    auto fn = aggregate_from_string(fn_word);
    if (!fn) throw Error(ErrorCode::UnknownKeyword, "unknown aggregation '" + fn_word + "'");
    // Column names may contain commas: extend the term until it resolves.
    std::string column = first.substr(space + 1);
    size_t j = i;
    while (!table.find_column(text::trim(column)) && j + 1 < pieces.size()) {
      const std::string longer = column + "," + pieces[j + 1];
      bool later = false;
      for (size_t k = j + 1; k < pieces.size() && !later; ++k) {
        std::string probe = column;
        for (size_t m = j + 1; m <= k; ++m) probe += "," + pieces[m];
        later = table.find_column(text::trim(probe)).has_value();
      }
      if (!later) break;
      column = longer;
      ++j;
    }
    a.items.push_back({*fn, resolve_column(column, table)});
    i = j + 1;
  }
  check_aggregations(a.items);
  return a;
}

MarkAnswer parse_mark(std::string_view t) {
  const std::string word = text::trim(t);
  if (word.empty()) throw Error(ErrorCode::SyntaxError, "empty mark");
  auto m = mark_from_string(word);
  if (!m) throw Error(ErrorCode::UnknownKeyword, "unknown mark '" + word + "'");
  return {*m};
}

EncodingAnswer parse_encoding(std::string_view t, const DataTable& table) {
  static const std::regex kPattern(
      R"(^\s*x\s*:\s*(.+?)\s*,\s*y\s*:\s*(.+?)\s*,\s*color\s*:\s*(.+?)\s*$)",
      std::regex::ECMAScript | std::regex::icase);
  const std::string s(t);
  std::smatch m;
  if (!std::regex_match(s, m, kPattern)) {
    throw Error(ErrorCode::SyntaxError, "expected 'x: <field>, y: <field>, color: <column|none>'");
  }
  EncodingAnswer a;
  a.x = parse_field_ref(m[1].str(), table);
  a.y = parse_field_ref(m[2].str(), table);
  if (!is_none(m[3].str())) a.color = resolve_column(m[3].str(), table);
  return a;
}

std::string filter_condition_token(const Condition& c) {
  std::string lit = c.literal.is_number() ? text::format_number(c.literal.number()) : c.literal.str();
  std::string out = canonical_column_token(c.column) + std::string(to_string(c.op));
  for (char ch : text::to_lower(lit)) {
    if (ch == '\'' || ch == '"' || ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') continue;
    out.push_back(ch);
  }
  return out;
}

void filter_chain_tokens(const FilterExpr& e, FilterExpr::Kind kind, bool strict,
                         std::vector<std::string>& out) {
  if (e.kind() == kind) {
    filter_chain_tokens(e.lhs(), kind, strict, out);
    filter_chain_tokens(e.rhs(), kind, strict, out);
  } else {
    out.push_back(filter_token(e, strict));
  }
}

}  // namespace

StepIndex step_from_number(int n) {
  if (n < 1 || n > 6) throw Error(ErrorCode::InvalidArgument, "step must be 1-6, got " + std::to_string(n));
  return static_cast<StepIndex>(n);
}

std::string_view step_name(StepIndex s) {
  switch (s) {
    case StepIndex::select_columns: return "select columns";
    case StepIndex::filter_rows: return "filter rows";
    case StepIndex::add_aggregations: return "add aggregations";
    case StepIndex::choose_mark: return "choose mark";
    case StepIndex::determine_encoding: return "determine encoding";
    case StepIndex::add_sort: return "add sort";
  }
  return "";
}

bool step_is_optional(StepIndex s) {
  return s == StepIndex::filter_rows || s == StepIndex::add_aggregations || s == StepIndex::add_sort;
}

std::string_view to_string(AggregateFn fn) {
  switch (fn) {
    case AggregateFn::count: return "count";
    case AggregateFn::average: return "average";
    case AggregateFn::sum: return "sum";
    case AggregateFn::max: return "max";
    case AggregateFn::min: return "min";
  }
  return "";
}

std::string_view to_string(Mark m) {
  switch (m) {
    case Mark::bar: return "bar";
    case Mark::pie: return "pie";
    case Mark::line: return "line";
    case Mark::scatter: return "scatter";
  }
  return "";
}

std::string_view to_string(Axis a) { return a == Axis::x ? "x" : "y"; }
std::string_view to_string(SortOrder o) { return o == SortOrder::asc ? "asc" : "desc"; }

std::optional<AggregateFn> aggregate_from_string(std::string_view s) {
  const std::string w = text::to_lower(text::trim(s));
  for (auto fn : {AggregateFn::count, AggregateFn::average, AggregateFn::sum, AggregateFn::max,
                  AggregateFn::min}) {
    if (w == to_string(fn)) return fn;
  }
  return std::nullopt;
}

std::optional<Mark> mark_from_string(std::string_view s) {
  const std::string w = text::to_lower(text::trim(s));
  for (auto m : {Mark::bar, Mark::pie, Mark::line, Mark::scatter}) {
    if (w == to_string(m)) return m;
  }
  return std::nullopt;
}

std::optional<Mark> mark_from_alias(std::string_view s) {
  const std::string w = text::to_lower(text::trim(s));
  if (w == "point") return Mark::scatter;
  if (w == "arc") return Mark::pie;
  return mark_from_string(w);
}

StepIndex step_of(const StepAnswer& answer) { return static_cast<StepIndex>(answer.index() + 1); }

FieldRef parse_field_ref(std::string_view text, const DataTable& table) {
  const std::string t = text::trim(text);
  if (t.empty()) throw Error(ErrorCode::SyntaxError, "empty field reference");
  if (auto idx = table.find_column(t)) return {table.columns()[*idx].name, std::nullopt};

  const auto open = t.find('(');
  if (open != std::string::npos && t.back() == ')') {
    const std::string fn_word = text::trim(t.substr(0, open));
    const std::string inner = text::trim(t.substr(open + 1, t.size() - open - 2));
    auto fn = aggregate_from_string(fn_word);
    if (!fn) {
      if (fn_word.find_first_of(" \t") == std::string::npos && !fn_word.empty()) {
        throw Error(ErrorCode::UnknownKeyword, "unknown aggregation '" + fn_word + "'");
      }
      throw Error(ErrorCode::UnknownColumn, "column '" + t + "' not found");
    }
    if (inner == "*") {
      throw Error(ErrorCode::SyntaxError, "count(*) is not supported; name a column");
    }
    return {resolve_column(inner, table), fn};
  }
  throw Error(ErrorCode::UnknownColumn, "column '" + t + "' not found in table '" + table.name() + "'");
}

std::string to_string(const FieldRef& f) {
  if (!f.aggregation) return f.column;
  return std::string(to_string(*f.aggregation)) + "(" + f.column + ")";
}

std::optional<SortSpec> parse_sort(std::string_view text) {
  if (is_none(text)) return std::nullopt;
  const auto words = text::split_ws(text);
  if (words.size() != 2) throw Error(ErrorCode::SyntaxError, "expected '<x|y> <asc|desc>' or 'none'");
  SortSpec s;
  const std::string axis = text::to_lower(words[0]);
  const std::string order = text::to_lower(words[1]);
  if (axis == "x") s.axis = Axis::x;
  else if (axis == "y") s.axis = Axis::y;
  else throw Error(ErrorCode::UnknownKeyword, "unknown sort axis '" + words[0] + "'");
  if (order == "asc") s.order = SortOrder::asc;
  else if (order == "desc") s.order = SortOrder::desc;
  else throw Error(ErrorCode::UnknownKeyword, "unknown sort order '" + words[1] + "'");
  return s;
}

std::string to_string(const std::optional<SortSpec>& s) {
  if (!s) return "none";
  return std::string(to_string(s->axis)) + " " + std::string(to_string(s->order));
}

StepAnswer parse_step_answer(StepIndex step, std::string_view text, const DataTable& table) {
  if (text::trim(text).empty()) {
    throw Error(ErrorCode::SyntaxError, "empty answer for step '" + std::string(step_name(step)) + "'");
  }
  switch (step) {
    case StepIndex::select_columns: return parse_columns(text, table);
    case StepIndex::filter_rows: return FilterAnswer{parse_filter(text, table), text::trim(text)};
    case StepIndex::add_aggregations: return parse_aggregations(text, table);
    case StepIndex::choose_mark: return parse_mark(text);
    case StepIndex::determine_encoding: return parse_encoding(text, table);
    case StepIndex::add_sort: return SortAnswer{parse_sort(text)};
  }
  throw Error(ErrorCode::InvalidArgument, "bad step");
}

std::string serialize_step_answer(const StepAnswer& answer) {
  struct Visitor {
    std::string operator()(const ColumnsAnswer& a) const { return text::join(a.columns, ", "); }
    std::string operator()(const FilterAnswer& a) const { return a.expr ? to_string(*a.expr) : "none"; }
    std::string operator()(const AggregationsAnswer& a) const {
      if (a.items.empty()) return "none";
      std::vector<std::string> terms;
      for (const auto& it : a.items) terms.push_back(std::string(to_string(it.fn)) + " " + it.column);
      return text::join(terms, ", ");
    }
    std::string operator()(const MarkAnswer& a) const { return std::string(to_string(a.mark)); }
    std::string operator()(const EncodingAnswer& a) const {
      return "x: " + to_string(a.x) + ", y: " + to_string(a.y) + ", color: " + a.color.value_or("none");
    }
    std::string operator()(const SortAnswer& a) const { return to_string(a.sort); }
  };
  return std::visit(Visitor{}, answer);
}

void validate_step_answer(const StepAnswer& answer, const DataTable& table) {
  struct Visitor {
    const DataTable& table;
    void operator()(const ColumnsAnswer& a) const {
      for (const auto& c : a.columns) table.column_index(c);
      check_columns(a.columns);
    }
    void operator()(const FilterAnswer& a) const {
      if (!a.expr) return;
      if (auto err = validate_filter(*a.expr, table)) throw *err;
    }
    void operator()(const AggregationsAnswer& a) const {
      for (const auto& it : a.items) table.column_index(it.column);
      check_aggregations(a.items);
    }
    void operator()(const MarkAnswer&) const {}
    void operator()(const EncodingAnswer& a) const {
      table.column_index(a.x.column);
      table.column_index(a.y.column);
      if (a.color) table.column_index(*a.color);
    }
    void operator()(const SortAnswer&) const {}
  };
  std::visit(Visitor{table}, answer);
}

std::string canonical_column_token(std::string_view column) {
  std::string out;
  for (const auto& w : text::split_ws(column)) {
    if (!out.empty()) out += '_';
    out += text::to_lower(w);
  }
  return out.empty() ? "none" : out;
}

std::string filter_token(const FilterExpr& expr, bool strict_filter_order) {
  if (expr.kind() == FilterExpr::Kind::condition) return filter_condition_token(expr.cond());
  std::vector<std::string> parts;
  filter_chain_tokens(expr, expr.kind(), strict_filter_order, parts);
  if (!strict_filter_order) std::sort(parts.begin(), parts.end());
  return text::join(parts, expr.kind() == FilterExpr::Kind::all_of ? "&" : "|");
}

EvalSequence to_eval_sequence(const VisSpec& spec, bool strict_filter_order) {
  auto aggr = [](const FieldRef& f) {
    return f.aggregation ? std::string(to_string(*f.aggregation)) : std::string("none");
  };
  return {
      std::string(to_string(spec.mark)),
      canonical_column_token(spec.x.column),
      aggr(spec.x),
      canonical_column_token(spec.y.column),
      aggr(spec.y),
      spec.color ? canonical_column_token(*spec.color) : "none",
      spec.filter ? filter_token(*spec.filter, strict_filter_order) : "none",
      spec.sort ? std::string(to_string(spec.sort->axis)) + "_" + std::string(to_string(spec.sort->order))
                : "none",
  };
}

}  // namespace chartpipe
