#include "chartpipe/compiler.h"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "chartpipe/errors.h"
#include "chartpipe/text.h"

namespace chartpipe {

namespace {

constexpr std::string_view kSchemaUrl = "https://vega.github.io/schema/vega-lite/v5.json";

std::string_view vegalite_aggregate(AggregateFn fn) {
  return fn == AggregateFn::average ? "mean" : to_string(fn);
}

bool needs_quantitative(AggregateFn fn) { return fn == AggregateFn::sum || fn == AggregateFn::average; }

void check_aggregation_target(AggregateFn fn, const std::string& column, const DataTable& table) {
  if (needs_quantitative(fn) && table.column(column).type != ColumnType::quantitative) {
    throw Error(ErrorCode::TypeMismatch, std::string(to_string(fn)) + " needs a quantitative column, '" +
                                             column + "' is " +
                                             std::string(to_string(table.column(column).type)));
  }
}

Json number_value(double v) {
  if (std::floor(v) == v && std::fabs(v) < 9e15) return static_cast<std::int64_t>(v);
  return v;
}

Json cell_value(const Cell& cell, ColumnType type) {
  if (cell.is_null()) return nullptr;
  if (type == ColumnType::quantitative && cell.number) return number_value(*cell.number);
  return cell.raw;
}

Json inline_values(const DataTable& table) {
  Json values = Json::array();
  for (const auto& row : table.rows()) {
    Json obj = Json::object();
    for (size_t c = 0; c < row.size(); ++c) {
      obj[table.columns()[c].name] = cell_value(row[c], table.columns()[c].type);
    }
    values.push_back(std::move(obj));
  }
  return values;
}

Json channel(const FieldRef& f, const DataTable& table) {
  Json ch = Json::object();
  ch["field"] = table.column(f.column).name;
  ch["type"] = std::string(to_string(field_type(f, table)));
  if (f.aggregation) ch["aggregate"] = std::string(vegalite_aggregate(*f.aggregation));
  return ch;
}

Json literal_value(const Literal& lit, ColumnType type) {
  if (lit.is_number()) return number_value(lit.number());
  if (type == ColumnType::quantitative) {
    if (auto v = text::parse_number(lit.str())) return number_value(*v);
  }
  return lit.str();
}

const char* predicate_key(Predicate p) {
  switch (p) {
    case Predicate::eq:
    case Predicate::ne: return "equal";
    case Predicate::gt: return "gt";
    case Predicate::lt: return "lt";
    case Predicate::ge: return "gte";
    case Predicate::le: return "lte";
  }
  return "equal";
}

Json condition_predicate(const Condition& c, const DataTable& table) {
  const Column& col = table.column(c.column);
  Json pred = Json::object();
  pred["field"] = col.name;
  Json value;
  if (col.type == ColumnType::temporal) {
    std::optional<text::IsoDate> date;
    if (!c.literal.is_number()) date = text::parse_iso_date(c.literal.str());
    if (date) {
      value = Json{{"year", date->year}, {"month", date->month}, {"date", date->day}};
    } else {
      const auto year = c.literal.is_number() ? std::optional<double>(c.literal.number())
                                              : text::parse_number(c.literal.str());
      if (year && std::floor(*year) == *year) {
        pred["timeUnit"] = "year";
        value = Json{{"year", static_cast<int>(*year)}};
      } else {
        value = literal_value(c.literal, col.type);
      }
    }
  } else {
    value = literal_value(c.literal, col.type);
  }
  pred[predicate_key(c.op)] = std::move(value);
  if (c.op == Predicate::ne) return Json{{"not", std::move(pred)}};
  return pred;
}

void flatten_predicates(const FilterExpr& e, FilterExpr::Kind kind, const DataTable& table, Json& out) {
  if (e.kind() == kind) {
    flatten_predicates(e.lhs(), kind, table, out);
    flatten_predicates(e.rhs(), kind, table, out);
  } else {
    out.push_back(filter_predicate(e, table));
  }
}

bool contains_ci(const std::vector<std::string>& list, const std::string& name) {
  return std::any_of(list.begin(), list.end(), [&](const std::string& s) { return text::iequals(s, name); });
}

template <typename T>
const T* find_answer(const std::vector<StepAnswer>& answers) {
  for (const auto& a : answers) {
    if (auto p = std::get_if<T>(&a)) return p;
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(ChartType t) {
  switch (t) {
    case ChartType::bar: return "bar";
    case ChartType::stacked_bar: return "stacked_bar";
    case ChartType::line: return "line";
    case ChartType::grouped_line: return "grouped_line";
    case ChartType::scatter: return "scatter";
    case ChartType::grouped_scatter: return "grouped_scatter";
    case ChartType::pie: return "pie";
  }
  return "bar";
}

ColumnType field_type(const FieldRef& field, const DataTable& table) {
  const ColumnType base = table.column(field.column).type;
  if (!field.aggregation) return base;
  switch (*field.aggregation) {
    case AggregateFn::max:
    case AggregateFn::min:
      return base == ColumnType::temporal ? ColumnType::temporal : ColumnType::quantitative;
    default:
      return ColumnType::quantitative;
  }
}

ChartType resolve_chart_type(const VisSpec& spec, const DataTable& table) {
  const bool grouped = spec.color.has_value();
  switch (spec.mark) {
    case Mark::bar: return grouped ? ChartType::stacked_bar : ChartType::bar;
    case Mark::line: return grouped ? ChartType::grouped_line : ChartType::line;
    case Mark::scatter: return grouped ? ChartType::grouped_scatter : ChartType::scatter;
    case Mark::pie: break;
  }
  if (grouped) {
    throw Error(ErrorCode::InvalidCombination, "a pie chart cannot carry a color field");
  }
  const ColumnType xt = field_type(spec.x, table);
  const ColumnType yt = field_type(spec.y, table);
  if (spec.x.aggregation || xt != ColumnType::nominal || yt != ColumnType::quantitative) {
    throw Error(ErrorCode::InvalidCombination,
                "a pie chart needs a nominal category on x and a quantitative value on y, got " +
                    std::string(to_string(xt)) + " / " + std::string(to_string(yt)));
  }
  return ChartType::pie;
}

void validate_spec(const VisSpec& spec, const DataTable& table) {
  for (const FieldRef* f : {&spec.x, &spec.y}) {
    table.column_index(f->column);
    if (f->aggregation) check_aggregation_target(*f->aggregation, f->column, table);
  }
  if (spec.color) table.column_index(*spec.color);
  if (spec.filter) {
    if (auto err = validate_filter(*spec.filter, table)) throw *err;
  }
  resolve_chart_type(spec, table);
}

Json filter_predicate(const FilterExpr& expr, const DataTable& table) {
  if (expr.kind() == FilterExpr::Kind::condition) return condition_predicate(expr.cond(), table);
  Json items = Json::array();
  flatten_predicates(expr, expr.kind(), table, items);
  return Json{{expr.kind() == FilterExpr::Kind::all_of ? "and" : "or", std::move(items)}};
}

Json compile_vegalite(const VisSpec& spec, const DataTable& table, const CompileOptions& options) {
  validate_spec(spec, table);
  const ChartType type = resolve_chart_type(spec, table);

  Json doc = Json::object();
  doc["$schema"] = kSchemaUrl;
  if (options.data_url.empty()) {
    doc["data"] = Json{{"values", inline_values(table)}};
  } else {
    doc["data"] = Json{{"url", options.data_url}, {"format", Json{{"type", "csv"}}}};
  }
  if (spec.filter) {
    doc["transform"] = Json::array({Json{{"filter", filter_predicate(*spec.filter, table)}}});
  }

  Json enc = Json::object();
  if (type == ChartType::pie) {
    doc["mark"] = "arc";
    enc["theta"] = channel(spec.y, table);
    Json color = channel(spec.x, table);
    if (spec.sort && spec.sort->axis == Axis::x) {
      color["sort"] = spec.sort->order == SortOrder::asc ? "ascending" : "descending";
    }
    enc["color"] = std::move(color);
    if (spec.sort && spec.sort->axis == Axis::y) {
      Json order = channel(spec.y, table);
      order["sort"] = spec.sort->order == SortOrder::asc ? "ascending" : "descending";
      enc["order"] = std::move(order);
    }
  } else {
    doc["mark"] = spec.mark == Mark::scatter ? "point" : std::string(to_string(spec.mark));
    Json x = channel(spec.x, table);
    if (spec.sort) {
      const bool desc = spec.sort->order == SortOrder::desc;
      if (spec.sort->axis == Axis::y) x["sort"] = desc ? "-y" : "y";
      else x["sort"] = desc ? "descending" : "ascending";
    }
    enc["x"] = std::move(x);
    enc["y"] = channel(spec.y, table);
    if (spec.color) {
      const Column& col = table.column(*spec.color);
      enc["color"] = Json{{"field", col.name}, {"type", std::string(to_string(col.type))}};
    }
  }
  doc["encoding"] = std::move(enc);
  return doc;
}

std::vector<StepAnswer> extract_steps(const VisSpec& spec) {
  ColumnsAnswer cols;
  auto add_col = [&](const std::string& c) {
    if (!contains_ci(cols.columns, c)) cols.columns.push_back(c);
  };
  add_col(spec.x.column);
  add_col(spec.y.column);
  if (spec.color) add_col(*spec.color);

  AggregationsAnswer aggs;
  for (const FieldRef* f : {&spec.x, &spec.y}) {
    if (!f->aggregation) continue;
    Aggregation a{*f->aggregation, f->column};
    const bool dup = std::any_of(aggs.items.begin(), aggs.items.end(), [&](const Aggregation& b) {
      return b.fn == a.fn && text::iequals(b.column, a.column);
    });
    if (!dup) aggs.items.push_back(std::move(a));
  }

  FilterAnswer filter{spec.filter, spec.filter ? to_string(*spec.filter) : "none"};
  return {cols, filter, aggs, MarkAnswer{spec.mark}, EncodingAnswer{spec.x, spec.y, spec.color},
          SortAnswer{spec.sort}};
}

VisSpec assemble_spec(const std::vector<StepAnswer>& answers) {
  if (answers.size() != 6) {
    throw Error(ErrorCode::InvalidArgument, "a chart needs all six step answers, got " +
                                                std::to_string(answers.size()));
  }
  for (size_t i = 0; i < 6; ++i) {
    if (answers[i].index() != i) {
      throw Error(ErrorCode::InvalidArgument, "answer " + std::to_string(i + 1) + " is for step " +
                                                  std::to_string(answers[i].index() + 1));
    }
  }
  const auto& enc = std::get<EncodingAnswer>(answers[4]);
  VisSpec spec;
  spec.mark = std::get<MarkAnswer>(answers[3]).mark;
  spec.x = enc.x;
  spec.y = enc.y;
  spec.color = enc.color;
  spec.filter = std::get<FilterAnswer>(answers[1]).expr;
  spec.sort = std::get<SortAnswer>(answers[5]).sort;
  return spec;
}

void check_chain_consistency(const std::vector<StepAnswer>& prior, const StepAnswer& next,
                             const DataTable& table) {
  const auto* cols = find_answer<ColumnsAnswer>(prior);
  auto require_selected = [&](const std::string& column, std::string_view role) {
    if (cols && !contains_ci(cols->columns, column)) {
      throw Error(ErrorCode::UnknownColumn,
                  std::string(role) + " column '" + column + "' is not among the selected columns");
    }
  };

  if (const auto* aggs = std::get_if<AggregationsAnswer>(&next)) {
    for (const auto& a : aggs->items) {
      require_selected(a.column, "aggregated");
      check_aggregation_target(a.fn, a.column, table);
    }
    return;
  }

  const auto* enc = std::get_if<EncodingAnswer>(&next);
  if (!enc) return;
  require_selected(enc->x.column, "x");
  require_selected(enc->y.column, "y");
  if (enc->color) require_selected(*enc->color, "color");

  const auto* aggs = find_answer<AggregationsAnswer>(prior);
  for (const FieldRef* f : {&enc->x, &enc->y}) {
    if (!f->aggregation) continue;
    const bool declared = aggs && std::any_of(aggs->items.begin(), aggs->items.end(), [&](const Aggregation& a) {
                            return a.fn == *f->aggregation && text::iequals(a.column, f->column);
                          });
    if (!declared) {
      throw Error(ErrorCode::InvalidCombination,
                  "encoded field " + to_string(*f) + " was not declared as an aggregation");
    }
  }
  if (const auto* mark = find_answer<MarkAnswer>(prior)) {
    VisSpec partial;
    partial.mark = mark->mark;
    partial.x = enc->x;
    partial.y = enc->y;
    partial.color = enc->color;
    resolve_chart_type(partial, table);
  }
}

}  // namespace chartpipe
