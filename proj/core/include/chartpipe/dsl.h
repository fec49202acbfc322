#pragma once

// Answer templates for the six sub-tasks and the fully resolved chart spec.
//
//   step 1  Major Genre, Worldwide Gross
//   step 2  Release Year >= 2000            | none
//   step 3  average Worldwide Gross         | none
//   step 4  bar                             (bar | pie | line | scatter)
//   step 5  x: Major Genre, y: average(Worldwide Gross), color: none
//   step 6  y desc                          | none
//
// docs/dsl-grammar.md has the EBNF.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chartpipe/filter.h"
#include "chartpipe/table.h"

namespace chartpipe {

enum class StepIndex {
  select_columns = 1,
  filter_rows = 2,
  add_aggregations = 3,
  choose_mark = 4,
  determine_encoding = 5,
  add_sort = 6,
};

inline constexpr std::array<StepIndex, 6> kAllSteps{
    StepIndex::select_columns, StepIndex::filter_rows,        StepIndex::add_aggregations,
    StepIndex::choose_mark,    StepIndex::determine_encoding, StepIndex::add_sort};

inline int step_number(StepIndex s) { return static_cast<int>(s); }
StepIndex step_from_number(int n);
std::string_view step_name(StepIndex s);
/// Steps whose answer may legitimately be `none`.
bool step_is_optional(StepIndex s);

enum class AggregateFn { count, average, sum, max, min };
enum class Mark { bar, pie, line, scatter };
enum class Axis { x, y };
enum class SortOrder { asc, desc };

std::string_view to_string(AggregateFn fn);
std::string_view to_string(Mark m);
std::string_view to_string(Axis a);
std::string_view to_string(SortOrder o);
std::optional<AggregateFn> aggregate_from_string(std::string_view s);
std::optional<Mark> mark_from_string(std::string_view s);
/// Like mark_from_string but also takes Vega-Lite's `point` for scatter and
/// `arc` for pie. For chart-config edits and external slot files; the step
/// answers themselves stay strict.
std::optional<Mark> mark_from_alias(std::string_view s);

struct FieldRef {
  std::string column;
  std::optional<AggregateFn> aggregation;

  bool operator==(const FieldRef&) const = default;
};

struct Aggregation {
  AggregateFn fn = AggregateFn::count;
  std::string column;

  bool operator==(const Aggregation&) const = default;
};

struct SortSpec {
  Axis axis = Axis::y;
  SortOrder order = SortOrder::desc;

  bool operator==(const SortSpec&) const = default;
};

struct ColumnsAnswer {
  std::vector<std::string> columns;
  bool operator==(const ColumnsAnswer&) const = default;
};

struct FilterAnswer {
  std::optional<FilterExpr> expr;
  /// Text as received (model output or user edit); not part of equality.
  std::string raw;

  bool operator==(const FilterAnswer& other) const { return expr == other.expr; }
};

struct AggregationsAnswer {
  /// Empty means `none`.
  std::vector<Aggregation> items;
  bool operator==(const AggregationsAnswer&) const = default;
};

struct MarkAnswer {
  Mark mark = Mark::bar;
  bool operator==(const MarkAnswer&) const = default;
};

struct EncodingAnswer {
  FieldRef x;
  FieldRef y;
  std::optional<std::string> color;
  bool operator==(const EncodingAnswer&) const = default;
};

struct SortAnswer {
  std::optional<SortSpec> sort;
  bool operator==(const SortAnswer&) const = default;
};

using StepAnswer = std::variant<ColumnsAnswer, FilterAnswer, AggregationsAnswer, MarkAnswer,
                                EncodingAnswer, SortAnswer>;

/// Which step an answer belongs to (the variant index plus one).
StepIndex step_of(const StepAnswer& answer);

/// The eight semantic slots compared by the evaluation metrics.
struct VisSpec {
  Mark mark = Mark::bar;
  FieldRef x;
  FieldRef y;
  std::optional<std::string> color;
  std::optional<FilterExpr> filter;
  std::optional<SortSpec> sort;

  bool operator==(const VisSpec&) const = default;
};

/// Parses one step's answer text against the table. Column matching is
/// case-insensitive and the table's spelling is stored. Throws
/// SyntaxError, UnknownColumn, UnknownKeyword or TypeMismatch.
StepAnswer parse_step_answer(StepIndex step, std::string_view text, const DataTable& table);

std::string serialize_step_answer(const StepAnswer& answer);

/// Checks an already-built answer against the table: column existence,
/// the 1-3 distinct columns rule, no duplicate aggregations, filter types.
/// Throws like parse_step_answer.
void validate_step_answer(const StepAnswer& answer, const DataTable& table);

std::string to_string(const FieldRef& f);
FieldRef parse_field_ref(std::string_view text, const DataTable& table);
std::optional<SortSpec> parse_sort(std::string_view text);
std::string to_string(const std::optional<SortSpec>& s);

using EvalSequence = std::array<std::string, 8>;

/// [mark][x field][x aggregation][y field][y aggregation][color][filter][sort],
/// lowercased, one whitespace-free token each; absent parts become `none`.
/// Filter conditions render as `column_token op literal` with quotes and
/// whitespace dropped, joined by `&` / `|`. Unless strict_filter_order is
/// set, operands of and/or chains are sorted first.
EvalSequence to_eval_sequence(const VisSpec& spec, bool strict_filter_order = false);

/// The filter slot of the evaluation sequence on its own.
std::string filter_token(const FilterExpr& expr, bool strict_filter_order = false);

/// Lowercase; whitespace runs become `_`.
std::string canonical_column_token(std::string_view column);

}  // namespace chartpipe
