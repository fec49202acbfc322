#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "chartpipe/dsl.h"
#include "chartpipe/json.h"
#include "chartpipe/table.h"

namespace chartpipe {

enum class ChartType { bar, stacked_bar, line, grouped_line, scatter, grouped_scatter, pie };

std::string_view to_string(ChartType t);

/// Base mark plus color channel decides the chart type. Throws
/// InvalidCombination for a pie that is not exactly one nominal category
/// (x) against one quantitative value (y), or a pie with a color field.
ChartType resolve_chart_type(const VisSpec& spec, const DataTable& table);

/// Channel type of a possibly aggregated field.
ColumnType field_type(const FieldRef& field, const DataTable& table);

/// Full check of a spec against a table: columns exist, the filter is
/// well-typed, sum/average target quantitative columns and the chart type
/// resolves. Throws UnknownColumn, TypeMismatch or InvalidCombination.
void validate_spec(const VisSpec& spec, const DataTable& table);

struct CompileOptions {
  /// Empty: embed rows as inline values. Otherwise reference this URL.
  std::string data_url;
};

/// Vega-Lite v5 document. Filters become a transform with field
/// predicates, `average` is emitted as `mean`, scatter marks as `point`,
/// pies as `arc` with theta/color channels. Sorting by y orders the x axis
/// by the y measure (`"y"` / `"-y"`); sorting by x orders x by its own
/// values.
Json compile_vegalite(const VisSpec& spec, const DataTable& table, const CompileOptions& options = {});

/// Vega-Lite predicate for one filter expression.
Json filter_predicate(const FilterExpr& expr, const DataTable& table);

/// Inverse of assemble_spec: the six step answers that produce `spec`.
/// Columns are the distinct fields on x, y and color; aggregations are the
/// (fn, column) pairs used on x and y.
std::vector<StepAnswer> extract_steps(const VisSpec& spec);

/// Spec from six answers in step order.
VisSpec assemble_spec(const std::vector<StepAnswer>& answers);

/// Checks that `next` agrees with the answers already chosen for earlier
/// steps: aggregations and encoded fields only use selected columns,
/// aggregated fields were declared in step 3, and the encoding resolves to
/// a valid chart type for the chosen mark. Throws on violation.
void check_chain_consistency(const std::vector<StepAnswer>& prior, const StepAnswer& next,
                             const DataTable& table);

}  // namespace chartpipe
