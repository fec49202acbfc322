#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chartpipe/errors.h"
#include "chartpipe/table.h"

namespace chartpipe {

enum class Predicate { eq, ne, gt, lt, ge, le };

std::string_view to_string(Predicate p);
bool is_ordering(Predicate p);

/// Right-hand side of a condition: a bare number or a quoted string.
struct Literal {
  std::variant<double, std::string> value;

  bool is_number() const { return std::holds_alternative<double>(value); }
  double number() const { return std::get<double>(value); }
  const std::string& str() const { return std::get<std::string>(value); }

  bool operator==(const Literal&) const = default;
};

struct Condition {
  std::string column;
  Predicate op = Predicate::eq;
  Literal literal;

  bool operator==(const Condition&) const = default;
};

/// Filter AST: a condition, or an and/or of two sub-expressions. Children
/// are shared and immutable, so copies are cheap and values never alias
/// mutable state.
class FilterExpr {
 public:
  enum class Kind { condition, all_of, any_of };

  static FilterExpr condition(Condition c);
  static FilterExpr both(FilterExpr lhs, FilterExpr rhs);
  static FilterExpr either(FilterExpr lhs, FilterExpr rhs);

  Kind kind() const { return kind_; }
  const Condition& cond() const { return cond_; }
  const FilterExpr& lhs() const { return *lhs_; }
  const FilterExpr& rhs() const { return *rhs_; }

  bool operator==(const FilterExpr& other) const;

 private:
  FilterExpr() = default;

  Kind kind_ = Kind::condition;
  Condition cond_;
  std::shared_ptr<const FilterExpr> lhs_;
  std::shared_ptr<const FilterExpr> rhs_;
};

using RowMask = std::vector<bool>;

/// Grammar only: no table lookups. `none` yields nullopt. `and` binds
/// tighter than `or`, both left-associative, no parentheses.
std::optional<FilterExpr> parse_filter_syntax(std::string_view text);

/// Parses, rewrites column names to the table's spelling, then validates.
/// Throws SyntaxError, UnknownColumn or TypeMismatch.
std::optional<FilterExpr> parse_filter(std::string_view text, const DataTable& table);

/// First violation of the column/type rules, if any.
std::optional<Error> validate_filter(const FilterExpr& expr, const DataTable& table);

/// Row mask of length n_rows. Null cells make their condition false. The
/// expression must already be valid for the table.
RowMask eval_filter(const FilterExpr& expr, const DataTable& table);

/// Canonical text: conditions as `Column op literal`, strings single-quoted
/// (double-quoted if they contain a single quote), numbers in shortest form.
std::string to_string(const FilterExpr& expr);

/// Order-insensitive key: operands of chained and/or are sorted, so
/// `a and b` and `b and a` share a key. Column names are lowercased.
std::string commutative_key(const FilterExpr& expr);

/// Every column mentioned by the expression, in order of appearance.
std::vector<std::string> filter_columns(const FilterExpr& expr);

/// One condition against one cell.
bool condition_holds(const Cell& cell, ColumnType type, Predicate op, const Literal& lit);

}  // namespace chartpipe
