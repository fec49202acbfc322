#include "chartpipe/filter.h"

#include <algorithm>
#include <cmath>

#include "chartpipe/text.h"

namespace chartpipe {

namespace {

enum class TokKind { word, string, op, end };

struct Token {
  TokKind kind = TokKind::end;
  std::string text;
  size_t begin = 0;
  size_t end = 0;
};

bool is_op_char(char c) { return c == '=' || c == '!' || c == '<' || c == '>'; }
bool is_quote(char c) { return c == '\'' || c == '"'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    Token tok;
    tok.begin = i;
    if (is_quote(c)) {
      tok.kind = TokKind::string;
      ++i;
      bool closed = false;
      while (i < src.size()) {
        if (src[i] == c) {
          if (i + 1 < src.size() && src[i + 1] == c) {
            tok.text.push_back(c);
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        tok.text.push_back(src[i++]);
      }
      if (!closed) throw Error(ErrorCode::SyntaxError, "unterminated string literal in filter");
    } else if (is_op_char(c)) {
      tok.kind = TokKind::op;
      while (i < src.size() && is_op_char(src[i])) tok.text.push_back(src[i++]);
    } else {
      tok.kind = TokKind::word;
      while (i < src.size() && !is_space(src[i]) && !is_quote(src[i]) && !is_op_char(src[i])) {
        tok.text.push_back(src[i++]);
      }
    }
    tok.end = i;
    out.push_back(std::move(tok));
  }
  Token end;
  end.begin = end.end = src.size();
  out.push_back(end);
  return out;
}

Predicate predicate_from(std::string_view op) {
  if (op == "=" || op == "==") return Predicate::eq;
  if (op == "!=" || op == "<>") return Predicate::ne;
  if (op == ">") return Predicate::gt;
  if (op == "<") return Predicate::lt;
  if (op == ">=") return Predicate::ge;
  if (op == "<=") return Predicate::le;
  throw Error(ErrorCode::SyntaxError, "invalid comparison operator '" + std::string(op) + "'");
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src), toks_(lex(src)) {}

  FilterExpr parse() {
    FilterExpr e = parse_or();
    if (peek().kind != TokKind::end) {
      throw Error(ErrorCode::SyntaxError, "unexpected '" + peek().text + "' in filter");
    }
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  bool at_keyword(std::string_view kw) const {
    return peek().kind == TokKind::word && text::iequals(peek().text, kw);
  }

  FilterExpr parse_or() {
    FilterExpr lhs = parse_and();
    while (at_keyword("or")) {
      ++pos_;
      lhs = FilterExpr::either(std::move(lhs), parse_and());
    }
    return lhs;
  }

  FilterExpr parse_and() {
    FilterExpr lhs = parse_condition();
    while (at_keyword("and")) {
      ++pos_;
      lhs = FilterExpr::both(std::move(lhs), parse_condition());
    }
    return lhs;
  }

  FilterExpr parse_condition() {
    const size_t first = pos_;
    while (peek().kind == TokKind::word) ++pos_;
    if (pos_ == first) {
      throw Error(ErrorCode::SyntaxError, peek().kind == TokKind::end
                                              ? "filter ends where a condition was expected"
                                              : "expected a column name before '" + peek().text + "'");
    }
    if (peek().kind != TokKind::op) {
      throw Error(ErrorCode::SyntaxError, "expected a comparison operator in filter");
    }
    Condition c;
    c.column = text::normalize_space(src_.substr(toks_[first].begin, toks_[pos_ - 1].end - toks_[first].begin));
    c.op = predicate_from(peek().text);
    ++pos_;

    const Token& lit = peek();
    if (lit.kind == TokKind::string) {
      c.literal.value = lit.text;
    } else if (lit.kind == TokKind::word) {
      auto num = text::parse_number(lit.text);
      if (!num) {
        throw Error(ErrorCode::SyntaxError,
                    "bare literal '" + lit.text + "' must be a number or a quoted string");
      }
      c.literal.value = *num;
    } else {
      throw Error(ErrorCode::SyntaxError, "expected a literal after '" + std::string(to_string(c.op)) + "'");
    }
    ++pos_;
    return FilterExpr::condition(std::move(c));
  }

  std::string_view src_;
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

std::string literal_text(const Literal& lit) {
  return lit.is_number() ? text::format_number(lit.number()) : lit.str();
}

struct TimePoint {
  int year = 0;
  std::optional<double> ordinal;
};

std::optional<TimePoint> literal_time(const Literal& lit) {
  if (lit.is_number()) {
    const double v = lit.number();
    if (std::floor(v) != v) return std::nullopt;
    return TimePoint{static_cast<int>(v), std::nullopt};
  }
  if (auto d = text::parse_iso_date(lit.str())) return TimePoint{d->year, d->ordinal};
  if (auto y = text::parse_number(lit.str()); y && std::floor(*y) == *y) {
    return TimePoint{static_cast<int>(*y), std::nullopt};
  }
  return std::nullopt;
}

std::optional<double> literal_number(const Literal& lit) {
  if (lit.is_number()) return lit.number();
  return text::parse_number(lit.str());
}

template <typename T>
int three_way(T a, T b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

// Ordered comparison of cell against literal, or nullopt if the two are not
// comparable under the column's type.
std::optional<int> compare(const Cell& cell, ColumnType type, const Literal& lit) {
  switch (type) {
    case ColumnType::temporal: {
      auto t = literal_time(lit);
      if (!t || !cell.year) return std::nullopt;
      if (t->ordinal && cell.day_ordinal) return three_way(*cell.day_ordinal, *t->ordinal);
      return three_way(*cell.year, t->year);
    }
    case ColumnType::quantitative:
    case ColumnType::nominal: {
      auto v = literal_number(lit);
      if (!v || !cell.number) return std::nullopt;
      if (type == ColumnType::nominal && !lit.is_number()) return std::nullopt;
      return three_way(*cell.number, *v);
    }
  }
  return std::nullopt;
}

bool equal(const Cell& cell, ColumnType type, const Literal& lit) {
  if (auto c = compare(cell, type, lit)) return *c == 0;
  return cell.raw == literal_text(lit);
}

void flatten(const FilterExpr& e, FilterExpr::Kind kind, std::vector<std::string>& keys) {
  if (e.kind() == kind) {
    flatten(e.lhs(), kind, keys);
    flatten(e.rhs(), kind, keys);
  } else {
    keys.push_back(commutative_key(e));
  }
}

void collect_columns(const FilterExpr& e, std::vector<std::string>& out) {
  if (e.kind() == FilterExpr::Kind::condition) {
    if (std::find(out.begin(), out.end(), e.cond().column) == out.end()) out.push_back(e.cond().column);
    return;
  }
  collect_columns(e.lhs(), out);
  collect_columns(e.rhs(), out);
}

FilterExpr resolve_columns(const FilterExpr& e, const DataTable& table) {
  switch (e.kind()) {
    case FilterExpr::Kind::condition: {
      Condition c = e.cond();
      c.column = table.columns()[table.column_index(c.column)].name;
      return FilterExpr::condition(std::move(c));
    }
    case FilterExpr::Kind::all_of:
      return FilterExpr::both(resolve_columns(e.lhs(), table), resolve_columns(e.rhs(), table));
    case FilterExpr::Kind::any_of:
      return FilterExpr::either(resolve_columns(e.lhs(), table), resolve_columns(e.rhs(), table));
  }
  return e;
}

std::optional<Error> validate_condition(const Condition& c, const DataTable& table) {
  auto idx = table.find_column(c.column);
  if (!idx) {
    return Error(ErrorCode::UnknownColumn, "filter references unknown column '" + c.column + "'");
  }
  if (!is_ordering(c.op)) return std::nullopt;
  const Column& col = table.columns()[*idx];
  const std::string where = "'" + std::string(to_string(c.op)) + "' on " +
                            std::string(to_string(col.type)) + " column '" + col.name + "'";
  switch (col.type) {
    case ColumnType::nominal:
      return Error(ErrorCode::TypeMismatch, "ordering comparison " + where);
    case ColumnType::quantitative:
      if (!literal_number(c.literal)) {
        return Error(ErrorCode::TypeMismatch, "non-numeric literal for " + where);
      }
      return std::nullopt;
    case ColumnType::temporal:
      if (!literal_time(c.literal)) {
        return Error(ErrorCode::TypeMismatch, "literal is neither a year nor a date for " + where);
      }
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Predicate p) {
  switch (p) {
    case Predicate::eq: return "=";
    case Predicate::ne: return "!=";
    case Predicate::gt: return ">";
    case Predicate::lt: return "<";
    case Predicate::ge: return ">=";
    case Predicate::le: return "<=";
  }
  return "=";
}

bool is_ordering(Predicate p) { return p != Predicate::eq && p != Predicate::ne; }

FilterExpr FilterExpr::condition(Condition c) {
  FilterExpr e;
  e.kind_ = Kind::condition;
  e.cond_ = std::move(c);
  return e;
}

FilterExpr FilterExpr::both(FilterExpr lhs, FilterExpr rhs) {
  FilterExpr e;
  e.kind_ = Kind::all_of;
  e.lhs_ = std::make_shared<const FilterExpr>(std::move(lhs));
  e.rhs_ = std::make_shared<const FilterExpr>(std::move(rhs));
  return e;
}

FilterExpr FilterExpr::either(FilterExpr lhs, FilterExpr rhs) {
  FilterExpr e;
  e.kind_ = Kind::any_of;
  e.lhs_ = std::make_shared<const FilterExpr>(std::move(lhs));
  e.rhs_ = std::make_shared<const FilterExpr>(std::move(rhs));
  return e;
}

bool FilterExpr::operator==(const FilterExpr& other) const {
  if (kind_ != other.kind_) return false;
  if (kind_ == Kind::condition) return cond_ == other.cond_;
  return *lhs_ == *other.lhs_ && *rhs_ == *other.rhs_;
}

std::optional<FilterExpr> parse_filter_syntax(std::string_view text) {
  const std::string trimmed = text::trim(text);
  if (trimmed.empty()) throw Error(ErrorCode::SyntaxError, "empty filter");
  if (text::iequals(trimmed, "none")) return std::nullopt;
  return Parser(trimmed).parse();
}

std::optional<FilterExpr> parse_filter(std::string_view text, const DataTable& table) {
  auto parsed = parse_filter_syntax(text);
  if (!parsed) return std::nullopt;
  if (auto err = validate_filter(*parsed, table)) throw *err;
  return resolve_columns(*parsed, table);
}

std::optional<Error> validate_filter(const FilterExpr& expr, const DataTable& table) {
  if (expr.kind() == FilterExpr::Kind::condition) return validate_condition(expr.cond(), table);
  if (auto err = validate_filter(expr.lhs(), table)) return err;
  return validate_filter(expr.rhs(), table);
}

bool condition_holds(const Cell& cell, ColumnType type, Predicate op, const Literal& lit) {
  if (cell.is_null()) return false;
  switch (op) {
    case Predicate::eq: return equal(cell, type, lit);
    case Predicate::ne: return !equal(cell, type, lit);
    default: break;
  }
  auto c = compare(cell, type, lit);
  if (!c) return false;
  switch (op) {
    case Predicate::gt: return *c > 0;
    case Predicate::lt: return *c < 0;
    case Predicate::ge: return *c >= 0;
    case Predicate::le: return *c <= 0;
    default: return false;
  }
}

RowMask eval_filter(const FilterExpr& expr, const DataTable& table) {
  switch (expr.kind()) {
    case FilterExpr::Kind::condition: {
      const Condition& c = expr.cond();
      const size_t col = table.column_index(c.column);
      const ColumnType type = table.columns()[col].type;
      RowMask mask(table.n_rows());
      for (size_t r = 0; r < table.n_rows(); ++r) {
        mask[r] = condition_holds(table.cell(r, col), type, c.op, c.literal);
      }
      return mask;
    }
    case FilterExpr::Kind::all_of:
    case FilterExpr::Kind::any_of: {
      RowMask lhs = eval_filter(expr.lhs(), table);
      const RowMask rhs = eval_filter(expr.rhs(), table);
      const bool conj = expr.kind() == FilterExpr::Kind::all_of;
      for (size_t r = 0; r < lhs.size(); ++r) lhs[r] = conj ? (lhs[r] && rhs[r]) : (lhs[r] || rhs[r]);
      return lhs;
    }
  }
  return RowMask(table.n_rows(), false);
}

std::string to_string(const FilterExpr& expr) {
  switch (expr.kind()) {
    case FilterExpr::Kind::condition: {
      const Condition& c = expr.cond();
      std::string out = c.column + " " + std::string(to_string(c.op)) + " ";
      if (c.literal.is_number()) {
        out += text::format_number(c.literal.number());
      } else {
        const char q = c.literal.str().find('\'') == std::string::npos ? '\'' : '"';
        out += q;
        for (char ch : c.literal.str()) {
          out += ch;
          if (ch == q) out += q;
        }
        out += q;
      }
      return out;
    }
    case FilterExpr::Kind::all_of:
      return to_string(expr.lhs()) + " and " + to_string(expr.rhs());
    case FilterExpr::Kind::any_of:
      return to_string(expr.lhs()) + " or " + to_string(expr.rhs());
  }
  return {};
}

std::string commutative_key(const FilterExpr& expr) {
  if (expr.kind() == FilterExpr::Kind::condition) {
    const Condition& c = expr.cond();
    std::string key = text::to_lower(text::normalize_space(c.column)) + std::string(to_string(c.op));
    key += c.literal.is_number() ? "n:" + text::format_number(c.literal.number()) : "s:" + c.literal.str();
    return key;
  }
  std::vector<std::string> keys;
  flatten(expr, expr.kind(), keys);
  std::sort(keys.begin(), keys.end());
  const bool conj = expr.kind() == FilterExpr::Kind::all_of;
  return std::string(conj ? "and(" : "or(") + text::join(keys, ";") + ")";
}

std::vector<std::string> filter_columns(const FilterExpr& expr) {
  std::vector<std::string> out;
  collect_columns(expr, out);
  return out;
}

}  // namespace chartpipe
