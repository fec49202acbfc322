#include <gtest/gtest.h>

#include "chartpipe/errors.h"
#include "chartpipe/filter.h"
#include "generators.h"

namespace chartpipe {
namespace {

const DataTable& fixture12() {
  static const DataTable t = load_csv_file(std::string(CHARTPIPE_FIXTURE_DIR) + "/filter12.csv");
  return t;
}

RowMask mask_of(std::string_view text, const DataTable& t) { return eval_filter(*parse_filter(text, t), t); }

RowMask bits(std::initializer_list<int> v) {
  RowMask m;
  for (int b : v) m.push_back(b != 0);
  return m;
}

ErrorCode parse_error(std::string_view text, const DataTable& t) {
  try {
    parse_filter(text, t);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

// Rows: Alpha 1998 Comedy, Bravo 2000, Charlie 2008 Comedy, Delta 2012, Echo 2005 (no genre),
// Foxtrot 2010 Comedy (no gross), Golf 1999, Hotel 2007, India 2001 "comedy", Juliet (no year),
// Kilo 2009 Comedy, Lima 1995.
TEST(FilterTest, HandCheckedMasks) {
  const auto& t = fixture12();
  EXPECT_EQ(mask_of("Release Year >= 2000", t), bits({0, 1, 1, 1, 1, 1, 0, 1, 1, 0, 1, 0}));
  EXPECT_EQ(mask_of("Release Year >= 2008", t), bits({0, 0, 1, 1, 0, 1, 0, 0, 0, 0, 1, 0}));
  EXPECT_EQ(mask_of("Major Genre = 'Comedy'", t), bits({1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1, 0}));
  EXPECT_EQ(mask_of("Major Genre != 'Comedy'", t), bits({0, 1, 0, 1, 0, 0, 1, 1, 1, 1, 0, 1}));
  EXPECT_EQ(mask_of("Major Genre = 'Comedy' and Release Year >= 2008", t),
            bits({0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1, 0}));
  EXPECT_EQ(mask_of("Worldwide Gross > 400 or Title = 'Alpha'", t), bits({1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0}));
}

TEST(FilterTest, AndBindsTighterThanOr) {
  const auto& t = fixture12();
  // a or (b and c), not (a or b) and c
  EXPECT_EQ(mask_of("Title = 'Alpha' or Major Genre = 'Action' and Release Year >= 2010", t),
            bits({1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0}));
  auto e = parse_filter_syntax("a = 1 or b = 2 and c = 3");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->kind(), FilterExpr::Kind::any_of);
  EXPECT_EQ(e->rhs().kind(), FilterExpr::Kind::all_of);
}

TEST(FilterTest, TemporalGranularity) {
  const DataTable t = load_csv_text("When\n2008-06-15\n2008-01-01\n2007-12-31\n", "t");
  EXPECT_EQ(mask_of("When >= 2008", t), bits({1, 1, 0}));
  EXPECT_EQ(mask_of("When > '2008-01-01'", t), bits({1, 0, 0}));
  EXPECT_EQ(mask_of("When = '2008'", t), bits({1, 1, 0}));
  const auto& f = fixture12();
  EXPECT_EQ(mask_of("Release Year = '2008-06-15'", f), bits({0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0}));
}

TEST(FilterTest, NullCellsNeverMatch) {
  const auto& t = fixture12();
  const auto ne = mask_of("Worldwide Gross != 1", t);
  EXPECT_FALSE(ne[5]);
  const auto year = mask_of("Release Year < 3000 or Release Year >= 1000", t);
  EXPECT_FALSE(year[9]);
}

TEST(FilterTest, ColumnNamesResolveToTableSpelling) {
  auto e = parse_filter("major   GENRE = 'Drama'", fixture12());
  ASSERT_TRUE(e);
  EXPECT_EQ(e->cond().column, "Major Genre");
  EXPECT_EQ(to_string(*e), "Major Genre = 'Drama'");
}

TEST(FilterTest, SyntaxErrors) {
  const auto& t = fixture12();
  EXPECT_EQ(parse_error("Release Year >== 2000", t), ErrorCode::SyntaxError);
  EXPECT_EQ(parse_error("Release Year 2000", t), ErrorCode::SyntaxError);
  EXPECT_EQ(parse_error(">= 2000", t), ErrorCode::SyntaxError);
  EXPECT_EQ(parse_error("Major Genre = Comedy", t), ErrorCode::SyntaxError);
  EXPECT_EQ(parse_error("Major Genre = 'Comedy", t), ErrorCode::SyntaxError);
  EXPECT_EQ(parse_error("Title = 'a' and", t), ErrorCode::SyntaxError);
  EXPECT_EQ(parse_error("", t), ErrorCode::SyntaxError);
  EXPECT_EQ(parse_error("Title = 'a' 'b'", t), ErrorCode::SyntaxError);
}

TEST(FilterTest, SemanticErrors) {
  const auto& t = fixture12();
  EXPECT_EQ(parse_error("Budget > 3", t), ErrorCode::UnknownColumn);
  EXPECT_EQ(parse_error("Major Genre > 'Comedy'", t), ErrorCode::TypeMismatch);
  EXPECT_EQ(parse_error("Worldwide Gross > 'lots'", t), ErrorCode::TypeMismatch);
  EXPECT_EQ(parse_error("Release Year >= 'recent'", t), ErrorCode::TypeMismatch);
  EXPECT_EQ(parse_error("Release Year >= 2000.5", t), ErrorCode::TypeMismatch);
}

TEST(FilterTest, NoneMeansNoFilter) {
  EXPECT_FALSE(parse_filter("none", fixture12()));
  EXPECT_FALSE(parse_filter("  NONE ", fixture12()));
}

TEST(FilterTest, OperatorSpellings) {
  const auto& t = fixture12();
  EXPECT_EQ(mask_of("Title == 'Alpha'", t), mask_of("Title = 'Alpha'", t));
  EXPECT_EQ(mask_of("Title <> 'Alpha'", t), mask_of("Title != 'Alpha'", t));
}

TEST(FilterTest, QuotingRoundTrips) {
  const DataTable t = load_csv_text("Name\nit's\nsay \"x\"\n", "t");
  for (const std::string lit : {"it's", "say \"x\"", "both ' and \""}) {
    FilterExpr e = FilterExpr::condition({"Name", Predicate::eq, Literal{lit}});
    auto back = parse_filter(to_string(e), t);
    ASSERT_TRUE(back) << to_string(e);
    EXPECT_EQ(*back, e) << to_string(e);
  }
  EXPECT_EQ(mask_of(to_string(FilterExpr::condition({"Name", Predicate::eq, Literal{std::string("it's")}})), t),
            bits({1, 0}));
}

TEST(FilterTest, CommutativeKeyIgnoresOperandOrder) {
  auto a = *parse_filter_syntax("a = 1 and b = 'x' and c > 2");
  auto b = *parse_filter_syntax("c > 2 and A = 1 and b = 'x'");
  auto c = *parse_filter_syntax("c > 2 or a = 1 and b = 'x'");
  EXPECT_EQ(commutative_key(a), commutative_key(b));
  EXPECT_NE(commutative_key(a), commutative_key(c));
  EXPECT_NE(a, b);
  EXPECT_NE(commutative_key(*parse_filter_syntax("a = 1")), commutative_key(*parse_filter_syntax("a = '1'")));
}

TEST(FilterTest, FilterColumnsInOrder) {
  auto e = *parse_filter_syntax("b = 1 and a = 2 or b = 3");
  EXPECT_EQ(filter_columns(e), (std::vector<std::string>{"b", "a"}));
}

TEST(FilterPropertyTest, MatchesBruteForceInterpreter) {
  testing::Rng rng(20240501);
  for (int i = 0; i < 1000; ++i) {
    const DataTable t = testing::random_table(rng, 5 + testing::pick(rng, 40));
    const FilterExpr e = testing::random_filter(rng, t);
    const auto parsed = parse_filter(to_string(e), t);
    ASSERT_TRUE(parsed);
    ASSERT_EQ(*parsed, e) << to_string(e);
    ASSERT_EQ(eval_filter(*parsed, t), testing::brute_force_mask(e, t)) << "case " << i << ": " << to_string(e);
  }
}

}  // namespace
}  // namespace chartpipe
