#include <gtest/gtest.h>

#include "chartpipe/compiler.h"
#include "chartpipe/errors.h"
#include "chartpipe/vegalite_schema.h"
#include "generators.h"

namespace chartpipe {
namespace {

const DataTable& movies() {
  static const DataTable t = load_csv_file(std::string(CHARTPIPE_FIXTURE_DIR) + "/movies.csv");
  return t;
}

VisSpec spec_of(Mark mark, FieldRef x, FieldRef y, std::optional<std::string> color = std::nullopt) {
  VisSpec s;
  s.mark = mark;
  s.x = std::move(x);
  s.y = std::move(y);
  s.color = std::move(color);
  return s;
}

ErrorCode validate_error(const VisSpec& s, const DataTable& t) {
  try {
    validate_spec(s, t);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

TEST(CompilerTest, AllSevenChartTypes) {
  const auto& t = movies();
  const FieldRef genre{"Major Genre", std::nullopt};
  const FieldRef avg_gross{"Worldwide Gross", AggregateFn::average};
  const FieldRef year{"Release Year", std::nullopt};
  const FieldRef rating{"IMDB Rating", std::nullopt};
  const FieldRef minutes{"Running Time", std::nullopt};
  const std::vector<std::pair<VisSpec, ChartType>> cases{
      {spec_of(Mark::bar, genre, avg_gross), ChartType::bar},
      {spec_of(Mark::bar, year, avg_gross, "Major Genre"), ChartType::stacked_bar},
      {spec_of(Mark::line, year, avg_gross), ChartType::line},
      {spec_of(Mark::line, year, avg_gross, "MPAA Rating"), ChartType::grouped_line},
      {spec_of(Mark::scatter, rating, minutes), ChartType::scatter},
      {spec_of(Mark::scatter, rating, minutes, "Major Genre"), ChartType::grouped_scatter},
      {spec_of(Mark::pie, genre, {"Title", AggregateFn::count}), ChartType::pie},
  };
  for (const auto& [spec, type] : cases) {
    EXPECT_EQ(resolve_chart_type(spec, t), type) << to_string(type);
    const Json doc = compile_vegalite(spec, t);
    EXPECT_TRUE(is_valid_vegalite(doc, &t)) << doc.dump(2).substr(0, 400);
    const Json linked = compile_vegalite(spec, t, {"data/movies.csv"});
    EXPECT_TRUE(is_valid_vegalite(linked, &t)) << linked.dump(2);
  }
}

TEST(CompilerTest, WorkedExampleDocument) {
  const auto& t = movies();
  VisSpec s = spec_of(Mark::bar, {"Major Genre", std::nullopt}, {"Worldwide Gross", AggregateFn::average});
  s.filter = parse_filter("Release Year >= 2000", t);
  s.sort = SortSpec{Axis::y, SortOrder::desc};
  const Json doc = compile_vegalite(s, t, {"movies.csv"});
  const Json expected = Json::parse(R"({
    "$schema": "https://vega.github.io/schema/vega-lite/v5.json",
    "data": {"url": "movies.csv", "format": {"type": "csv"}},
    "transform": [{"filter": {"field": "Release Year", "timeUnit": "year", "gte": {"year": 2000}}}],
    "mark": "bar",
    "encoding": {
      "x": {"field": "Major Genre", "type": "nominal", "sort": "-y"},
      "y": {"field": "Worldwide Gross", "type": "quantitative", "aggregate": "mean"}
    }
  })");
  EXPECT_EQ(doc, expected) << doc.dump(2);
}

TEST(CompilerTest, InlineValuesKeepTypes) {
  const DataTable t = load_csv_text("Name,Score,Year\na,84,2001\nb,,2002\nc,2.5,\n", "t");
  const Json doc = compile_vegalite(spec_of(Mark::bar, {"Name", std::nullopt}, {"Score", std::nullopt}), t);
  const Json& values = doc["data"]["values"];
  ASSERT_EQ(values.size(), 3u);
  EXPECT_EQ(values[0].dump(), R"({"Name":"a","Score":84,"Year":"2001"})");
  EXPECT_TRUE(values[1]["Score"].is_null());
  EXPECT_EQ(values[2]["Score"], 2.5);
  EXPECT_TRUE(values[2]["Year"].is_null());
}

TEST(CompilerTest, FilterPredicates) {
  const auto& t = movies();
  auto pred = [&](std::string_view text) { return filter_predicate(*parse_filter(text, t), t); };
  EXPECT_EQ(pred("Major Genre != 'Drama'"), Json::parse(R"({"not": {"field": "Major Genre", "equal": "Drama"}})"));
  EXPECT_EQ(pred("IMDB Rating < 5"), Json::parse(R"({"field": "IMDB Rating", "lt": 5})"));
  EXPECT_EQ(pred("IMDB Rating <= 5.5"), Json::parse(R"({"field": "IMDB Rating", "lte": 5.5})"));
  EXPECT_EQ(pred("Release Year = '2008-06-15'"),
            Json::parse(R"({"field": "Release Year", "equal": {"year": 2008, "month": 6, "date": 15}})"));
  EXPECT_EQ(pred("Title = 'a' and IMDB Rating > 1 and Running Time > 2"),
            Json::parse(R"({"and": [{"field": "Title", "equal": "a"},
                                   {"field": "IMDB Rating", "gt": 1},
                                   {"field": "Running Time", "gt": 2}]})"));
  EXPECT_EQ(pred("Title = 'a' or IMDB Rating > 1 and Running Time > 2"),
            Json::parse(R"({"or": [{"field": "Title", "equal": "a"},
                                  {"and": [{"field": "IMDB Rating", "gt": 1}, {"field": "Running Time", "gt": 2}]}]})"));
}

TEST(CompilerTest, SortEncoding) {
  const auto& t = movies();
  VisSpec s = spec_of(Mark::bar, {"Major Genre", std::nullopt}, {"Title", AggregateFn::count});
  s.sort = SortSpec{Axis::y, SortOrder::asc};
  EXPECT_EQ(compile_vegalite(s, t)["encoding"]["x"]["sort"], "y");
  s.sort = SortSpec{Axis::x, SortOrder::desc};
  EXPECT_EQ(compile_vegalite(s, t)["encoding"]["x"]["sort"], "descending");
  s.mark = Mark::pie;
  s.sort = SortSpec{Axis::y, SortOrder::desc};
  const Json pie = compile_vegalite(s, t);
  EXPECT_EQ(pie["mark"], "arc");
  EXPECT_EQ(pie["encoding"]["theta"]["aggregate"], "count");
  EXPECT_EQ(pie["encoding"]["color"]["field"], "Major Genre");
  EXPECT_EQ(pie["encoding"]["order"]["sort"], "descending");
  EXPECT_FALSE(pie["encoding"].contains("x"));
}

TEST(CompilerTest, ScatterUsesPointMark) {
  const auto& t = movies();
  const Json doc = compile_vegalite(spec_of(Mark::scatter, {"IMDB Rating", std::nullopt}, {"Running Time", std::nullopt}), t);
  EXPECT_EQ(doc["mark"], "point");
}

TEST(CompilerTest, RejectsInvalidSpecs) {
  const auto& t = movies();
  EXPECT_EQ(validate_error(spec_of(Mark::pie, {"Major Genre", std::nullopt}, {"Title", AggregateFn::count}, "MPAA Rating"), t),
            ErrorCode::InvalidCombination);
  EXPECT_EQ(validate_error(spec_of(Mark::pie, {"Release Year", std::nullopt}, {"Title", AggregateFn::count}), t),
            ErrorCode::InvalidCombination);
  EXPECT_EQ(validate_error(spec_of(Mark::pie, {"Major Genre", std::nullopt}, {"Title", std::nullopt}), t),
            ErrorCode::InvalidCombination);
  EXPECT_EQ(validate_error(spec_of(Mark::pie, {"Major Genre", AggregateFn::count}, {"IMDB Rating", std::nullopt}), t),
            ErrorCode::InvalidCombination);
  EXPECT_EQ(validate_error(spec_of(Mark::bar, {"Major Genre", std::nullopt}, {"Title", AggregateFn::sum}), t),
            ErrorCode::TypeMismatch);
  EXPECT_EQ(validate_error(spec_of(Mark::bar, {"Budget", std::nullopt}, {"Title", AggregateFn::count}), t),
            ErrorCode::UnknownColumn);
  VisSpec bad_filter = spec_of(Mark::bar, {"Major Genre", std::nullopt}, {"Title", AggregateFn::count});
  bad_filter.filter = parse_filter_syntax("Major Genre > 'A'");
  EXPECT_EQ(validate_error(bad_filter, t), ErrorCode::TypeMismatch);
}

TEST(CompilerTest, FieldTypes) {
  const auto& t = movies();
  EXPECT_EQ(field_type({"Release Year", AggregateFn::max}, t), ColumnType::temporal);
  EXPECT_EQ(field_type({"Release Year", AggregateFn::count}, t), ColumnType::quantitative);
  EXPECT_EQ(field_type({"Major Genre", AggregateFn::min}, t), ColumnType::quantitative);
  EXPECT_EQ(field_type({"Major Genre", std::nullopt}, t), ColumnType::nominal);
}

TEST(CompilerTest, ChainConsistency) {
  const auto& t = movies();
  auto ans = [&](StepIndex s, std::string_view text) { return parse_step_answer(s, text, t); };
  std::vector<StepAnswer> prior{ans(StepIndex::select_columns, "Major Genre, Worldwide Gross"),
                                ans(StepIndex::filter_rows, "none")};
  EXPECT_NO_THROW(check_chain_consistency(prior, ans(StepIndex::add_aggregations, "sum Worldwide Gross"), t));
  EXPECT_THROW(check_chain_consistency(prior, ans(StepIndex::add_aggregations, "count Title"), t), Error);
  EXPECT_THROW(check_chain_consistency(prior, ans(StepIndex::add_aggregations, "average Major Genre"), t), Error);
  prior.push_back(ans(StepIndex::add_aggregations, "sum Worldwide Gross"));
  prior.push_back(ans(StepIndex::choose_mark, "pie"));
  EXPECT_NO_THROW(check_chain_consistency(
      prior, ans(StepIndex::determine_encoding, "x: Major Genre, y: sum(Worldwide Gross), color: none"), t));
  EXPECT_THROW(check_chain_consistency(
                   prior, ans(StepIndex::determine_encoding, "x: Major Genre, y: average(Worldwide Gross), color: none"), t),
               Error);
  EXPECT_THROW(check_chain_consistency(
                   prior, ans(StepIndex::determine_encoding, "x: Title, y: sum(Worldwide Gross), color: none"), t),
               Error);
  EXPECT_THROW(check_chain_consistency(
                   prior, ans(StepIndex::determine_encoding, "x: Major Genre, y: sum(Worldwide Gross), color: Major Genre"), t),
               Error);
}

TEST(CompilerTest, AssembleNeedsSixOrderedAnswers) {
  const VisSpec s = spec_of(Mark::bar, {"Major Genre", std::nullopt}, {"Title", AggregateFn::count});
  auto steps = extract_steps(s);
  EXPECT_EQ(assemble_spec(steps), s);
  std::swap(steps[0], steps[1]);
  EXPECT_THROW(assemble_spec(steps), Error);
  steps.pop_back();
  EXPECT_THROW(assemble_spec(steps), Error);
}

TEST(CompilerPropertyTest, ExtractAssembleRoundTrip) {
  const DataTable t = testing::spec_table();
  testing::Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const VisSpec s = testing::random_spec(rng, t);
    const auto steps = extract_steps(s);
    ASSERT_EQ(assemble_spec(steps), s);
    std::vector<StepAnswer> prior;
    for (const auto& a : steps) {
      // every extracted answer survives its own text form and the chain checks
      ASSERT_EQ(parse_step_answer(step_of(a), serialize_step_answer(a), t), a) << serialize_step_answer(a);
      ASSERT_NO_THROW(check_chain_consistency(prior, a, t)) << serialize_step_answer(a);
      prior.push_back(a);
    }
  }
}

TEST(CompilerPropertyTest, RandomSpecsCompileToValidDocuments) {
  const DataTable t = testing::spec_table();
  testing::Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const VisSpec s = testing::random_spec(rng, t);
    const Json doc = compile_vegalite(s, t);
    const auto violations = vegalite_violations(doc, &t);
    ASSERT_TRUE(violations.empty()) << violations.front() << "\n" << doc.dump(2);
  }
}

TEST(VegaLiteSchemaTest, FlagsViolations) {
  const auto& t = movies();
  const Json good = compile_vegalite(spec_of(Mark::bar, {"Major Genre", std::nullopt}, {"Title", AggregateFn::count}), t);
  Json bad = good;
  bad["mark"] = "radar";
  EXPECT_FALSE(is_valid_vegalite(bad));
  bad = good;
  bad["encoding"]["y"]["aggregate"] = "median-ish";
  EXPECT_FALSE(is_valid_vegalite(bad));
  bad = good;
  bad["encoding"]["x"]["field"] = "Budget";
  EXPECT_TRUE(is_valid_vegalite(bad));
  EXPECT_FALSE(is_valid_vegalite(bad, &t));
  bad = good;
  bad.erase("data");
  EXPECT_FALSE(is_valid_vegalite(bad));
  bad = good;
  bad["extra"] = 1;
  EXPECT_FALSE(is_valid_vegalite(bad));
  bad = good;
  bad["encoding"].erase("y");
  EXPECT_FALSE(is_valid_vegalite(bad));
}

}  // namespace
}  // namespace chartpipe
