#include <cmath>
#include <limits>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "chartpipe/backend.h"
#include "chartpipe/errors.h"
#include "chartpipe/prompt.h"

namespace chartpipe {
namespace {

const DataTable& movies() {
  static const DataTable t = load_csv_file(std::string(CHARTPIPE_FIXTURE_DIR) + "/movies.csv");
  return t;
}

template <typename Fn>
ErrorCode error_of(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

std::string prompt_for(std::string_view utterance, const std::vector<StepAnswer>& prior, StepIndex step) {
  return assemble_prompt(movies(), utterance, prior, step);
}

class FixedBackend : public CompletionBackend {
 public:
  explicit FixedBackend(std::vector<ScoredText> out) : out_(std::move(out)) {}

 protected:
  std::vector<ScoredText> do_complete(const CompletionRequest&) const override { return out_; }

 private:
  std::vector<ScoredText> out_;
};

TEST(PromptTest, LayoutAndDecoding) {
  const auto& t = movies();
  const std::vector<StepAnswer> prior{parse_step_answer(StepIndex::select_columns, "Major Genre, Worldwide Gross", t),
                                      parse_step_answer(StepIndex::filter_rows, "none", t)};
  const std::string p = prompt_for("  what kind of\nmovies sell? ", prior, StepIndex::add_aggregations);
  EXPECT_NE(p.find("### task\nstep 3 of 6: add aggregations (prompt v1)\n"), std::string::npos) << p;
  EXPECT_NE(p.find("### table\nTitle (nominal)\n"), std::string::npos);
  EXPECT_NE(p.find("### utterance\nwhat kind of movies sell?\n"), std::string::npos);
  EXPECT_NE(p.find("### previous answers\nselect columns: Major Genre, Worldwide Gross\nfilter rows: none\n"),
            std::string::npos);
  EXPECT_TRUE(p.ends_with("### answer\n"));

  const PromptContext ctx = decode_prompt(p);
  EXPECT_EQ(ctx.step, 3);
  EXPECT_EQ(ctx.utterance, "what kind of movies sell?");
  EXPECT_EQ(ctx.prior, (std::map<int, std::string>{{1, "Major Genre, Worldwide Gross"}, {2, "none"}}));

  const std::string first = prompt_for("q", {}, StepIndex::select_columns);
  EXPECT_EQ(first.find("### previous answers"), std::string::npos);
  EXPECT_TRUE(decode_prompt(first).prior.empty());
  EXPECT_EQ(error_of([] { decode_prompt("not a prompt"); }), ErrorCode::SyntaxError);
}

TEST(PromptTest, TemplatesAreVersioned) {
  PromptTemplates tpl = PromptTemplates::defaults();
  for (const auto& s : tpl.instructions) EXPECT_FALSE(s.empty());
  tpl.version = "7b";
  tpl.instructions[3] = "Pick a mark.";
  const std::string p = assemble_prompt(movies(), "q", {}, StepIndex::select_columns, tpl);
  EXPECT_NE(p.find("(prompt v7b)"), std::string::npos);
  const std::vector<StepAnswer> prior{parse_step_answer(StepIndex::select_columns, "Title", movies()),
                                      parse_step_answer(StepIndex::filter_rows, "none", movies()),
                                      parse_step_answer(StepIndex::add_aggregations, "none", movies())};
  EXPECT_NE(assemble_prompt(movies(), "q", prior, StepIndex::choose_mark, tpl).find("Pick a mark."), std::string::npos);
}

TEST(PromptTest, DefaultPromptsFitTheLimit) {
  const auto& t = movies();
  std::vector<StepAnswer> prior{
      parse_step_answer(StepIndex::select_columns, "Major Genre, Worldwide Gross, MPAA Rating", t),
      parse_step_answer(StepIndex::filter_rows, "Release Year >= 2000 and Major Genre != 'Drama'", t),
      parse_step_answer(StepIndex::add_aggregations, "average Worldwide Gross", t),
      parse_step_answer(StepIndex::choose_mark, "bar", t),
      parse_step_answer(StepIndex::determine_encoding,
                        "x: Major Genre, y: average(Worldwide Gross), color: MPAA Rating", t)};
  const std::string p = assemble_prompt(t, "which genres earn the most since 2000 by rating?", prior, StepIndex::add_sort);
  EXPECT_LE(estimate_tokens(p), kDefaultPromptTokenLimit);
}

TEST(BackendTest, CompleteSortsTruncatesAndChecks) {
  FixedBackend b({{"a", -2.0}, {"b", -0.5}, {"c", -0.5}, {"d", -1.0}});
  const auto out = b.complete({"p", 3, 64});
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].text, "b");
  EXPECT_EQ(out[1].text, "c");
  EXPECT_EQ(out[2].text, "d");
  EXPECT_EQ(b.complete({"p", 1, 64}).size(), 1u);
  EXPECT_EQ(b.call_count(), 2u);
  EXPECT_EQ(error_of([&] { b.complete({"p", 0, 64}); }), ErrorCode::InvalidArgument);

  b.set_prompt_token_limit(3);
  EXPECT_EQ(error_of([&] { b.complete({"one two three four", 1, 64}); }), ErrorCode::PromptTooLong);
  EXPECT_NO_THROW(b.complete({"one two  three", 1, 64}));

  EXPECT_EQ(error_of([] { FixedBackend({}).complete({"p", 1, 64}); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(error_of([] { FixedBackend({{"x", 0.5}}).complete({"p", 1, 64}); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(error_of([] { FixedBackend({{"x", std::nan("")}}).complete({"p", 1, 64}); }),
            ErrorCode::MalformedResponse);
  EXPECT_EQ(error_of([] {
              FixedBackend({{"x", -std::numeric_limits<double>::infinity()}}).complete({"p", 1, 64});
            }),
            ErrorCode::MalformedResponse);
}

TEST(BackendTest, EstimateTokens) {
  EXPECT_EQ(estimate_tokens(""), 0u);
  EXPECT_EQ(estimate_tokens("  a\tb\n c  "), 3u);
}

TEST(ScriptedBackendTest, PlaysBackByUtteranceStepAndPrior) {
  ScriptedBackend b;
  b.add({"What sells?", 1, {}, {{"Major Genre, Worldwide Gross", -0.1}, {"Title", -2.0}}});
  b.add({"what  SELLS?", 2, {}, {{"none", -0.2}}});
  b.add({"what sells?", 2, {{1, "title"}}, {{"Title = 'x'", -0.3}}});

  const auto first = b.complete({prompt_for("what sells?", {}, StepIndex::select_columns), 2, 64});
  ASSERT_EQ(first.size(), 2u);
  EXPECT_EQ(first[0].text, "Major Genre, Worldwide Gross");

  const auto& t = movies();
  auto step2 = [&](std::string_view cols) {
    return b.complete({prompt_for("What sells?", {parse_step_answer(StepIndex::select_columns, cols, t)},
                                  StepIndex::filter_rows),
                       1, 64})[0]
        .text;
  };
  EXPECT_EQ(step2("Major Genre"), "none");
  EXPECT_EQ(step2("Title"), "Title = 'x'");

  EXPECT_EQ(error_of([&] { b.complete({prompt_for("unknown", {}, StepIndex::select_columns), 1, 64}); }),
            ErrorCode::ScriptMiss);
  EXPECT_EQ(error_of([&] { b.complete({"garbage prompt", 1, 64}); }), ErrorCode::ScriptMiss);
}

TEST(ScriptedBackendTest, JsonRoundTripAndFile) {
  const Json doc = Json::parse(R"({"entries": [
      {"utterance": "u", "step": 4, "prior": {"1": "Title"}, "candidates": [{"text": "bar", "logprob": -0.1}]}]})");
  const ScriptedBackend b = ScriptedBackend::from_json(doc);
  ASSERT_EQ(b.entries().size(), 1u);
  EXPECT_EQ(b.entries()[0].prior.at(1), "Title");
  EXPECT_EQ(b.to_json(), doc);
  EXPECT_EQ(error_of([] { ScriptedBackend::from_json(Json::parse(R"({"entries": [{"utterance": "u", "step": 9, "candidates": []}]})")); }),
            ErrorCode::InvalidArgument);
  const ScriptedBackend scenario =
      ScriptedBackend::from_file(std::string(CHARTPIPE_FIXTURE_DIR) + "/movies_scenario.script.json");
  EXPECT_FALSE(scenario.entries().empty());
  EXPECT_EQ(error_of([] { ScriptedBackend::from_file("/nonexistent.json"); }), ErrorCode::IoError);
}

TEST(HttpBackendTest, ParsesResponses) {
  const auto c = parse_completion_response(R"({"candidates": [{"text": "bar", "logprob": -0.25}]})");
  EXPECT_EQ(c, (std::vector<ScoredText>{{"bar", -0.25}}));
  for (const char* bad : {"", "[]", "{}", R"({"candidates": 3})", R"({"candidates": [{"text": 1, "logprob": 0}]})",
                          R"({"candidates": [{"text": "x"}]})"}) {
    EXPECT_EQ(error_of([&] { parse_completion_response(bad); }), ErrorCode::MalformedResponse) << bad;
  }
}

TEST(HttpBackendTest, RejectsUnsupportedUrls) {
  EXPECT_EQ(error_of([] { HttpBackend({"https://x.example/v1"}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_of([] { HttpBackend({"ftp://x"}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_of([] { HttpBackend({"http://"}); }), ErrorCode::InvalidArgument);
}

TEST(HttpBackendTest, TalksToStubServer) {
  httplib::Server server;
  std::string seen_auth;
  Json seen_body;
  server.Post("/v1/complete", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = Json::parse(req.body);
    res.set_content(R"({"candidates": [{"text": "pie", "logprob": -1.5}, {"text": "bar", "logprob": -0.1}]})",
                    "application/json");
  });
  server.Post("/down", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  HttpBackend b({base + "/v1/complete", "secret", std::chrono::milliseconds(5000)});
  const auto out = b.complete({"prompt text", 2, 32});
  EXPECT_EQ(out, (std::vector<ScoredText>{{"bar", -0.1}, {"pie", -1.5}}));
  EXPECT_EQ(seen_auth, "Bearer secret");
  EXPECT_EQ(seen_body, Json::parse(R"({"prompt": "prompt text", "n": 2, "max_new_tokens": 32})"));

  HttpBackend down({base + "/down"});
  EXPECT_EQ(error_of([&] { down.complete({"p", 1, 8}); }), ErrorCode::BackendUnavailable);
  server.stop();
  th.join();

  HttpBackend gone({base + "/v1/complete", "", std::chrono::milliseconds(500)});
  EXPECT_EQ(error_of([&] { gone.complete({"p", 1, 8}); }), ErrorCode::BackendUnavailable);
}

}  // namespace
}  // namespace chartpipe
