#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <unistd.h>

#include "chartpipe/json.h"
#include "cli.h"

namespace chartpipe {
namespace {

namespace fs = std::filesystem;

const std::string kFixtures = CHARTPIPE_FIXTURE_DIR;
const std::string kScenario = "what kind of movies are the most popular?";

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "chartpipe");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Json read_json(const fs::path& p) {
  std::ifstream in(p);
  return Json::parse(in);
}

class CliTest : public ::testing::Test {
 protected:
  fs::path dir;
  void SetUp() override {
    dir = fs::temp_directory_path() / ("chartpipe_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    ::unsetenv("CHARTPIPE_K");
  }
  void TearDown() override {
    fs::remove_all(dir);
    ::unsetenv("CHARTPIPE_K");
  }
  std::vector<std::string> generate_args(const std::string& out) const {
    return {"generate", "--table", kFixtures + "/movies.csv", "--utterance", kScenario,
            "--script", kFixtures + "/movies_scenario.script.json", "--out", out};
  }
  size_t charts_written(const fs::path& out) const {
    return read_json(out / "steps.json")["results"].size();
  }
  void write_config(const std::string& text) const { std::ofstream(dir / "cfg.ini") << text; }
};

TEST_F(CliTest, GenerateWritesChartsAndTranscript) {
  const fs::path out = dir / "gen";
  const CliRun r = run(generate_args(out.string()));
  ASSERT_EQ(r.code, 0) << r.err;
  for (int i = 1; i <= 3; ++i) {
    const Json vl = read_json(out / ("rank" + std::to_string(i) + ".vl.json"));
    EXPECT_EQ(vl["mark"], "bar");
    EXPECT_TRUE(vl["data"].contains("values"));
  }
  const Json steps = read_json(out / "steps.json");
  EXPECT_EQ(steps["utterance"], kScenario);
  EXPECT_EQ(steps["results"][0]["steps"][0]["answer"], "Major Genre, Worldwide Gross");
  EXPECT_FALSE(steps["results"][0].contains("vegalite"));
  EXPECT_NE(r.out.find("rank 1  bar"), std::string::npos);
}

TEST_F(CliTest, DataReferenceOption) {
  auto args = generate_args((dir / "ref").string());
  args.insert(args.end(), {"--data-ref", "movies.csv", "--k", "1"});
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(read_json(dir / "ref" / "rank1.vl.json")["data"]["url"], "movies.csv");
}

TEST_F(CliTest, FlagBeatsConfigBeatsEnvironment) {
  ::setenv("CHARTPIPE_K", "1", 1);
  ASSERT_EQ(run(generate_args((dir / "env").string())).code, 0);
  EXPECT_EQ(charts_written(dir / "env"), 1u);

  write_config("# settings\nk = 2\n[prompts]\nversion = \"9\"\n");
  auto with_config = generate_args((dir / "cfg").string());
  with_config.insert(with_config.begin(), {"--config", (dir / "cfg.ini").string()});
  ASSERT_EQ(run(with_config).code, 0);
  EXPECT_EQ(charts_written(dir / "cfg"), 2u);

  auto with_flag = with_config;
  with_flag.insert(with_flag.end(), {"--k", "3"});
  with_flag[with_flag.size() - 3] = (dir / "flag").string();
  ASSERT_EQ(run(with_flag).code, 0);
  EXPECT_EQ(charts_written(dir / "flag"), 3u);
}

TEST_F(CliTest, MissingRequiredSettingIsUsageError) {
  const CliRun r = run({"generate", "--utterance", "x", "--script", kFixtures + "/movies_scenario.script.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--table"), std::string::npos);
  EXPECT_NE(r.err.find("\"code\":\"Usage\""), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"generate", "--k"}).code, 2);
  auto bad_k = generate_args((dir / "bad").string());
  bad_k.insert(bad_k.end(), {"--k", "many"});
  EXPECT_EQ(run(bad_k).code, 2);
}

TEST_F(CliTest, LibraryErrorsPrintJson) {
  auto args = generate_args((dir / "miss").string());
  args[4] = "nothing scripted for this";
  const CliRun r = run(args);
  EXPECT_EQ(r.code, 1);
  const Json e = Json::parse(r.err);
  EXPECT_EQ(e["error"]["code"], "ScriptMiss");
  const CliRun missing = run({"generate", "--table", kFixtures + "/nope.csv", "--utterance", "x", "--script",
                           kFixtures + "/movies_scenario.script.json"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_EQ(Json::parse(missing.err)["error"]["code"], "IoError");
}

TEST_F(CliTest, PromptLimitIsEnforced) {
  auto args = generate_args((dir / "limit").string());
  args.insert(args.end(), {"--prompt-limit", "10"});
  const CliRun r = run(args);
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(Json::parse(r.err)["error"]["code"], "PromptTooLong");
}

TEST_F(CliTest, EvalWritesReport) {
  const fs::path report = dir / "report.json";
  const CliRun r = run({"eval", "--dataset", kFixtures + "/split378.jsonl", "--predictions",
                     kFixtures + "/split378_predictions.jsonl", "--report", report.string(), "--threads", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = read_json(report);
  EXPECT_EQ(j["n_examples"], 378);
  EXPECT_EQ(j["aggregate"]["consistent_at_1"], 1.0);
  EXPECT_EQ(j["strict_filter_order"], false);
  EXPECT_NE(r.out.find("all"), std::string::npos);

  const CliRun strict = run({"eval", "--dataset", kFixtures + "/split378.jsonl", "--predictions",
                          kFixtures + "/split378_predictions.jsonl", "--report", report.string(),
                          "--strict-filter-order"});
  ASSERT_EQ(strict.code, 0);
  EXPECT_EQ(read_json(report)["strict_filter_order"], true);
}

TEST_F(CliTest, StatsCommand) {
  const CliRun r = run({"stats", "--dataset", kFixtures + "/stats10.jsonl", "--out", (dir / "s.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = read_json(dir / "s.json");
  EXPECT_DOUBLE_EQ(j["explicit_aggregation_rate"].get<double>(), 0.4);
  const CliRun custom = run({"stats", "--dataset", kFixtures + "/stats10.jsonl", "--aggregation-keywords", "average"});
  ASSERT_EQ(custom.code, 0);
  EXPECT_DOUBLE_EQ(Json::parse(custom.out)["explicit_aggregation_rate"].get<double>(), 0.1);
}

}  // namespace
}  // namespace chartpipe
