#include "cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "chartpipe/config.h"
#include "chartpipe/dataset.h"
#include "chartpipe/errors.h"
#include "chartpipe/eval.h"
#include "chartpipe/pipeline.h"
#include "chartpipe/service.h"
#include "chartpipe/stats.h"
#include "chartpipe/text.h"

namespace chartpipe {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Resolves a setting: command-line flag, then config file, then
/// CHARTPIPE_<KEY> in the environment.
class Settings {
 public:
  Settings(std::map<std::string, std::string> flags, Config file)
      : flags_(std::move(flags)), file_(std::move(file)) {}

  std::optional<std::string> get(const std::string& key) const {
    if (auto it = flags_.find(key); it != flags_.end()) return it->second;
    if (auto v = file_.get(key)) return v;
    if (const char* env = std::getenv(Config::env_name(key).c_str())) return std::string(env);
    return std::nullopt;
  }

  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v || v->empty()) throw UsageError("missing required option --" + flag_name(key));
    return *v;
  }

  std::string get_or(const std::string& key, std::string fallback) const { return get(key).value_or(std::move(fallback)); }

  size_t count(const std::string& key, size_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    auto n = text::parse_number(*v);
    if (!n || *n < 0 || *n != static_cast<double>(static_cast<size_t>(*n))) {
      throw UsageError("--" + flag_name(key) + " expects a non-negative integer, got '" + *v + "'");
    }
    return static_cast<size_t>(*n);
  }

  bool flag(const std::string& key) const {
    auto v = get(key);
    if (!v) return false;
    const std::string s = text::to_lower(*v);
    return s == "1" || s == "true" || s == "yes" || s == "on";
  }

  static std::string flag_name(std::string key) {
    for (char& c : key) {
      if (c == '_') c = '-';
    }
    return key;
  }

 private:
  std::map<std::string, std::string> flags_;
  Config file_;
};

/// Adds `--name` bound to `store[key]` only when given on the command line.
void add_setting(CLI::App* app, std::map<std::string, std::string>& store, const std::string& key,
                 const std::string& help) {
  app->add_option_function<std::string>("--" + Settings::flag_name(key),
                                        [&store, key](const std::string& v) { store[key] = v; }, help);
}

void add_switch(CLI::App* app, std::map<std::string, std::string>& store, const std::string& key,
                const std::string& help) {
  app->add_flag_function("--" + Settings::flag_name(key), [&store, key](std::int64_t) { store[key] = "true"; }, help);
}

void write_json(const fs::path& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

GenerationConfig generation_config(const Settings& s) {
  GenerationConfig cfg;
  cfg.k = s.count("k", cfg.k);
  cfg.beam_width = s.count("beam_width", cfg.beam_width);
  cfg.max_new_tokens = s.count("max_new_tokens", cfg.max_new_tokens);
  if (auto p = s.get("none_penalty")) {
    auto v = text::parse_number(*p);
    if (!v || *v < 0) throw UsageError("--none-penalty expects a non-negative number");
    cfg.none_penalty = *v;
  }
  if (auto v = s.get("prompts.version")) cfg.prompts.version = *v;
  for (int i = 1; i <= 6; ++i) {
    if (auto v = s.get("prompts.step" + std::to_string(i))) cfg.prompts.instructions[i - 1] = *v;
  }
  cfg.compile.data_url = s.get_or("data_ref", "");
  cfg.validate();
  return cfg;
}

std::shared_ptr<CompletionBackend> make_backend(const Settings& s) {
  const std::string kind = s.get_or("backend", s.get("script") ? "scripted" : "http");
  std::shared_ptr<CompletionBackend> backend;
  if (kind == "scripted") {
    backend = std::make_shared<ScriptedBackend>(ScriptedBackend::from_file(s.require("script")));
  } else if (kind == "http") {
    HttpBackendOptions opts;
    opts.url = s.require("backend_url");
    if (const char* token = std::getenv("CHARTPIPE_BACKEND_TOKEN")) opts.bearer_token = token;
    backend = std::make_shared<HttpBackend>(std::move(opts));
  } else {
    throw UsageError("--backend must be http or scripted, got '" + kind + "'");
  }
  backend->set_prompt_token_limit(s.count("prompt_limit", kDefaultPromptTokenLimit));
  return backend;
}

int cmd_generate(const Settings& s, std::ostream& out) {
  const std::string table_path = s.require("table");
  const std::string utterance = s.require("utterance");
  const GenerationConfig cfg = generation_config(s);
  auto backend = make_backend(s);
  const DataTable table = load_csv_file(table_path);
  const auto results = generate_topk(table, utterance, cfg, *backend);

  const fs::path dir = s.get_or("out", ".");
  fs::create_directories(dir);
  Json transcript = {{"table", table_path}, {"utterance", utterance}, {"results", Json::array()}};
  for (const auto& r : results) {
    write_json(dir / ("rank" + std::to_string(r.rank) + ".vl.json"), r.vegalite);
    Json j = result_to_json(r);
    j.erase("vegalite");
    transcript["results"].push_back(std::move(j));
    out << "rank " << r.rank << "  " << to_string(r.chart_type) << "  score " << r.score << "\n";
  }
  write_json(dir / "steps.json", transcript);
  return 0;
}

int cmd_eval(const Settings& s, std::ostream& out) {
  const auto triplets = load_dataset(s.require("dataset"));
  const auto predictions = load_predictions(s.require("predictions"), triplets);
  EvalOptions opts;
  opts.strict_filter_order = s.flag("strict_filter_order");
  opts.threads = s.count("threads", 0);
  const auto report = evaluate_run(triplets, predictions, opts);
  if (auto path = s.get("report")) write_json(*path, report_to_json(report));
  out << format_report_table(report);
  return 0;
}

int cmd_stats(const Settings& s, std::ostream& out) {
  const auto triplets = load_dataset(s.require("dataset"));
  StatsOptions opts = StatsOptions::defaults();
  if (auto v = s.get("chart_keywords")) opts.chart_keywords = text::split(*v, ',');
  if (auto v = s.get("aggregation_keywords")) opts.aggregation_keywords = text::split(*v, ',');
  const Json doc = stats_to_json(dataset_stats(triplets, opts));
  if (auto path = s.get("out")) write_json(*path, doc);
  out << doc.dump(2) << "\n";
  return 0;
}

int cmd_serve(const Settings& s, std::ostream& out) {
  ServiceOptions opts;
  opts.persist_dir = s.get_or("persist_dir", "");
  opts.cors_origin = s.get_or("cors_origin", "*");
  opts.generation = generation_config(s);
  const size_t port = s.count("port", 8080);
  const std::string host = s.get_or("host", "0.0.0.0");
  ChartService service(make_backend(s), opts);
  out << "listening on " << host << ":" << port << std::endl;
  if (!service.listen(host, static_cast<int>(port))) {
    throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
  }
  return 0;
}

void print_error(std::ostream& err, std::string_view code, const std::string& message) {
  err << Json{{"error", {{"code", std::string(code)}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Natural-language to chart pipeline", "chartpipe"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Key/value settings file (flags override it, it overrides CHARTPIPE_* env)");

  std::map<std::string, std::string> flags;
  auto add_backend_opts = [&](CLI::App* sub) {
    add_setting(sub, flags, "backend", "http | scripted");
    add_setting(sub, flags, "script", "Scripted backend JSON file");
    add_setting(sub, flags, "backend_url", "Completion endpoint (http://host:port/path)");
    add_setting(sub, flags, "prompt_limit", "Prompt token limit (default 580)");
    add_setting(sub, flags, "k", "Number of charts (default 3)");
    add_setting(sub, flags, "beam_width", "Beam width (default 4)");
    add_setting(sub, flags, "max_new_tokens", "Tokens per candidate (default 64)");
    add_setting(sub, flags, "none_penalty", "Score penalty for an injected none answer (default 1.0)");
    add_setting(sub, flags, "data_ref", "Reference data by this URL instead of inlining rows");
  };

  auto* gen = app.add_subcommand("generate", "Top-k charts for one utterance");
  add_setting(gen, flags, "table", "CSV table");
  add_setting(gen, flags, "utterance", "Natural-language request");
  add_setting(gen, flags, "out", "Output directory (default .)");
  add_backend_opts(gen);

  auto* ev = app.add_subcommand("eval", "Score predictions against a dataset");
  add_setting(ev, flags, "dataset", "Dataset JSONL");
  add_setting(ev, flags, "predictions", "Predictions JSONL");
  add_setting(ev, flags, "report", "Write the JSON report here");
  add_setting(ev, flags, "threads", "Worker threads (0 = all cores)");
  add_switch(ev, flags, "strict_filter_order", "Treat and/or operand order as significant");

  auto* st = app.add_subcommand("stats", "Explicitness statistics of a dataset");
  add_setting(st, flags, "dataset", "Dataset JSONL");
  add_setting(st, flags, "out", "Also write the JSON here");
  add_setting(st, flags, "chart_keywords", "Comma-separated chart-type phrases");
  add_setting(st, flags, "aggregation_keywords", "Comma-separated aggregation phrases");

  auto* sv = app.add_subcommand("serve", "Run the HTTP service");
  add_setting(sv, flags, "port", "Port (default 8080)");
  add_setting(sv, flags, "host", "Bind address (default 0.0.0.0)");
  add_setting(sv, flags, "persist_dir", "Snapshot sessions and tables here");
  add_setting(sv, flags, "cors_origin", "Access-Control-Allow-Origin value (default *)");
  add_backend_opts(sv);

  CLI::App* active = nullptr;
  try {
    app.parse(argc, argv);
    for (auto* sub : {gen, ev, st, sv}) {
      if (sub->parsed()) active = sub;
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << app.help();
    print_error(err, "Usage", e.what());
    return 2;
  }

  try {
    Config file = config_path.empty() ? Config{} : Config::load_file(config_path);
    Settings settings(flags, std::move(file));
    if (active == gen) return cmd_generate(settings, out);
    if (active == ev) return cmd_eval(settings, out);
    if (active == st) return cmd_stats(settings, out);
    return cmd_serve(settings, out);
  } catch (const UsageError& e) {
    err << (active ? active->help() : app.help());
    print_error(err, "Usage", e.what());
    return 2;
  } catch (const Error& e) {
    print_error(err, to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "Internal", e.what());
    return 1;
  }
}

}  // namespace chartpipe
