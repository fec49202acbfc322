#include "chartpipe/service.h"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "chartpipe/dataset.h"
#include "chartpipe/errors.h"
#include "chartpipe/text.h"

namespace chartpipe {

namespace fs = std::filesystem;

namespace {

constexpr size_t kPreviewRows = 10;

using TableMap = std::map<std::string, std::shared_ptr<const DataTable>>;

struct Session {
  std::string id;
  std::string table_id;
  std::string created_at;
  std::vector<std::string> utterances;
  std::vector<ChartResult> results;
  std::mutex mu;
};

ApiResponse error_reply(int status, std::string_view code, const std::string& message, Json extra = Json::object()) {
  Json err = {{"code", std::string(code)}, {"message", message}};
  for (auto it = extra.begin(); it != extra.end(); ++it) err[it.key()] = it.value();
  return {status, Json{{"error", std::move(err)}}};
}

ApiResponse error_reply(const Error& e, Json extra = Json::object()) {
  return error_reply(status_for(e.code()), to_string(e.code()), e.what(), std::move(extra));
}

ApiResponse not_found(std::string_view what, const std::string& id) {
  return error_reply(404, "NotFound", std::string(what) + " '" + id + "' not found");
}

ApiResponse bad_request(const std::string& message) { return error_reply(400, "BadRequest", message); }

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json table_summary(const std::string& id, const DataTable& t) {
  Json cols = Json::array();
  for (const auto& c : t.columns()) cols.push_back({{"name", c.name}, {"type", std::string(to_string(c.type))}});
  return Json{{"table_id", id}, {"name", t.name()}, {"columns", std::move(cols)}, {"n_rows", t.n_rows()}};
}

Json results_json(const std::vector<ChartResult>& results) {
  Json out = Json::array();
  for (const auto& r : results) out.push_back(result_to_json(r));
  return out;
}

std::optional<size_t> positive_int(const Json& body, const char* key) {
  if (!body.contains(key) || body[key].is_null()) return std::nullopt;
  if (!body[key].is_number_integer() || body[key].get<long long>() < 1) {
    throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must be a positive integer");
  }
  return static_cast<size_t>(body[key].get<long long>());
}

bool is_none_value(const Json& v) {
  return v.is_null() || (v.is_string() && text::iequals(text::trim(v.get<std::string>()), "none"));
}

std::string string_value(const Json& v, const char* field) {
  if (!v.is_string()) throw Error(ErrorCode::SyntaxError, std::string(field) + " must be a string");
  return v.get<std::string>();
}

/// Applies one config-mode patch slot; throws on a bad value.
void apply_patch_slot(VisSpec& spec, const std::string& key, const Json& v, const DataTable& table) {
  if (key == "mark") {
    const std::string s = string_value(v, "mark");
    const auto m = mark_from_alias(s);
    if (!m) throw Error(ErrorCode::UnknownKeyword, "unknown mark '" + s + "'");
    spec.mark = *m;
  } else if (key == "x" || key == "y") {
    (key == "x" ? spec.x : spec.y) = parse_field_ref(string_value(v, key.c_str()), table);
  } else if (key == "color") {
    if (is_none_value(v)) spec.color.reset();
    else spec.color = table.column(string_value(v, "color")).name;
  } else if (key == "sort") {
    spec.sort = is_none_value(v) ? std::nullopt : parse_sort(string_value(v, "sort"));
  } else if (key == "filter") {
    spec.filter = is_none_value(v) ? std::nullopt : parse_filter(string_value(v, "filter"), table);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown patch key '" + key + "'");
  }
}

void apply_aggregation_patch(VisSpec& spec, const Json& v) {
  if (!v.is_object()) throw Error(ErrorCode::SyntaxError, "aggregations must map x/y to a function or none");
  for (auto it = v.begin(); it != v.end(); ++it) {
    if (it.key() != "x" && it.key() != "y") {
      throw Error(ErrorCode::SyntaxError, "aggregations keys are x and y, got '" + it.key() + "'");
    }
    FieldRef& f = it.key() == "x" ? spec.x : spec.y;
    if (is_none_value(it.value())) {
      f.aggregation.reset();
      continue;
    }
    const std::string name = string_value(it.value(), "aggregation");
    auto fn = aggregate_from_string(name);
    if (!fn && text::iequals(name, "mean")) fn = AggregateFn::average;
    if (!fn) throw Error(ErrorCode::UnknownKeyword, "unknown aggregation '" + name + "'");
    f.aggregation = fn;
  }
}

}  // namespace

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError:
    case ErrorCode::UnknownColumn:
    case ErrorCode::UnknownKeyword:
    case ErrorCode::TypeMismatch:
    case ErrorCode::InvalidCombination:
    case ErrorCode::InvalidEditedAnswer:
      return 409;
    case ErrorCode::NoValidChart:
    case ErrorCode::PromptTooLong:
      return 422;
    case ErrorCode::BackendUnavailable:
    case ErrorCode::MalformedResponse:
    case ErrorCode::ScriptMiss:
      return 502;
    default:
      return 400;
  }
}

struct ChartService::Impl {
  std::shared_ptr<const CompletionBackend> backend;
  ServiceOptions options;

  mutable std::mutex tables_mu;
  std::shared_ptr<const TableMap> tables = std::make_shared<TableMap>();
  std::map<std::string, std::string> table_files;

  mutable std::shared_mutex sessions_mu;
  std::map<std::string, std::shared_ptr<Session>> sessions;

  std::mutex rng_mu;
  std::mt19937_64 rng{std::random_device{}()};

  std::unique_ptr<httplib::Server> server;
  std::thread server_thread;

  std::string new_id(char prefix) {
    std::lock_guard lock(rng_mu);
    char buf[24];
    std::snprintf(buf, sizeof buf, "%c%016llx", prefix, static_cast<unsigned long long>(rng()));
    return buf;
  }

  std::shared_ptr<const TableMap> table_snapshot() const {
    std::lock_guard lock(tables_mu);
    return tables;
  }

  std::shared_ptr<const DataTable> find_table(const std::string& id) const {
    auto snap = table_snapshot();
    auto it = snap->find(id);
    return it == snap->end() ? nullptr : it->second;
  }

  void register_table(const std::string& id, std::shared_ptr<const DataTable> table) {
    std::lock_guard lock(tables_mu);
    auto next = std::make_shared<TableMap>(*tables);
    (*next)[id] = std::move(table);
    tables = std::move(next);
  }

  std::shared_ptr<Session> find_session(const std::string& id) const {
    std::shared_lock lock(sessions_mu);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  Json session_json(const Session& s) const {
    return Json{{"session_id", s.id},
                {"table_id", s.table_id},
                {"created_at", s.created_at},
                {"utterances", s.utterances},
                {"results", results_json(s.results)}};
  }

  // Persistence. Snapshots hold the step texts; results are rebuilt on load.
  void persist_table(const std::string& id, const DataTable& t) {
    if (options.persist_dir.empty()) return;
    const fs::path dir = fs::path(options.persist_dir) / "tables";
    fs::create_directories(dir);
    std::ofstream(dir / (id + ".csv"), std::ios::binary) << to_csv(t);
    std::ofstream(dir / (id + ".name")) << t.name();
  }

  void persist_session(const Session& s) {
    if (options.persist_dir.empty()) return;
    fs::create_directories(options.persist_dir);
    Json results = Json::array();
    for (const auto& r : s.results) {
      Json steps = Json::array();
      for (const auto& a : r.answers) steps.push_back(serialize_step_answer(a));
      results.push_back({{"rank", r.rank}, {"score", r.score}, {"steps", std::move(steps)}});
    }
    const Json snap = {{"id", s.id},
                       {"table_id", s.table_id},
                       {"created_at", s.created_at},
                       {"utterances", s.utterances},
                       {"results", std::move(results)}};
    const fs::path tmp = fs::path(options.persist_dir) / (s.id + ".json.tmp");
    std::ofstream(tmp) << snap.dump(2);
    fs::rename(tmp, fs::path(options.persist_dir) / (s.id + ".json"));
  }

  void restore() {
    if (options.persist_dir.empty() || !fs::exists(options.persist_dir)) return;
    const fs::path tdir = fs::path(options.persist_dir) / "tables";
    if (fs::exists(tdir)) {
      for (const auto& entry : fs::directory_iterator(tdir)) {
        if (entry.path().extension() != ".csv") continue;
        const std::string id = entry.path().stem().string();
        std::string name = id;
        if (std::ifstream name_in(tdir / (id + ".name")); name_in) std::getline(name_in, name);
        try {
          std::ifstream in(entry.path(), std::ios::binary);
          register_table(id, std::make_shared<const DataTable>(load_csv(in, name)));
        } catch (const Error& e) {
          std::cerr << "skipping persisted table " << id << ": " << e.what() << "\n";
        }
      }
    }
    for (const auto& entry : fs::directory_iterator(options.persist_dir)) {
      if (entry.path().extension() != ".json") continue;
      try {
        std::ifstream in(entry.path());
        const Json snap = Json::parse(in);
        auto s = std::make_shared<Session>();
        s->id = snap.at("id").get<std::string>();
        s->table_id = snap.at("table_id").get<std::string>();
        s->created_at = snap.value("created_at", "");
        s->utterances = snap.value("utterances", std::vector<std::string>{});
        auto table = find_table(s->table_id);
        if (!table) throw Error(ErrorCode::IoError, "table " + s->table_id + " is missing");
        for (const auto& r : snap.at("results")) {
          std::vector<StepAnswer> answers;
          int step = 1;
          for (const auto& t : r.at("steps")) {
            answers.push_back(parse_step_answer(step_from_number(step++), t.get<std::string>(), *table));
          }
          auto result = make_result(answers, r.at("score").get<double>(), *table, options.generation.compile);
          result.rank = r.at("rank").get<size_t>();
          s->results.push_back(std::move(result));
        }
        std::unique_lock lock(sessions_mu);
        sessions[s->id] = std::move(s);
      } catch (const std::exception& e) {
        std::cerr << "skipping persisted session " << entry.path().filename() << ": " << e.what() << "\n";
      }
    }
  }

  void build_server(ChartService& svc);
};

ChartService::ChartService(std::shared_ptr<const CompletionBackend> backend, ServiceOptions options)
    : impl_(std::make_unique<Impl>()) {
  if (!backend) throw Error(ErrorCode::InvalidArgument, "service needs a completion backend");
  options.generation.validate();
  impl_->backend = std::move(backend);
  impl_->options = std::move(options);
  impl_->restore();
}

ChartService::~ChartService() { stop(); }

ApiResponse ChartService::upload_table(const std::string& filename, const std::string& csv) {
  std::string name = fs::path(filename).stem().string();
  if (name.empty()) name = "table";
  std::shared_ptr<const DataTable> table;
  try {
    table = std::make_shared<const DataTable>(load_csv_text(csv, name));
  } catch (const Error& e) {
    return error_reply(400, to_string(e.code()), e.what());
  }
  const std::string id = impl_->new_id('t');
  impl_->register_table(id, table);
  impl_->persist_table(id, *table);
  return {201, table_summary(id, *table)};
}

ApiResponse ChartService::get_table(const std::string& table_id) const {
  auto table = impl_->find_table(table_id);
  if (!table) return not_found("table", table_id);
  Json body = table_summary(table_id, *table);
  Json rows = Json::array();
  for (size_t r = 0; r < std::min(kPreviewRows, table->n_rows()); ++r) {
    Json row = Json::array();
    for (const auto& cell : table->rows()[r]) row.push_back(cell.is_null() ? Json(nullptr) : Json(cell.raw));
    rows.push_back(std::move(row));
  }
  body["preview_rows"] = std::move(rows);
  return {200, std::move(body)};
}

ApiResponse ChartService::create_session(const Json& body) {
  if (!body.is_object() || !body.contains("table_id") || !body["table_id"].is_string()) {
    return bad_request("body needs a string \"table_id\"");
  }
  const std::string table_id = body["table_id"].get<std::string>();
  if (!impl_->find_table(table_id)) return not_found("table", table_id);
  auto s = std::make_shared<Session>();
  s->id = impl_->new_id('s');
  s->table_id = table_id;
  s->created_at = utc_now();
  {
    std::unique_lock lock(impl_->sessions_mu);
    impl_->sessions[s->id] = s;
  }
  std::lock_guard lock(s->mu);
  impl_->persist_session(*s);
  return {201, impl_->session_json(*s)};
}

ApiResponse ChartService::get_session(const std::string& session_id) const {
  auto s = impl_->find_session(session_id);
  if (!s) return not_found("session", session_id);
  std::lock_guard lock(s->mu);
  return {200, impl_->session_json(*s)};
}

ApiResponse ChartService::generate(const std::string& session_id, const Json& body) {
  auto s = impl_->find_session(session_id);
  if (!s) return not_found("session", session_id);
  if (!body.is_object() || !body.contains("utterance") || !body["utterance"].is_string() ||
      text::trim(body["utterance"].get<std::string>()).empty()) {
    return bad_request("body needs a non-empty \"utterance\"");
  }
  std::lock_guard lock(s->mu);
  auto table = impl_->find_table(s->table_id);
  if (!table) return not_found("table", s->table_id);
  try {
    GenerationConfig cfg = impl_->options.generation;
    if (auto k = positive_int(body, "k")) cfg.k = *k;
    const std::string utterance = body["utterance"].get<std::string>();
    auto results = generate_topk(*table, utterance, cfg, *impl_->backend);
    s->utterances.push_back(utterance);
    s->results = std::move(results);
    impl_->persist_session(*s);
    return {200, Json{{"session_id", s->id}, {"utterance", utterance}, {"results", results_json(s->results)}}};
  } catch (const Error& e) {
    return error_reply(e);
  }
}

ApiResponse ChartService::regenerate(const std::string& session_id, const Json& body) {
  auto s = impl_->find_session(session_id);
  if (!s) return not_found("session", session_id);
  if (!body.is_object()) return bad_request("body must be an object");
  std::lock_guard lock(s->mu);
  auto table = impl_->find_table(s->table_id);
  if (!table) return not_found("table", s->table_id);
  try {
    const size_t rank = positive_int(body, "rank").value_or(1);
    const auto from_step = positive_int(body, "from_step");
    if (!from_step || *from_step > 6) return bad_request("\"from_step\" must be 1-6");
    if (rank > s->results.size()) return not_found("result rank", std::to_string(rank));

    std::map<int, std::string> edits;
    if (body.contains("edited_answers") && !body["edited_answers"].is_null()) {
      const Json& e = body["edited_answers"];
      if (!e.is_object()) return bad_request("\"edited_answers\" maps step numbers to answer text");
      for (auto it = e.begin(); it != e.end(); ++it) {
        const auto n = text::parse_number(it.key());
        if (!n || *n < 1 || *n > 6 || !it.value().is_string()) {
          return bad_request("\"edited_answers\" maps step numbers to answer text");
        }
        edits[static_cast<int>(*n)] = it.value().get<std::string>();
      }
    }
    for (const auto& [step, answer] : edits) {
      if (step > static_cast<int>(*from_step)) {
        return error_reply(409, to_string(ErrorCode::InvalidEditedAnswer),
                           "edit to step " + std::to_string(step) + " lies after from_step", Json{{"step", step}});
      }
      try {
        parse_step_answer(step_from_number(step), answer, *table);
      } catch (const Error& err) {
        return error_reply(409, to_string(ErrorCode::InvalidEditedAnswer), err.what(), Json{{"step", step}});
      }
    }
    const auto pinned = apply_step_edits(s->results[rank - 1].answers, static_cast<int>(*from_step), edits, *table);
    if (auto problem = check_pinned(pinned, *table)) {
      return error_reply(409, to_string(ErrorCode::InvalidEditedAnswer), problem->message,
                         Json{{"step", problem->step}});
    }
    GenerationConfig cfg = impl_->options.generation;
    if (auto k = positive_int(body, "k")) cfg.k = *k;
    std::string utterance = s->utterances.empty() ? std::string() : s->utterances.back();
    if (body.contains("utterance") && body["utterance"].is_string()) utterance = body["utterance"].get<std::string>();
    auto results = regenerate_from_step(*table, utterance, pinned, cfg, *impl_->backend);
    s->results = std::move(results);
    impl_->persist_session(*s);
    return {200, Json{{"session_id", s->id}, {"utterance", utterance}, {"results", results_json(s->results)}}};
  } catch (const Error& e) {
    return error_reply(e);
  }
}

ApiResponse ChartService::update_config(const std::string& session_id, size_t rank, const Json& patch) {
  auto s = impl_->find_session(session_id);
  if (!s) return not_found("session", session_id);
  if (!patch.is_object()) return bad_request("patch must be an object");
  std::lock_guard lock(s->mu);
  auto table = impl_->find_table(s->table_id);
  if (!table) return not_found("table", s->table_id);
  if (rank < 1 || rank > s->results.size()) return not_found("result rank", std::to_string(rank));

  const ChartResult& current = s->results[rank - 1];
  VisSpec spec = current.spec;
  static const char* kOrder[] = {"mark", "x", "y", "aggregations", "color", "sort", "filter"};
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (std::find(std::begin(kOrder), std::end(kOrder), it.key()) == std::end(kOrder)) {
      return bad_request("unknown patch key '" + it.key() + "'");
    }
  }
  for (const char* key : kOrder) {
    if (!patch.contains(key)) continue;
    try {
      if (std::string_view(key) == "aggregations") apply_aggregation_patch(spec, patch[key]);
      else apply_patch_slot(spec, key, patch[key], *table);
    } catch (const Error& e) {
      return error_reply(409, to_string(e.code()), e.what(), Json{{"field", key}});
    }
  }
  try {
    validate_spec(spec, *table);
    ChartResult updated = make_result(extract_steps(spec), current.score, *table, impl_->options.generation.compile);
    updated.rank = current.rank;
    s->results[rank - 1] = std::move(updated);
  } catch (const Error& e) {
    return error_reply(409, to_string(e.code()), e.what());
  }
  impl_->persist_session(*s);
  return {200, Json{{"session_id", s->id}, {"result", result_to_json(s->results[rank - 1])}}};
}

ApiResponse ChartService::health() const {
  size_t n_sessions;
  {
    std::shared_lock lock(impl_->sessions_mu);
    n_sessions = impl_->sessions.size();
  }
  return {200, Json{{"status", "ok"}, {"tables", impl_->table_snapshot()->size()}, {"sessions", n_sessions}}};
}

void ChartService::Impl::build_server(ChartService& svc) {
  server = std::make_unique<httplib::Server>();
  auto& srv = *server;
  const std::string origin = options.cors_origin;

  auto send = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto parse_body = [](const httplib::Request& req, Json& out) -> bool {
    if (req.body.empty()) {
      out = Json::object();
      return true;
    }
    try {
      out = Json::parse(req.body);
      return true;
    } catch (const Json::exception&) {
      return false;
    }
  };
  auto with_json = [=](auto handler) {
    return [=](const httplib::Request& req, httplib::Response& res) {
      Json body;
      if (!parse_body(req, body)) return send(res, bad_request("request body is not valid JSON"));
      send(res, handler(req, body));
    };
  };

  srv.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    if (origin.empty()) return;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PATCH, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  srv.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send(res, error_reply(500, "Internal", what));
  });
  srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Get("/api/health", [&svc, send](const httplib::Request&, httplib::Response& res) { send(res, svc.health()); });
  srv.Post("/api/tables", [&svc, send](const httplib::Request& req, httplib::Response& res) {
    if (req.is_multipart_form_data()) {
      if (!req.has_file("file")) return send(res, bad_request("multipart upload needs a \"file\" field"));
      const auto file = req.get_file_value("file");
      return send(res, svc.upload_table(file.filename, file.content));
    }
    if (req.body.empty()) return send(res, bad_request("no CSV content"));
    send(res, svc.upload_table(req.has_param("name") ? req.get_param_value("name") : "table", req.body));
  });
  srv.Get(R"(/api/tables/([^/]+))", [&svc, send](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.get_table(req.matches[1]));
  });
  srv.Post("/api/sessions",
           with_json([&svc](const httplib::Request&, const Json& body) { return svc.create_session(body); }));
  srv.Get(R"(/api/sessions/([^/]+))", [&svc, send](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.get_session(req.matches[1]));
  });
  srv.Post(R"(/api/sessions/([^/]+)/generate)", with_json([&svc](const httplib::Request& req, const Json& body) {
             return svc.generate(req.matches[1], body);
           }));
  srv.Post(R"(/api/sessions/([^/]+)/regenerate)", with_json([&svc](const httplib::Request& req, const Json& body) {
             return svc.regenerate(req.matches[1], body);
           }));
  srv.Patch(R"(/api/sessions/([^/]+)/results/(\d+))", with_json([&svc](const httplib::Request& req, const Json& body) {
              return svc.update_config(req.matches[1], std::stoul(req.matches[2]), body);
            }));
}

bool ChartService::listen(const std::string& host, int port) {
  impl_->build_server(*this);
  return impl_->server->listen(host, port);
}

int ChartService::start_background(const std::string& host) {
  impl_->build_server(*this);
  const int port = impl_->server->bind_to_any_port(host);
  if (port < 0) throw Error(ErrorCode::IoError, "cannot bind a port on " + host);
  impl_->server_thread = std::thread([srv = impl_->server.get()] { srv->listen_after_bind(); });
  impl_->server->wait_until_ready();
  return port;
}

void ChartService::stop() {
  if (!impl_ || !impl_->server) return;
  impl_->server->stop();
  if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

}  // namespace chartpipe
