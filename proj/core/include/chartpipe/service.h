#pragma once

#include <map>
#include <memory>
#include <string>

#include "chartpipe/backend.h"
#include "chartpipe/json.h"
#include "chartpipe/pipeline.h"

namespace chartpipe {

struct ServiceOptions {
  /// Empty: sessions live in memory only. Otherwise each session is
  /// snapshotted to <dir>/<id>.json and uploaded tables to <dir>/tables/.
  std::string persist_dir;
  std::string cors_origin = "*";
  GenerationConfig generation;
};

struct ApiResponse {
  int status = 200;
  Json body;
};

/// Error envelope: {"error": {"code", "message"}} plus "step" or "field"
/// when the failure is tied to one edited step or config slot.
/// Status mapping: 400 bad request or table, 404 unknown id, 409 rejected
/// edit or patch, 422 no chart or prompt too long, 502 backend failure.
int status_for(ErrorCode code);

/// Request handlers behind the REST endpoints. Usable without a socket;
/// serve() wires them to an HTTP server.
///
///   POST  /api/tables                      multipart field "file" (or a text/csv body)
///   GET   /api/tables/{id}
///   POST  /api/sessions                    {"table_id"}
///   GET   /api/sessions/{id}
///   POST  /api/sessions/{id}/generate      {"utterance", "k"?}
///   POST  /api/sessions/{id}/regenerate    {"rank", "from_step", "edited_answers"?, "k"?}
///   PATCH /api/sessions/{id}/results/{rank}
///   GET   /api/health
class ChartService {
 public:
  ChartService(std::shared_ptr<const CompletionBackend> backend, ServiceOptions options = {});
  ~ChartService();
  ChartService(const ChartService&) = delete;
  ChartService& operator=(const ChartService&) = delete;

  ApiResponse upload_table(const std::string& filename, const std::string& csv);
  ApiResponse get_table(const std::string& table_id) const;
  ApiResponse create_session(const Json& body);
  ApiResponse get_session(const std::string& session_id) const;
  ApiResponse generate(const std::string& session_id, const Json& body);
  ApiResponse regenerate(const std::string& session_id, const Json& body);
  /// patch: {"mark", "x", "y", "color", "aggregations": {"x"|"y": fn|"none"}, "sort", "filter"},
  /// every key optional. Never calls the backend.
  ApiResponse update_config(const std::string& session_id, size_t rank, const Json& patch);
  ApiResponse health() const;

  /// Binds and serves until stop(). Returns false if the port cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and serves on a background thread; returns the port.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace chartpipe
