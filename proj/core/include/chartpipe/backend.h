#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "chartpipe/json.h"

namespace chartpipe {

inline constexpr size_t kDefaultPromptTokenLimit = 580;

struct CompletionRequest {
  std::string prompt;
  size_t n_candidates = 1;
  size_t max_new_tokens = 64;
};

struct ScoredText {
  std::string text;
  double logprob = 0.0;

  bool operator==(const ScoredText&) const = default;
};

/// Whitespace-split token estimate used for the prompt limit.
size_t estimate_tokens(std::string_view prompt);

/// A completion model. complete() is the public contract: it checks the
/// request, calls the implementation, then sorts by logprob (stable),
/// truncates to n_candidates and rejects non-finite or positive scores.
/// Implementations must tolerate concurrent calls.
class CompletionBackend {
 public:
  CompletionBackend() = default;
  CompletionBackend(const CompletionBackend& other) : prompt_token_limit_(other.prompt_token_limit_) {}
  CompletionBackend& operator=(const CompletionBackend& other) {
    prompt_token_limit_ = other.prompt_token_limit_;
    return *this;
  }
  virtual ~CompletionBackend() = default;

  std::vector<ScoredText> complete(const CompletionRequest& request) const;

  size_t prompt_token_limit() const { return prompt_token_limit_; }
  void set_prompt_token_limit(size_t limit) { prompt_token_limit_ = limit; }

  /// Number of complete() calls that reached the implementation.
  size_t call_count() const { return calls_.load(); }

 protected:
  virtual std::vector<ScoredText> do_complete(const CompletionRequest& request) const = 0;

 private:
  size_t prompt_token_limit_ = kDefaultPromptTokenLimit;
  mutable std::atomic<size_t> calls_{0};
};

/// One playback rule. `prior` pins answers of earlier steps (by step
/// number); an entry applies only when every pinned answer matches the
/// prompt's prior answers. Among applicable entries the one with the most
/// pins wins, earlier entries breaking ties.
struct ScriptEntry {
  std::string utterance;
  int step = 1;
  std::map<int, std::string> prior;
  std::vector<ScoredText> candidates;
};

/// Deterministic playback backend keyed on (utterance, step). Utterances
/// and prior answers are compared case-insensitively with whitespace
/// collapsed. A prompt no entry matches raises ScriptMiss.
class ScriptedBackend : public CompletionBackend {
 public:
  ScriptedBackend() = default;
  explicit ScriptedBackend(std::vector<ScriptEntry> entries);

  /// {"entries": [{"utterance", "step", "prior": {"1": "..."}, "candidates": [{"text", "logprob"}]}]}
  static ScriptedBackend from_json(const Json& doc);
  static ScriptedBackend from_file(const std::string& path);
  Json to_json() const;

  void add(ScriptEntry entry);
  const std::vector<ScriptEntry>& entries() const { return entries_; }

 protected:
  std::vector<ScoredText> do_complete(const CompletionRequest& request) const override;

 private:
  std::vector<ScriptEntry> entries_;
  std::multimap<std::string, size_t> index_;
};

struct HttpBackendOptions {
  /// http://host[:port]/path
  std::string url;
  /// Sent as `Authorization: Bearer <token>` when non-empty.
  std::string bearer_token;
  std::chrono::milliseconds timeout{30000};
};

/// Generic completion endpoint: POST {"prompt", "n", "max_new_tokens"},
/// expects {"candidates": [{"text", "logprob"}]}.
class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options);

  /// URL from CHARTPIPE_BACKEND_URL unless `url` is given, token from
  /// CHARTPIPE_BACKEND_TOKEN.
  static HttpBackend from_environment(const std::string& url = {});

  const HttpBackendOptions& options() const { return options_; }

 protected:
  std::vector<ScoredText> do_complete(const CompletionRequest& request) const override;

 private:
  HttpBackendOptions options_;
  std::string scheme_host_;
  std::string path_;
};

/// Parses a wire response body into candidates. Throws MalformedResponse.
std::vector<ScoredText> parse_completion_response(std::string_view body);

}  // namespace chartpipe
