#include <cstdlib>

#include <httplib.h>

#include "chartpipe/backend.h"
#include "chartpipe/errors.h"

namespace chartpipe {

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  const std::string& url = options_.url;
  if (url.rfind("https://", 0) == 0) {
    throw Error(ErrorCode::InvalidArgument, "https backends are not supported, use a plain http endpoint");
  }
  if (url.rfind("http://", 0) != 0) {
    throw Error(ErrorCode::InvalidArgument, "backend url must start with http://, got '" + url + "'");
  }
  const size_t slash = url.find('/', 7);
  scheme_host_ = url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
  if (scheme_host_.size() <= 7) throw Error(ErrorCode::InvalidArgument, "backend url has no host");
}

HttpBackend HttpBackend::from_environment(const std::string& url) {
  HttpBackendOptions opts;
  opts.url = url;
  if (opts.url.empty()) {
    if (const char* env = std::getenv("CHARTPIPE_BACKEND_URL")) opts.url = env;
  }
  if (opts.url.empty()) {
    throw Error(ErrorCode::BackendUnavailable, "no backend url: set CHARTPIPE_BACKEND_URL or backend_url");
  }
  if (const char* token = std::getenv("CHARTPIPE_BACKEND_TOKEN")) opts.bearer_token = token;
  return HttpBackend(std::move(opts));
}

std::vector<ScoredText> HttpBackend::do_complete(const CompletionRequest& request) const {
  httplib::Client client(scheme_host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  if (!options_.bearer_token.empty()) client.set_bearer_token_auth(options_.bearer_token);

  const Json body = {{"prompt", request.prompt},
                     {"n", request.n_candidates},
                     {"max_new_tokens", request.max_new_tokens}};
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::BackendUnavailable,
                "backend request failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::BackendUnavailable, "backend answered HTTP " + std::to_string(res->status));
  }
  return parse_completion_response(res->body);
}

}  // namespace chartpipe
