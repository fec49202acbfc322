#include "chartpipe/backend.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "chartpipe/errors.h"
#include "chartpipe/prompt.h"
#include "chartpipe/text.h"

namespace chartpipe {

namespace {

std::string key_text(std::string_view s) { return text::to_lower(text::normalize_space(s)); }

std::string index_key(std::string_view utterance, int step) {
  return std::to_string(step) + "|" + key_text(utterance);
}

ScoredText candidate_from_json(const Json& c) {
  if (!c.is_object() || !c.contains("text") || !c["text"].is_string() || !c.contains("logprob") ||
      !c["logprob"].is_number()) {
    throw Error(ErrorCode::MalformedResponse, "candidate needs a string text and a numeric logprob");
  }
  return {c["text"].get<std::string>(), c["logprob"].get<double>()};
}

}  // namespace

size_t estimate_tokens(std::string_view prompt) { return text::split_ws(prompt).size(); }

std::vector<ScoredText> CompletionBackend::complete(const CompletionRequest& request) const {
  if (request.n_candidates == 0) throw Error(ErrorCode::InvalidArgument, "n_candidates must be at least 1");
  const size_t tokens = estimate_tokens(request.prompt);
  if (tokens > prompt_token_limit_) {
    throw Error(ErrorCode::PromptTooLong, "prompt has " + std::to_string(tokens) + " tokens, limit is " +
                                              std::to_string(prompt_token_limit_));
  }
  ++calls_;
  auto out = do_complete(request);
  if (out.empty()) throw Error(ErrorCode::MalformedResponse, "backend returned no candidates");
  for (const auto& c : out) {
    if (!std::isfinite(c.logprob) || c.logprob > 0.0) {
      throw Error(ErrorCode::MalformedResponse, "logprob must be finite and <= 0");
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredText& a, const ScoredText& b) { return a.logprob > b.logprob; });
  if (out.size() > request.n_candidates) out.resize(request.n_candidates);
  return out;
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries) {
  for (auto& e : entries) add(std::move(e));
}

void ScriptedBackend::add(ScriptEntry entry) {
  step_from_number(entry.step);
  index_.emplace(index_key(entry.utterance, entry.step), entries_.size());
  entries_.push_back(std::move(entry));
}

ScriptedBackend ScriptedBackend::from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    throw Error(ErrorCode::InvalidArgument, "script needs an \"entries\" array");
  }
  ScriptedBackend backend;
  for (const auto& e : doc["entries"]) {
    ScriptEntry entry;
    try {
      entry.utterance = e.at("utterance").get<std::string>();
      entry.step = e.at("step").get<int>();
      if (e.contains("prior")) {
        for (auto it = e["prior"].begin(); it != e["prior"].end(); ++it) {
          const auto n = text::parse_number(it.key());
          if (!n) throw Error(ErrorCode::InvalidArgument, "prior keys are step numbers");
          entry.prior[static_cast<int>(*n)] = it.value().get<std::string>();
        }
      }
      for (const auto& c : e.at("candidates")) entry.candidates.push_back(candidate_from_json(c));
    } catch (const Json::exception& ex) {
      throw Error(ErrorCode::InvalidArgument, std::string("bad script entry: ") + ex.what());
    }
    backend.add(std::move(entry));
  }
  return backend;
}

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open script " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::InvalidArgument, "script " + path + " is not JSON: " + ex.what());
  }
  return from_json(doc);
}

Json ScriptedBackend::to_json() const {
  Json entries = Json::array();
  for (const auto& e : entries_) {
    Json j = {{"utterance", e.utterance}, {"step", e.step}};
    if (!e.prior.empty()) {
      Json prior = Json::object();
      for (const auto& [k, v] : e.prior) prior[std::to_string(k)] = v;
      j["prior"] = std::move(prior);
    }
    Json cands = Json::array();
    for (const auto& c : e.candidates) cands.push_back({{"text", c.text}, {"logprob", c.logprob}});
    j["candidates"] = std::move(cands);
    entries.push_back(std::move(j));
  }
  return Json{{"entries", std::move(entries)}};
}

std::vector<ScoredText> ScriptedBackend::do_complete(const CompletionRequest& request) const {
  PromptContext ctx;
  try {
    ctx = decode_prompt(request.prompt);
  } catch (const Error& e) {
    throw Error(ErrorCode::ScriptMiss, std::string("prompt not understood: ") + e.what());
  }
  const ScriptEntry* best = nullptr;
  size_t best_index = 0;
  auto [lo, hi] = index_.equal_range(index_key(ctx.utterance, ctx.step));
  for (auto it = lo; it != hi; ++it) {
    const ScriptEntry& e = entries_[it->second];
    const bool applies = std::all_of(e.prior.begin(), e.prior.end(), [&](const auto& pin) {
      auto found = ctx.prior.find(pin.first);
      return found != ctx.prior.end() && key_text(found->second) == key_text(pin.second);
    });
    if (!applies) continue;
    if (!best || e.prior.size() > best->prior.size() ||
        (e.prior.size() == best->prior.size() && it->second < best_index)) {
      best = &e;
      best_index = it->second;
    }
  }
  if (!best) {
    throw Error(ErrorCode::ScriptMiss,
                "no script entry for step " + std::to_string(ctx.step) + " of '" + ctx.utterance + "'");
  }
  return best->candidates;
}

std::vector<ScoredText> parse_completion_response(std::string_view body) {
  Json doc;
  try {
    doc = Json::parse(body);
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::MalformedResponse, std::string("response is not JSON: ") + ex.what());
  }
  if (!doc.is_object() || !doc.contains("candidates") || !doc["candidates"].is_array()) {
    throw Error(ErrorCode::MalformedResponse, "response needs a \"candidates\" array");
  }
  std::vector<ScoredText> out;
  for (const auto& c : doc["candidates"]) out.push_back(candidate_from_json(c));
  return out;
}

}  // namespace chartpipe
