#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace chartpipe {

/// Flat key/value settings read from a TOML-like text file:
///
///   # comment
///   k = 3
///   backend_url = "http://localhost:8000/complete"
///   [prompts]
///   version = "2"            -> key "prompts.version"
///
/// Values are strings; surrounding double quotes are removed.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load_file(const std::string& path);

  std::optional<std::string> get(std::string_view key) const;
  void set(std::string key, std::string value);
  bool contains(std::string_view key) const { return get(key).has_value(); }
  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }

  /// Environment fallback name: `CHARTPIPE_` + upper-cased key with dots
  /// and dashes turned into underscores.
  static std::string env_name(std::string_view key);

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace chartpipe
