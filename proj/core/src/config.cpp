#include "chartpipe/config.h"

#include <cctype>
#include <fstream>
#include <sstream>

#include "chartpipe/errors.h"
#include "chartpipe/text.h"

namespace chartpipe {

namespace {

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace

Config Config::parse(std::string_view source) {
  Config cfg;
  std::string section;
  size_t line_no = 0;
  for (const auto& raw : text::split(source, '\n')) {
    ++line_no;
    const std::string line = text::trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::SyntaxError, "config line " + std::to_string(line_no) + ": bad section");
      section = text::trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::SyntaxError, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = text::trim(std::string_view(line).substr(0, eq));
    std::string value = text::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::SyntaxError, "config line " + std::to_string(line_no) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (!section.empty()) key = section + "." + key;
    cfg.set(std::move(key), std::move(value));
  }
  return cfg;
}

Config Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> Config::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void Config::set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

std::string Config::env_name(std::string_view key) {
  std::string out = "CHARTPIPE_";
  for (char c : key) {
    out += (c == '.' || c == '-') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace chartpipe
