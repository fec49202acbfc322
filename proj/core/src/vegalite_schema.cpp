#include "chartpipe/vegalite_schema.h"

#include <set>

namespace chartpipe {

namespace {

const std::set<std::string> kTopKeys{"$schema", "data",   "mark",   "encoding", "transform",
                                     "title",   "width",  "height", "description", "config"};
const std::set<std::string> kMarks{"bar", "line", "point", "arc", "area", "tick", "rect", "circle", "square"};
const std::set<std::string> kChannels{"x", "y", "color", "theta", "order", "size", "shape", "tooltip"};
const std::set<std::string> kChannelKeys{"field", "type", "aggregate", "sort", "timeUnit", "title", "stack"};
const std::set<std::string> kTypes{"nominal", "ordinal", "quantitative", "temporal"};
const std::set<std::string> kAggregates{"count", "mean", "average", "sum", "max", "min", "median"};
const std::set<std::string> kSortWords{"ascending", "descending", "x", "y", "-x", "-y", "color", "-color"};
const std::set<std::string> kPredicateOps{"equal", "lt", "lte", "gt", "gte", "oneOf", "range", "valid"};

struct Checker {
  const DataTable* table;
  std::vector<std::string> issues;

  void fail(const std::string& where, const std::string& what) { issues.push_back(where + ": " + what); }

  void check_field(const std::string& where, const Json& field) {
    if (!field.is_string()) {
      fail(where, "field must be a string");
      return;
    }
    if (table && !table->find_column(field.get<std::string>())) {
      fail(where, "unknown field '" + field.get<std::string>() + "'");
    }
  }

  void check_data(const Json& data) {
    if (!data.is_object()) return fail("data", "must be an object");
    const bool has_values = data.contains("values");
    const bool has_url = data.contains("url");
    if (has_values == has_url) return fail("data", "needs exactly one of values or url");
    if (has_values) {
      if (!data["values"].is_array()) return fail("data.values", "must be an array");
      for (const auto& row : data["values"]) {
        if (!row.is_object()) return fail("data.values", "rows must be objects");
      }
    } else if (!data["url"].is_string()) {
      fail("data.url", "must be a string");
    }
  }

  void check_mark(const Json& mark) {
    std::string type;
    if (mark.is_string()) type = mark.get<std::string>();
    else if (mark.is_object() && mark.contains("type") && mark["type"].is_string()) type = mark["type"].get<std::string>();
    else return fail("mark", "must be a string or an object with a type");
    if (!kMarks.count(type)) fail("mark", "unknown mark '" + type + "'");
  }

  void check_channel(const std::string& name, const Json& def) {
    const std::string where = "encoding." + name;
    if (!kChannels.count(name)) fail(where, "unknown channel");
    if (!def.is_object()) return fail(where, "definition must be an object");
    for (auto it = def.begin(); it != def.end(); ++it) {
      if (!kChannelKeys.count(it.key())) fail(where, "unexpected key '" + it.key() + "'");
    }
    if (!def.contains("type")) {
      fail(where, "missing type");
    } else if (!def["type"].is_string() || !kTypes.count(def["type"].get<std::string>())) {
      fail(where, "bad type");
    }
    const bool counted = def.contains("aggregate") && def["aggregate"] == "count";
    if (def.contains("field")) check_field(where, def["field"]);
    else if (!counted) fail(where, "missing field");
    if (def.contains("aggregate")) {
      if (!def["aggregate"].is_string() || !kAggregates.count(def["aggregate"].get<std::string>())) {
        fail(where, "bad aggregate");
      }
    }
    if (def.contains("sort")) {
      const Json& s = def["sort"];
      const bool ok = s.is_null() || s.is_array() || s.is_object() ||
                      (s.is_string() && kSortWords.count(s.get<std::string>()));
      if (!ok) fail(where, "bad sort");
    }
  }

  void check_encoding(const Json& enc, const std::string& mark) {
    if (!enc.is_object()) return fail("encoding", "must be an object");
    for (auto it = enc.begin(); it != enc.end(); ++it) check_channel(it.key(), it.value());
    if (mark == "arc") {
      if (!enc.contains("theta")) fail("encoding", "arc needs theta");
    } else if (!mark.empty()) {
      if (!enc.contains("x")) fail("encoding", "missing x");
      if (!enc.contains("y")) fail("encoding", "missing y");
    }
  }

  void check_predicate(const std::string& where, const Json& p) {
    if (!p.is_object()) return fail(where, "predicate must be an object");
    if (p.contains("and") || p.contains("or")) {
      const Json& items = p.contains("and") ? p["and"] : p["or"];
      if (!items.is_array() || items.empty()) return fail(where, "and/or needs a non-empty array");
      for (size_t i = 0; i < items.size(); ++i) check_predicate(where + "[" + std::to_string(i) + "]", items[i]);
      return;
    }
    if (p.contains("not")) return check_predicate(where + ".not", p["not"]);
    if (!p.contains("field")) return fail(where, "field predicate needs a field");
    check_field(where, p["field"]);
    int ops = 0;
    for (auto it = p.begin(); it != p.end(); ++it) {
      if (kPredicateOps.count(it.key())) ++ops;
      else if (it.key() != "field" && it.key() != "timeUnit") fail(where, "unexpected key '" + it.key() + "'");
    }
    if (ops != 1) fail(where, "needs exactly one comparison");
  }

  void check_transform(const Json& t) {
    if (!t.is_array()) return fail("transform", "must be an array");
    for (size_t i = 0; i < t.size(); ++i) {
      const std::string where = "transform[" + std::to_string(i) + "]";
      if (!t[i].is_object() || !t[i].contains("filter")) {
        fail(where, "only filter transforms are emitted");
        continue;
      }
      check_predicate(where + ".filter", t[i]["filter"]);
    }
  }
};

}  // namespace

std::vector<std::string> vegalite_violations(const Json& doc, const DataTable* table) {
  Checker c{table, {}};
  if (!doc.is_object()) {
    c.fail("$", "document must be an object");
    return c.issues;
  }
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!kTopKeys.count(it.key())) c.fail("$", "unexpected key '" + it.key() + "'");
  }
  if (!doc.contains("$schema") || !doc["$schema"].is_string() ||
      doc["$schema"].get<std::string>().find("vega-lite/v5") == std::string::npos) {
    c.fail("$schema", "must reference Vega-Lite v5");
  }
  if (doc.contains("data")) c.check_data(doc["data"]);
  else c.fail("data", "missing");
  std::string mark;
  if (doc.contains("mark")) {
    c.check_mark(doc["mark"]);
    if (doc["mark"].is_string()) mark = doc["mark"].get<std::string>();
    else if (doc["mark"].is_object() && doc["mark"].contains("type") && doc["mark"]["type"].is_string())
      mark = doc["mark"]["type"].get<std::string>();
  } else {
    c.fail("mark", "missing");
  }
  if (doc.contains("encoding")) c.check_encoding(doc["encoding"], mark);
  else c.fail("encoding", "missing");
  if (doc.contains("transform")) c.check_transform(doc["transform"]);
  return c.issues;
}

}  // namespace chartpipe
