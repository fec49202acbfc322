#include "chartpipe/dataset.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <unordered_map>

#include "chartpipe/compiler.h"
#include "chartpipe/errors.h"
#include "chartpipe/text.h"

namespace chartpipe {

namespace {

bool is_none(const Json& v) {
  return v.is_null() || (v.is_string() && text::iequals(text::trim(v.get<std::string>()), "none")) ||
         (v.is_string() && text::trim(v.get<std::string>()).empty());
}

std::string slot_string(const Json& slots, const char* key, bool required) {
  if (!slots.contains(key) || is_none(slots[key])) {
    if (required) throw Error(ErrorCode::SyntaxError, std::string("slot '") + key + "' is required");
    return {};
  }
  if (!slots[key].is_string()) throw Error(ErrorCode::SyntaxError, std::string("slot '") + key + "' must be a string");
  return slots[key].get<std::string>();
}

FieldRef slot_field(const Json& slots, const char* field_key, const char* aggr_key, const DataTable& table) {
  FieldRef f;
  f.column = table.columns()[table.column_index(slot_string(slots, field_key, true))].name;
  const std::string aggr = slot_string(slots, aggr_key, false);
  if (!aggr.empty()) {
    auto fn = aggregate_from_string(aggr);
    if (!fn && text::iequals(aggr, "mean")) fn = AggregateFn::average;
    if (!fn) throw Error(ErrorCode::UnknownKeyword, "unknown aggregation '" + aggr + "'");
    f.aggregation = fn;
  }
  return f;
}

std::string line_context(size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace

Json spec_to_slots(const VisSpec& spec) {
  auto aggr = [](const FieldRef& f) { return f.aggregation ? std::string(to_string(*f.aggregation)) : "none"; };
  return Json{{"mark", std::string(to_string(spec.mark))},
              {"x_field", spec.x.column},
              {"x_aggregation", aggr(spec.x)},
              {"y_field", spec.y.column},
              {"y_aggregation", aggr(spec.y)},
              {"color_field", spec.color ? *spec.color : "none"},
              {"filter", spec.filter ? to_string(*spec.filter) : "none"},
              {"sort", to_string(spec.sort)}};
}

VisSpec spec_from_slots(const Json& slots, const DataTable& table) {
  if (!slots.is_object()) throw Error(ErrorCode::SyntaxError, "slots must be an object");
  VisSpec spec;
  const std::string mark = slot_string(slots, "mark", true);
  const auto m = mark_from_alias(mark);
  if (!m) throw Error(ErrorCode::UnknownKeyword, "unknown mark '" + mark + "'");
  spec.mark = *m;
  spec.x = slot_field(slots, "x_field", "x_aggregation", table);
  spec.y = slot_field(slots, "y_field", "y_aggregation", table);
  const std::string color = slot_string(slots, "color_field", false);
  if (!color.empty()) spec.color = table.columns()[table.column_index(color)].name;
  spec.filter = parse_filter(slot_string(slots, "filter", false).empty() ? "none" : slot_string(slots, "filter", false),
                             table);
  const std::string sort = slot_string(slots, "sort", false);
  spec.sort = parse_sort(sort.empty() ? "none" : sort);
  validate_spec(spec, table);
  return spec;
}

std::vector<EvalTriplet> read_dataset(std::istream& in, const std::string& base_dir) {
  std::vector<EvalTriplet> out;
  std::unordered_map<std::string, std::shared_ptr<const DataTable>> tables;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const Json j = Json::parse(line);
      EvalTriplet t;
      t.id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
      t.utterance = j.at("utterance").get<std::string>();
      if (j.contains("hardness") && j["hardness"].is_string()) t.hardness = j["hardness"].get<std::string>();
      std::filesystem::path p = j.at("table").get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      const std::string key = p.lexically_normal().string();
      auto it = tables.find(key);
      if (it == tables.end()) it = tables.emplace(key, std::make_shared<const DataTable>(load_csv_file(key))).first;
      t.table = it->second;
      t.truth = spec_from_slots(j.at("truth"), *t.table);
      out.push_back(std::move(t));
    } catch (const Error& e) {
      throw Error(e.code(), line_context(line_no) + e.what());
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::SyntaxError, line_context(line_no) + e.what());
    }
  }
  return out;
}

std::vector<EvalTriplet> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open dataset " + path);
  return read_dataset(in, std::filesystem::path(path).parent_path().string());
}

std::vector<PredictionSet> read_predictions(std::istream& in, const std::vector<EvalTriplet>& triplets) {
  std::unordered_map<std::string, const EvalTriplet*> by_id;
  for (const auto& t : triplets) by_id.emplace(t.id, &t);
  std::vector<PredictionSet> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::SyntaxError, line_context(line_no) + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("predictions") || !j["predictions"].is_array()) {
      throw Error(ErrorCode::SyntaxError, line_context(line_no) + "needs \"id\" and a \"predictions\" array");
    }
    PredictionSet set;
    set.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    auto it = by_id.find(set.id);
    if (it == by_id.end()) throw Error(ErrorCode::AlignmentError, line_context(line_no) + "unknown id '" + set.id + "'");
    for (const auto& slots : j["predictions"]) {
      try {
        set.ranked.emplace_back(spec_from_slots(slots, *it->second->table));
      } catch (const Error&) {
        set.ranked.emplace_back(std::nullopt);
      }
    }
    out.push_back(std::move(set));
  }
  return out;
}

std::vector<PredictionSet> load_predictions(const std::string& path, const std::vector<EvalTriplet>& triplets) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open predictions " + path);
  return read_predictions(in, triplets);
}

Json triplet_to_json(const EvalTriplet& triplet, const std::string& table_path) {
  return Json{{"id", triplet.id},
              {"table", table_path},
              {"utterance", triplet.utterance},
              {"truth", spec_to_slots(triplet.truth)},
              {"hardness", triplet.hardness}};
}

}  // namespace chartpipe
