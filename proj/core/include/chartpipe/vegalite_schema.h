#pragma once

#include <string>
#include <vector>

#include "chartpipe/json.h"
#include "chartpipe/table.h"

namespace chartpipe {

/// Structural check of a Vega-Lite v5 document against the subset this
/// project emits: top-level keys, data, mark, encoding channel
/// definitions (field/type/aggregate/sort/timeUnit), and filter transforms
/// with field predicates. Returns human-readable violations; empty means
/// valid. When a table is given every `field` must name one of its columns.
std::vector<std::string> vegalite_violations(const Json& doc, const DataTable* table = nullptr);

inline bool is_valid_vegalite(const Json& doc, const DataTable* table = nullptr) {
  return vegalite_violations(doc, table).empty();
}

}  // namespace chartpipe
