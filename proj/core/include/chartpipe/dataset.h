#pragma once

#include <istream>
#include <string>
#include <vector>

#include "chartpipe/dsl.h"
#include "chartpipe/eval.h"
#include "chartpipe/json.h"
#include "chartpipe/table.h"

namespace chartpipe {

/// {"mark", "x_field", "x_aggregation", "y_field", "y_aggregation",
///  "color_field", "filter", "sort"}; absent parts are "none".
Json spec_to_slots(const VisSpec& spec);

/// Reads the slot object against a table. Missing or null slots count as
/// "none" except mark, x_field and y_field. The mark also accepts `point`
/// and `arc`. Throws SyntaxError, UnknownColumn, UnknownKeyword,
/// TypeMismatch or InvalidCombination.
VisSpec spec_from_slots(const Json& slots, const DataTable& table);

/// One JSON object per line:
///   {"id", "table": <csv path>, "utterance", "truth": {slots}, "hardness"}
/// Relative table paths resolve against `base_dir`. Each table is loaded
/// once and shared. Errors carry the offending line number.
std::vector<EvalTriplet> read_dataset(std::istream& in, const std::string& base_dir);
std::vector<EvalTriplet> load_dataset(const std::string& path);

/// One line per triplet: {"id", "predictions": [{slots}, ...]} in rank
/// order. Slot objects that do not resolve against the triplet's table
/// become unparsed predictions. Unknown ids raise AlignmentError.
std::vector<PredictionSet> read_predictions(std::istream& in, const std::vector<EvalTriplet>& triplets);
std::vector<PredictionSet> load_predictions(const std::string& path, const std::vector<EvalTriplet>& triplets);

/// Dataset line for a triplet, with `table_path` written as given.
Json triplet_to_json(const EvalTriplet& triplet, const std::string& table_path);

}  // namespace chartpipe
