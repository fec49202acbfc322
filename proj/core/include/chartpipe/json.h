#pragma once

#include <json.hpp>

namespace chartpipe {

/// Insertion-ordered JSON keeps emitted documents byte-stable.
using Json = nlohmann::ordered_json;

}  // namespace chartpipe
