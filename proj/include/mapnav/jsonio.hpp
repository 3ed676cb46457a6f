#pragma once

#include <json.hpp>

namespace mapnav {

// Ordered JSON keeps object keys in insertion order, so every document the
// toolkit emits is byte-stable run to run.
using Json = nlohmann::ordered_json;

}  // namespace mapnav
