#pragma once

// JSON network files. Ids in files are 1-based with anchors first; the
// library uses 0-based ids internally.
//
//   { "dim": 2,
//     "anchors":  [ {"id": 1, "pos": [x, y]}, ... ],
//     "unknowns": [ {"id": 4, "pos": [x, y]}, ... ],
//     "edges":    [ [1, 4], ... ],
//     "frames":   [ {"id": 1, "rotation": [r00, r01, r10, r11], "offset": [x, y]}, ... ] }
//
// "frames" and each "offset" are optional.

#include <string>

#include <json.hpp>

#include "asnl/core.hpp"

namespace asnl {

/// Throws NetworkFormatError naming the offending field (as a JSON pointer).
SensorNetwork network_from_json(const nlohmann::json& doc);
nlohmann::json network_to_json(const SensorNetwork& net);

/// Parse errors report the line and column.
SensorNetwork load_network(const std::string& path);
void save_network(const SensorNetwork& net, const std::string& path);

}  // namespace asnl
