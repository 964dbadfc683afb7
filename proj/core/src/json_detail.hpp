#pragma once

#include <nlohmann/json.hpp>

#include "semiflow/graph3d.hpp"

namespace semiflow {

nlohmann::json graph_to_json_obj(const Graph3D& g);
Graph3D graph_from_json_obj(const nlohmann::json& j);

}  // namespace semiflow
