#pragma once

#include <json.hpp>

#include "qgraph/graph.hpp"

namespace qgraph::detail {

GraphSpec graph_spec_from_json(const nlohmann::json& j);
nlohmann::json graph_spec_to_json(const GraphSpec& spec);
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const std::string& where);

}  // namespace qgraph::detail
