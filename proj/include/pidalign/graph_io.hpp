#pragma once

#include <vector>

#include "pidalign/graph.hpp"
#include "pidalign/json_io.hpp"

namespace pidalign {

std::string_view to_string(NodeKind kind);
std::string_view to_string(Provenance provenance);

// {"provenance", "nodes": [{"id","kind","label"}], "edges": [[a,b],...]},
// nodes sorted by id and edges lexicographically.
Json graph_to_json(const AlignmentGraph& g);
AlignmentGraph graph_from_json(const Json& j);

std::string serialize_graph(const AlignmentGraph& g);

Json edit_to_json(const GraphEdit& e);
GraphEdit edit_from_json(const Json& j);
std::vector<GraphEdit> edits_from_json(const Json& j);

}  // namespace pidalign
