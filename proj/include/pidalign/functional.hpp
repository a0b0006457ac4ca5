#pragma once

#include <string>
#include <vector>

#include "pidalign/graph.hpp"
#include "pidalign/json_io.hpp"
#include "pidalign/vocabulary.hpp"

namespace pidalign {

enum class RawKind { Equipment, PipeJunction, PipeRun };

// A digitized P&ID: symbols as nodes, drawn lines as edges.
struct RawPid {
  struct RawNode {
    std::string id;
    RawKind kind = RawKind::Equipment;
    std::string label;

    friend bool operator==(const RawNode&, const RawNode&) = default;
  };

  std::vector<RawNode> nodes;
  std::vector<std::pair<std::string, std::string>> edges;

  // Unique ids, edges between existing distinct nodes, no repeated edge.
  void validate() const;
};

struct FunctionalGraphBuild {
  AlignmentGraph graph;
  std::vector<std::string> unknown_labels;  // normalized, sorted, unique
};

// Maps symbol kinds onto node attributes and applies the shared
// simplification. Ids in `keep_hidden` are never removed.
FunctionalGraphBuild build_functional_graph(const RawPid& raw, const std::vector<std::string>& keep_hidden = {},
                                            const Vocabulary* vocab = nullptr);

// Deletes equipment symbols; a degree-2 symbol's neighbors are joined.
// Throws UnknownNode, InvalidInput (not equipment) or DegreeTooHigh (>= 3).
RawPid remove_equipment(const RawPid& raw, const std::vector<std::string>& ids);

RawPid raw_pid_from_json(const Json& j);
Json raw_pid_to_json(const RawPid& raw);

}  // namespace pidalign
