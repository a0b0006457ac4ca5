#include "pidalign/graph_io.hpp"

#include <algorithm>

#include "pidalign/error.hpp"

namespace pidalign {

std::string_view to_string(NodeKind kind) { return kind == NodeKind::Pipe ? "pipe" : "equipment"; }

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::Scene ? "scene" : "functional";
}

namespace {

NodeKind kind_from(const std::string& s, std::string_view where) {
  if (s == "pipe") return NodeKind::Pipe;
  if (s == "equipment") return NodeKind::Equipment;
  throw Error(ErrorCode::InvalidInput, std::string(where) + ": unknown node kind '" + s + "'");
}

std::pair<std::string, std::string> id_pair(const Json& j, std::string_view where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string())
    throw Error(ErrorCode::InvalidInput, std::string(where) + ": expected a pair of ids");
  return {j[0].get<std::string>(), j[1].get<std::string>()};
}

}  // namespace

Json graph_to_json(const AlignmentGraph& g) {
  std::vector<const Node*> nodes;
  for (const auto& n : g.nodes()) nodes.push_back(&n);
  std::sort(nodes.begin(), nodes.end(), [](const Node* a, const Node* b) { return a->id < b->id; });
  Json jn = Json::array();
  for (const Node* n : nodes)
    jn.push_back({{"id", n->id}, {"kind", to_string(n->attr.kind)}, {"label", n->attr.label}});
  Json je = Json::array();
  for (const auto& [a, b] : g.edges()) je.push_back({a, b});  // std::set order is lexicographic
  return {{"provenance", to_string(g.provenance())}, {"nodes", std::move(jn)}, {"edges", std::move(je)}};
}

AlignmentGraph graph_from_json(const Json& j) {
  const std::string prov = require_string(j, "provenance", "graph");
  Provenance provenance;
  if (prov == "scene")
    provenance = Provenance::Scene;
  else if (prov == "functional")
    provenance = Provenance::Functional;
  else
    throw Error(ErrorCode::InvalidInput, "graph: unknown provenance '" + prov + "'");
  const Json& jn = require_field(j, "nodes", "graph");
  const Json& je = require_field(j, "edges", "graph");
  if (!jn.is_array() || !je.is_array()) throw Error(ErrorCode::InvalidInput, "graph: nodes/edges must be arrays");
  std::vector<Node> nodes;
  for (const auto& n : jn) {
    nodes.push_back({require_string(n, "id", "graph node"),
                     {kind_from(require_string(n, "kind", "graph node"), "graph node"),
                      require_string(n, "label", "graph node")}});
  }
  std::vector<Edge> edges;
  for (const auto& e : je) {
    auto [a, b] = id_pair(e, "graph edge");
    edges.push_back(make_edge(std::move(a), std::move(b)));
  }
  return AlignmentGraph(provenance, std::move(nodes), std::move(edges));
}

std::string serialize_graph(const AlignmentGraph& g) { return dump_canonical(graph_to_json(g)); }

namespace {

constexpr std::pair<EditOp, std::string_view> kOpNames[] = {
    {EditOp::AddNode, "add_node"},     {EditOp::RemoveNode, "remove_node"},
    {EditOp::AddEdge, "add_edge"},     {EditOp::RemoveEdge, "remove_edge"},
    {EditOp::SetAttribute, "set_attribute"},
};

std::string_view op_name(EditOp op) {
  for (const auto& [o, name] : kOpNames)
    if (o == op) return name;
  return "?";
}

}  // namespace

Json edit_to_json(const GraphEdit& e) {
  Json j{{"op", op_name(e.op)}};
  if (e.op == EditOp::AddEdge || e.op == EditOp::RemoveEdge)
    j["edge"] = e.target;
  else
    j["id"] = e.target.empty() ? std::string() : e.target.front();
  if (e.payload) {
    j["kind"] = to_string(e.payload->kind);
    j["label"] = e.payload->label;
  }
  return j;
}

GraphEdit edit_from_json(const Json& j) {
  const std::string op = require_string(j, "op", "edit");
  for (const auto& [o, name] : kOpNames) {
    if (name != op) continue;
    switch (o) {
      case EditOp::AddEdge:
      case EditOp::RemoveEdge: {
        auto [a, b] = id_pair(require_field(j, "edge", "edit"), "edit");
        return {o, {std::move(a), std::move(b)}, std::nullopt};
      }
      case EditOp::RemoveNode:
        return GraphEdit::remove_node(require_string(j, "id", "edit"));
      case EditOp::AddNode:
      case EditOp::SetAttribute: {
        NodeAttribute attr{kind_from(require_string(j, "kind", "edit"), "edit"), require_string(j, "label", "edit")};
        return {o, {require_string(j, "id", "edit")}, std::move(attr)};
      }
    }
  }
  throw Error(ErrorCode::InvalidInput, "edit: unknown op '" + op + "'");
}

std::vector<GraphEdit> edits_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidInput, "edits: expected an array");
  std::vector<GraphEdit> out;
  for (const auto& e : j) out.push_back(edit_from_json(e));
  return out;
}

}  // namespace pidalign
