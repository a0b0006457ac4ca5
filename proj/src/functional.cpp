#include "pidalign/functional.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "pidalign/error.hpp"
#include "pidalign/log.hpp"

namespace pidalign {

namespace {

std::string_view to_string(RawKind k) {
  switch (k) {
    case RawKind::Equipment: return "equipment";
    case RawKind::PipeJunction: return "pipe-junction";
    case RawKind::PipeRun: return "pipe-run";
  }
  return "?";
}

RawKind raw_kind_from(const std::string& s) {
  const std::string k = normalize_label(s);
  if (k == "equipment") return RawKind::Equipment;
  if (k == "pipe-junction") return RawKind::PipeJunction;
  if (k == "pipe-run") return RawKind::PipeRun;
  throw Error(ErrorCode::InvalidInput, "pid: unknown node kind '" + s + "'");
}

}  // namespace

void RawPid::validate() const {
  std::map<std::string_view, RawKind> ids;
  for (const auto& n : nodes) {
    if (n.id.empty()) throw Error(ErrorCode::InvalidInput, "pid: empty node id");
    if (!ids.emplace(n.id, n.kind).second) throw Error(ErrorCode::DuplicateNode, n.id);
    if (n.kind == RawKind::Equipment && normalize_label(n.label).empty())
      throw Error(ErrorCode::InvalidInput, "pid: equipment '" + n.id + "' has no label");
  }
  std::set<Edge> seen;
  for (const auto& [a, b] : edges) {
    if (!ids.count(a)) throw Error(ErrorCode::UnknownNode, a);
    if (!ids.count(b)) throw Error(ErrorCode::UnknownNode, b);
    if (a == b) throw Error(ErrorCode::InvalidInput, "pid: self-loop on '" + a + "'");
    if (!seen.insert(make_edge(a, b)).second) throw Error(ErrorCode::DuplicateEdge, a + "--" + b);
  }
}

FunctionalGraphBuild build_functional_graph(const RawPid& raw, const std::vector<std::string>& keep_hidden,
                                            const Vocabulary* vocab) {
  raw.validate();
  std::set<std::string> keep;
  for (const auto& id : keep_hidden) {
    if (std::none_of(raw.nodes.begin(), raw.nodes.end(), [&](const auto& n) { return n.id == id; }))
      throw Error(ErrorCode::UnknownNode, "keep_hidden: " + id);
    keep.insert(id);
  }

  FunctionalGraphBuild out;
  std::set<std::string> unknown;
  std::vector<Node> nodes;
  nodes.reserve(raw.nodes.size());
  for (const auto& n : raw.nodes) {
    switch (n.kind) {
      case RawKind::PipeRun:
        nodes.push_back({n.id, NodeAttribute::run()});
        break;
      case RawKind::PipeJunction:
        nodes.push_back({n.id, NodeAttribute::junction()});
        break;
      case RawKind::Equipment: {
        std::string label = normalize_label(n.label);
        if (vocab != nullptr) {
          auto r = vocab->resolve(label);
          if (!r.known) unknown.insert(r.label);
          label = std::move(r.label);
        }
        nodes.push_back({n.id, NodeAttribute::equipment(std::move(label))});
        break;
      }
    }
  }
  for (const auto& l : unknown) log::warn("pid: label '" + l + "' not in vocabulary");
  out.unknown_labels.assign(unknown.begin(), unknown.end());

  std::vector<Edge> edges;
  edges.reserve(raw.edges.size());
  for (const auto& [a, b] : raw.edges) edges.push_back(make_edge(a, b));
  out.graph = simplify(AlignmentGraph(Provenance::Functional, std::move(nodes), std::move(edges)), keep);
  return out;
}

RawPid remove_equipment(const RawPid& raw, const std::vector<std::string>& ids) {
  raw.validate();
  RawPid out = raw;
  for (const auto& id : ids) {
    auto it = std::find_if(out.nodes.begin(), out.nodes.end(), [&](const auto& n) { return n.id == id; });
    if (it == out.nodes.end()) throw Error(ErrorCode::UnknownNode, id);
    if (it->kind != RawKind::Equipment) throw Error(ErrorCode::InvalidInput, "'" + id + "' is not equipment");

    std::vector<std::string> nbrs;
    for (const auto& [a, b] : out.edges) {
      if (a == id) nbrs.push_back(b);
      if (b == id) nbrs.push_back(a);
    }
    if (nbrs.size() >= 3)
      throw Error(ErrorCode::DegreeTooHigh, "'" + id + "' has degree " + std::to_string(nbrs.size()));

    out.nodes.erase(it);
    std::erase_if(out.edges, [&](const auto& e) { return e.first == id || e.second == id; });
    if (nbrs.size() == 2) {
      const Edge splice = make_edge(nbrs[0], nbrs[1]);
      const bool present = std::any_of(out.edges.begin(), out.edges.end(),
                                       [&](const auto& e) { return make_edge(e.first, e.second) == splice; });
      if (!present) out.edges.push_back(splice);
    }
  }
  return out;
}

RawPid raw_pid_from_json(const Json& j) {
  RawPid raw;
  const Json& nodes = require_field(j, "nodes", "pid");
  const Json& edges = require_field(j, "edges", "pid");
  if (!nodes.is_array() || !edges.is_array()) throw Error(ErrorCode::InvalidInput, "pid: nodes/edges must be arrays");
  for (const auto& n : nodes) {
    RawPid::RawNode node;
    node.id = require_string(n, "id", "pid node");
    node.kind = raw_kind_from(require_string(n, "kind", "pid node"));
    if (auto it = n.find("label"); it != n.end()) {
      if (!it->is_string()) throw Error(ErrorCode::InvalidInput, "pid node: label must be a string");
      node.label = it->get<std::string>();
    }
    raw.nodes.push_back(std::move(node));
  }
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
      throw Error(ErrorCode::InvalidInput, "pid edge: expected a pair of ids");
    raw.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  raw.validate();
  return raw;
}

Json raw_pid_to_json(const RawPid& raw) {
  Json nodes = Json::array();
  for (const auto& n : raw.nodes) nodes.push_back({{"id", n.id}, {"kind", to_string(n.kind)}, {"label", n.label}});
  Json edges = Json::array();
  for (const auto& [a, b] : raw.edges) edges.push_back({a, b});
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

}  // namespace pidalign
