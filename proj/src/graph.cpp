#include "pidalign/graph.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "pidalign/error.hpp"

namespace pidalign {

bool NodeAttribute::valid() const {
  if (kind == NodeKind::Pipe) return label == kRunLabel || label == kJunctionLabel;
  return !label.empty();
}

Edge make_edge(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

AlignmentGraph::AlignmentGraph(Provenance provenance, std::vector<Node> nodes, std::vector<Edge> edges,
                               std::uint64_t version)
    : provenance_(provenance), version_(version), nodes_(std::move(nodes)) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.id.empty()) throw Error(ErrorCode::InvalidInput, "empty node id");
    if (!n.attr.valid()) throw Error(ErrorCode::InvalidInput, "invalid attribute on node '" + n.id + "'");
    if (!index_.emplace(n.id, i).second) throw Error(ErrorCode::DuplicateNode, n.id);
  }
  adjacency_.resize(nodes_.size());
  for (auto& [a0, b0] : edges) {
    Edge e = make_edge(a0, b0);
    if (e.first == e.second) throw Error(ErrorCode::InvalidInput, "self-loop on '" + e.first + "'");
    auto ia = index_.find(e.first);
    auto ib = index_.find(e.second);
    if (ia == index_.end()) throw Error(ErrorCode::UnknownNode, e.first);
    if (ib == index_.end()) throw Error(ErrorCode::UnknownNode, e.second);
    if (!edges_.insert(e).second) throw Error(ErrorCode::DuplicateEdge, e.first + "--" + e.second);
    adjacency_[ia->second].push_back(ib->second);
    adjacency_[ib->second].push_back(ia->second);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

std::optional<std::size_t> AlignmentGraph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t AlignmentGraph::index_of(std::string_view id) const {
  auto idx = find(id);
  if (!idx) throw Error(ErrorCode::UnknownNode, std::string(id));
  return *idx;
}

const NodeAttribute& AlignmentGraph::attribute(std::string_view id) const { return nodes_[index_of(id)].attr; }

bool AlignmentGraph::has_edge(std::string_view a, std::string_view b) const {
  return edges_.count(make_edge(std::string(a), std::string(b))) > 0;
}

std::size_t AlignmentGraph::degree(std::string_view id) const { return adjacency_[index_of(id)].size(); }

std::vector<std::string> AlignmentGraph::neighbors(std::string_view id) const {
  std::vector<std::string> out;
  for (std::size_t j : adjacency_[index_of(id)]) out.push_back(nodes_[j].id);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> AlignmentGraph::ids() const {
  std::vector<std::string> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.id);
  return out;
}

namespace {

// Mutable working copy keyed by id so that "ascending id" scans are natural.
struct WorkGraph {
  struct Entry {
    NodeAttribute attr;
    std::set<std::string> nbrs;
    std::size_t order = 0;
  };

  Provenance provenance = Provenance::Scene;
  std::uint64_t version = 0;
  std::map<std::string, Entry> nodes;
  std::size_t next_order = 0;

  explicit WorkGraph(const AlignmentGraph& g) : provenance(g.provenance()), version(g.version()) {
    for (const auto& n : g.nodes()) nodes.emplace(n.id, Entry{n.attr, {}, next_order++});
    for (const auto& [a, b] : g.edges()) {
      nodes[a].nbrs.insert(b);
      nodes[b].nbrs.insert(a);
    }
  }

  void remove(const std::string& id) {
    auto it = nodes.find(id);
    for (const auto& n : it->second.nbrs) nodes[n].nbrs.erase(id);
    nodes.erase(it);
  }

  AlignmentGraph freeze(std::uint64_t new_version) const {
    std::vector<std::pair<std::size_t, const std::string*>> order;
    order.reserve(nodes.size());
    for (const auto& [id, e] : nodes) order.emplace_back(e.order, &id);
    std::sort(order.begin(), order.end());
    std::vector<Node> out_nodes;
    out_nodes.reserve(order.size());
    for (const auto& [o, id] : order) out_nodes.push_back({*id, nodes.at(*id).attr});
    std::vector<Edge> out_edges;
    for (const auto& [id, e] : nodes)
      for (const auto& n : e.nbrs)
        if (id < n) out_edges.emplace_back(id, n);
    return AlignmentGraph(provenance, std::move(out_nodes), std::move(out_edges), new_version);
  }
};

bool is_contraction_candidate(const WorkGraph& w, const std::string& id, const std::set<std::string>& keep) {
  const auto& e = w.nodes.at(id);
  if (!e.attr.is_pipe() || e.nbrs.size() != 2 || keep.count(id)) return false;
  return std::any_of(e.nbrs.begin(), e.nbrs.end(),
                     [&](const std::string& n) { return w.nodes.at(n).attr.is_pipe(); });
}

bool is_prune_candidate(const WorkGraph& w, const std::string& id, const std::set<std::string>& keep) {
  const auto& e = w.nodes.at(id);
  return e.attr.is_pipe() && e.nbrs.size() < 2 && !keep.count(id);
}

bool contract_pass(WorkGraph& w, const std::set<std::string>& keep) {
  std::set<std::string> candidates;
  for (const auto& [id, e] : w.nodes)
    if (is_contraction_candidate(w, id, keep)) candidates.insert(id);
  bool changed = false;
  while (!candidates.empty()) {
    const std::string id = *candidates.begin();
    candidates.erase(candidates.begin());
    const std::string a = *w.nodes[id].nbrs.begin();
    const std::string b = *w.nodes[id].nbrs.rbegin();
    w.remove(id);
    w.nodes[a].nbrs.insert(b);
    w.nodes[b].nbrs.insert(a);
    changed = true;
    // Only the two joined nodes change degree or neighborhood.
    for (const auto& n : {a, b}) {
      if (is_contraction_candidate(w, n, keep))
        candidates.insert(n);
      else
        candidates.erase(n);
    }
  }
  return changed;
}

bool prune_pass(WorkGraph& w, const std::set<std::string>& keep) {
  std::set<std::string> candidates;
  for (const auto& [id, e] : w.nodes)
    if (is_prune_candidate(w, id, keep)) candidates.insert(id);
  bool changed = false;
  while (!candidates.empty()) {
    const std::string id = *candidates.begin();
    candidates.erase(candidates.begin());
    const std::set<std::string> nbrs = w.nodes[id].nbrs;
    w.remove(id);
    changed = true;
    for (const auto& n : nbrs)
      if (is_prune_candidate(w, n, keep)) candidates.insert(n);
  }
  return changed;
}

}  // namespace

AlignmentGraph contract_degree2_pipes(const AlignmentGraph& g, const std::set<std::string>& keep) {
  WorkGraph w(g);
  contract_pass(w, keep);
  return w.freeze(g.version());
}

AlignmentGraph prune_open_pipes(const AlignmentGraph& g, const std::set<std::string>& keep) {
  WorkGraph w(g);
  prune_pass(w, keep);
  return w.freeze(g.version());
}

AlignmentGraph contract_degree2_pipes(const AlignmentGraph& g) { return contract_degree2_pipes(g, {}); }

AlignmentGraph prune_open_pipes(const AlignmentGraph& g) { return prune_open_pipes(g, {}); }

AlignmentGraph simplify(const AlignmentGraph& g, const std::set<std::string>& keep) {
  WorkGraph w(g);
  // Each pass runs to its own fixpoint, so only a prune can create new
  // contraction candidates.
  do {
    contract_pass(w, keep);
  } while (prune_pass(w, keep));
  return w.freeze(g.version());
}

GraphEdit GraphEdit::add_node(std::string id, NodeAttribute attr) {
  return {EditOp::AddNode, {std::move(id)}, std::move(attr)};
}
GraphEdit GraphEdit::remove_node(std::string id) { return {EditOp::RemoveNode, {std::move(id)}, std::nullopt}; }
GraphEdit GraphEdit::add_edge(std::string a, std::string b) {
  return {EditOp::AddEdge, {std::move(a), std::move(b)}, std::nullopt};
}
GraphEdit GraphEdit::remove_edge(std::string a, std::string b) {
  return {EditOp::RemoveEdge, {std::move(a), std::move(b)}, std::nullopt};
}
GraphEdit GraphEdit::set_attribute(std::string id, NodeAttribute attr) {
  return {EditOp::SetAttribute, {std::move(id)}, std::move(attr)};
}

AlignmentGraph apply_edits(const AlignmentGraph& g, const std::vector<GraphEdit>& edits) {
  WorkGraph w(g);
  auto require = [&](const std::string& id) -> WorkGraph::Entry& {
    auto it = w.nodes.find(id);
    if (it == w.nodes.end()) throw Error(ErrorCode::UnknownNode, id);
    return it->second;
  };
  auto arity = [](const GraphEdit& e, std::size_t n) {
    if (e.target.size() != n) throw Error(ErrorCode::InvalidInput, "edit expects " + std::to_string(n) + " target id(s)");
  };
  for (const auto& edit : edits) {
    switch (edit.op) {
      case EditOp::AddNode: {
        arity(edit, 1);
        if (!edit.payload || !edit.payload->valid())
          throw Error(ErrorCode::InvalidInput, "AddNode needs a valid attribute");
        const auto& id = edit.target[0];
        if (id.empty()) throw Error(ErrorCode::InvalidInput, "empty node id");
        if (w.nodes.count(id)) throw Error(ErrorCode::DuplicateNode, id);
        w.nodes.emplace(id, WorkGraph::Entry{*edit.payload, {}, w.next_order++});
        break;
      }
      case EditOp::RemoveNode:
        arity(edit, 1);
        require(edit.target[0]);
        w.remove(edit.target[0]);
        break;
      case EditOp::AddEdge: {
        arity(edit, 2);
        const auto& [a, b] = std::tie(edit.target[0], edit.target[1]);
        auto& ea = require(a);
        auto& eb = require(b);
        if (a == b) throw Error(ErrorCode::InvalidInput, "self-loop on '" + a + "'");
        if (!ea.nbrs.insert(b).second) throw Error(ErrorCode::DuplicateEdge, a + "--" + b);
        eb.nbrs.insert(a);
        break;
      }
      case EditOp::RemoveEdge: {
        arity(edit, 2);
        const auto& [a, b] = std::tie(edit.target[0], edit.target[1]);
        auto& ea = require(a);
        auto& eb = require(b);
        if (!ea.nbrs.erase(b)) throw Error(ErrorCode::UnknownEdge, a + "--" + b);
        eb.nbrs.erase(a);
        break;
      }
      case EditOp::SetAttribute:
        arity(edit, 1);
        if (!edit.payload || !edit.payload->valid())
          throw Error(ErrorCode::InvalidInput, "SetAttribute needs a valid attribute");
        require(edit.target[0]).attr = *edit.payload;
        break;
    }
  }
  return w.freeze(g.version() + 1);
}

bool connected(const AlignmentGraph& g, std::string_view a, std::string_view b) {
  const std::size_t from = g.index_of(a);
  const std::size_t to = g.index_of(b);
  std::vector<char> seen(g.size(), 0);
  std::deque<std::size_t> queue{from};
  seen[from] = 1;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    if (u == to) return true;
    for (std::size_t v : g.adjacency()[u])
      if (!seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
  }
  return false;
}

}  // namespace pidalign
