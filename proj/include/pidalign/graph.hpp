#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pidalign {

enum class NodeKind { Equipment, Pipe };

inline constexpr std::string_view kRunLabel = "run";
inline constexpr std::string_view kJunctionLabel = "junction";

struct NodeAttribute {
  NodeKind kind = NodeKind::Equipment;
  std::string label;

  static NodeAttribute equipment(std::string label) { return {NodeKind::Equipment, std::move(label)}; }
  static NodeAttribute run() { return {NodeKind::Pipe, std::string(kRunLabel)}; }
  static NodeAttribute junction() { return {NodeKind::Pipe, std::string(kJunctionLabel)}; }

  bool is_pipe() const { return kind == NodeKind::Pipe; }
  bool is_equipment() const { return kind == NodeKind::Equipment; }

  // Pipe => label in {run, junction}; Equipment => non-empty label.
  bool valid() const;

  friend bool operator==(const NodeAttribute&, const NodeAttribute&) = default;
};

enum class Provenance { Scene, Functional };

struct Node {
  std::string id;
  NodeAttribute attr;

  friend bool operator==(const Node&, const Node&) = default;
};

// Undirected edge stored with first < second.
using Edge = std::pair<std::string, std::string>;

Edge make_edge(std::string a, std::string b);

// Immutable attributed undirected graph shared by the scene and functional
// modalities. Node order is the insertion order; canonical output sorts by id.
class AlignmentGraph {
 public:
  AlignmentGraph() = default;

  // Throws Error{InvalidInput, DuplicateNode, DuplicateEdge, UnknownNode}.
  AlignmentGraph(Provenance provenance, std::vector<Node> nodes, std::vector<Edge> edges,
                 std::uint64_t version = 0);

  Provenance provenance() const { return provenance_; }
  std::uint64_t version() const { return version_; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::set<Edge>& edges() const { return edges_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  std::optional<std::size_t> find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id).has_value(); }
  std::size_t index_of(std::string_view id) const;  // throws UnknownNode
  const NodeAttribute& attribute(std::string_view id) const;

  bool has_edge(std::string_view a, std::string_view b) const;
  std::size_t degree(std::string_view id) const;
  std::size_t degree_at(std::size_t index) const { return adjacency_[index].size(); }

  // Neighbor indices per node, each list ascending.
  const std::vector<std::vector<std::size_t>>& adjacency() const { return adjacency_; }
  std::vector<std::string> neighbors(std::string_view id) const;

  std::vector<std::string> ids() const;

  friend bool operator==(const AlignmentGraph& a, const AlignmentGraph& b) {
    return a.provenance_ == b.provenance_ && a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  Provenance provenance_ = Provenance::Scene;
  std::uint64_t version_ = 0;
  std::vector<Node> nodes_;
  std::set<Edge> edges_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

// Removes Pipe nodes of degree 2 that have a Pipe neighbor, joining their two
// neighbors; smallest candidate id first, until no candidate is left.
AlignmentGraph contract_degree2_pipes(const AlignmentGraph& g);

// Removes Pipe nodes of degree < 2 until none is left. Equipment is kept.
AlignmentGraph prune_open_pipes(const AlignmentGraph& g);

// contract then prune, repeated until neither changes the graph. Node ids in
// `keep` are never removed by either pass.
AlignmentGraph simplify(const AlignmentGraph& g, const std::set<std::string>& keep = {});

AlignmentGraph contract_degree2_pipes(const AlignmentGraph& g, const std::set<std::string>& keep);
AlignmentGraph prune_open_pipes(const AlignmentGraph& g, const std::set<std::string>& keep);

enum class EditOp { AddNode, RemoveNode, AddEdge, RemoveEdge, SetAttribute };

struct GraphEdit {
  EditOp op = EditOp::AddNode;
  std::vector<std::string> target;  // one id, or two for edge ops
  std::optional<NodeAttribute> payload;

  static GraphEdit add_node(std::string id, NodeAttribute attr);
  static GraphEdit remove_node(std::string id);
  static GraphEdit add_edge(std::string a, std::string b);
  static GraphEdit remove_edge(std::string a, std::string b);
  static GraphEdit set_attribute(std::string id, NodeAttribute attr);

  friend bool operator==(const GraphEdit&, const GraphEdit&) = default;
};

// Applies the batch in order and returns the next version of the graph. Any
// failing edit rejects the whole batch; `g` is never modified.
AlignmentGraph apply_edits(const AlignmentGraph& g, const std::vector<GraphEdit>& edits);

// True when some path joins a and b.
bool connected(const AlignmentGraph& g, std::string_view a, std::string_view b);

}  // namespace pidalign
