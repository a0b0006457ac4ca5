#pragma once

// Generators and brute-force oracles shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pidalign/graph.hpp"
#include "pidalign/matcher.hpp"
#include "pidalign/scene.hpp"

namespace testsupport {

using namespace pidalign;

inline std::string idx(const std::string& prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", i);
  return prefix + buf;
}

struct LabeledGraph {
  int n = 0;
  std::vector<int> labels;
  std::vector<std::pair<int, int>> edges;  // a < b
};

// Random spanning tree plus uniform extra edges up to `density` * n(n-1)/2.
inline LabeledGraph random_connected(std::mt19937_64& rng, int n, double density, int num_labels) {
  LabeledGraph g;
  g.n = n;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::set<std::pair<int, int>> es;
  for (int i = 1; i < n; ++i) {
    const int j = order[std::uniform_int_distribution<int>(0, i - 1)(rng)];
    es.insert({std::min(order[i], j), std::max(order[i], j)});
  }
  const auto target = static_cast<std::size_t>(std::llround(density * n * (n - 1) / 2.0));
  while (es.size() < target) {
    const int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
    if (a != b) es.insert({std::min(a, b), std::max(a, b)});
  }
  g.labels.resize(n);
  for (auto& l : g.labels) l = static_cast<int>(rng() % num_labels);
  g.edges.assign(es.begin(), es.end());
  return g;
}

inline std::string label_name(int l) { return "class" + std::to_string(l); }

// Node i gets id prefix+i (relabeled through `perm` when given).
inline AlignmentGraph to_graph(const LabeledGraph& g, const std::string& prefix, Provenance prov,
                               const std::vector<int>* perm = nullptr, const std::set<int>& skip = {}) {
  auto id = [&](int i) { return idx(prefix, perm ? (*perm)[i] : i); };
  std::vector<Node> nodes;
  for (int i = 0; i < g.n; ++i)
    if (!skip.count(i)) nodes.push_back({id(i), NodeAttribute::equipment(label_name(g.labels[i]))});
  std::vector<Edge> edges;
  for (auto [a, b] : g.edges)
    if (!skip.count(a) && !skip.count(b)) edges.push_back(make_edge(id(a), id(b)));
  return AlignmentGraph(prov, std::move(nodes), std::move(edges));
}

inline std::vector<int> random_permutation(std::mt19937_64& rng, int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// S over "s###", F = permuted copy over "f###"; truth[s] = f.
struct PermutedPair {
  LabeledGraph base;
  std::vector<int> perm;
  AlignmentGraph source, target;
  std::map<std::string, std::string> truth;
};

inline PermutedPair permuted_pair(std::mt19937_64& rng, int n, double density, int num_labels) {
  PermutedPair p;
  p.base = random_connected(rng, n, density, num_labels);
  p.perm = random_permutation(rng, n);
  p.source = to_graph(p.base, "s", Provenance::Scene);
  // node order of F follows the permuted ids so row i of S is not column i of F
  LabeledGraph shuffled;
  shuffled.n = n;
  shuffled.labels.resize(n);
  for (int i = 0; i < n; ++i) shuffled.labels[p.perm[i]] = p.base.labels[i];
  for (auto [a, b] : p.base.edges)
    shuffled.edges.push_back({std::min(p.perm[a], p.perm[b]), std::max(p.perm[a], p.perm[b])});
  std::sort(shuffled.edges.begin(), shuffled.edges.end());
  p.target = to_graph(shuffled, "f", Provenance::Functional);
  for (int i = 0; i < n; ++i) p.truth[idx("s", i)] = idx("f", p.perm[i]);
  return p;
}

inline std::size_t count_correct(const Mapping& m, const std::map<std::string, std::string>& truth) {
  std::size_t ok = 0;
  for (const auto& pr : m.pairs)
    if (auto it = truth.find(pr.source); it != truth.end() && it->second == pr.target) ++ok;
  return ok;
}

// Random AlignmentGraph mixing equipment, runs and junctions (possibly
// disconnected), for the simplification properties.
inline AlignmentGraph random_mixed_graph(std::mt19937_64& rng, int n, double density) {
  std::vector<Node> nodes;
  for (int i = 0; i < n; ++i) {
    const int r = static_cast<int>(rng() % 10);
    NodeAttribute a = r < 3 ? NodeAttribute::equipment(label_name(r)) : r < 8 ? NodeAttribute::run() : NodeAttribute::junction();
    nodes.push_back({idx("v", i), a});
  }
  std::set<Edge> edges;
  const auto target = static_cast<std::size_t>(std::llround(density * n));
  for (std::size_t t = 0; t < 4 * target && edges.size() < target; ++t) {
    const int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
    if (a != b) edges.insert(make_edge(idx("v", a), idx("v", b)));
  }
  std::shuffle(nodes.begin(), nodes.end(), rng);
  return AlignmentGraph(Provenance::Scene, std::move(nodes), std::vector<Edge>(edges.begin(), edges.end()));
}

inline bool has_open_pipe(const AlignmentGraph& g) {
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.nodes()[i].attr.is_pipe() && g.degree_at(i) < 2) return true;
  return false;
}

inline bool has_contractible_pipe(const AlignmentGraph& g) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.nodes()[i].attr.is_pipe() || g.degree_at(i) != 2) continue;
    for (std::size_t j : g.adjacency()[i])
      if (g.nodes()[j].attr.is_pipe()) return true;
  }
  return false;
}

// Random scene inside a cube of side `extent`; pipe ends cluster so that
// links exist at the 0.04 threshold.
inline Scene random_scene(std::mt19937_64& rng, int num_pipes, int num_equipment, double extent = 1.0) {
  std::uniform_real_distribution<double> U(0.0, extent);
  std::normal_distribution<double> jitter(0.0, 0.02);
  std::vector<Point3> anchors;
  for (int i = 0; i < std::max(3, num_pipes / 2); ++i) anchors.push_back({U(rng), U(rng), U(rng)});
  auto near_anchor = [&] {
    const Point3& a = anchors[rng() % anchors.size()];
    return Point3{a.x + jitter(rng), a.y + jitter(rng), a.z + jitter(rng)};
  };
  const PipeKind kinds[] = {PipeKind::Cylinder, PipeKind::Elbow, PipeKind::Tee, PipeKind::YJunction, PipeKind::Reducer};
  Scene s;
  for (int i = 0; i < num_pipes; ++i) {
    PipeElement p;
    p.id = idx("p", i);
    p.kind = kinds[rng() % 5];
    p.diameter = 0.02 + 0.1 * U(rng) / extent;
    for (std::size_t k = 0; k < port_count(p.kind); ++k) p.extremities.push_back(rng() % 2 ? near_anchor() : Point3{U(rng), U(rng), U(rng)});
    s.pipes.push_back(std::move(p));
  }
  for (int i = 0; i < num_equipment; ++i) {
    EquipmentInstance e;
    e.id = idx("e", i);
    e.class_label = label_name(static_cast<int>(rng() % 4));
    const Point3 c = near_anchor();
    const int m = 5 + static_cast<int>(rng() % 40);
    for (int k = 0; k < m; ++k) e.points.push_back({c.x + 2 * jitter(rng), c.y + 2 * jitter(rng), c.z + 2 * jitter(rng)});
    s.equipment.push_back(std::move(e));
  }
  std::shuffle(s.pipes.begin(), s.pipes.end(), rng);
  return s;
}

// All-pairs reference for the linking + attachment rules.
inline std::set<Edge> brute_force_links(const Scene& s, const SceneConfig& cfg) {
  auto d2 = [](const Point3& a, const Point3& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
  };
  std::set<Edge> out;
  for (const auto& p : s.pipes) {
    std::vector<std::pair<double, std::string>> near;
    for (const auto& q : s.pipes) {
      if (&p == &q) continue;
      double best = INFINITY;
      for (const auto& a : p.extremities)
        for (const auto& b : q.extremities) best = std::min(best, d2(a, b));
      if (std::sqrt(best) < cfg.link_threshold) near.emplace_back(std::sqrt(best), q.id);
    }
    std::sort(near.begin(), near.end());
    for (std::size_t k = 0; k < std::min(near.size(), port_count(p.kind)); ++k) out.insert(make_edge(p.id, near[k].second));
  }
  for (const auto& e : s.equipment) {
    std::vector<std::pair<double, std::string>> near;
    for (const auto& q : s.pipes) {
      double best = INFINITY;
      for (const auto& a : e.points)
        for (const auto& b : q.extremities) best = std::min(best, d2(a, b));
      if (std::sqrt(best) < cfg.link_threshold) near.emplace_back(std::sqrt(best), q.id);
    }
    if (near.empty()) continue;
    std::sort(near.begin(), near.end());
    if (cfg.equipment_attach == EquipmentAttach::ClosestOnly)
      out.insert(make_edge(e.id, near.front().second));
    else
      for (const auto& [d, id] : near) out.insert(make_edge(e.id, id));
  }
  return out;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto p = std::filesystem::temp_directory_path() / ("pidalign-" + tag + "-" + std::to_string(rng() % 1000000000));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::filesystem::path fixture_dir() { return std::filesystem::path(PIDALIGN_FIXTURES); }

}  // namespace testsupport
