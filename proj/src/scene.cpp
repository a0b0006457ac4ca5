#include "pidalign/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <unordered_map>

#include "pidalign/error.hpp"
#include "pidalign/log.hpp"
#include "pidalign/simd/kernels.hpp"

namespace pidalign {

double distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::size_t port_count(PipeKind kind) {
  switch (kind) {
    case PipeKind::Tee:
    case PipeKind::YJunction:
      return 3;
    default:
      return 2;
  }
}

std::string_view to_string(PipeKind kind) {
  switch (kind) {
    case PipeKind::Cylinder: return "cylinder";
    case PipeKind::Elbow: return "elbow";
    case PipeKind::Tee: return "tee";
    case PipeKind::YJunction: return "y-junction";
    case PipeKind::Reducer: return "reducer";
  }
  return "?";
}

namespace {

bool finite(const Point3& p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Structure-of-arrays copy of a point set, as the distance kernel wants it.
struct PointColumns {
  std::vector<double> x, y, z;

  explicit PointColumns(std::span<const Point3> pts) {
    x.reserve(pts.size());
    y.reserve(pts.size());
    z.reserve(pts.size());
    for (const auto& p : pts) {
      x.push_back(p.x);
      y.push_back(p.y);
      z.push_back(p.z);
    }
  }

  double min_sq_distance(const Point3& p) const {
    return simd::active_kernels().min_sq_distance(p.x, p.y, p.z, x.data(), y.data(), z.data(), x.size());
  }
};

std::vector<Point3> subsample(const EquipmentInstance& e, const SceneConfig& cfg) {
  if (e.points.size() <= cfg.max_equipment_points) return e.points;
  std::vector<Point3> out;
  out.reserve(cfg.max_equipment_points);
  std::mt19937_64 rng(cfg.seed ^ fnv1a(e.id));
  std::sample(e.points.begin(), e.points.end(), std::back_inserter(out), cfg.max_equipment_points, rng);
  return out;
}

// Uniform grid over extremity points with cells as wide as the link
// threshold, so every pair closer than the threshold sits in adjacent cells.
class ExtremityGrid {
 public:
  ExtremityGrid(std::span<const PipeElement> pipes, double cell) : cell_(cell) {
    for (std::size_t i = 0; i < pipes.size(); ++i)
      for (const auto& p : pipes[i].extremities) cells_[key(p)].push_back(i);
  }

  // Elements with an extremity in a cell adjacent to one of `pipe`'s.
  std::vector<std::size_t> candidates(const PipeElement& pipe) const {
    std::vector<std::size_t> out;
    for (const auto& p : pipe.extremities) {
      const Key k = key(p);
      for (std::int64_t dx = -1; dx <= 1; ++dx)
        for (std::int64_t dy = -1; dy <= 1; ++dy)
          for (std::int64_t dz = -1; dz <= 1; ++dz) {
            auto it = cells_.find({k[0] + dx, k[1] + dy, k[2] + dz});
            if (it != cells_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
          }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  using Key = std::array<std::int64_t, 3>;

  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = 0;
      for (auto v : k) h = h * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(v);
      return static_cast<std::size_t>(h);
    }
  };

  Key key(const Point3& p) const {
    auto idx = [&](double v) {
      const double c = std::floor(v / cell_);
      constexpr double lim = 4.0e18;
      return static_cast<std::int64_t>(std::clamp(c, -lim, lim));
    };
    return {idx(p.x), idx(p.y), idx(p.z)};
  }

  double cell_;
  std::unordered_map<Key, std::vector<std::size_t>, KeyHash> cells_;
};

void check_unique_ids(std::span<const PipeElement> pipes, std::span<const EquipmentInstance> equipment) {
  std::set<std::string_view> seen;
  for (const auto& p : pipes)
    if (!seen.insert(p.id).second) throw Error(ErrorCode::DuplicateId, p.id);
  for (const auto& e : equipment)
    if (!seen.insert(e.id).second) throw Error(ErrorCode::DuplicateId, e.id);
}

}  // namespace

void PipeElement::validate() const {
  if (id.empty()) throw Error(ErrorCode::InvalidInput, "pipe element with empty id");
  if (extremities.size() != port_count(kind))
    throw Error(ErrorCode::InvalidInput, "pipe '" + id + "': " + std::string(to_string(kind)) + " needs " +
                                             std::to_string(port_count(kind)) + " extremities, got " +
                                             std::to_string(extremities.size()));
  if (!std::all_of(extremities.begin(), extremities.end(), finite))
    throw Error(ErrorCode::InvalidInput, "pipe '" + id + "': non-finite extremity");
  if (!(diameter > 0.0) || !std::isfinite(diameter))
    throw Error(ErrorCode::InvalidInput, "pipe '" + id + "': diameter must be positive");
}

void EquipmentInstance::validate() const {
  if (id.empty()) throw Error(ErrorCode::InvalidInput, "equipment with empty id");
  if (normalize_label(class_label).empty()) throw Error(ErrorCode::InvalidInput, "equipment '" + id + "': empty class");
  if (points.empty()) throw Error(ErrorCode::InvalidInput, "equipment '" + id + "': no points");
  if (!std::all_of(points.begin(), points.end(), finite))
    throw Error(ErrorCode::InvalidInput, "equipment '" + id + "': non-finite point");
}

void SceneConfig::validate() const {
  if (!(link_threshold > 0.0) || !std::isfinite(link_threshold))
    throw Error(ErrorCode::InvalidInput, "link_threshold must be positive");
  if (max_equipment_points == 0) throw Error(ErrorCode::InvalidInput, "max_equipment_points must be >= 1");
}

double pipe_distance(const PipeElement& a, const PipeElement& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : a.extremities)
    for (const auto& q : b.extremities) best = std::min(best, distance(p, q));
  return best;
}

double equipment_distance(const EquipmentInstance& e, const PipeElement& p) {
  const PointColumns cols(e.points);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : p.extremities) best = std::min(best, cols.min_sq_distance(x));
  return std::sqrt(best);
}

std::set<Edge> link_pipe_elements(std::span<const PipeElement> pipes, const SceneConfig& cfg) {
  cfg.validate();
  check_unique_ids(pipes, {});
  for (const auto& p : pipes) p.validate();

  const ExtremityGrid grid(pipes, cfg.link_threshold);
  std::set<Edge> edges;
  for (std::size_t i = 0; i < pipes.size(); ++i) {
    std::vector<std::pair<double, const std::string*>> near;
    for (std::size_t j : grid.candidates(pipes[i])) {
      if (j == i) continue;
      const double d = pipe_distance(pipes[i], pipes[j]);
      if (d < cfg.link_threshold) near.emplace_back(d, &pipes[j].id);
    }
    std::sort(near.begin(), near.end(),
              [](const auto& a, const auto& b) { return a.first != b.first ? a.first < b.first : *a.second < *b.second; });
    const std::size_t k = std::min(near.size(), port_count(pipes[i].kind));
    for (std::size_t t = 0; t < k; ++t) edges.insert(make_edge(pipes[i].id, *near[t].second));
  }
  return edges;
}

std::set<Edge> attach_equipment(std::span<const EquipmentInstance> equipment, std::span<const PipeElement> pipes,
                                const SceneConfig& cfg) {
  cfg.validate();
  check_unique_ids(pipes, equipment);
  for (const auto& e : equipment) e.validate();
  for (const auto& p : pipes) p.validate();

  std::set<Edge> edges;
  for (const auto& e : equipment) {
    const PointColumns cols(subsample(e, cfg));
    std::vector<std::pair<double, const std::string*>> near;
    for (const auto& p : pipes) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& x : p.extremities) best = std::min(best, cols.min_sq_distance(x));
      const double d = std::sqrt(best);
      if (d < cfg.link_threshold) near.emplace_back(d, &p.id);
    }
    if (near.empty()) continue;
    if (cfg.equipment_attach == EquipmentAttach::ClosestOnly) {
      auto it = std::min_element(near.begin(), near.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : *a.second < *b.second;
      });
      edges.insert(make_edge(e.id, *it->second));
    } else {
      for (const auto& [d, id] : near) edges.insert(make_edge(e.id, *id));
    }
  }
  return edges;
}

SceneGraphBuild build_scene_graph(std::span<const PipeElement> pipes, std::span<const EquipmentInstance> equipment,
                                  const SceneConfig& cfg, const Vocabulary* vocab) {
  const std::set<Edge> pipe_links = link_pipe_elements(pipes, cfg);
  const std::set<Edge> attachments = attach_equipment(equipment, pipes, cfg);

  std::map<std::string, std::size_t> degree;
  for (const auto* set : {&pipe_links, &attachments})
    for (const auto& [a, b] : *set) {
      ++degree[a];
      ++degree[b];
    }

  SceneGraphBuild out;
  std::vector<Node> nodes;
  nodes.reserve(pipes.size() + equipment.size());
  for (const auto& p : pipes) {
    const std::size_t deg = degree[p.id];
    nodes.push_back({p.id, deg >= 3 ? NodeAttribute::junction() : NodeAttribute::run()});
    if (deg > port_count(p.kind)) out.warnings.push_back({p.id, deg, port_count(p.kind)});
  }
  for (const auto& e : equipment) {
    std::string label = normalize_label(e.class_label);
    if (vocab != nullptr) {
      auto r = vocab->resolve(label);
      if (!r.known) log::warn("equipment '" + e.id + "': label '" + r.label + "' not in vocabulary");
      label = std::move(r.label);
    }
    nodes.push_back({e.id, NodeAttribute::equipment(std::move(label))});
  }
  std::vector<Edge> edges(pipe_links.begin(), pipe_links.end());
  edges.insert(edges.end(), attachments.begin(), attachments.end());

  out.linked = AlignmentGraph(Provenance::Scene, std::move(nodes), std::move(edges));
  out.graph = simplify(out.linked);
  return out;
}

namespace {

Point3 point_from_json(const Json& j, std::string_view where) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
    throw Error(ErrorCode::InvalidInput, std::string(where) + ": expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::vector<Point3> points_from_json(const Json& j, std::string_view where) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidInput, std::string(where) + ": expected a list of points");
  std::vector<Point3> out;
  out.reserve(j.size());
  for (const auto& p : j) out.push_back(point_from_json(p, where));
  return out;
}

PipeKind pipe_kind_from(const std::string& s) {
  const std::string k = normalize_label(s);
  if (k == "cylinder") return PipeKind::Cylinder;
  if (k == "elbow") return PipeKind::Elbow;
  if (k == "tee") return PipeKind::Tee;
  if (k == "y-junction" || k == "yjunction") return PipeKind::YJunction;
  if (k == "reducer") return PipeKind::Reducer;
  throw Error(ErrorCode::InvalidInput, "scene: unknown pipe kind '" + s + "'");
}

Json points_to_json(const std::vector<Point3>& pts) {
  Json out = Json::array();
  for (const auto& p : pts) out.push_back({p.x, p.y, p.z});
  return out;
}

}  // namespace

Scene scene_from_json(const Json& j) {
  Scene s;
  const Json& pipes = require_field(j, "pipes", "scene");
  const Json& equipment = require_field(j, "equipment", "scene");
  if (!pipes.is_array() || !equipment.is_array())
    throw Error(ErrorCode::InvalidInput, "scene: pipes/equipment must be arrays");
  for (const auto& p : pipes) {
    PipeElement e;
    e.id = require_string(p, "id", "scene pipe");
    e.kind = pipe_kind_from(require_string(p, "kind", "scene pipe"));
    e.extremities = points_from_json(require_field(p, "extremities", "scene pipe"), "pipe '" + e.id + "'");
    const Json& d = require_field(p, "diameter", "scene pipe");
    if (!d.is_number()) throw Error(ErrorCode::InvalidInput, "pipe '" + e.id + "': diameter must be a number");
    e.diameter = d.get<double>();
    e.validate();
    s.pipes.push_back(std::move(e));
  }
  for (const auto& q : equipment) {
    EquipmentInstance e;
    e.id = require_string(q, "id", "scene equipment");
    e.class_label = require_string(q, "class", "scene equipment");
    e.points = points_from_json(require_field(q, "points", "scene equipment"), "equipment '" + e.id + "'");
    e.validate();
    s.equipment.push_back(std::move(e));
  }
  check_unique_ids(s.pipes, s.equipment);
  return s;
}

Json scene_to_json(const Scene& scene) {
  Json pipes = Json::array();
  for (const auto& p : scene.pipes)
    pipes.push_back({{"id", p.id},
                     {"kind", to_string(p.kind)},
                     {"extremities", points_to_json(p.extremities)},
                     {"diameter", p.diameter}});
  Json equipment = Json::array();
  for (const auto& e : scene.equipment)
    equipment.push_back({{"id", e.id}, {"class", e.class_label}, {"points", points_to_json(e.points)}});
  return {{"pipes", std::move(pipes)}, {"equipment", std::move(equipment)}};
}

Json warning_to_json(const ConstructionWarning& w) {
  return {{"node_id", w.node_id}, {"degree", w.degree}, {"port_count", w.port_count}};
}

}  // namespace pidalign
