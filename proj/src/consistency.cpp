#include "pidalign/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "pidalign/error.hpp"

namespace pidalign {

std::string_view to_string(InconsistencyKind k) {
  switch (k) {
    case InconsistencyKind::Collision: return "collision";
    case InconsistencyKind::UnmatchedTarget: return "unmatched_target";
    case InconsistencyKind::EdgeViolation: return "edge_violation";
  }
  return "?";
}

std::string_view to_string(InconsistencyStatus s) {
  switch (s) {
    case InconsistencyStatus::Open: return "open";
    case InconsistencyStatus::Resolved: return "resolved";
    case InconsistencyStatus::Accepted: return "accepted";
  }
  return "?";
}

std::string Inconsistency::key() const {
  std::string k(to_string(kind));
  if (kind == InconsistencyKind::EdgeViolation) return k + "/" + source_edge.first + "/" + source_edge.second;
  return k + "/" + target;
}

std::vector<Inconsistency> get_inconsistencies(const Mapping& m, const AlignmentGraph& s, const AlignmentGraph& f,
                                               const std::set<std::string>& accepted) {
  std::map<std::string, std::string> assign;
  for (const auto& p : m.pairs) {
    if (!s.contains(p.source)) throw Error(ErrorCode::UnknownNode, "mapping source '" + p.source + "'");
    if (!f.contains(p.target)) throw Error(ErrorCode::UnknownNode, "mapping target '" + p.target + "'");
    assign[p.source] = p.target;
  }
  for (const auto& n : s.nodes())
    if (!assign.count(n.id)) throw Error(ErrorCode::InvalidInput, "mapping has no entry for source '" + n.id + "'");

  std::map<std::string, std::vector<std::string>> preimages;
  for (const auto& [src, dst] : assign) preimages[dst].push_back(src);  // sources come out sorted

  std::vector<Inconsistency> out;
  for (const auto& [dst, srcs] : preimages)
    if (srcs.size() >= 2) {
      Inconsistency item;
      item.kind = InconsistencyKind::Collision;
      item.target = dst;
      item.sources = srcs;
      out.push_back(std::move(item));
    }

  std::vector<std::string> targets = f.ids();
  std::sort(targets.begin(), targets.end());
  for (const auto& t : targets)
    if (!preimages.count(t)) {
      Inconsistency item;
      item.kind = InconsistencyKind::UnmatchedTarget;
      item.target = t;
      out.push_back(std::move(item));
    }

  for (const auto& e : s.edges()) {  // already ascending
    const std::string& a = assign.at(e.first);
    const std::string& b = assign.at(e.second);
    if (a != b && !f.has_edge(a, b)) {
      Inconsistency item;
      item.kind = InconsistencyKind::EdgeViolation;
      item.source_edge = e;
      item.target_pair = {a, b};
      out.push_back(std::move(item));
    }
  }

  for (auto& item : out)
    if (accepted.count(item.key())) item.status = InconsistencyStatus::Accepted;
  return out;
}

std::size_t count_open(const std::vector<Inconsistency>& items) {
  return static_cast<std::size_t>(std::count_if(
      items.begin(), items.end(), [](const auto& i) { return i.status == InconsistencyStatus::Open; }));
}

Json inconsistency_to_json(const Inconsistency& item) {
  Json payload;
  switch (item.kind) {
    case InconsistencyKind::Collision:
      payload = {{"target", item.target}, {"sources", item.sources}};
      break;
    case InconsistencyKind::UnmatchedTarget:
      payload = {{"target", item.target}};
      break;
    case InconsistencyKind::EdgeViolation:
      payload = {{"source_edge", {item.source_edge.first, item.source_edge.second}},
                 {"target_pair", {item.target_pair.first, item.target_pair.second}}};
      break;
  }
  return {{"id", item.key()}, {"kind", to_string(item.kind)}, {"payload", std::move(payload)},
          {"status", to_string(item.status)}};
}

Inconsistency inconsistency_from_json(const Json& j) {
  Inconsistency item;
  const std::string kind = require_string(j, "kind", "inconsistency");
  const std::string status = require_string(j, "status", "inconsistency");
  const Json& payload = require_field(j, "payload", "inconsistency");
  try {
    if (kind == "collision") {
      item.kind = InconsistencyKind::Collision;
      item.target = payload.at("target").get<std::string>();
      item.sources = payload.at("sources").get<std::vector<std::string>>();
    } else if (kind == "unmatched_target") {
      item.kind = InconsistencyKind::UnmatchedTarget;
      item.target = payload.at("target").get<std::string>();
    } else if (kind == "edge_violation") {
      item.kind = InconsistencyKind::EdgeViolation;
      const auto se = payload.at("source_edge").get<std::vector<std::string>>();
      const auto tp = payload.at("target_pair").get<std::vector<std::string>>();
      if (se.size() != 2 || tp.size() != 2) throw Error(ErrorCode::InvalidInput, "inconsistency: malformed pair");
      item.source_edge = make_edge(se[0], se[1]);
      item.target_pair = {tp[0], tp[1]};
    } else {
      throw Error(ErrorCode::InvalidInput, "inconsistency: unknown kind '" + kind + "'");
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("inconsistency payload: ") + e.what());
  }
  if (status == "open")
    item.status = InconsistencyStatus::Open;
  else if (status == "resolved")
    item.status = InconsistencyStatus::Resolved;
  else if (status == "accepted")
    item.status = InconsistencyStatus::Accepted;
  else
    throw Error(ErrorCode::InvalidInput, "inconsistency: unknown status '" + status + "'");
  return item;
}

Json report_to_json(int round, const std::vector<Inconsistency>& items) {
  Json arr = Json::array();
  for (const auto& i : items) arr.push_back(inconsistency_to_json(i));
  return {{"round", round}, {"items", std::move(arr)}};
}

namespace {

struct Primitive {
  std::vector<Point3> points;  // pipe extremities or equipment points
  std::optional<double> diameter;
};

Point3 mean(const std::vector<Point3>& pts) {
  Point3 c;
  for (const auto& p : pts) {
    c.x += p.x;
    c.y += p.y;
    c.z += p.z;
  }
  const double n = static_cast<double>(pts.size());
  return {c.x / n, c.y / n, c.z / n};
}

}  // namespace

HiddenLocation infer_hidden_location(std::string_view target, const Mapping& m, const AlignmentGraph& s,
                                     const AlignmentGraph& f, const Scene& scene, double link_threshold) {
  const std::vector<std::string> nbrs = f.neighbors(target);
  if (nbrs.empty()) throw Error(ErrorCode::NeighborsUnmatched, "'" + std::string(target) + "' has no neighbors");

  std::set<std::string> anchors;
  for (const auto& nb : nbrs) {
    bool found = false;
    for (const auto& p : m.pairs)
      if (p.target == nb) {
        anchors.insert(p.source);
        found = true;
      }
    if (!found) throw Error(ErrorCode::NeighborsUnmatched, "neighbor '" + nb + "' of '" + std::string(target) + "'");
  }

  std::map<std::string, Primitive, std::less<>> primitives;
  for (const auto& p : scene.pipes) primitives[p.id] = {p.extremities, p.diameter};
  for (const auto& e : scene.equipment) primitives[e.id] = {e.points, std::nullopt};
  auto lookup = [&](const std::string& id) -> const Primitive& {
    auto it = primitives.find(id);
    if (it == primitives.end()) throw Error(ErrorCode::NotFound, "no scene primitive for '" + id + "'");
    return it->second;
  };

  HiddenLocation out;
  out.anchors.assign(anchors.begin(), anchors.end());

  if (anchors.size() == 1) {
    const std::string& id = *anchors.begin();
    const Primitive& prim = lookup(id);
    // Free end: the point farthest from every other primitive still in S.
    std::vector<Point3> others;
    for (const auto& n : s.nodes())
      if (n.id != id)
        if (auto it = primitives.find(n.id); it != primitives.end())
          others.insert(others.end(), it->second.points.begin(), it->second.points.end());
    std::size_t best = 0;
    double best_gap = -1.0;
    for (std::size_t k = 0; k < prim.points.size(); ++k) {
      double gap = std::numeric_limits<double>::infinity();
      for (const auto& o : others) gap = std::min(gap, distance(prim.points[k], o));
      if (gap > best_gap) {
        best_gap = gap;
        best = k;
      }
    }
    out.center = prim.points[best];
    out.radius = prim.diameter.value_or(link_threshold);
    return out;
  }

  // Several anchors: each contributes its point nearest to the centroid of
  // the anchors' centers; the estimate is the centroid of those points.
  std::vector<Point3> centers;
  for (const auto& id : anchors) centers.push_back(mean(lookup(id).points));
  const Point3 guess = mean(centers);
  std::vector<Point3> chosen;
  for (const auto& id : anchors) {
    const auto& pts = lookup(id).points;
    chosen.push_back(*std::min_element(pts.begin(), pts.end(), [&](const Point3& a, const Point3& b) {
      return distance(a, guess) < distance(b, guess);
    }));
  }
  out.center = mean(chosen);
  for (const auto& p : chosen) out.radius = std::max(out.radius, distance(p, out.center));
  return out;
}

}  // namespace pidalign
