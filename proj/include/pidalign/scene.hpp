#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pidalign/graph.hpp"
#include "pidalign/json_io.hpp"
#include "pidalign/vocabulary.hpp"

namespace pidalign {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

double distance(const Point3& a, const Point3& b);

enum class PipeKind { Cylinder, Elbow, Tee, YJunction, Reducer };

// 2 for straight/bent/reducing elements, 3 for tees and Y-junctions.
std::size_t port_count(PipeKind kind);

std::string_view to_string(PipeKind kind);

// One reconstructed pipe primitive; coordinates in meters.
struct PipeElement {
  std::string id;
  PipeKind kind = PipeKind::Cylinder;
  std::vector<Point3> extremities;
  double diameter = 0.0;

  // Throws Error{InvalidInput} on port-count mismatch, non-finite coordinates
  // or non-positive diameter.
  void validate() const;
};

// A segmented equipment object, represented by points of its cloud.
struct EquipmentInstance {
  std::string id;
  std::string class_label;
  std::vector<Point3> points;

  void validate() const;
};

enum class EquipmentAttach { ClosestOnly, AllWithinThreshold };

struct SceneConfig {
  double link_threshold = 0.04;
  EquipmentAttach equipment_attach = EquipmentAttach::AllWithinThreshold;
  // Equipment clouds above this size are subsampled (uniform, seeded per id).
  std::size_t max_equipment_points = 2048;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Scene {
  std::vector<PipeElement> pipes;
  std::vector<EquipmentInstance> equipment;
};

struct ConstructionWarning {
  std::string node_id;
  std::size_t degree = 0;
  std::size_t port_count = 0;

  friend bool operator==(const ConstructionWarning&, const ConstructionWarning&) = default;
};

struct SceneGraphBuild {
  AlignmentGraph linked;  // after linking/attachment, before simplification
  AlignmentGraph graph;
  std::vector<ConstructionWarning> warnings;
};

// Smallest Euclidean distance between an extremity of `a` and one of `b`.
double pipe_distance(const PipeElement& a, const PipeElement& b);

// Smallest distance between an equipment point and a pipe extremity.
double equipment_distance(const EquipmentInstance& e, const PipeElement& p);

// Each element keeps its port_count(kind) nearest others closer than the
// threshold (ties by ascending id); result is the union of those choices.
std::set<Edge> link_pipe_elements(std::span<const PipeElement> pipes, const SceneConfig& cfg);

std::set<Edge> attach_equipment(std::span<const EquipmentInstance> equipment, std::span<const PipeElement> pipes,
                                const SceneConfig& cfg);

// Link, attach, then simplify. Equipment labels are normalized, and resolved
// through `vocab` when given.
SceneGraphBuild build_scene_graph(std::span<const PipeElement> pipes, std::span<const EquipmentInstance> equipment,
                                  const SceneConfig& cfg, const Vocabulary* vocab = nullptr);

Scene scene_from_json(const Json& j);
Json scene_to_json(const Scene& scene);
Json warning_to_json(const ConstructionWarning& w);

}  // namespace pidalign
