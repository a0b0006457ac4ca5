#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pidalign/graph.hpp"
#include "pidalign/json_io.hpp"
#include "pidalign/matcher.hpp"
#include "pidalign/scene.hpp"

namespace pidalign {

enum class InconsistencyKind { Collision, UnmatchedTarget, EdgeViolation };
enum class InconsistencyStatus { Open, Resolved, Accepted };

std::string_view to_string(InconsistencyKind k);
std::string_view to_string(InconsistencyStatus s);

// A disagreement between S, F and the mapping.
//  Collision:       `target` has every id of `sources` (>= 2) as preimage.
//  UnmatchedTarget: `target` has no preimage.
//  EdgeViolation:   S edge `source_edge` maps onto the F non-edge `target_pair`.
struct Inconsistency {
  InconsistencyKind kind = InconsistencyKind::Collision;
  std::string target;
  std::vector<std::string> sources;
  Edge source_edge;
  std::pair<std::string, std::string> target_pair;
  InconsistencyStatus status = InconsistencyStatus::Open;

  // Stable id: collision/<target>, unmatched_target/<target>,
  // edge_violation/<s1>/<s2>. Acceptances refer to records by this id.
  std::string key() const;

  friend bool operator==(const Inconsistency&, const Inconsistency&) = default;
};

// Every record whose key is in `accepted` comes back as Accepted. Ordered by
// kind, then ids. Throws InvalidInput when the mapping misses an S node and
// UnknownNode for ids absent from the graphs.
std::vector<Inconsistency> get_inconsistencies(const Mapping& m, const AlignmentGraph& s, const AlignmentGraph& f,
                                               const std::set<std::string>& accepted = {});

std::size_t count_open(const std::vector<Inconsistency>& items);

Json inconsistency_to_json(const Inconsistency& item);
Inconsistency inconsistency_from_json(const Json& j);
Json report_to_json(int round, const std::vector<Inconsistency>& items);

struct HiddenLocation {
  Point3 center;
  double radius = 0.0;
  std::vector<std::string> anchors;  // scene primitives used, sorted
};

// Approximate position of an F node that has no preimage, from the scene
// primitives its F-neighbors were matched to. Throws NeighborsUnmatched when
// some F-neighbor has no preimage (or there are none), NotFound when a
// preimage has no primitive in `scene`.
HiddenLocation infer_hidden_location(std::string_view target, const Mapping& m, const AlignmentGraph& s,
                                     const AlignmentGraph& f, const Scene& scene, double link_threshold = 0.04);

// ---------------------------------------------------------------------------
// Alignment loop

struct Resolution {
  std::vector<GraphEdit> source_edits;
  std::vector<GraphEdit> target_edits;
  std::vector<std::string> acceptances;  // inconsistency keys
  std::vector<std::pair<std::string, std::string>> pins;

  bool empty() const { return source_edits.empty() && target_edits.empty() && acceptances.empty() && pins.empty(); }
};

Json resolution_to_json(const Resolution& r);
Resolution resolution_from_json(const Json& j);

struct RoundRecord {
  int round = 0;
  AlignmentGraph source;
  AlignmentGraph target;
  std::optional<Mapping> mapping;
  std::vector<Inconsistency> report;
};

struct HistoryEntry {
  int round = 0;  // the round whose report this resolution answered
  Resolution resolution;
};

// Versioned S/F pair with the state of the match/resolve loop. The edit
// history replays from the initial graphs to the current ones.
class AlignmentSession {
 public:
  AlignmentSession(std::string project_id, AlignmentGraph source, AlignmentGraph target);

  const std::string& project_id() const { return project_id_; }
  const AlignmentGraph& source() const { return source_; }
  const AlignmentGraph& target() const { return target_; }
  const AlignmentGraph& initial_source() const { return initial_source_; }
  const AlignmentGraph& initial_target() const { return initial_target_; }

  const std::set<std::string>& accepted() const { return accepted_; }
  const std::vector<std::pair<std::string, std::string>>& pins() const { return pins_; }
  const std::vector<HistoryEntry>& history() const { return history_; }
  const std::vector<RoundRecord>& rounds() const { return rounds_; }
  int current_round() const { return rounds_.empty() ? 0 : rounds_.back().round; }
  const std::optional<Mapping>& mapping() const;
  std::vector<Inconsistency> open_inconsistencies() const;

  RoundRecord& record_round(Mapping mapping, std::vector<Inconsistency> report);

  // Applies edits, acceptances and pins all-or-nothing. Acceptances must name
  // open records of the latest round; pins must name live nodes. Pins whose
  // nodes an edit removes are dropped.
  void apply_resolution(const Resolution& r);

  // Graphs obtained by replaying the history onto the initial graphs.
  std::pair<AlignmentGraph, AlignmentGraph> replay() const;

  // Rebuilds a session from its parts (used when restoring from disk).
  static AlignmentSession restore(std::string project_id, AlignmentGraph initial_source,
                                  AlignmentGraph initial_target, std::vector<HistoryEntry> history,
                                  std::vector<RoundRecord> rounds);

 private:
  std::string project_id_;
  AlignmentGraph initial_source_, initial_target_;
  AlignmentGraph source_, target_;
  std::set<std::string> accepted_;
  std::vector<std::pair<std::string, std::string>> pins_;
  std::vector<HistoryEntry> history_;
  std::vector<RoundRecord> rounds_;
};

// Source of human decisions: a UI, a script, a test double.
class EditProvider {
 public:
  virtual ~EditProvider() = default;
  virtual Resolution resolve(const AlignmentSession& session, const std::vector<Inconsistency>& open) = 0;
};

struct LoopOptions {
  int max_rounds = 50;
  const Vocabulary* vocab = nullptr;
  std::optional<std::filesystem::path> checkpoint_dir;  // rounds/<n>/ written here
};

struct LoopResult {
  Mapping mapping;
  std::vector<Inconsistency> accepted;  // the remaining (all Accepted) records
  int rounds = 0;
};

// match -> detect -> resolve -> re-match until nothing is open. Throws
// MaxRoundsExceeded; a failing resolution leaves the session at the last
// checkpoint and propagates.
LoopResult run_alignment_loop(AlignmentSession& session, const MatchConfig& cfg, EditProvider& provider,
                              const LoopOptions& options = {});

// rounds/<n>/{S.json,F.json,mapping.json,report.json}; mapping and report are
// omitted for round 0. Existing round directories are never rewritten.
void write_round_checkpoint(const std::filesystem::path& dir, const RoundRecord& record);
RoundRecord read_round_checkpoint(const std::filesystem::path& dir, int round);
std::vector<int> list_checkpoint_rounds(const std::filesystem::path& dir);

}  // namespace pidalign
