#include <algorithm>
#include <charconv>

#include "pidalign/consistency.hpp"
#include "pidalign/error.hpp"
#include "pidalign/graph_io.hpp"
#include "pidalign/log.hpp"

namespace pidalign {

namespace fs = std::filesystem;

Json resolution_to_json(const Resolution& r) {
  Json se = Json::array(), te = Json::array(), pins = Json::array();
  for (const auto& e : r.source_edits) se.push_back(edit_to_json(e));
  for (const auto& e : r.target_edits) te.push_back(edit_to_json(e));
  for (const auto& [a, b] : r.pins) pins.push_back({{"source", a}, {"target", b}});
  return {{"source_edits", std::move(se)}, {"target_edits", std::move(te)}, {"accept", r.acceptances},
          {"pins", std::move(pins)}};
}

Resolution resolution_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "resolution: expected an object");
  Resolution r;
  if (auto it = j.find("source_edits"); it != j.end()) r.source_edits = edits_from_json(*it);
  if (auto it = j.find("target_edits"); it != j.end()) r.target_edits = edits_from_json(*it);
  if (auto it = j.find("accept"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorCode::InvalidInput, "resolution: accept must be an array");
    for (const auto& a : *it) {
      if (!a.is_string()) throw Error(ErrorCode::InvalidInput, "resolution: accept entries must be strings");
      r.acceptances.push_back(a.get<std::string>());
    }
  }
  if (auto it = j.find("pins"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorCode::InvalidInput, "resolution: pins must be an array");
    for (const auto& p : *it)
      r.pins.emplace_back(require_string(p, "source", "pin"), require_string(p, "target", "pin"));
  }
  return r;
}

AlignmentSession::AlignmentSession(std::string project_id, AlignmentGraph source, AlignmentGraph target)
    : project_id_(std::move(project_id)),
      initial_source_(source),
      initial_target_(target),
      source_(std::move(source)),
      target_(std::move(target)) {}

const std::optional<Mapping>& AlignmentSession::mapping() const {
  static const std::optional<Mapping> none;
  return rounds_.empty() ? none : rounds_.back().mapping;
}

std::vector<Inconsistency> AlignmentSession::open_inconsistencies() const {
  std::vector<Inconsistency> out;
  if (rounds_.empty()) return out;
  for (const auto& i : rounds_.back().report)
    if (i.status == InconsistencyStatus::Open) out.push_back(i);
  return out;
}

RoundRecord& AlignmentSession::record_round(Mapping mapping, std::vector<Inconsistency> report) {
  RoundRecord r;
  r.round = current_round() + 1;
  r.source = source_;
  r.target = target_;
  r.mapping = std::move(mapping);
  r.report = std::move(report);
  rounds_.push_back(std::move(r));
  return rounds_.back();
}

namespace {

struct Applied {
  AlignmentGraph source, target;
  std::set<std::string> accepted;
  std::vector<std::pair<std::string, std::string>> pins;
};

Applied apply_to(const AlignmentGraph& s, const AlignmentGraph& f, std::set<std::string> accepted,
                 std::vector<std::pair<std::string, std::string>> pins, const Resolution& r,
                 const std::vector<Inconsistency>* open) {
  Applied out;
  out.source = r.source_edits.empty() ? s : apply_edits(s, r.source_edits);
  out.target = r.target_edits.empty() ? f : apply_edits(f, r.target_edits);

  for (const auto& key : r.acceptances) {
    if (open) {
      const bool known = std::any_of(open->begin(), open->end(), [&](const auto& i) { return i.key() == key; });
      if (!known) throw Error(ErrorCode::InvalidInput, "accept: '" + key + "' is not an open inconsistency");
    }
    accepted.insert(key);
  }

  for (const auto& [a, b] : r.pins) {
    if (!out.source.contains(a)) throw Error(ErrorCode::UnknownNode, "pin source '" + a + "'");
    if (!out.target.contains(b)) throw Error(ErrorCode::UnknownNode, "pin target '" + b + "'");
    std::erase_if(pins, [&](const auto& p) { return p.first == a; });
    pins.emplace_back(a, b);
  }
  std::erase_if(pins, [&](const auto& p) {
    const bool dead = !out.source.contains(p.first) || !out.target.contains(p.second);
    if (dead) log::info("dropping pin " + p.first + " -> " + p.second + ": node removed");
    return dead;
  });
  out.accepted = std::move(accepted);
  out.pins = std::move(pins);
  return out;
}

}  // namespace

void AlignmentSession::apply_resolution(const Resolution& r) {
  const auto open = open_inconsistencies();
  Applied next = apply_to(source_, target_, accepted_, pins_, r, &open);

  source_ = std::move(next.source);
  target_ = std::move(next.target);
  accepted_ = std::move(next.accepted);
  pins_ = std::move(next.pins);
  history_.push_back({current_round(), r});

  if (!rounds_.empty()) {
    const std::set<std::string> acc(r.acceptances.begin(), r.acceptances.end());
    for (auto& item : rounds_.back().report)
      if (item.status == InconsistencyStatus::Open)
        item.status = acc.count(item.key()) ? InconsistencyStatus::Accepted : InconsistencyStatus::Resolved;
  }
}

std::pair<AlignmentGraph, AlignmentGraph> AlignmentSession::replay() const {
  AlignmentGraph s = initial_source_, f = initial_target_;
  std::set<std::string> accepted;
  std::vector<std::pair<std::string, std::string>> pins;
  for (const auto& h : history_) {
    Applied a = apply_to(s, f, std::move(accepted), std::move(pins), h.resolution, nullptr);
    s = std::move(a.source);
    f = std::move(a.target);
    accepted = std::move(a.accepted);
    pins = std::move(a.pins);
  }
  return {std::move(s), std::move(f)};
}

AlignmentSession AlignmentSession::restore(std::string project_id, AlignmentGraph initial_source,
                                           AlignmentGraph initial_target, std::vector<HistoryEntry> history,
                                           std::vector<RoundRecord> rounds) {
  AlignmentSession session(std::move(project_id), std::move(initial_source), std::move(initial_target));
  for (const auto& h : history) {
    Applied a = apply_to(session.source_, session.target_, std::move(session.accepted_), std::move(session.pins_),
                         h.resolution, nullptr);
    session.source_ = std::move(a.source);
    session.target_ = std::move(a.target);
    session.accepted_ = std::move(a.accepted);
    session.pins_ = std::move(a.pins);
  }
  session.history_ = std::move(history);
  session.rounds_ = std::move(rounds);
  return session;
}

LoopResult run_alignment_loop(AlignmentSession& session, const MatchConfig& cfg, EditProvider& provider,
                              const LoopOptions& options) {
  if (options.max_rounds < 1) throw Error(ErrorCode::InvalidInput, "max_rounds must be positive");
  if (options.checkpoint_dir && session.rounds().empty()) {
    RoundRecord zero;
    zero.source = session.source();
    zero.target = session.target();
    if (!fs::exists(*options.checkpoint_dir / "rounds" / "0")) write_round_checkpoint(*options.checkpoint_dir, zero);
  }

  for (int i = 0; i < options.max_rounds; ++i) {
    MatchOptions mo;
    mo.vocab = options.vocab;
    mo.pins = session.pins();
    const Coupling c = match_graphs(session.source(), session.target(), cfg, mo);
    Mapping m = extract_mapping(c, session.source(), session.target());
    auto report = get_inconsistencies(m, session.source(), session.target(), session.accepted());
    const RoundRecord& rec = session.record_round(std::move(m), std::move(report));
    if (options.checkpoint_dir) write_round_checkpoint(*options.checkpoint_dir, rec);
    log::info("round " + std::to_string(rec.round) + ": " + std::to_string(count_open(rec.report)) + " open");

    if (count_open(rec.report) == 0) return {*rec.mapping, rec.report, rec.round};

    const Resolution r = provider.resolve(session, session.open_inconsistencies());
    session.apply_resolution(r);
  }
  throw Error(ErrorCode::MaxRoundsExceeded,
              "inconsistencies still open after " + std::to_string(options.max_rounds) + " rounds");
}

void write_round_checkpoint(const fs::path& dir, const RoundRecord& record) {
  const fs::path rd = dir / "rounds" / std::to_string(record.round);
  if (fs::exists(rd / "S.json")) throw Error(ErrorCode::Conflict, "round " + std::to_string(record.round) + " already written");
  std::error_code ec;
  fs::create_directories(rd, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + rd.string() + ": " + ec.message());
  write_text_file_atomic(rd / "F.json", dump_canonical(graph_to_json(record.target)));
  if (record.mapping) {
    write_text_file_atomic(rd / "mapping.json", dump_canonical(mapping_to_json(*record.mapping, record.target)));
    write_text_file_atomic(rd / "report.json", dump_canonical(report_to_json(record.round, record.report)));
  }
  // S.json last: its presence marks the round as complete.
  write_text_file_atomic(rd / "S.json", dump_canonical(graph_to_json(record.source)));
}

RoundRecord read_round_checkpoint(const fs::path& dir, int round) {
  const fs::path rd = dir / "rounds" / std::to_string(round);
  if (!fs::exists(rd / "S.json")) throw Error(ErrorCode::NotFound, "round " + std::to_string(round) + " not found");
  RoundRecord r;
  r.round = round;
  r.source = graph_from_json(read_json_file(rd / "S.json"));
  r.target = graph_from_json(read_json_file(rd / "F.json"));
  if (fs::exists(rd / "mapping.json")) r.mapping = mapping_from_json(read_json_file(rd / "mapping.json"));
  if (fs::exists(rd / "report.json")) {
    const Json rep = read_json_file(rd / "report.json");
    for (const auto& item : require_field(rep, "items", "report")) r.report.push_back(inconsistency_from_json(item));
  }
  return r;
}

std::vector<int> list_checkpoint_rounds(const fs::path& dir) {
  std::vector<int> out;
  const fs::path rd = dir / "rounds";
  if (!fs::is_directory(rd)) return out;
  for (const auto& e : fs::directory_iterator(rd)) {
    const std::string name = e.path().filename().string();
    int n = 0;
    auto [p, ec] = std::from_chars(name.data(), name.data() + name.size(), n);
    if (ec == std::errc() && p == name.data() + name.size() && fs::exists(e.path() / "S.json")) out.push_back(n);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace pidalign
