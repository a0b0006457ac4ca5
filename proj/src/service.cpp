#include "pidalign/service.hpp"

#include <chrono>
#include <charconv>

#include "httplib.h"
#include "pidalign/error.hpp"
#include "pidalign/graph_io.hpp"
#include "pidalign/log.hpp"

#ifndef PIDALIGN_VERSION
#define PIDALIGN_VERSION "0.0.0"
#endif

namespace pidalign {

namespace fs = std::filesystem;

std::string_view version() { return PIDALIGN_VERSION; }

std::string_view to_string(ProjectState s) {
  switch (s) {
    case ProjectState::Idle: return "idle";
    case ProjectState::Matching: return "matching";
    case ProjectState::AwaitingResolution: return "awaiting_resolution";
    case ProjectState::Converged: return "converged";
  }
  return "?";
}

namespace {

Reply error_reply(int status, std::string_view code, std::string_view message) {
  return {status, {{"error", code}, {"message", message}}};
}

Reply error_reply(const Error& e) {
  int status = 500;
  switch (e.code()) {
    case ErrorCode::NotFound: status = 404; break;
    case ErrorCode::Conflict: status = 409; break;
    default: status = is_validation_error(e.code()) ? 400 : 500;
  }
  return error_reply(status, to_string(e.code()), e.what());
}

Json job_to_json(const JobStatus& j) {
  Json out = {{"id", j.id}, {"state", j.state}, {"iteration", j.iteration}, {"total", j.total},
              {"objective", j.objective}};
  if (j.round > 0) out["round"] = j.round;
  if (!j.error.empty()) out["error"] = j.error;
  return out;
}

Json round_to_json(const RoundRecord& r) {
  Json out = {{"round", r.round}, {"source", graph_to_json(r.source)}, {"target", graph_to_json(r.target)}};
  out["mapping"] = r.mapping ? mapping_to_json(*r.mapping, r.target) : Json(nullptr);
  out["report"] = r.mapping ? report_to_json(r.round, r.report) : Json(nullptr);
  return out;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

Service::Service(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  if (fs::exists(root_, ec) && !fs::is_directory(root_, ec))
    throw Error(ErrorCode::InvalidInput, "project dir '" + root_.string() + "' is not a directory");
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::InvalidInput, "cannot create project dir '" + root_.string() + "': " + ec.message());
  const fs::path probe = root_ / ".write-probe";
  try {
    write_text_file_atomic(probe, "");
    fs::remove(probe, ec);
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidInput, "project dir '" + root_.string() + "' is not writable");
  }
  load_existing();
}

Service::~Service() {
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(mutex_);
    threads.swap(threads_);
  }
  for (auto& t : threads)
    if (t.joinable()) t.join();
}

void Service::wait_idle() {
  while (running_.load() > 0) std::this_thread::sleep_for(std::chrono::milliseconds(5));
}

void Service::load_existing() {
  for (const auto& e : fs::directory_iterator(root_)) {
    if (!e.is_directory() || !fs::exists(e.path() / "manifest.json")) continue;
    try {
      auto p = load_project(e.path());
      projects_[e.path().filename().string()] = std::move(p);
    } catch (const Error& err) {
      log::warn("skipping project " + e.path().string() + ": " + err.what());
    }
  }
}

std::shared_ptr<Service::Project> Service::load_project(const fs::path& dir) {
  auto p = std::make_shared<Project>();
  p->dir = dir;
  const Json manifest = read_json_file(dir / "manifest.json");
  const std::string id = require_string(manifest, "id", "manifest");
  p->config = match_config_from_json(require_field(manifest, "config", "manifest"));
  if (auto it = manifest.find("vocab"); it != manifest.end() && it->is_string()) {
    p->vocab_text = it->get<std::string>();
    p->vocab = Vocabulary::parse(p->vocab_text);
  }

  const RoundRecord zero = read_round_checkpoint(dir, 0);
  std::vector<HistoryEntry> history;
  if (fs::exists(dir / "history.json"))
    for (const auto& h : read_json_file(dir / "history.json"))
      history.push_back({h.at("round").get<int>(), resolution_from_json(h.at("resolution"))});

  std::vector<RoundRecord> rounds;
  for (int n : list_checkpoint_rounds(dir))
    if (n > 0) rounds.push_back(read_round_checkpoint(dir, n));

  const bool answered = !rounds.empty() && !history.empty() && history.back().round == rounds.back().round;
  if (rounds.empty() || answered)
    p->state = ProjectState::Idle;
  else
    p->state = count_open(rounds.back().report) > 0 ? ProjectState::AwaitingResolution : ProjectState::Converged;

  p->session = std::make_unique<AlignmentSession>(
      AlignmentSession::restore(id, zero.source, zero.target, std::move(history), std::move(rounds)));
  return p;
}

std::shared_ptr<Service::Project> Service::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = projects_.find(id);
  if (it == projects_.end()) throw Error(ErrorCode::NotFound, "unknown project '" + id + "'");
  return it->second;
}

void Service::persist_history(const Project& p) {
  Json arr = Json::array();
  for (const auto& h : p.session->history())
    arr.push_back({{"round", h.round}, {"resolution", resolution_to_json(h.resolution)}});
  write_text_file_atomic(p.dir / "history.json", dump_canonical(arr));
}

Reply Service::create_project(const Json& body) {
  try {
    if (!body.is_object()) throw Error(ErrorCode::InvalidInput, "expected a JSON object");
    AlignmentGraph s = graph_from_json(require_field(body, "source", "project"));
    AlignmentGraph f = graph_from_json(require_field(body, "target", "project"));
    if (s.empty()) throw Error(ErrorCode::EmptyGraph, "source graph is empty");
    if (f.empty()) throw Error(ErrorCode::EmptyGraph, "target graph is empty");
    MatchConfig cfg;
    if (auto it = body.find("config"); it != body.end()) cfg = match_config_from_json(*it);
    cfg.validate();
    std::string vocab_text;
    if (auto it = body.find("vocab"); it != body.end()) {
      if (!it->is_string()) throw Error(ErrorCode::InvalidInput, "vocab must be the text of a vocabulary file");
      vocab_text = it->get<std::string>();
    }

    auto p = std::make_shared<Project>();
    p->config = cfg;
    if (!vocab_text.empty()) {
      p->vocab_text = vocab_text;
      p->vocab = Vocabulary::parse(vocab_text);
    }

    std::string id;
    {
      std::lock_guard lock(mutex_);
      for (int n = static_cast<int>(projects_.size()) + 1;; ++n) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "p%04d", n);
        if (!projects_.count(buf) && !fs::exists(root_ / buf)) {
          id = buf;
          break;
        }
      }
      p->dir = root_ / id;
      fs::create_directories(p->dir);
      p->session = std::make_unique<AlignmentSession>(id, std::move(s), std::move(f));
      RoundRecord zero;
      zero.source = p->session->source();
      zero.target = p->session->target();
      write_round_checkpoint(p->dir, zero);
      Json manifest = {{"id", id}, {"config", match_config_to_json(cfg)}, {"version", version()}};
      if (!vocab_text.empty()) manifest["vocab"] = vocab_text;
      write_text_file_atomic(p->dir / "manifest.json", dump_canonical(manifest));
      projects_[id] = p;
    }
    return {201, {{"id", id}, {"state", to_string(ProjectState::Idle)}, {"round", 0}}};
  } catch (const Error& e) {
    return error_reply(e);
  }
}

Reply Service::get_project(const std::string& id) {
  try {
    auto p = find(id);
    std::lock_guard lock(p->mutex);
    const AlignmentSession& s = *p->session;
    Json out = {{"id", id},
                {"state", to_string(p->state)},
                {"round", s.current_round()},
                {"source", graph_to_json(s.source())},
                {"target", graph_to_json(s.target())},
                {"config", match_config_to_json(p->config)}};
    if (!s.rounds().empty()) {
      const RoundRecord& last = s.rounds().back();
      out["mapping"] = mapping_to_json(*last.mapping, last.target);
      out["report"] = report_to_json(last.round, last.report);
    } else {
      out["mapping"] = nullptr;
      out["report"] = nullptr;
    }
    Json history = Json::array();
    for (const auto& h : s.history()) history.push_back({{"round", h.round}, {"resolution", resolution_to_json(h.resolution)}});
    out["history"] = std::move(history);
    Json pins = Json::array();
    for (const auto& [a, b] : s.pins()) pins.push_back({{"source", a}, {"target", b}});
    out["pins"] = std::move(pins);
    out["accepted"] = s.accepted();
    out["job"] = p->last_job.empty() ? Json(nullptr) : Json(p->last_job);
    return {200, std::move(out)};
  } catch (const Error& e) {
    return error_reply(e);
  }
}

Reply Service::trigger_match(const std::string& id) {
  try {
    auto p = find(id);
    std::shared_ptr<JobStatus> job;
    {
      std::lock_guard lock(p->mutex);
      if (p->state == ProjectState::Matching)
        return error_reply(409, "Conflict", "a matching job is already running");
      if (p->state == ProjectState::Converged)
        return error_reply(409, "Conflict", "project has converged");
      job = std::make_shared<JobStatus>();
      {
        std::lock_guard g(mutex_);
        job->id = "j" + std::to_string(next_job_++);
      }
      job->total = p->config.outer_iters;
      p->jobs[job->id] = job;
      p->last_job = job->id;
      p->state = ProjectState::Matching;
    }
    ++running_;
    {
      std::lock_guard g(mutex_);
      threads_.emplace_back([this, p, job] { run_job(p, job); });
    }
    return {202, {{"job", job->id}, {"state", to_string(ProjectState::Matching)}}};
  } catch (const Error& e) {
    return error_reply(e);
  }
}

void Service::run_job(std::shared_ptr<Project> p, std::shared_ptr<JobStatus> job) {
  AlignmentGraph s, f;
  MatchOptions mo;
  std::set<std::string> accepted;
  {
    std::lock_guard lock(p->mutex);
    s = p->session->source();
    f = p->session->target();
    mo.pins = p->session->pins();
    accepted = p->session->accepted();
  }
  mo.vocab = p->vocab ? &*p->vocab : nullptr;
  mo.progress = [&](int it, double obj) {
    std::lock_guard lock(p->mutex);
    job->iteration = it;
    job->objective = obj;
  };
  try {
    const Coupling c = match_graphs(s, f, p->config, mo);
    Mapping m = extract_mapping(c, s, f);
    auto report = get_inconsistencies(m, s, f, accepted);
    std::lock_guard lock(p->mutex);
    AlignmentSession next = *p->session;
    const RoundRecord& rec = next.record_round(std::move(m), std::move(report));
    write_round_checkpoint(p->dir, rec);
    const bool open = count_open(rec.report) > 0;
    job->round = rec.round;
    *p->session = std::move(next);
    p->state = open ? ProjectState::AwaitingResolution : ProjectState::Converged;
    job->state = "done";
  } catch (const std::exception& e) {
    std::lock_guard lock(p->mutex);
    log::error("job " + job->id + " failed: " + e.what());
    job->state = "failed";
    job->error = e.what();
    p->state = p->session->rounds().empty() || count_open(p->session->rounds().back().report) > 0
                   ? (p->session->rounds().empty() ? ProjectState::Idle : ProjectState::AwaitingResolution)
                   : ProjectState::Converged;
  }
  --running_;
}

Reply Service::get_job(const std::string& id, const std::string& job) {
  try {
    auto p = find(id);
    std::lock_guard lock(p->mutex);
    auto it = p->jobs.find(job);
    if (it == p->jobs.end()) throw Error(ErrorCode::NotFound, "unknown job '" + job + "'");
    return {200, job_to_json(*it->second)};
  } catch (const Error& e) {
    return error_reply(e);
  }
}

Reply Service::submit_resolution(const std::string& id, const Json& body) {
  try {
    auto p = find(id);
    if (!body.is_object()) throw Error(ErrorCode::InvalidInput, "expected a JSON object");
    auto rt = body.find("round");
    if (rt == body.end() || !rt->is_number_integer())
      throw Error(ErrorCode::InvalidInput, "resolution requires an integer round token");
    const int token = rt->get<int>();
    const Resolution r = resolution_from_json(body);

    std::lock_guard lock(p->mutex);
    if (p->state != ProjectState::AwaitingResolution || token != p->session->current_round())
      return error_reply(409, "Conflict",
                         "stale round token " + std::to_string(token) + " (state " +
                             std::string(to_string(p->state)) + ", round " +
                             std::to_string(p->session->current_round()) + ")");
    AlignmentSession next = *p->session;
    next.apply_resolution(r);
    *p->session = std::move(next);
    persist_history(*p);
    p->state = ProjectState::Idle;
    return {200, {{"state", to_string(p->state)}, {"round", p->session->current_round()}}};
  } catch (const Error& e) {
    return error_reply(e);
  }
}

Reply Service::get_round(const std::string& id, int round) {
  try {
    auto p = find(id);
    return {200, round_to_json(read_round_checkpoint(p->dir, round))};
  } catch (const Error& e) {
    return error_reply(e);
  }
}

Reply Service::health() const { return {200, {{"status", "ok"}, {"version", version()}}}; }

void Service::mount(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto body_of = [](const httplib::Request& req) { return parse_json(req.body, "request body"); };
  auto with_body = [send, body_of](auto fn) {
    return [send, body_of, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        send(res, fn(req, body_of(req)));
      } catch (const Error& e) {
        send(res, error_reply(e));
      }
    };
  };

  server.Get("/healthz", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
  server.Post("/projects", with_body([this](const httplib::Request&, const Json& b) { return create_project(b); }));
  server.Get(R"(/projects/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_project(req.matches[1]));
  });
  server.Post(R"(/projects/([^/]+)/match)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, trigger_match(req.matches[1]));
  });
  server.Get(R"(/projects/([^/]+)/jobs/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_job(req.matches[1], req.matches[2]));
  });
  server.Post(R"(/projects/([^/]+)/resolutions)", with_body([this](const httplib::Request& req, const Json& b) {
                return submit_resolution(req.matches[1], b);
              }));
  server.Get(R"(/projects/([^/]+)/rounds/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    const auto n = parse_int(req.matches[2].str());
    if (!n || *n < 0) return send(res, error_reply(404, "NotFound", "no such round"));
    send(res, get_round(req.matches[1], *n));
  });
}

void serve(Service& service, const std::string& host, int port, const std::atomic<bool>& stop) {
  httplib::Server server;
  // httplib's default also sets SO_REUSEPORT, which would let a second
  // process share a busy port instead of failing.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  service.mount(server);
  if (!server.bind_to_port(host, port))
    throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  log::info("listening on " + host + ":" + std::to_string(port));
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  while (!stop.load() && server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  server.stop();
  listener.join();
  service.wait_idle();
}

}  // namespace pidalign
