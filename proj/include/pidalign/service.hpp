#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pidalign/consistency.hpp"
#include "pidalign/json_io.hpp"
#include "pidalign/matcher.hpp"
#include "pidalign/vocabulary.hpp"

namespace httplib {
class Server;
}

namespace pidalign {

std::string_view version();

enum class ProjectState { Idle, Matching, AwaitingResolution, Converged };
std::string_view to_string(ProjectState s);

struct JobStatus {
  std::string id;
  std::string state = "running";  // running | done | failed
  int iteration = 0;
  int total = 0;
  double objective = 0.0;
  int round = 0;  // round produced on success
  std::string error;
};

// HTTP response in transport-neutral form; the httplib binding is thin.
struct Reply {
  int status = 200;
  Json body;
};

// Projects persisted under <root>/<id>/:
//   manifest.json        id, match config, vocabulary
//   history.json         applied resolutions, in order
//   rounds/<n>/...       checkpoints (round 0 = uploaded graphs)
class Service {
 public:
  explicit Service(std::filesystem::path root);  // throws InvalidInput for unusable dirs
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Reply create_project(const Json& body);
  Reply get_project(const std::string& id);
  Reply trigger_match(const std::string& id);
  Reply get_job(const std::string& id, const std::string& job);
  Reply submit_resolution(const std::string& id, const Json& body);
  Reply get_round(const std::string& id, int round);
  Reply health() const;

  // Blocks until no job is running (tests, shutdown).
  void wait_idle();

  void mount(httplib::Server& server);

 private:
  struct Project {
    std::mutex mutex;
    std::filesystem::path dir;
    MatchConfig config;
    std::optional<Vocabulary> vocab;
    std::string vocab_text;
    std::unique_ptr<AlignmentSession> session;
    ProjectState state = ProjectState::Idle;
    std::map<std::string, std::shared_ptr<JobStatus>> jobs;
    std::string last_job;
  };

  std::shared_ptr<Project> find(const std::string& id);
  void load_existing();
  std::shared_ptr<Project> load_project(const std::filesystem::path& dir);
  void run_job(std::shared_ptr<Project> p, std::shared_ptr<JobStatus> job);
  void persist_history(const Project& p);

  std::filesystem::path root_;
  std::mutex mutex_;  // guards projects_, threads_, counters
  std::map<std::string, std::shared_ptr<Project>> projects_;
  std::vector<std::thread> threads_;
  std::atomic<int> running_{0};
  int next_job_ = 1;
};

// Serves until `stop` becomes true (polled) or the listener fails. Throws
// Error{Io} when the port cannot be bound.
void serve(Service& service, const std::string& host, int port, const std::atomic<bool>& stop);

}  // namespace pidalign
