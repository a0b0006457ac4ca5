#include <sys/wait.h>

#include <cstdlib>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "pidalign/json_io.hpp"
#include "support.hpp"

using namespace pidalign;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::string& args) {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path();
  const fs::path out = dir / ("pidalign-cli-" + std::to_string(::getpid()) + "-" + std::to_string(++counter) + ".out");
  const fs::path err = fs::path(out).replace_extension(".err");
  const std::string cmd = std::string("'") + PIDALIGN_CLI + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text_file(out);
  r.err = read_text_file(err);
  fs::remove(out);
  fs::remove(err);
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const fs::path fixture = fixture_dir() / "hidden_filter";

}  // namespace

TEST_CASE("cli: help and usage errors") {
  CHECK(run("--help").code == 0);
  for (const char* sub : {"build-scene", "build-functional", "match", "check", "serve"}) {
    const Run r = run(std::string(sub) + " --help");
    CAPTURE(sub);
    CHECK(r.code == 0);
    CHECK(r.out.find("Usage") != std::string::npos);
  }
  CHECK(run("").code == 1);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("match only-one.json").code == 1);
  CHECK(run("build-scene --link-threshold abc").code == 1);
}

TEST_CASE("cli: build-scene prints its configuration and reports malformed input") {
  const Run cfg = run("build-scene --print-config");
  REQUIRE(cfg.code == 0);
  const Json j = parse_json(cfg.out);
  CHECK(j.at("link_threshold") == 0.04);
  CHECK(j.at("equipment_attach") == "all");

  const Run over = run("build-scene --print-config --link-threshold 0.1 --equipment-attach closest");
  CHECK(parse_json(over.out).at("link_threshold") == 0.1);
  CHECK(parse_json(over.out).at("equipment_attach") == "closest");
  CHECK(run("build-scene --print-config --link-threshold -1").code == 1);

  const auto dir = temp_dir("cli-bad");
  write_text_file_atomic(dir / "bad.json", "{\n  \"pipes\": [\n    {\"id\": 1,,}\n  ]\n}\n");
  const Run bad = run("build-scene " + q(dir / "bad.json"));
  CHECK(bad.code == 1);
  CHECK(bad.err.find("bad.json:3:") != std::string::npos);
  CHECK(run("build-scene " + q(dir / "missing.json")).code == 1);
  fs::remove_all(dir);
}

TEST_CASE("cli: hidden-filter pipeline from files to report") {
  const auto dir = temp_dir("cli-hidden-filter");
  const std::string vocab = " --vocab " + q(fixture / "vocab.txt");
  REQUIRE(run("build-scene " + q(fixture / "scene.json") + vocab + " -o " + q(dir / "S.json")).code == 0);
  REQUIRE(run("build-functional " + q(fixture / "pid.json") + vocab + " --keep-hidden FL-101 -o " + q(dir / "F.json")).code == 0);
  const Json f = read_json_file(dir / "F.json");
  bool has_filter = false;
  for (const auto& n : f.at("nodes")) has_filter = has_filter || n.at("id") == "FL-101";
  CHECK(has_filter);

  const Run removed = run("build-functional " + q(fixture / "pid.json") + vocab + " --remove-equipment FL-101");
  REQUIRE(removed.code == 0);
  CHECK(removed.out.find("FL-101") == std::string::npos);
  CHECK(run("build-functional " + q(fixture / "pid.json") + " --remove-equipment NOPE").code == 1);
  CHECK(run("build-functional " + q(fixture / "pid.json") + " --keep-hidden NOPE").code == 1);

  const std::string match = "match " + q(dir / "S.json") + " " + q(dir / "F.json") + vocab + " -d ";
  REQUIRE(run(match + q(dir / "a")).code == 0);
  REQUIRE(run(match + q(dir / "b")).code == 0);
  for (const char* name : {"mapping.json", "coupling.bin", "coupling.json", "report.json"}) {
    CAPTURE(name);
    CHECK(read_text_file(dir / "a" / name) == read_text_file(dir / "b" / name));
  }
  const Json report = read_json_file(dir / "a" / "report.json");
  REQUIRE(report.at("items").size() == 1);
  CHECK(report.at("items")[0].at("id") == "unmatched_target/FL-101");

  const Run check = run("check " + q(dir / "S.json") + " " + q(dir / "F.json") + " " + q(dir / "a" / "mapping.json"));
  REQUIRE(check.code == 0);
  CHECK(parse_json(check.out).at("items").size() == 1);

  CHECK(run("match " + q(dir / "S.json") + " " + q(dir / "F.json") + " --epsilon 0 -d " + q(dir / "c")).code == 1);
  CHECK(run("match " + q(dir / "S.json") + " " + q(dir / "F.json") + " --bases adjacency,nonsense -d " + q(dir / "c")).code == 1);
  fs::remove_all(dir);
}

TEST_CASE("cli: serve rejects unusable directories and busy ports") {
  CHECK(run("serve --project-dir /proc/not/a/dir --port 0").code == 1);

  httplib::Server blocker;
  blocker.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  const int port = blocker.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  const auto dir = temp_dir("cli-serve");
  const Run busy = run("serve --project-dir " + q(dir) + " --port " + std::to_string(port));
  CHECK(busy.code == 2);
  fs::remove_all(dir);
}
