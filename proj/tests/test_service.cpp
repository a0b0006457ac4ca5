#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "pidalign/error.hpp"
#include "pidalign/functional.hpp"
#include "pidalign/graph_io.hpp"
#include "pidalign/service.hpp"
#include "support.hpp"

using namespace pidalign;
using namespace testsupport;

namespace {

Json hidden_filter_body() {
  const auto dir = fixture_dir() / "hidden_filter";
  const std::string vocab_text = read_text_file(dir / "vocab.txt");
  const Vocabulary vocab = Vocabulary::parse(vocab_text);
  const Scene scene = scene_from_json(read_json_file(dir / "scene.json"));
  const auto s = build_scene_graph(scene.pipes, scene.equipment, SceneConfig{}, &vocab).graph;
  const auto f = build_functional_graph(raw_pid_from_json(read_json_file(dir / "pid.json")), {"FL-101"}, &vocab).graph;
  return {{"source", graph_to_json(s)}, {"target", graph_to_json(f)}, {"vocab", vocab_text}};
}

Json job_when_done(Service& svc, const std::string& id, const std::string& job) {
  for (int i = 0; i < 6000; ++i) {
    const Reply r = svc.get_job(id, job);
    REQUIRE(r.status == 200);
    if (r.body.at("state") != "running") return r.body;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  FAIL("job did not finish");
  return {};
}

std::string state_of(Service& svc, const std::string& id) { return svc.get_project(id).body.at("state"); }

}  // namespace

TEST_CASE("service: hidden-filter project from upload to convergence") {
  const auto root = temp_dir("svc");
  Service svc(root);
  CHECK(svc.health().body.at("status") == "ok");
  CHECK(svc.health().body.at("version") == std::string(version()));

  const Json body = hidden_filter_body();
  const Reply created = svc.create_project(body);
  REQUIRE(created.status == 201);
  const std::string id = created.body.at("id");
  CHECK(id == "p0001");
  CHECK(created.body.at("state") == "idle");
  CHECK(created.body.at("round") == 0);

  const Reply r0 = svc.get_round(id, 0);
  REQUIRE(r0.status == 200);
  CHECK(r0.body.at("mapping").is_null());
  CHECK(r0.body.at("report").is_null());
  const std::string r0_bytes = read_text_file(root / id / "rounds" / "0" / "S.json");

  // no round to resolve yet
  CHECK(svc.submit_resolution(id, {{"round", 0}, {"accept", Json::array()}}).status == 409);

  const Reply m1 = svc.trigger_match(id);
  REQUIRE(m1.status == 202);
  const Json j1 = job_when_done(svc, id, m1.body.at("job"));
  CHECK(j1.at("state") == "done");
  CHECK(j1.at("round") == 1);
  CHECK(state_of(svc, id) == "awaiting_resolution");

  const Json project = svc.get_project(id).body;
  REQUIRE(project.at("report").at("items").size() == 1);
  CHECK(project.at("report").at("items")[0].at("id") == "unmatched_target/FL-101");
  CHECK(project.at("report").at("items")[0].at("status") == "open");

  // stale token, unknown acceptance and bad edits leave everything unchanged
  CHECK(svc.submit_resolution(id, {{"round", 0}, {"accept", {"unmatched_target/FL-101"}}}).status == 409);
  CHECK(svc.submit_resolution(id, {{"accept", {"unmatched_target/FL-101"}}}).status == 400);
  CHECK(svc.submit_resolution(id, {{"round", 1}, {"accept", {"collision/none"}}}).status == 400);
  const Json bad_edit = {{"round", 1}, {"source_edits", {{{"op", "remove_node"}, {"id", "ghost"}}}}};
  CHECK(svc.submit_resolution(id, bad_edit).status == 400);
  CHECK(state_of(svc, id) == "awaiting_resolution");
  CHECK(svc.get_project(id).body.at("history").empty());

  const Reply ok = svc.submit_resolution(id, {{"round", 1}, {"accept", {"unmatched_target/FL-101"}}});
  REQUIRE(ok.status == 200);
  CHECK(ok.body.at("state") == "idle");
  CHECK(svc.submit_resolution(id, {{"round", 1}, {"accept", {"unmatched_target/FL-101"}}}).status == 409);
  CHECK(svc.get_project(id).body.at("accepted") == Json::array({"unmatched_target/FL-101"}));

  const Reply m2 = svc.trigger_match(id);
  REQUIRE(m2.status == 202);
  CHECK(job_when_done(svc, id, m2.body.at("job")).at("round") == 2);
  CHECK(state_of(svc, id) == "converged");
  CHECK(svc.trigger_match(id).status == 409);

  const Reply r1 = svc.get_round(id, 1);
  REQUIRE(r1.status == 200);
  CHECK(r1.body.at("report").at("items").size() == 1);
  CHECK(svc.get_round(id, 7).status == 404);
  CHECK(read_text_file(root / id / "rounds" / "0" / "S.json") == r0_bytes);

  // uploading the same graphs again creates a separate project
  const Reply again = svc.create_project(body);
  REQUIRE(again.status == 201);
  CHECK(again.body.at("id") == "p0002");

  svc.wait_idle();
  {
    Service restarted(root);
    const Json p = restarted.get_project(id).body;
    CHECK(p.at("state") == "converged");
    CHECK(p.at("round") == 2);
    CHECK(p.at("history").size() == 1);
    CHECK(restarted.get_project("p0002").body.at("state") == "idle");
    const Reply created3 = restarted.create_project(body);
    CHECK(created3.body.at("id") == "p0003");
  }
  std::filesystem::remove_all(root);
}

TEST_CASE("service: validation, missing resources and concurrent match requests") {
  const auto root = temp_dir("svc2");
  Service svc(root);
  CHECK(svc.get_project("p9999").status == 404);
  CHECK(svc.trigger_match("p9999").status == 404);
  CHECK(svc.get_round("p9999", 0).status == 404);

  Json body = hidden_filter_body();
  Json empty_target = body;
  empty_target["target"]["nodes"] = Json::array();
  empty_target["target"]["edges"] = Json::array();
  CHECK(svc.create_project(empty_target).status == 400);
  CHECK(svc.create_project(Json::array()).status == 400);
  Json bad_cfg = body;
  bad_cfg["config"] = {{"epsilon", -1.0}};
  CHECK(svc.create_project(bad_cfg).status == 400);
  CHECK_FALSE(std::filesystem::exists(root / "p0001"));

  // large enough that the first job is still running when the second request arrives
  std::mt19937_64 rng(5);
  const auto p = permuted_pair(rng, 200, 0.05, 4);
  const Reply c = svc.create_project({{"source", graph_to_json(p.source)}, {"target", graph_to_json(p.target)}});
  REQUIRE(c.status == 201);
  const std::string id = c.body.at("id");
  CHECK(svc.get_job(id, "j1").status == 404);
  const Reply first = svc.trigger_match(id);
  REQUIRE(first.status == 202);
  CHECK(svc.trigger_match(id).status == 409);
  CHECK(state_of(svc, id) == "matching");
  const Json done = job_when_done(svc, id, first.body.at("job"));
  CHECK(done.at("state") == "done");
  CHECK(done.at("iteration").get<int>() >= 1);
  CHECK(state_of(svc, id) != "matching");
  std::filesystem::remove_all(root);

  CHECK_THROWS_AS(Service("/proc/definitely/not/writable"), pidalign::Error);
}

TEST_CASE("service over HTTP") {
  const auto root = temp_dir("http");
  Service svc(root);
  httplib::Server server;
  svc.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(parse_json(health->body).at("version") == std::string(version()));

  auto created = client.Post("/projects", hidden_filter_body().dump(), "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const std::string id = parse_json(created->body).at("id");

  auto malformed = client.Post("/projects", "{\"source\": [", "application/json");
  REQUIRE(malformed);
  CHECK(malformed->status == 400);

  auto match = client.Post("/projects/" + id + "/match", "", "application/json");
  REQUIRE(match);
  CHECK(match->status == 202);
  const std::string job = parse_json(match->body).at("job");
  for (int i = 0; i < 6000; ++i) {
    auto j = client.Get("/projects/" + id + "/jobs/" + job);
    REQUIRE(j);
    if (parse_json(j->body).at("state") != "running") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  auto proj = client.Get("/projects/" + id);
  REQUIRE(proj);
  CHECK(parse_json(proj->body).at("state") == "awaiting_resolution");

  const std::string resolution = R"({"round": 1, "accept": ["unmatched_target/FL-101"]})";
  auto res = client.Post("/projects/" + id + "/resolutions", resolution, "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  auto stale = client.Post("/projects/" + id + "/resolutions", resolution, "application/json");
  REQUIRE(stale);
  CHECK(stale->status == 409);

  auto round1a = client.Get("/projects/" + id + "/rounds/1");
  auto round1b = client.Get("/projects/" + id + "/rounds/1");
  REQUIRE(round1a);
  REQUIRE(round1b);
  CHECK(round1a->status == 200);
  CHECK(round1a->body == round1b->body);
  auto missing = client.Get("/projects/" + id + "/rounds/x");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  auto unknown = client.Get("/projects/nope");
  REQUIRE(unknown);
  CHECK(unknown->status == 404);

  server.stop();
  listener.join();
  svc.wait_idle();
  std::filesystem::remove_all(root);
}
