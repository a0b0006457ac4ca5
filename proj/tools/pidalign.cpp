#include <csignal>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "pidalign/consistency.hpp"
#include "pidalign/error.hpp"
#include "pidalign/functional.hpp"
#include "pidalign/graph_io.hpp"
#include "pidalign/log.hpp"
#include "pidalign/matcher.hpp"
#include "pidalign/scene.hpp"
#include "pidalign/service.hpp"

using namespace pidalign;
namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

// The --config file may hold "scene" / "match" sections or flat keys.
Json config_section(const std::optional<fs::path>& path, const char* section) {
  if (!path) return Json::object();
  const Json j = read_json_file(*path);
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, path->string() + ": config must be a JSON object");
  if (auto it = j.find(section); it != j.end()) return *it;
  return j;
}

void emit(const std::optional<fs::path>& out, const std::string& text) {
  if (out)
    write_text_file_atomic(*out, text);
  else
    std::cout << text;
}

std::optional<Vocabulary> load_vocab(const std::optional<fs::path>& path) {
  if (!path) return std::nullopt;
  return Vocabulary::load(*path);
}

Json scene_config_to_json(const SceneConfig& c) {
  return {{"link_threshold", c.link_threshold},
          {"equipment_attach", c.equipment_attach == EquipmentAttach::ClosestOnly ? "closest" : "all"},
          {"max_equipment_points", c.max_equipment_points},
          {"seed", c.seed}};
}

EquipmentAttach attach_from_string(const std::string& s) {
  if (s == "closest") return EquipmentAttach::ClosestOnly;
  if (s == "all") return EquipmentAttach::AllWithinThreshold;
  throw Error(ErrorCode::InvalidInput, "equipment_attach must be 'closest' or 'all', got '" + s + "'");
}

SceneConfig scene_config_from_json(const Json& j) {
  SceneConfig c;
  try {
    if (j.contains("link_threshold")) c.link_threshold = j.at("link_threshold").get<double>();
    if (j.contains("equipment_attach")) c.equipment_attach = attach_from_string(j.at("equipment_attach").get<std::string>());
    if (j.contains("max_equipment_points")) c.max_equipment_points = j.at("max_equipment_points").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("scene config: ") + e.what());
  }
  return c;
}

struct SceneArgs {
  fs::path input;
  std::optional<fs::path> output, config, vocab;
  std::optional<double> link_threshold;
  std::optional<std::string> attach;
  std::optional<std::size_t> max_points;
  std::optional<std::uint64_t> seed;
  bool print_config = false;
};

int cmd_build_scene(const SceneArgs& a) {
  SceneConfig cfg = scene_config_from_json(config_section(a.config, "scene"));
  if (a.link_threshold) cfg.link_threshold = *a.link_threshold;
  if (a.attach) cfg.equipment_attach = attach_from_string(*a.attach);
  if (a.max_points) cfg.max_equipment_points = *a.max_points;
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  if (a.print_config) {
    std::cout << dump_canonical(scene_config_to_json(cfg));
    if (a.input.empty()) return 0;
  }
  if (a.input.empty()) throw Error(ErrorCode::InvalidInput, "build-scene: an input scene file is required");

  const auto vocab = load_vocab(a.vocab);
  const Scene scene = scene_from_json(read_json_file(a.input));
  const SceneGraphBuild b = build_scene_graph(scene.pipes, scene.equipment, cfg, vocab ? &*vocab : nullptr);
  for (const auto& w : b.warnings)
    std::cerr << "warning: node '" << w.node_id << "' has degree " << w.degree << " above its " << w.port_count
              << " ports\n";
  emit(a.output, serialize_graph(b.graph));
  return 0;
}

struct FunctionalArgs {
  fs::path input;
  std::optional<fs::path> output, vocab;
  std::vector<std::string> remove, keep_hidden;
};

int cmd_build_functional(const FunctionalArgs& a) {
  const auto vocab = load_vocab(a.vocab);
  RawPid raw = raw_pid_from_json(read_json_file(a.input));
  if (!a.remove.empty()) raw = remove_equipment(raw, a.remove);
  const FunctionalGraphBuild b = build_functional_graph(raw, a.keep_hidden, vocab ? &*vocab : nullptr);
  for (const auto& l : b.unknown_labels) std::cerr << "warning: label '" << l << "' is not in the vocabulary\n";
  emit(a.output, serialize_graph(b.graph));
  return 0;
}

struct MatchArgs {
  fs::path source, target;
  fs::path out_dir = ".";
  std::optional<fs::path> config, vocab;
  std::optional<std::vector<std::string>> bases;
  std::optional<double> epsilon, weight_lr, tol, attribute_weight;
  std::optional<int> outer_iters, sinkhorn_iters;
  std::optional<std::uint64_t> seed;
};

int cmd_match(const MatchArgs& a) {
  MatchConfig cfg = match_config_from_json(config_section(a.config, "match"));
  if (a.bases) {
    cfg.bases.clear();
    for (const auto& b : *a.bases) cfg.bases.push_back(basis_from_string(b));
  }
  if (a.epsilon) cfg.epsilon = *a.epsilon;
  if (a.weight_lr) cfg.weight_lr = *a.weight_lr;
  if (a.tol) cfg.tol = *a.tol;
  if (a.attribute_weight) cfg.attribute_weight = *a.attribute_weight;
  if (a.outer_iters) cfg.outer_iters = *a.outer_iters;
  if (a.sinkhorn_iters) cfg.sinkhorn_iters = *a.sinkhorn_iters;
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();

  const AlignmentGraph s = graph_from_json(read_json_file(a.source));
  const AlignmentGraph f = graph_from_json(read_json_file(a.target));
  const auto vocab = load_vocab(a.vocab);
  MatchOptions mo;
  mo.vocab = vocab ? &*vocab : nullptr;
  mo.progress = [](int it, double obj) { log::debug("iteration " + std::to_string(it) + " objective " + std::to_string(obj)); };
  const Coupling c = match_graphs(s, f, cfg, mo);
  const Mapping m = extract_mapping(c, s, f);
  const auto report = get_inconsistencies(m, s, f);

  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + a.out_dir.string() + ": " + ec.message());
  write_text_file_atomic(a.out_dir / "mapping.json", dump_canonical(mapping_to_json(m, f)));
  write_coupling(c, a.out_dir / "coupling.bin", a.out_dir / "coupling.json");
  write_text_file_atomic(a.out_dir / "report.json", dump_canonical(report_to_json(1, report)));
  std::cerr << report.size() << " inconsistencies\n";
  return 0;
}

struct CheckArgs {
  fs::path source, target, mapping;
  std::optional<fs::path> output;
};

int cmd_check(const CheckArgs& a) {
  const AlignmentGraph s = graph_from_json(read_json_file(a.source));
  const AlignmentGraph f = graph_from_json(read_json_file(a.target));
  const Mapping m = mapping_from_json(read_json_file(a.mapping));
  emit(a.output, dump_canonical(report_to_json(1, get_inconsistencies(m, s, f))));
  return 0;
}

struct ServeArgs {
  fs::path project_dir;
  int port = 8080;
  std::string host = "127.0.0.1";
};

int cmd_serve(const ServeArgs& a) {
  Service service(a.project_dir);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "pidalign " << version() << " serving " << a.project_dir.string() << " on " << a.host << ":" << a.port
            << "\n";
  serve(service, a.host, a.port, g_stop);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene / P&ID graph construction, matching and consistency checking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  SceneArgs sa;
  auto* scene = app.add_subcommand("build-scene", "Build the scene graph from reconstructed primitives");
  scene->add_option("scene", sa.input, "Scene JSON (pipes + equipment)");
  scene->add_option("-o,--output", sa.output, "Output graph JSON (default: stdout)");
  scene->add_option("--config", sa.config, "Base configuration JSON; flags override it");
  scene->add_option("--vocab", sa.vocab, "Vocabulary file for equipment labels");
  scene->add_option("--link-threshold", sa.link_threshold, "Linking distance in metres (default 0.04)");
  scene->add_option("--equipment-attach", sa.attach, "Equipment attachment: all | closest")
      ->check(CLI::IsMember({"all", "closest"}));
  scene->add_option("--max-equipment-points", sa.max_points, "Subsample equipment clouds above this size");
  scene->add_option("--seed", sa.seed, "Seed for equipment subsampling");
  scene->add_flag("--print-config", sa.print_config, "Print the effective configuration");

  FunctionalArgs fa;
  auto* func = app.add_subcommand("build-functional", "Build the functional graph from a digitized P&ID");
  func->add_option("pid", fa.input, "P&ID JSON")->required();
  func->add_option("-o,--output", fa.output, "Output graph JSON (default: stdout)");
  func->add_option("--vocab", fa.vocab, "Vocabulary file");
  func->add_option("--remove-equipment", fa.remove, "Equipment ids to delete before building");
  func->add_option("--keep-hidden", fa.keep_hidden, "Node ids exempt from simplification");

  MatchArgs ma;
  auto* match = app.add_subcommand("match", "Align S (scene) with F (functional)");
  match->add_option("source", ma.source, "Source graph S")->required();
  match->add_option("target", ma.target, "Target graph F")->required();
  match->add_option("-d,--out-dir", ma.out_dir, "Directory for mapping.json, coupling.bin/.json, report.json");
  match->add_option("--config", ma.config, "Base configuration JSON; flags override it");
  match->add_option("--vocab", ma.vocab, "Vocabulary file");
  match->add_option("--bases", ma.bases, "Structure bases: adjacency two-hop attribute-sim")->delimiter(',');
  match->add_option("--epsilon", ma.epsilon, "Proximal weight (default 0.05)");
  match->add_option("--outer-iters", ma.outer_iters, "Outer iterations (default 50)");
  match->add_option("--sinkhorn-iters", ma.sinkhorn_iters, "Sinkhorn iterations per step (default 100)");
  match->add_option("--weight-lr", ma.weight_lr, "Basis weight step size (default 0.1)");
  match->add_option("--tol", ma.tol, "Stopping tolerance on the plan (default 1e-7)");
  match->add_option("--attribute-weight", ma.attribute_weight, "Attribute cost weight (default 1)");
  match->add_option("--seed", ma.seed, "Seed for the initial plan");

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "Detect inconsistencies of a given mapping");
  check->add_option("source", ca.source, "Source graph S")->required();
  check->add_option("target", ca.target, "Target graph F")->required();
  check->add_option("mapping", ca.mapping, "Mapping JSON")->required();
  check->add_option("-o,--output", ca.output, "Output report JSON (default: stdout)");

  ServeArgs va;
  auto* srv = app.add_subcommand("serve", "Run the HTTP service");
  srv->add_option("--project-dir", va.project_dir, "Directory holding projects")->required();
  srv->add_option("--port", va.port, "TCP port (default 8080)");
  srv->add_option("--host", va.host, "Bind address (default 127.0.0.1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*scene) return cmd_build_scene(sa);
    if (*func) return cmd_build_functional(fa);
    if (*match) return cmd_match(ma);
    if (*check) return cmd_check(ca);
    if (*srv) return cmd_serve(va);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
