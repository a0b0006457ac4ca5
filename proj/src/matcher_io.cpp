#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "pidalign/error.hpp"
#include "pidalign/matcher.hpp"

namespace pidalign {

Json mapping_to_json(const Mapping& m, const AlignmentGraph& f) {
  std::vector<const MappedPair*> sorted;
  for (const auto& p : m.pairs) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->source < b->source; });
  Json pairs = Json::array();
  for (const auto* p : sorted) pairs.push_back({{"source", p->source}, {"target", p->target}, {"confidence", p->confidence}});
  return {{"pairs", std::move(pairs)}, {"unmatched_target", m.unmatched_targets(f)}};
}

Mapping mapping_from_json(const Json& j) {
  const Json& pairs = require_field(j, "pairs", "mapping");
  if (!pairs.is_array()) throw Error(ErrorCode::InvalidInput, "mapping: pairs must be an array");
  Mapping m;
  std::set<std::string> seen;
  for (const auto& p : pairs) {
    MappedPair mp{require_string(p, "source", "mapping pair"), require_string(p, "target", "mapping pair"), 1.0};
    if (auto it = p.find("confidence"); it != p.end()) {
      if (!it->is_number()) throw Error(ErrorCode::InvalidInput, "mapping pair: confidence must be a number");
      mp.confidence = it->get<double>();
    }
    if (!seen.insert(mp.source).second) throw Error(ErrorCode::InvalidInput, "mapping: source '" + mp.source + "' mapped twice");
    m.pairs.push_back(std::move(mp));
  }
  return m;
}

Json coupling_sidecar(const Coupling& c) {
  Json bases = Json::array();
  for (Basis b : c.bases) bases.push_back(to_string(b));
  return {{"rows", c.plan.rows()},
          {"cols", c.plan.cols()},
          {"dtype", "float64"},
          {"byte_order", "little"},
          {"layout", "row-major"},
          {"source_nodes", c.source_nodes},
          {"target_nodes", c.target_nodes},
          {"objective_trace", c.objective_trace},
          {"bases", std::move(bases)},
          {"source_weights", c.source_weights},
          {"target_weights", c.target_weights}};
}

namespace {

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

}  // namespace

void write_coupling(const Coupling& c, const std::filesystem::path& bin_path, const std::filesystem::path& json_path) {
  std::string bytes(c.plan.data().size() * sizeof(double), '\0');
  for (std::size_t i = 0; i < c.plan.data().size(); ++i) {
    const std::uint64_t le = to_little(std::bit_cast<std::uint64_t>(c.plan.data()[i]));
    std::memcpy(bytes.data() + i * sizeof(double), &le, sizeof(le));
  }
  write_text_file_atomic(bin_path, bytes);
  write_text_file_atomic(json_path, dump_canonical(coupling_sidecar(c)));
}

Coupling read_coupling(const std::filesystem::path& bin_path, const std::filesystem::path& json_path) {
  const Json side = read_json_file(json_path);
  Coupling c;
  try {
    const auto rows = side.at("rows").get<std::size_t>();
    const auto cols = side.at("cols").get<std::size_t>();
    c.source_nodes = side.at("source_nodes").get<std::vector<std::string>>();
    c.target_nodes = side.at("target_nodes").get<std::vector<std::string>>();
    c.objective_trace = side.at("objective_trace").get<std::vector<double>>();
    c.source_weights = side.value("source_weights", std::vector<double>{});
    c.target_weights = side.value("target_weights", std::vector<double>{});
    for (const auto& b : side.value("bases", Json::array())) c.bases.push_back(basis_from_string(b.get<std::string>()));
    const std::string bytes = read_text_file(bin_path);
    if (bytes.size() != rows * cols * sizeof(double))
      throw Error(ErrorCode::InvalidInput, "coupling: binary size does not match the sidecar dimensions");
    c.plan = Matrix(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) {
      std::uint64_t le;
      std::memcpy(&le, bytes.data() + i * sizeof(double), sizeof(le));
      c.plan.data()[i] = std::bit_cast<double>(to_little(le));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("coupling sidecar: ") + e.what());
  }
  c.row_marginal = row_sums(c.plan);
  c.col_marginal = col_sums(c.plan);
  return c;
}

}  // namespace pidalign
