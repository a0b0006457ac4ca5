#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pidalign/graph.hpp"
#include "pidalign/json_io.hpp"
#include "pidalign/matrix.hpp"
#include "pidalign/vocabulary.hpp"

namespace pidalign {

enum class Basis { Adjacency, TwoHop, AttributeSim };

std::string_view to_string(Basis b);
Basis basis_from_string(std::string_view s);

struct MatchConfig {
  std::vector<Basis> bases{Basis::Adjacency, Basis::TwoHop, Basis::AttributeSim};
  double epsilon = 0.05;  // proximal (KL) weight of each outer step
  int outer_iters = 50;
  int sinkhorn_iters = 100;
  double weight_lr = 0.1;
  std::uint64_t seed = 0;
  double tol = 1e-7;  // stop once max |T_new - T| falls below
  double attribute_weight = 1.0;
  double init_jitter = 1e-4;
  double pin_penalty = 10.0;

  void validate() const;
};

Json match_config_to_json(const MatchConfig& cfg);
// Fields present in `j` override `base`.
MatchConfig match_config_from_json(const Json& j, MatchConfig base = {});

// Soft transport plan between S (rows) and F (columns).
struct Coupling {
  Matrix plan;
  std::vector<double> row_marginal;  // 1/|S|
  std::vector<double> col_marginal;  // 1/|F|
  std::vector<double> objective_trace;  // initial value, then one per outer iteration
  std::vector<double> source_weights;  // basis weights on the simplex
  std::vector<double> target_weights;
  std::vector<Basis> bases;
  std::vector<std::string> source_nodes;
  std::vector<std::string> target_nodes;
};

struct MappedPair {
  std::string source;
  std::string target;
  double confidence = 0.0;

  friend bool operator==(const MappedPair&, const MappedPair&) = default;
};

// Hard assignment S -> F, one entry per S node in S's node order.
struct Mapping {
  std::vector<MappedPair> pairs;

  std::map<std::string, std::string> assign() const;
  const std::string* target_of(std::string_view source) const;
  // F nodes that no S node maps to, sorted by id.
  std::vector<std::string> unmatched_targets(const AlignmentGraph& f) const;

  friend bool operator==(const Mapping&, const Mapping&) = default;
};

struct FeatureMatrices {
  Matrix source;
  Matrix target;
  std::vector<std::string> unknown_labels;
};

// One-hot rows over the vocabulary, in the graph's node order. With
// `oov_column`, unknown labels share one extra trailing column; otherwise
// their rows are zero. Unknown labels are reported through `unknown`.
Matrix node_features(const AlignmentGraph& g, const Vocabulary& vocab, bool oov_column = false,
                     std::vector<std::string>* unknown = nullptr);

// Features of both graphs in one space (OOV column added when needed).
FeatureMatrices joint_features(const AlignmentGraph& s, const AlignmentGraph& f, const Vocabulary& vocab);

// Per basis: adjacency A; (D^-1/2 A D^-1/2)^2; X X^T. Entries clipped to [0,1].
std::vector<Matrix> structure_bases(const AlignmentGraph& g, const Matrix& features, std::span<const Basis> bases);

Matrix combine_bases(std::span<const Matrix> bases, std::span<const double> weights);

// sum_{ijkl} (cs[i,k] - cf[j,l])^2 T[i,j] T[k,l] for symmetric cs, cf,
// evaluated through the marginals of T.
double gw_objective(const Matrix& cs, const Matrix& cf, const Matrix& plan);

struct BetaGradient {
  std::vector<double> source;
  std::vector<double> target;
};

// Gradient of gw_objective(sum_l bs_l Bs_l, sum_l bf_l Bf_l, T) in the weights.
BetaGradient gw_beta_gradient(std::span<const Matrix> source_bases, std::span<const Matrix> target_bases,
                              std::span<const double> source_weights, std::span<const double> target_weights,
                              const Matrix& plan);

// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::span<const double> v);

struct MatchOptions {
  const Vocabulary* vocab = nullptr;  // default: labels found in S and F
  std::vector<std::pair<std::string, std::string>> pins;  // (source id, target id)
  std::function<void(int iteration, double objective)> progress;
};

// Alternating minimisation of the attributed, structure-learning GW objective
// with S as source and F as target. Throws EmptyGraph, UnknownNode (pins),
// NonFinite.
Coupling match_graphs(const AlignmentGraph& s, const AlignmentGraph& f, const MatchConfig& cfg,
                      const MatchOptions& options = {});

// Row argmax (ties: smallest F id); confidence = max / row sum.
Mapping extract_mapping(const Coupling& c, const AlignmentGraph& s, const AlignmentGraph& f);

Json mapping_to_json(const Mapping& m, const AlignmentGraph& f);
Mapping mapping_from_json(const Json& j);

// Plan as little-endian float64, row-major, plus a JSON sidecar.
void write_coupling(const Coupling& c, const std::filesystem::path& bin_path, const std::filesystem::path& json_path);
Coupling read_coupling(const std::filesystem::path& bin_path, const std::filesystem::path& json_path);
Json coupling_sidecar(const Coupling& c);

}  // namespace pidalign
