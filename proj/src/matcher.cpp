#include "pidalign/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "pidalign/error.hpp"
#include "pidalign/log.hpp"
#include "pidalign/simd/kernels.hpp"

namespace pidalign {

std::string_view to_string(Basis b) {
  switch (b) {
    case Basis::Adjacency: return "adjacency";
    case Basis::TwoHop: return "two-hop";
    case Basis::AttributeSim: return "attribute-sim";
  }
  return "?";
}

Basis basis_from_string(std::string_view s) {
  const std::string k = normalize_label(s);
  if (k == "adjacency") return Basis::Adjacency;
  if (k == "two-hop" || k == "twohop") return Basis::TwoHop;
  if (k == "attribute-sim" || k == "attributesim" || k == "attribute") return Basis::AttributeSim;
  throw Error(ErrorCode::InvalidInput, "unknown basis '" + std::string(s) + "'");
}

void MatchConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (bases.empty()) throw Error(ErrorCode::InvalidInput, "at least one structure basis is required");
  if (std::set<Basis>(bases.begin(), bases.end()).size() != bases.size())
    throw Error(ErrorCode::InvalidInput, "structure bases must be distinct");
  if (!positive(epsilon)) throw Error(ErrorCode::InvalidInput, "epsilon must be > 0");
  if (outer_iters < 1 || sinkhorn_iters < 1) throw Error(ErrorCode::InvalidInput, "iteration counts must be >= 1");
  if (!positive(weight_lr)) throw Error(ErrorCode::InvalidInput, "weight_lr must be > 0");
  if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidInput, "tol must be >= 0");
  if (!(attribute_weight >= 0.0) || !std::isfinite(attribute_weight))
    throw Error(ErrorCode::InvalidInput, "attribute_weight must be >= 0");
  if (!(init_jitter >= 0.0 && init_jitter < 1.0)) throw Error(ErrorCode::InvalidInput, "init_jitter must be in [0,1)");
  if (!(pin_penalty >= 0.0) || !std::isfinite(pin_penalty))
    throw Error(ErrorCode::InvalidInput, "pin_penalty must be >= 0");
}

Json match_config_to_json(const MatchConfig& cfg) {
  Json bases = Json::array();
  for (Basis b : cfg.bases) bases.push_back(to_string(b));
  return {{"bases", std::move(bases)},
          {"epsilon", cfg.epsilon},
          {"outer_iters", cfg.outer_iters},
          {"sinkhorn_iters", cfg.sinkhorn_iters},
          {"weight_lr", cfg.weight_lr},
          {"seed", cfg.seed},
          {"tol", cfg.tol},
          {"attribute_weight", cfg.attribute_weight},
          {"init_jitter", cfg.init_jitter},
          {"pin_penalty", cfg.pin_penalty}};
}

MatchConfig match_config_from_json(const Json& j, MatchConfig base) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "match config: expected an object");
  try {
    if (j.contains("bases")) {
      base.bases.clear();
      for (const auto& b : j.at("bases")) base.bases.push_back(basis_from_string(b.get<std::string>()));
    }
    if (j.contains("epsilon")) base.epsilon = j.at("epsilon").get<double>();
    if (j.contains("outer_iters")) base.outer_iters = j.at("outer_iters").get<int>();
    if (j.contains("sinkhorn_iters")) base.sinkhorn_iters = j.at("sinkhorn_iters").get<int>();
    if (j.contains("weight_lr")) base.weight_lr = j.at("weight_lr").get<double>();
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("tol")) base.tol = j.at("tol").get<double>();
    if (j.contains("attribute_weight")) base.attribute_weight = j.at("attribute_weight").get<double>();
    if (j.contains("init_jitter")) base.init_jitter = j.at("init_jitter").get<double>();
    if (j.contains("pin_penalty")) base.pin_penalty = j.at("pin_penalty").get<double>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("match config: ") + e.what());
  }
  base.validate();
  return base;
}

std::map<std::string, std::string> Mapping::assign() const {
  std::map<std::string, std::string> out;
  for (const auto& p : pairs) out[p.source] = p.target;
  return out;
}

const std::string* Mapping::target_of(std::string_view source) const {
  for (const auto& p : pairs)
    if (p.source == source) return &p.target;
  return nullptr;
}

std::vector<std::string> Mapping::unmatched_targets(const AlignmentGraph& f) const {
  std::set<std::string_view> hit;
  for (const auto& p : pairs) hit.insert(p.target);
  std::vector<std::string> out;
  for (const auto& n : f.nodes())
    if (!hit.count(n.id)) out.push_back(n.id);
  std::sort(out.begin(), out.end());
  return out;
}

Matrix node_features(const AlignmentGraph& g, const Vocabulary& vocab, bool oov_column,
                     std::vector<std::string>* unknown) {
  const std::size_t dims = vocab.size() + (oov_column ? 1 : 0);
  Matrix x(g.size(), dims);
  std::set<std::string> missing;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto r = vocab.resolve(feature_key(g.nodes()[i].attr));
    if (auto col = vocab.index_of(r.label)) {
      x(i, *col) = 1.0;
    } else {
      if (oov_column) x(i, dims - 1) = 1.0;
      missing.insert(r.label);
    }
  }
  for (const auto& l : missing) log::warn("label '" + l + "' is not in the vocabulary; using the OOV feature");
  if (unknown != nullptr) unknown->insert(unknown->end(), missing.begin(), missing.end());
  return x;
}

FeatureMatrices joint_features(const AlignmentGraph& s, const AlignmentGraph& f, const Vocabulary& vocab) {
  auto has_unknown = [&](const AlignmentGraph& g) {
    return std::any_of(g.nodes().begin(), g.nodes().end(), [&](const Node& n) {
      return !vocab.index_of(vocab.resolve(feature_key(n.attr)).label).has_value();
    });
  };
  const bool oov = has_unknown(s) || has_unknown(f);
  FeatureMatrices out;
  out.source = node_features(s, vocab, oov, &out.unknown_labels);
  out.target = node_features(f, vocab, oov, &out.unknown_labels);
  std::sort(out.unknown_labels.begin(), out.unknown_labels.end());
  out.unknown_labels.erase(std::unique(out.unknown_labels.begin(), out.unknown_labels.end()), out.unknown_labels.end());
  return out;
}

namespace {

Matrix adjacency_matrix(const AlignmentGraph& g) {
  Matrix a(g.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j : g.adjacency()[i]) a(i, j) = 1.0;
  return a;
}

void clip_unit(Matrix& m) {
  for (double& v : m.data()) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace

std::vector<Matrix> structure_bases(const AlignmentGraph& g, const Matrix& features, std::span<const Basis> bases) {
  std::vector<Matrix> out;
  out.reserve(bases.size());
  for (Basis b : bases) {
    switch (b) {
      case Basis::Adjacency:
        out.push_back(adjacency_matrix(g));
        break;
      case Basis::TwoHop: {
        Matrix norm = adjacency_matrix(g);
        std::vector<double> scale(g.size(), 0.0);
        for (std::size_t i = 0; i < g.size(); ++i)
          if (g.degree_at(i) > 0) scale[i] = 1.0 / std::sqrt(static_cast<double>(g.degree_at(i)));
        for (std::size_t i = 0; i < g.size(); ++i)
          for (std::size_t j = 0; j < g.size(); ++j) norm(i, j) *= scale[i] * scale[j];
        Matrix two = multiply(norm, norm);
        clip_unit(two);
        out.push_back(std::move(two));
        break;
      }
      case Basis::AttributeSim: {
        Matrix sim = multiply(features, transpose(features));
        clip_unit(sim);
        out.push_back(std::move(sim));
        break;
      }
    }
  }
  return out;
}

Matrix combine_bases(std::span<const Matrix> bases, std::span<const double> weights) {
  assert(!bases.empty() && bases.size() == weights.size());
  Matrix c(bases.front().rows(), bases.front().cols());
  for (std::size_t l = 0; l < bases.size(); ++l) c = add_scaled(c, weights[l], bases[l]);
  return c;
}

namespace {

double quadratic_form(const Matrix& a, std::span<const double> x) {
  const std::vector<double> ax = multiply(a, x);
  return std::inner_product(ax.begin(), ax.end(), x.begin(), 0.0);
}

// Coefficients of the GW objective as a quadratic in the basis weights, for a
// fixed plan: f = bs'Qs bs + bf'Qf bf - 2 bs'X bf.
struct WeightQuadratic {
  std::vector<std::vector<double>> qs, qf, cross;

  WeightQuadratic(std::span<const Matrix> bs, std::span<const Matrix> bf, const Matrix& plan) {
    const std::vector<double> r = row_sums(plan);
    const std::vector<double> c = col_sums(plan);
    qs.assign(bs.size(), std::vector<double>(bs.size()));
    qf.assign(bf.size(), std::vector<double>(bf.size()));
    cross.assign(bs.size(), std::vector<double>(bf.size()));
    for (std::size_t l = 0; l < bs.size(); ++l)
      for (std::size_t m = l; m < bs.size(); ++m) qs[l][m] = qs[m][l] = quadratic_form(hadamard(bs[l], bs[m]), r);
    for (std::size_t l = 0; l < bf.size(); ++l)
      for (std::size_t m = l; m < bf.size(); ++m) qf[l][m] = qf[m][l] = quadratic_form(hadamard(bf[l], bf[m]), c);
    for (std::size_t m = 0; m < bf.size(); ++m) {
      const Matrix t_bf = multiply(plan, bf[m]);
      for (std::size_t l = 0; l < bs.size(); ++l) cross[l][m] = frobenius_dot(multiply(bs[l], t_bf), plan);
    }
  }

  double value(std::span<const double> ws, std::span<const double> wf) const {
    double v = 0.0;
    for (std::size_t l = 0; l < ws.size(); ++l)
      for (std::size_t m = 0; m < ws.size(); ++m) v += ws[l] * ws[m] * qs[l][m];
    for (std::size_t l = 0; l < wf.size(); ++l)
      for (std::size_t m = 0; m < wf.size(); ++m) v += wf[l] * wf[m] * qf[l][m];
    for (std::size_t l = 0; l < ws.size(); ++l)
      for (std::size_t m = 0; m < wf.size(); ++m) v -= 2.0 * ws[l] * wf[m] * cross[l][m];
    return v;
  }

  BetaGradient gradient(std::span<const double> ws, std::span<const double> wf) const {
    BetaGradient g{std::vector<double>(ws.size(), 0.0), std::vector<double>(wf.size(), 0.0)};
    for (std::size_t l = 0; l < ws.size(); ++l) {
      for (std::size_t m = 0; m < ws.size(); ++m) g.source[l] += 2.0 * qs[l][m] * ws[m];
      for (std::size_t m = 0; m < wf.size(); ++m) g.source[l] -= 2.0 * cross[l][m] * wf[m];
    }
    for (std::size_t m = 0; m < wf.size(); ++m) {
      for (std::size_t l = 0; l < wf.size(); ++l) g.target[m] += 2.0 * qf[m][l] * wf[l];
      for (std::size_t l = 0; l < ws.size(); ++l) g.target[m] -= 2.0 * cross[l][m] * ws[l];
    }
    return g;
  }
};

}  // namespace

double gw_objective(const Matrix& cs, const Matrix& cf, const Matrix& plan) {
  const std::vector<double> r = row_sums(plan);
  const std::vector<double> c = col_sums(plan);
  const Matrix p = multiply(multiply(cs, plan), cf);
  return quadratic_form(hadamard(cs, cs), r) + quadratic_form(hadamard(cf, cf), c) - 2.0 * frobenius_dot(p, plan);
}

BetaGradient gw_beta_gradient(std::span<const Matrix> source_bases, std::span<const Matrix> target_bases,
                              std::span<const double> source_weights, std::span<const double> target_weights,
                              const Matrix& plan) {
  return WeightQuadratic(source_bases, target_bases, plan).gradient(source_weights, target_weights);
}

std::vector<double> project_to_simplex(std::span<const double> v) {
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
  return out;
}

namespace {

void require_finite(const Matrix& m, std::string_view what, int iteration) {
  if (all_finite(m)) return;
  std::ostringstream msg;
  msg << what << " became non-finite at outer iteration " << iteration;
  throw Error(ErrorCode::NonFinite, msg.str());
}

void require_finite(double v, std::string_view what, int iteration) {
  if (std::isfinite(v)) return;
  std::ostringstream msg;
  msg << what << " = " << v << " at outer iteration " << iteration;
  throw Error(ErrorCode::NonFinite, msg.str());
}

// Scales rows, then columns, down to their targets and spreads the missing
// mass as a rank-one correction, which lands exactly on the transport polytope.
void round_to_polytope(Matrix& plan, std::span<const double> p, std::span<const double> q) {
  std::vector<double> r = row_sums(plan);
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    const double s = r[i] > p[i] ? p[i] / r[i] : 1.0;
    if (s != 1.0)
      for (double& v : plan.row(i)) v *= s;
  }
  std::vector<double> c = col_sums(plan);
  std::vector<double> col_scale(plan.cols());
  for (std::size_t j = 0; j < plan.cols(); ++j) col_scale[j] = c[j] > q[j] ? q[j] / c[j] : 1.0;
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    auto row = plan.row(i);
    for (std::size_t j = 0; j < plan.cols(); ++j) row[j] *= col_scale[j];
  }
  r = row_sums(plan);
  c = col_sums(plan);
  std::vector<double> err_r(plan.rows()), err_c(plan.cols());
  double mass = 0.0;
  for (std::size_t i = 0; i < plan.rows(); ++i) mass += (err_r[i] = std::max(p[i] - r[i], 0.0));
  for (std::size_t j = 0; j < plan.cols(); ++j) err_c[j] = std::max(q[j] - c[j], 0.0);
  if (mass <= 0.0) return;
  for (std::size_t i = 0; i < plan.rows(); ++i)
    if (err_r[i] > 0.0) simd::active_kernels().axpy(err_r[i] / mass, err_c.data(), plan.row(i).data(), plan.cols());
}

// argmin <G, T> + eps KL(T | prior) over couplings with marginals p, q,
// computed by log-domain Sinkhorn on the kernel log(prior) - G/eps.
Matrix proximal_sinkhorn(const Matrix& prior, const Matrix& gradient, double eps, std::span<const double> p,
                         std::span<const double> q, int iters) {
  const auto& k = simd::active_kernels();
  const std::size_t n = prior.rows(), m = prior.cols();
  Matrix log_kernel(n, m);
  {
    auto pd = prior.data();
    auto gd = gradient.data();
    auto ld = log_kernel.data();
    const double inv = 1.0 / eps;
    for (std::size_t t = 0; t < ld.size(); ++t) ld[t] = std::log(pd[t]) - gd[t] * inv;
  }
  const Matrix log_kernel_t = transpose(log_kernel);

  std::vector<double> log_p(n), log_q(m), f(n, 0.0), g(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) log_p[i] = std::log(p[i]);
  for (std::size_t j = 0; j < m; ++j) log_q[j] = std::log(q[j]);

  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) f[i] = log_p[i] - k.logsumexp_offset(log_kernel.row(i).data(), g.data(), m);
    for (std::size_t j = 0; j < m; ++j)
      g[j] = log_q[j] - k.logsumexp_offset(log_kernel_t.row(j).data(), f.data(), n);
    if ((it + 1) % 10 == 0) {
      // Columns are exact after the g update; stop once rows are too.
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double row_mass = std::exp(f[i] + k.logsumexp_offset(log_kernel.row(i).data(), g.data(), m));
        worst = std::max(worst, std::abs(row_mass - p[i]) / p[i]);
      }
      if (worst < 1e-12) break;
    }
  }

  Matrix plan(n, m);
  for (std::size_t i = 0; i < n; ++i) k.exp_offset(log_kernel.row(i).data(), f[i], g.data(), plan.row(i).data(), m);
  return plan;
}

// Objective pieces for the current basis weights.
class AttributedGw {
 public:
  AttributedGw(std::vector<Matrix> source_bases, std::vector<Matrix> target_bases, Matrix linear_cost)
      : bs_(std::move(source_bases)), bf_(std::move(target_bases)), linear_(std::move(linear_cost)) {
    ws_.assign(bs_.size(), 1.0 / static_cast<double>(bs_.size()));
    wf_.assign(bf_.size(), 1.0 / static_cast<double>(bf_.size()));
    recombine();
  }

  const std::vector<double>& source_weights() const { return ws_; }
  const std::vector<double>& target_weights() const { return wf_; }

  struct Evaluation {
    double value = 0.0;
    Matrix cross;  // cs * T * cf
    std::vector<double> rows, cols;
  };

  Evaluation evaluate(const Matrix& plan) const {
    Evaluation e;
    e.rows = row_sums(plan);
    e.cols = col_sums(plan);
    e.cross = multiply(multiply(cs_, plan), cf_);
    e.value = quadratic_form(cs_sq_, e.rows) + quadratic_form(cf_sq_, e.cols) - 2.0 * frobenius_dot(e.cross, plan) +
              frobenius_dot(linear_, plan);
    return e;
  }

  Matrix gradient(const Evaluation& e) const {
    const std::vector<double> a = multiply(cs_sq_, e.rows);
    const std::vector<double> b = multiply(cf_sq_, e.cols);
    Matrix g(linear_.rows(), linear_.cols());
    for (std::size_t i = 0; i < g.rows(); ++i) {
      auto out = g.row(i);
      auto cr = e.cross.row(i);
      auto lr = linear_.row(i);
      for (std::size_t j = 0; j < g.cols(); ++j) out[j] = 2.0 * a[i] + 2.0 * b[j] - 4.0 * cr[j] + lr[j];
    }
    return g;
  }

  // Projected gradient step on both weight vectors, halving the step until
  // the objective does not increase.
  void update_weights(const Matrix& plan, double step) {
    const WeightQuadratic quad(bs_, bf_, plan);
    const BetaGradient grad = quad.gradient(ws_, wf_);
    const double base = quad.value(ws_, wf_);
    for (int attempt = 0; attempt < 40; ++attempt, step *= 0.5) {
      std::vector<double> ns(ws_.size()), nf(wf_.size());
      for (std::size_t l = 0; l < ws_.size(); ++l) ns[l] = ws_[l] - step * grad.source[l];
      for (std::size_t l = 0; l < wf_.size(); ++l) nf[l] = wf_[l] - step * grad.target[l];
      ns = project_to_simplex(ns);
      nf = project_to_simplex(nf);
      if (quad.value(ns, nf) <= base) {
        ws_ = std::move(ns);
        wf_ = std::move(nf);
        recombine();
        return;
      }
    }
  }

 private:
  void recombine() {
    cs_ = combine_bases(bs_, ws_);
    cf_ = combine_bases(bf_, wf_);
    cs_sq_ = hadamard(cs_, cs_);
    cf_sq_ = hadamard(cf_, cf_);
  }

  std::vector<Matrix> bs_, bf_;
  Matrix linear_;
  std::vector<double> ws_, wf_;
  Matrix cs_, cf_, cs_sq_, cf_sq_;
};

Matrix initial_plan(std::span<const double> p, std::span<const double> q, const MatchConfig& cfg) {
  Matrix plan(p.size(), q.size());
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto row = plan.row(i);
    for (std::size_t j = 0; j < q.size(); ++j) row[j] = p[i] * q[j] * (1.0 + cfg.init_jitter * unit(rng));
  }
  round_to_polytope(plan, p, q);
  return plan;
}

}  // namespace

Coupling match_graphs(const AlignmentGraph& s, const AlignmentGraph& f, const MatchConfig& cfg,
                      const MatchOptions& options) {
  cfg.validate();
  if (s.empty()) throw Error(ErrorCode::EmptyGraph, "source graph has no nodes");
  if (f.empty()) throw Error(ErrorCode::EmptyGraph, "target graph has no nodes");

  Vocabulary derived;
  if (options.vocab == nullptr) derived = Vocabulary::from_graphs(s, f);
  const Vocabulary& vocab = options.vocab != nullptr ? *options.vocab : derived;
  const FeatureMatrices x = joint_features(s, f, vocab);

  const std::size_t n = s.size(), m = f.size();
  Matrix linear = multiply(x.source, transpose(x.target));
  for (double& v : linear.data()) v = cfg.attribute_weight * std::max(0.0, 1.0 - v);
  for (const auto& [src, dst] : options.pins) {
    const std::size_t i = s.index_of(src);
    const std::size_t j = f.index_of(dst);
    for (std::size_t t = 0; t < m; ++t)
      if (t != j) linear(i, t) += cfg.pin_penalty;
    for (std::size_t t = 0; t < n; ++t)
      if (t != i) linear(t, j) += cfg.pin_penalty;
  }

  AttributedGw problem(structure_bases(s, x.source, cfg.bases), structure_bases(f, x.target, cfg.bases),
                       std::move(linear));

  Coupling out;
  out.bases = cfg.bases;
  out.source_nodes = s.ids();
  out.target_nodes = f.ids();
  out.row_marginal.assign(n, 1.0 / static_cast<double>(n));
  out.col_marginal.assign(m, 1.0 / static_cast<double>(m));
  const auto& p = out.row_marginal;
  const auto& q = out.col_marginal;

  Matrix plan = initial_plan(p, q, cfg);
  auto current = problem.evaluate(plan);
  require_finite(current.value, "objective", 0);
  out.objective_trace.push_back(current.value);

  constexpr int kMaxEpsilonDoublings = 40;
  for (int it = 1; it <= cfg.outer_iters; ++it) {
    const Matrix grad = problem.gradient(current);
    require_finite(grad, "objective gradient", it);

    // Proximal step; a stronger proximal weight keeps the step closer to the
    // previous plan and is retried until the objective does not increase.
    double eps = cfg.epsilon;
    Matrix next;
    AttributedGw::Evaluation next_eval;
    bool accepted = false;
    for (int attempt = 0; attempt <= kMaxEpsilonDoublings; ++attempt, eps *= 2.0) {
      next = proximal_sinkhorn(plan, grad, eps, p, q, cfg.sinkhorn_iters);
      require_finite(next, "coupling", it);
      round_to_polytope(next, p, q);
      next_eval = problem.evaluate(next);
      require_finite(next_eval.value, "objective", it);
      if (next_eval.value <= current.value) {
        accepted = true;
        break;
      }
    }
    const double change = accepted ? max_abs_diff(next, plan) : 0.0;
    if (accepted) {
      plan = std::move(next);
      current = std::move(next_eval);
    }

    problem.update_weights(plan, cfg.weight_lr);
    current = problem.evaluate(plan);
    require_finite(current.value, "objective", it);
    out.objective_trace.push_back(current.value);
    if (options.progress) options.progress(it, current.value);
    if (change < cfg.tol) break;
  }

  out.plan = std::move(plan);
  out.source_weights = problem.source_weights();
  out.target_weights = problem.target_weights();
  return out;
}

Mapping extract_mapping(const Coupling& c, const AlignmentGraph& s, const AlignmentGraph& f) {
  if (c.plan.rows() != s.size() || c.plan.cols() != f.size())
    throw Error(ErrorCode::InvalidInput, "coupling shape does not match the graphs");
  Mapping m;
  m.pairs.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto row = c.plan.row(i);
    std::size_t best = 0;
    double total = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      total += row[j];
      if (row[j] > row[best] || (row[j] == row[best] && f.nodes()[j].id < f.nodes()[best].id)) best = j;
    }
    const double confidence = total > 0.0 ? row[best] / total : 0.0;
    m.pairs.push_back({s.nodes()[i].id, f.nodes()[best].id, confidence});
  }
  return m;
}

}  // namespace pidalign
