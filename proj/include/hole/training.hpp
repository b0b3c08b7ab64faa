#pragma once

// Losses, negative sampling, sparse AdaGrad and the epoch loop.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hole/error.hpp"
#include "hole/eval.hpp"
#include "hole/kgdata.hpp"
#include "hole/models.hpp"
#include "hole/rng.hpp"

namespace hole {

enum class LossKind { Logistic, MarginRanking };

inline std::string_view to_string(LossKind l) {
  return l == LossKind::Logistic ? "logistic" : "ranking";
}

struct TrainConfig {
  LossKind loss = LossKind::MarginRanking;
  double margin = 0.2;
  double lambda = 0.0;
  double learning_rate = 0.1;
  double adagrad_eps = 1e-8;
  std::size_t negatives_per_positive = 1;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 500;
  std::size_t patience = 5;     // evaluations without improvement; 0 disables
  std::size_t eval_every = 10;  // epochs between validations
  std::optional<double> entity_norm = 1.0;
  std::optional<double> relation_norm;
  std::uint64_t seed = 0;
  bool hinge_on_raw_scores = false;

  void validate() const {
    auto fail = [](const std::string& key, const std::string& why) {
      throw Error(ErrorCode::Config, key + ": " + why);
    };
    if (loss == LossKind::MarginRanking && !(margin > 0)) fail("margin", "must be > 0");
    if (!(lambda >= 0)) fail("lambda", "must be >= 0");
    if (!(learning_rate > 0)) fail("learning_rate", "must be > 0");
    if (!(adagrad_eps > 0)) fail("adagrad_eps", "must be > 0");
    if (negatives_per_positive < 1) fail("negatives", "must be >= 1");
    if (batch_size < 1) fail("batch_size", "must be >= 1");
    if (eval_every < 1) fail("eval_every", "must be >= 1");
    if (entity_norm && !(*entity_norm > 0)) fail("entity_norm", "must be > 0");
    if (relation_norm && !(*relation_norm > 0)) fail("relation_norm", "must be > 0");
  }
};

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// sum log(1 + exp(-y * score)) + lambda * ||theta||^2, labels in {+1, -1}.
inline double logistic_loss(std::span<const std::pair<double, int>> scored, double params_norm_sq,
                            double lambda) {
  double loss = 0.0;
  for (const auto& [eta, y] : scored) loss += softplus(-static_cast<double>(y) * eta);
  return loss + lambda * params_norm_sq;
}

// sum_i sum_j max(0, margin + sigmoid(neg_j) - sigmoid(pos_i)).
inline double ranking_loss(std::span<const double> pos, std::span<const double> neg,
                           double margin) {
  double loss = 0.0;
  for (double p : pos) {
    const double sp = sigmoid(p);
    for (double n : neg) loss += std::max(0.0, margin + sigmoid(n) - sp);
  }
  return loss;
}

// Corrupts the subject or the object (probability 1/2 each) with a
// uniformly drawn entity, rejecting candidates known in the training split.
inline std::vector<Triple> sample_negatives(const Triple& positive, const TripleStore& store,
                                            std::size_t n, Rng& rng) {
  const std::size_t n_entities = store.entities.size();
  if (n_entities < 2) throw Error(ErrorCode::IndexOutOfRange, "need at least two entities");
  std::vector<Triple> out;
  out.reserve(n);
  constexpr int kMaxConsecutiveCollisions = 100;
  while (out.size() < n) {
    int collisions = 0;
    while (true) {
      Triple t = positive;
      const bool corrupt_subject = uniform_index(rng, 2) == 0;
      const auto e = static_cast<EntityId>(uniform_index(rng, n_entities));
      (corrupt_subject ? t.subject : t.object) = e;
      if (t != positive && !store.train_filter.contains(t)) {
        out.push_back(t);
        break;
      }
      if (++collisions >= kMaxConsecutiveCollisions) {
        throw Error(ErrorCode::ExhaustedRetries,
                    "100 consecutive corruptions collided with known triples");
      }
    }
  }
  return out;
}

// Sparse per-row gradient accumulator; rows are kept in first-touch order.
class RowGradients {
 public:
  explicit RowGradients(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::span<const std::uint32_t> rows() const noexcept { return rows_; }
  bool empty() const noexcept { return rows_.empty(); }

  std::span<double> row(std::uint32_t id) {
    auto [it, inserted] = slot_.try_emplace(id, rows_.size());
    if (inserted) {
      rows_.push_back(id);
      values_.resize(values_.size() + dim_, 0.0);
    }
    return {values_.data() + it->second * dim_, dim_};
  }

  std::span<const double> at(std::size_t k) const noexcept {
    return {values_.data() + k * dim_, dim_};
  }

  void add(std::uint32_t id, std::span<const double> g, double scale) {
    auto r = row(id);
    for (std::size_t i = 0; i < dim_; ++i) r[i] += scale * g[i];
  }

  void clear() {
    rows_.clear();
    values_.clear();
    slot_.clear();
  }

 private:
  std::size_t dim_;
  std::vector<std::uint32_t> rows_;
  std::vector<double> values_;
  std::unordered_map<std::uint32_t, std::size_t> slot_;
};

struct SparseGradient {
  RowGradients entities;
  RowGradients relations;
  Matrix projection;  // dense, ER-MLP only
  DenseVector output;
  bool shared_touched = false;

  SparseGradient() = default;
  SparseGradient(const ModelSpec& spec)
      : entities(spec.entity_dim), relations(spec.relation_dim) {
    if (spec.family == Family::ErMlp) {
      projection = Matrix(spec.hidden, spec.ermlp_input());
      output.assign(spec.hidden, 0.0);
    }
  }

  void clear() {
    entities.clear();
    relations.clear();
    if (shared_touched) {
      projection.fill(0.0);
      std::fill(output.begin(), output.end(), 0.0);
    }
    shared_touched = false;
  }

  // Adds scale * d(score)/d(theta) for one triple.
  void accumulate(const Triple& t, const ScoreGradient& g, double scale) {
    entities.add(t.subject, g.wrt_subject, scale);
    entities.add(t.object, g.wrt_object, scale);
    relations.add(t.predicate, g.wrt_relation, scale);
    if (!output.empty()) {
      auto dst = projection.values();
      auto src = g.wrt_projection.values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
      for (std::size_t i = 0; i < output.size(); ++i) output[i] += scale * g.wrt_output[i];
      shared_touched = true;
    }
  }
};

// Accumulated squared gradients, same layout as the parameters.
struct AdaGradState {
  EmbeddingSet accumulators;

  AdaGradState() = default;
  explicit AdaGradState(const EmbeddingSet& like) {
    accumulators.entities = Matrix(like.entities.rows(), like.entities.cols());
    accumulators.relations = Matrix(like.relations.rows(), like.relations.cols());
    accumulators.projection = Matrix(like.projection.rows(), like.projection.cols());
    accumulators.output.assign(like.output.size(), 0.0);
  }
};

namespace detail {

inline double adagrad_delta(double g, double acc, double lr, double eps) {
  return lr * g / (std::sqrt(acc + g * g) + eps);
}

}  // namespace detail

// For each touched entry: acc += g^2; theta -= lr * g / (sqrt(acc) + eps).
// Entries with g == 0 are left alone. The whole step is validated before
// anything is written, so a non-finite update leaves params and state intact.
inline void adagrad_step(EmbeddingSet& params, const SparseGradient& grads, AdaGradState& state,
                         double lr, double eps) {
  auto check = [&](std::span<const double> theta, std::span<const double> acc,
                   std::span<const double> g) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] == 0.0) continue;
      const double next = theta[i] - detail::adagrad_delta(g[i], acc[i], lr, eps);
      if (!std::isfinite(g[i]) || !std::isfinite(next)) {
        throw Error(ErrorCode::NonFinite, "AdaGrad update produced a non-finite value");
      }
    }
  };
  auto apply = [&](std::span<double> theta, std::span<double> acc, std::span<const double> g) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] == 0.0) continue;
      theta[i] -= detail::adagrad_delta(g[i], acc[i], lr, eps);
      acc[i] += g[i] * g[i];
    }
  };
  auto& acc = state.accumulators;
  const auto ent = grads.entities.rows();
  const auto rel = grads.relations.rows();
  for (std::size_t k = 0; k < ent.size(); ++k) {
    check(params.entities.row(ent[k]), acc.entities.row(ent[k]), grads.entities.at(k));
  }
  for (std::size_t k = 0; k < rel.size(); ++k) {
    check(params.relations.row(rel[k]), acc.relations.row(rel[k]), grads.relations.at(k));
  }
  if (grads.shared_touched) {
    check(params.projection.values(), acc.projection.values(), grads.projection.values());
    check(params.output, acc.output, grads.output);
  }
  for (std::size_t k = 0; k < ent.size(); ++k) {
    apply(params.entities.row(ent[k]), acc.entities.row(ent[k]), grads.entities.at(k));
  }
  for (std::size_t k = 0; k < rel.size(); ++k) {
    apply(params.relations.row(rel[k]), acc.relations.row(rel[k]), grads.relations.at(k));
  }
  if (grads.shared_touched) {
    apply(params.projection.values(), acc.projection.values(), grads.projection.values());
    apply(params.output, acc.output, grads.output);
  }
}

inline void project_row(std::span<double> row, double bound) {
  const double n = std::sqrt(squared_norm(row));
  if (n > bound) {
    const double s = bound / n;
    for (double& v : row) v *= s;
  }
}

// Rescales every entity (relation) row whose L2 norm exceeds the bound onto
// the ball surface; rows inside the ball are untouched.
inline void project_norms(EmbeddingSet& params, std::optional<double> entity_bound,
                          std::optional<double> relation_bound) {
  if (entity_bound) {
    for (std::size_t i = 0; i < params.entities.rows(); ++i) {
      project_row(params.entities.row(i), *entity_bound);
    }
  }
  if (relation_bound) {
    for (std::size_t i = 0; i < params.relations.rows(); ++i) {
      project_row(params.relations.row(i), *relation_bound);
    }
  }
}

// Loss of one positive against its negatives; adds d(loss)/d(theta) into
// grads. Ranking: sum_j max(0, margin + sigmoid(neg_j) - sigmoid(pos)), a
// pair contributes gradient only while it violates the margin. Logistic:
// softplus(-pos) + sum_j softplus(neg_j).
inline double accumulate_example(Scorer& scorer, const TrainConfig& config, const Triple& pos,
                                 std::span<const Triple> negatives, SparseGradient& grads,
                                 ScoreGradient& g_pos, ScoreGradient& g_neg) {
  double loss = 0.0;
  const double eta_p = scorer.score_gradients(pos, g_pos);
  if (config.loss == LossKind::MarginRanking) {
    const double sp = sigmoid(eta_p);
    for (const auto& neg : negatives) {
      const double eta_n = scorer.score_gradients(neg, g_neg);
      double violation, d_pos, d_neg;
      if (config.hinge_on_raw_scores) {
        violation = config.margin + eta_n - eta_p;
        d_pos = -1.0;
        d_neg = 1.0;
      } else {
        const double sn = sigmoid(eta_n);
        violation = config.margin + sn - sp;
        d_pos = -sp * (1.0 - sp);
        d_neg = sn * (1.0 - sn);
      }
      if (violation <= 0) continue;
      loss += violation;
      grads.accumulate(pos, g_pos, d_pos);
      grads.accumulate(neg, g_neg, d_neg);
    }
  } else {
    // d/d(eta) log(1 + exp(-y eta)) = -y * sigmoid(-y eta)
    loss += softplus(-eta_p);
    grads.accumulate(pos, g_pos, -sigmoid(-eta_p));
    for (const auto& neg : negatives) {
      const double eta_n = scorer.score_gradients(neg, g_neg);
      loss += softplus(eta_n);
      grads.accumulate(neg, g_neg, sigmoid(eta_n));
    }
  }
  return loss;
}

// Adds 2 * lambda * theta to every touched row (and the shared blocks).
inline void add_regularization(SparseGradient& grads, const EmbeddingSet& params, double lambda) {
  const double two_lambda = 2.0 * lambda;
  const auto ent = grads.entities.rows();
  for (std::size_t k = 0; k < ent.size(); ++k) {
    grads.entities.add(ent[k], params.entities.row(ent[k]), two_lambda);
  }
  const auto rel = grads.relations.rows();
  for (std::size_t k = 0; k < rel.size(); ++k) {
    grads.relations.add(rel[k], params.relations.row(rel[k]), two_lambda);
  }
  if (grads.shared_touched) {
    auto gp = grads.projection.values();
    auto pp = params.projection.values();
    for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += two_lambda * pp[i];
    for (std::size_t i = 0; i < grads.output.size(); ++i) {
      grads.output[i] += two_lambda * params.output[i];
    }
  }
}

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  std::optional<double> val_metric;
  double seconds = 0.0;
};

struct TrainResult {
  EmbeddingSet params;  // best-validation snapshot (or final if never validated)
  std::vector<EpochLog> log;
  std::optional<double> best_metric;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

// Mini-batch SGD with AdaGrad. After each step the norm bounds are enforced
// on the touched rows. Every eval_every epochs the validator (if any) is
// run; the best snapshot is kept and training stops after `patience`
// evaluations without improvement.
inline TrainResult train(const ModelSpec& spec, const TrainConfig& config,
                         const TripleStore& store, const Validator& validator = {}) {
  config.validate();
  spec.validate();
  if (store.train.empty()) throw Error(ErrorCode::EmptySplit, "training split is empty");

  Rng init_rng = make_rng(config.seed, Stream::Init);
  Rng rng = make_rng(config.seed, Stream::Training);

  TrainResult result;
  EmbeddingSet params =
      initialize_parameters(spec, store.entities.size(), store.relations.size(), init_rng);
  project_norms(params, config.entity_norm, config.relation_norm);
  result.params = params;
  if (config.max_epochs == 0) return result;

  AdaGradState state(params);
  SparseGradient grads(spec);
  Scorer scorer(spec, params);
  ScoreGradient g_pos, g_neg;
  std::vector<std::size_t> order(store.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::size_t stale = 0;
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      grads.clear();
      for (std::size_t b = begin; b < end; ++b) {
        const Triple& pos = store.train[order[b]];
        const auto negatives = sample_negatives(pos, store, config.negatives_per_positive, rng);
        epoch_loss += accumulate_example(scorer, config, pos, negatives, grads, g_pos, g_neg);
      }
      if (config.lambda > 0) add_regularization(grads, params, config.lambda);
      adagrad_step(params, grads, state, config.learning_rate, config.adagrad_eps);
      if (config.entity_norm) {
        for (auto e : grads.entities.rows()) project_row(params.entities.row(e), *config.entity_norm);
      }
      if (config.relation_norm) {
        for (auto r : grads.relations.rows()) {
          project_row(params.relations.row(r), *config.relation_norm);
        }
      }
    }
    if (config.lambda > 0) epoch_loss += config.lambda * params.squared_norm();
    if (!std::isfinite(epoch_loss)) throw Error(ErrorCode::NonFinite, "training loss diverged");

    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = epoch_loss;
    result.epochs_run = epoch;
    bool stop = false;
    if (validator && (epoch % config.eval_every == 0 || epoch == config.max_epochs)) {
      const double metric = validator(spec, params);
      entry.val_metric = metric;
      if (!result.best_metric || metric > *result.best_metric) {
        result.best_metric = metric;
        result.best_epoch = epoch;
        result.params = params;
        stale = 0;
      } else if (config.patience > 0 && ++stale >= config.patience) {
        stop = true;
      }
    }
    entry.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    result.log.push_back(entry);
    if (stop) break;
  }
  if (!validator) {
    result.params = std::move(params);
    result.best_epoch = result.epochs_run;
  }
  return result;
}

}  // namespace hole
