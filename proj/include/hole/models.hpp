#pragma once

// Scoring functions and analytic gradients for HolE and the baseline
// families (TransE, RESCAL, DistMult, ER-MLP).
//
// All families share one entity table: the i-th entity has the same vector
// as subject and as object. The probability of a triple is sigmoid(score).

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hole/error.hpp"
#include "hole/holo_ops.hpp"
#include "hole/matrix.hpp"
#include "hole/rng.hpp"

namespace hole {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId subject = 0;
  RelationId predicate = 0;
  EntityId object = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

enum class Slot { Subject, Object };

enum class Family { HolE, TransE, Rescal, DistMult, ErMlp };

// TransE distance. SquaredL2 gives smooth gradients and is the default.
enum class DistanceNorm { L1, SquaredL2 };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::HolE: return "hole";
    case Family::TransE: return "transe";
    case Family::Rescal: return "rescal";
    case Family::DistMult: return "distmult";
    case Family::ErMlp: return "ermlp";
  }
  return "unknown";
}

inline std::optional<Family> parse_family(std::string_view name) {
  for (Family f : {Family::HolE, Family::TransE, Family::Rescal, Family::DistMult, Family::ErMlp}) {
    if (name == to_string(f)) return f;
  }
  if (name == "er-mlp") return Family::ErMlp;
  return std::nullopt;
}

inline std::string_view to_string(DistanceNorm n) {
  return n == DistanceNorm::L1 ? "l1" : "l2";
}

struct ModelSpec {
  Family family = Family::HolE;
  std::size_t entity_dim = 0;
  // d for HolE/TransE/DistMult, d*d for RESCAL, the relation-embedding
  // width (equal to the hidden width) for ER-MLP.
  std::size_t relation_dim = 0;
  std::size_t hidden = 0;  // ER-MLP only
  DistanceNorm transe_norm = DistanceNorm::SquaredL2;

  static ModelSpec make(Family family, std::size_t dim, std::size_t hidden = 0,
                        DistanceNorm norm = DistanceNorm::SquaredL2) {
    ModelSpec s;
    s.family = family;
    s.entity_dim = dim;
    s.transe_norm = norm;
    switch (family) {
      case Family::Rescal: s.relation_dim = dim * dim; break;
      case Family::ErMlp:
        s.hidden = hidden == 0 ? dim : hidden;
        s.relation_dim = s.hidden;
        break;
      default: s.relation_dim = dim; break;
    }
    return s;
  }

  // Width of the ER-MLP input layer: [e_s; r_p; e_o].
  std::size_t ermlp_input() const noexcept { return 2 * entity_dim + relation_dim; }

  void validate() const {
    if (entity_dim == 0) throw Error(ErrorCode::ShapeMismatch, "entity dimension must be >= 1");
    std::size_t expected = entity_dim;
    if (family == Family::Rescal) expected = entity_dim * entity_dim;
    if (family == Family::ErMlp) {
      if (hidden == 0) throw Error(ErrorCode::ShapeMismatch, "ER-MLP hidden width must be >= 1");
      expected = hidden;
    }
    if (relation_dim != expected) {
      throw Error(ErrorCode::ShapeMismatch,
                  std::string("relation dimension ") + std::to_string(relation_dim) +
                      " inconsistent with family " + std::string(to_string(family)));
    }
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Parameter set: entity vectors, per-relation blocks, and the ER-MLP shared
// projection (hidden x input) and output weights (hidden).
struct EmbeddingSet {
  Matrix entities;
  Matrix relations;
  Matrix projection;
  DenseVector output;

  std::size_t num_entities() const noexcept { return entities.rows(); }
  std::size_t num_relations() const noexcept { return relations.rows(); }

  std::size_t size() const noexcept {
    return entities.size() + relations.size() + projection.size() + output.size();
  }

  bool all_finite() const noexcept {
    return entities.all_finite() && relations.all_finite() && projection.all_finite() &&
           std::all_of(output.begin(), output.end(), [](double v) { return std::isfinite(v); });
  }

  double squared_norm() const noexcept {
    return hole::squared_norm(entities.values()) + hole::squared_norm(relations.values()) +
           hole::squared_norm(projection.values()) + hole::squared_norm(output);
  }

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

struct ScoreGradient {
  DenseVector wrt_subject;
  DenseVector wrt_object;
  DenseVector wrt_relation;
  Matrix wrt_projection;  // ER-MLP only
  DenseVector wrt_output;  // ER-MLP only
};

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Exact number of stored parameters for the family.
inline std::size_t parameter_count(const ModelSpec& spec, std::size_t n_entities,
                                   std::size_t n_relations) {
  std::size_t count = n_entities * spec.entity_dim + n_relations * spec.relation_dim;
  if (spec.family == Family::ErMlp) count += spec.hidden * spec.ermlp_input() + spec.hidden;
  return count;
}

inline EmbeddingSet zero_parameters(const ModelSpec& spec, std::size_t n_entities,
                                    std::size_t n_relations) {
  spec.validate();
  if (n_entities == 0 || n_relations == 0) {
    throw Error(ErrorCode::ShapeMismatch, "need at least one entity and one relation");
  }
  EmbeddingSet p;
  p.entities = Matrix(n_entities, spec.entity_dim);
  p.relations = Matrix(n_relations, spec.relation_dim);
  if (spec.family == Family::ErMlp) {
    p.projection = Matrix(spec.hidden, spec.ermlp_input());
    p.output.assign(spec.hidden, 0.0);
  }
  return p;
}

// Uniform in +-sqrt(6 / (fan_in + fan_out)); entity rows rescaled to unit
// L2 norm afterwards.
inline EmbeddingSet initialize_parameters(const ModelSpec& spec, std::size_t n_entities,
                                          std::size_t n_relations, Rng& rng) {
  EmbeddingSet p = zero_parameters(spec, n_entities, n_relations);
  auto fill_uniform = [&rng](std::span<double> values, double fan_in, double fan_out) {
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : values) v = uniform_real(rng, -bound, bound);
  };
  const auto d = static_cast<double>(spec.entity_dim);
  fill_uniform(p.entities.values(), d, d);
  for (std::size_t i = 0; i < n_entities; ++i) {
    auto row = p.entities.row(i);
    const double n = std::sqrt(hole::squared_norm(row));
    if (n > 0) {
      for (double& v : row) v /= n;
    }
  }
  const double rel_fan = spec.family == Family::ErMlp ? static_cast<double>(spec.relation_dim) : d;
  fill_uniform(p.relations.values(), rel_fan, rel_fan);
  if (spec.family == Family::ErMlp) {
    fill_uniform(p.projection.values(), static_cast<double>(spec.ermlp_input()),
                 static_cast<double>(spec.hidden));
    fill_uniform(p.output, static_cast<double>(spec.hidden), 1.0);
  }
  return p;
}

inline void validate_shapes(const ModelSpec& spec, const EmbeddingSet& params) {
  spec.validate();
  const bool ok_core = params.entities.cols() == spec.entity_dim &&
                       params.relations.cols() == spec.relation_dim &&
                       params.entities.rows() >= 1 && params.relations.rows() >= 1;
  bool ok_shared = params.projection.empty() && params.output.empty();
  if (spec.family == Family::ErMlp) {
    ok_shared = params.projection.rows() == spec.hidden &&
                params.projection.cols() == spec.ermlp_input() &&
                params.output.size() == spec.hidden;
  }
  if (!ok_core || !ok_shared) {
    throw Error(ErrorCode::ShapeMismatch, "parameter blocks do not match the model shape");
  }
}

inline void validate_triple(const EmbeddingSet& params, const Triple& t) {
  if (t.subject >= params.num_entities() || t.object >= params.num_entities()) {
    throw Error(ErrorCode::IndexOutOfRange, "entity id out of range");
  }
  if (t.predicate >= params.num_relations()) {
    throw Error(ErrorCode::IndexOutOfRange, "relation id out of range");
  }
}

// Per-thread scoring engine with reusable scratch. Methods do no argument
// validation; the free functions below are the checked API.
class Scorer {
 public:
  Scorer(const ModelSpec& spec, const EmbeddingSet& params, Backend backend = Backend::Fft)
      : spec_(spec), params_(params), backend_(backend), fft_(thread_fft_context()) {
    const std::size_t d = spec.entity_dim;
    tmp_a_.assign(std::max(d, spec.hidden), 0.0);
    tmp_b_.assign(std::max(d, spec.hidden), 0.0);
    if (spec.family == Family::ErMlp) input_.assign(spec.ermlp_input(), 0.0);
  }

  const ModelSpec& spec() const noexcept { return spec_; }
  const EmbeddingSet& params() const noexcept { return params_; }

  double score(const Triple& t) {
    const auto es = params_.entities.row(t.subject);
    const auto eo = params_.entities.row(t.object);
    const auto r = params_.relations.row(t.predicate);
    const std::size_t d = spec_.entity_dim;
    switch (spec_.family) {
      case Family::HolE: {
        std::span<double> c(tmp_a_.data(), d);
        if (backend_ == Backend::Naive) {
          ccorr_naive(es, eo, c);
        } else {
          fft_.ccorr(es, eo, c);
        }
        return dot(r, c);
      }
      case Family::TransE: {
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const double res = es[i] + r[i] - eo[i];
          acc += spec_.transe_norm == DistanceNorm::L1 ? std::abs(res) : res * res;
        }
        return -acc;
      }
      case Family::Rescal: {
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) acc += es[i] * dot(r.subspan(i * d, d), eo);
        return acc;
      }
      case Family::DistMult: {
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) acc += es[i] * r[i] * eo[i];
        return acc;
      }
      case Family::ErMlp: {
        fill_input(es, r, eo);
        double acc = 0.0;
        for (std::size_t j = 0; j < spec_.hidden; ++j) {
          acc += params_.output[j] * std::tanh(dot(params_.projection.row(j), input_));
        }
        return acc;
      }
    }
    return 0.0;
  }

  // Writes gradients of the score into g (resized as needed) and returns
  // the score.
  double score_gradients(const Triple& t, ScoreGradient& g) {
    const auto es = params_.entities.row(t.subject);
    const auto eo = params_.entities.row(t.object);
    const auto r = params_.relations.row(t.predicate);
    const std::size_t d = spec_.entity_dim;
    g.wrt_subject.resize(d);
    g.wrt_object.resize(d);
    g.wrt_relation.resize(spec_.relation_dim);
    switch (spec_.family) {
      case Family::HolE: {
        if (backend_ == Backend::Naive) {
          ccorr_naive(es, eo, g.wrt_relation);
          ccorr_naive(r, eo, g.wrt_subject);
          cconv_naive(r, es, g.wrt_object);
        } else {
          // Three forward transforms shared by the three products.
          fft_.forward(es, spec_s_);
          fft_.forward(eo, spec_o_);
          fft_.forward(r, spec_r_);
          const std::size_t m = spec_s_.size();
          work_.resize(m);
          for (std::size_t i = 0; i < m; ++i) work_[i] = std::conj(spec_s_[i]) * spec_o_[i];
          fft_.inverse(work_, g.wrt_relation);
          for (std::size_t i = 0; i < m; ++i) work_[i] = std::conj(spec_r_[i]) * spec_o_[i];
          fft_.inverse(work_, g.wrt_subject);
          for (std::size_t i = 0; i < m; ++i) work_[i] = spec_r_[i] * spec_s_[i];
          fft_.inverse(work_, g.wrt_object);
        }
        return dot(r, g.wrt_relation);
      }
      case Family::TransE: {
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const double res = es[i] + r[i] - eo[i];
          double dres;
          if (spec_.transe_norm == DistanceNorm::L1) {
            acc += std::abs(res);
            dres = res > 0 ? 1.0 : (res < 0 ? -1.0 : 0.0);
          } else {
            acc += res * res;
            dres = 2.0 * res;
          }
          g.wrt_subject[i] = -dres;
          g.wrt_relation[i] = -dres;
          g.wrt_object[i] = dres;
        }
        return -acc;
      }
      case Family::Rescal: {
        // score = es^T R eo
        std::fill(g.wrt_object.begin(), g.wrt_object.end(), 0.0);
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const auto row = r.subspan(i * d, d);
          g.wrt_subject[i] = dot(row, eo);
          acc += es[i] * g.wrt_subject[i];
          for (std::size_t j = 0; j < d; ++j) {
            g.wrt_object[j] += es[i] * row[j];
            g.wrt_relation[i * d + j] = es[i] * eo[j];
          }
        }
        return acc;
      }
      case Family::DistMult: {
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          g.wrt_subject[i] = r[i] * eo[i];
          g.wrt_object[i] = r[i] * es[i];
          g.wrt_relation[i] = es[i] * eo[i];
          acc += es[i] * g.wrt_subject[i];
        }
        return acc;
      }
      case Family::ErMlp: {
        const std::size_t h = spec_.hidden;
        const std::size_t in = spec_.ermlp_input();
        fill_input(es, r, eo);
        if (g.wrt_projection.rows() != h || g.wrt_projection.cols() != in) {
          g.wrt_projection = Matrix(h, in);
        }
        g.wrt_output.resize(h);
        input_grad_.assign(in, 0.0);
        double acc = 0.0;
        for (std::size_t j = 0; j < h; ++j) {
          const auto w = params_.projection.row(j);
          const double z = std::tanh(dot(w, input_));
          acc += params_.output[j] * z;
          g.wrt_output[j] = z;
          const double delta = params_.output[j] * (1.0 - z * z);
          auto gw = g.wrt_projection.row(j);
          for (std::size_t k = 0; k < in; ++k) {
            gw[k] = delta * input_[k];
            input_grad_[k] += delta * w[k];
          }
        }
        const std::size_t dr = spec_.relation_dim;
        std::copy_n(input_grad_.begin(), d, g.wrt_subject.begin());
        std::copy_n(input_grad_.begin() + static_cast<std::ptrdiff_t>(d), dr, g.wrt_relation.begin());
        std::copy_n(input_grad_.begin() + static_cast<std::ptrdiff_t>(d + dr), d, g.wrt_object.begin());
        return acc;
      }
    }
    return 0.0;
  }

 private:
  void fill_input(std::span<const double> es, std::span<const double> r,
                  std::span<const double> eo) {
    auto it = std::copy(es.begin(), es.end(), input_.begin());
    it = std::copy(r.begin(), r.end(), it);
    std::copy(eo.begin(), eo.end(), it);
  }

  const ModelSpec& spec_;
  const EmbeddingSet& params_;
  Backend backend_;
  FftContext& fft_;
  DenseVector tmp_a_, tmp_b_, input_, input_grad_;
  Spectrum spec_s_, spec_o_, spec_r_, work_;
};

inline double score(const ModelSpec& spec, const EmbeddingSet& params, const Triple& triple,
                    Backend backend = Backend::Fft) {
  validate_shapes(spec, params);
  validate_triple(params, triple);
  Scorer scorer(spec, params, backend);
  return scorer.score(triple);
}

inline ScoreGradient score_gradients(const ModelSpec& spec, const EmbeddingSet& params,
                                     const Triple& triple, Backend backend = Backend::Fft) {
  validate_shapes(spec, params);
  validate_triple(params, triple);
  Scorer scorer(spec, params, backend);
  ScoreGradient g;
  scorer.score_gradients(triple, g);
  return g;
}

inline double probability(const ModelSpec& spec, const EmbeddingSet& params,
                          const Triple& triple) {
  return sigmoid(score(spec, params, triple));
}

// Scores every entity substituted into one slot of a triple. Exploits the
// structure of each family so the fixed pair is composed once per query:
// for HolE, score(s', p, o) = e_s'^T (r_p ccorr e_o) and
// score(s, p, o') = e_o'^T (r_p cconv e_s).
class CandidateScorer {
 public:
  CandidateScorer(const ModelSpec& spec, const EmbeddingSet& params)
      : spec_(spec), params_(params), fft_(thread_fft_context()) {
    validate_shapes(spec, params);
    const std::size_t d = spec.entity_dim;
    query_.assign(std::max(d, spec.hidden), 0.0);
    if (spec.family == Family::ErMlp) precompute_ermlp();
  }

  // out[e] = score of the triple with `slot` replaced by entity e.
  void score_all(const Triple& t, Slot slot, std::span<double> out) {
    validate_triple(params_, t);
    if (out.size() != params_.num_entities()) {
      throw Error(ErrorCode::DimensionMismatch, "output span must hold one score per entity");
    }
    const std::size_t d = spec_.entity_dim;
    const std::size_t n = params_.num_entities();
    const auto& E = params_.entities;
    const auto r = params_.relations.row(t.predicate);
    std::span<double> q(query_.data(), d);
    switch (spec_.family) {
      case Family::HolE:
        if (slot == Slot::Subject) {
          fft_.ccorr(r, E.row(t.object), q);
        } else {
          fft_.cconv(r, E.row(t.subject), q);
        }
        for (std::size_t e = 0; e < n; ++e) out[e] = dot(E.row(e), q);
        return;
      case Family::DistMult: {
        const auto fixed = E.row(slot == Slot::Subject ? t.object : t.subject);
        for (std::size_t i = 0; i < d; ++i) q[i] = r[i] * fixed[i];
        for (std::size_t e = 0; e < n; ++e) out[e] = dot(E.row(e), q);
        return;
      }
      case Family::Rescal:
        if (slot == Slot::Subject) {
          const auto eo = E.row(t.object);
          for (std::size_t i = 0; i < d; ++i) q[i] = dot(r.subspan(i * d, d), eo);
        } else {
          const auto es = E.row(t.subject);
          std::fill(q.begin(), q.end(), 0.0);
          for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) q[j] += es[i] * r[i * d + j];
          }
        }
        for (std::size_t e = 0; e < n; ++e) out[e] = dot(E.row(e), q);
        return;
      case Family::TransE: {
        // subject slot: -dist(e' + (r - eo)); object slot: -dist((es + r) - e')
        const bool subj = slot == Slot::Subject;
        const auto fixed = E.row(subj ? t.object : t.subject);
        for (std::size_t i = 0; i < d; ++i) q[i] = subj ? r[i] - fixed[i] : fixed[i] + r[i];
        const double sign = subj ? 1.0 : -1.0;
        const bool l1 = spec_.transe_norm == DistanceNorm::L1;
        for (std::size_t e = 0; e < n; ++e) {
          const auto c = E.row(e);
          double acc = 0.0;
          for (std::size_t i = 0; i < d; ++i) {
            const double res = sign * c[i] + q[i];
            acc += l1 ? std::abs(res) : res * res;
          }
          out[e] = -acc;
        }
        return;
      }
      case Family::ErMlp: {
        const std::size_t h = spec_.hidden;
        const auto& fixed_proj = slot == Slot::Subject ? object_proj_ : subject_proj_;
        const auto& cand_proj = slot == Slot::Subject ? subject_proj_ : object_proj_;
        const auto fixed = fixed_proj.row(slot == Slot::Subject ? t.object : t.subject);
        const auto rel = relation_proj_.row(t.predicate);
        for (std::size_t j = 0; j < h; ++j) query_[j] = fixed[j] + rel[j];
        for (std::size_t e = 0; e < n; ++e) {
          const auto c = cand_proj.row(e);
          double acc = 0.0;
          for (std::size_t j = 0; j < h; ++j) acc += params_.output[j] * std::tanh(query_[j] + c[j]);
          out[e] = acc;
        }
        return;
      }
    }
  }

 private:
  // Projects every entity through the subject and object blocks of W and
  // every relation through the relation block.
  void precompute_ermlp() {
    const std::size_t d = spec_.entity_dim;
    const std::size_t dr = spec_.relation_dim;
    const std::size_t h = spec_.hidden;
    const std::size_t n = params_.num_entities();
    subject_proj_ = Matrix(n, h);
    object_proj_ = Matrix(n, h);
    relation_proj_ = Matrix(params_.num_relations(), h);
    for (std::size_t j = 0; j < h; ++j) {
      const auto w = params_.projection.row(j);
      const auto ws = w.subspan(0, d);
      const auto wr = w.subspan(d, dr);
      const auto wo = w.subspan(d + dr, d);
      for (std::size_t e = 0; e < n; ++e) {
        subject_proj_(e, j) = dot(ws, params_.entities.row(e));
        object_proj_(e, j) = dot(wo, params_.entities.row(e));
      }
      for (std::size_t k = 0; k < params_.num_relations(); ++k) {
        relation_proj_(k, j) = dot(wr, params_.relations.row(k));
      }
    }
  }

  const ModelSpec& spec_;
  const EmbeddingSet& params_;
  FftContext& fft_;
  DenseVector query_;
  Matrix subject_proj_, object_proj_, relation_proj_;
};

}  // namespace hole
