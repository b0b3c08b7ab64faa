#pragma once

// Link-prediction ranking protocol (raw and filtered MRR, Hits@n) and
// average precision for triple classification.
//
// Tie rule: rank = 1 + #(candidates scoring strictly higher)
//                    + #(other candidates with an equal score) / 2,
// applied identically in Raw and Filtered mode. In Filtered mode every
// candidate other than the true entity that forms a known triple (any
// split) is removed before ranking.

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hole/error.hpp"
#include "hole/kgdata.hpp"
#include "hole/models.hpp"

namespace hole {

enum class FilterMode { Raw, Filtered };

// Rank of scores[truth] among all entries, skipping the entries listed in
// `excluded` (sorted, may contain truth, which is never skipped).
inline double rank_of(std::span<const double> scores, EntityId truth,
                      std::span<const EntityId> excluded = {}) {
  const double target = scores[truth];
  std::size_t greater = 0;
  std::size_t tied = 0;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    if (scores[e] > target) {
      ++greater;
    } else if (scores[e] == target && e != truth) {
      ++tied;
    }
  }
  for (EntityId e : excluded) {
    if (e == truth) continue;
    if (scores[e] > target) {
      --greater;
    } else if (scores[e] == target) {
      --tied;
    }
  }
  return 1.0 + static_cast<double>(greater) + static_cast<double>(tied) / 2.0;
}

inline double rank_entity_candidates(const ModelSpec& spec, const EmbeddingSet& params,
                                     const Triple& query, Slot slot, const TripleStore& store,
                                     FilterMode mode) {
  CandidateScorer scorer(spec, params);
  std::vector<double> scores(params.num_entities());
  scorer.score_all(query, slot, scores);
  const EntityId truth = slot == Slot::Subject ? query.subject : query.object;
  if (mode == FilterMode::Raw) return rank_of(scores, truth);
  return rank_of(scores, truth, store.filter.known(query, slot));
}

struct MetricSet {
  double mrr = 0.0;
  double hits1 = 0.0;  // percentages
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::size_t n = 0;
};

inline MetricSet metrics_from_ranks(std::span<const double> ranks) {
  MetricSet m;
  m.n = ranks.size();
  if (ranks.empty()) return m;
  double rr = 0.0;
  std::size_t h1 = 0, h3 = 0, h10 = 0;
  for (double r : ranks) {
    rr += 1.0 / r;
    h1 += r <= 1.0;
    h3 += r <= 3.0;
    h10 += r <= 10.0;
  }
  const auto n = static_cast<double>(ranks.size());
  m.mrr = rr / n;
  m.hits1 = 100.0 * static_cast<double>(h1) / n;
  m.hits3 = 100.0 * static_cast<double>(h3) / n;
  m.hits10 = 100.0 * static_cast<double>(h10) / n;
  return m;
}

struct QueryRank {
  Triple triple;
  Slot slot = Slot::Object;
  double raw = 0.0;
  double filtered = 0.0;
};

struct RankingReport {
  MetricSet filtered;
  MetricSet raw;
  std::map<std::string, std::pair<MetricSet, MetricSet>> per_relation;  // name -> (filtered, raw)
  std::size_t n_queries = 0;
  std::vector<QueryRank> ranks;  // one per query, in evaluation order

  double mrr_filtered() const noexcept { return filtered.mrr; }
  double mrr_raw() const noexcept { return raw.mrr; }

  nlohmann::json to_json() const {
    auto hits = [](const MetricSet& m) {
      return nlohmann::json{{"1", m.hits1}, {"3", m.hits3}, {"10", m.hits10}};
    };
    nlohmann::json j;
    j["mrr_filtered"] = filtered.mrr;
    j["mrr_raw"] = raw.mrr;
    j["hits_at"] = hits(filtered);
    j["hits_at_raw"] = hits(raw);
    j["n_queries"] = n_queries;
    if (!per_relation.empty()) {
      auto& pr = j["per_relation"];
      for (const auto& [name, fr] : per_relation) {
        pr[name] = {{"mrr_filtered", fr.first.mrr}, {"mrr_raw", fr.second.mrr},
                    {"hits_at", hits(fr.first)}, {"n_queries", fr.first.n}};
      }
    }
    return j;
  }

  // Plain-text table: MRR (Filter, Raw) and filtered Hits at 1, 3, 10.
  std::string to_table(const std::string& label = "model") const {
    char buf[256];
    std::ostringstream out;
    std::snprintf(buf, sizeof buf, "%-12s %8s %8s   %6s %6s %6s\n", "", "MRR", "", "Hits", "at", "");
    out << buf;
    std::snprintf(buf, sizeof buf, "%-12s %8s %8s   %6s %6s %6s\n", "Method", "Filter", "Raw", "1",
                  "3", "10");
    out << buf;
    std::snprintf(buf, sizeof buf, "%-12s %8.3f %8.3f   %6.1f %6.1f %6.1f\n", label.c_str(),
                  filtered.mrr, raw.mrr, filtered.hits1, filtered.hits3, filtered.hits10);
    out << buf;
    return out.str();
  }
};

struct EvalOptions {
  unsigned threads = 1;
  std::size_t max_triples = 0;  // 0 = all triples of the split
  bool per_relation = false;
};

// Ranks the subject and object slot of every triple in `split` (2 queries
// per triple). Queries are distributed over threads; results are reduced in
// query order so reports do not depend on the thread count.
inline RankingReport evaluate_link_prediction(const ModelSpec& spec, const EmbeddingSet& params,
                                              const TripleStore& store, Split split = Split::Test,
                                              const EvalOptions& opts = {}) {
  validate_shapes(spec, params);
  std::span<const Triple> triples = store.split(split);
  if (triples.empty()) throw Error(ErrorCode::EmptySplit, "evaluation split is empty");
  if (opts.max_triples > 0 && opts.max_triples < triples.size()) {
    triples = triples.first(opts.max_triples);
  }
  if (store.entities.size() != params.num_entities()) {
    throw Error(ErrorCode::ShapeMismatch, "store and parameters disagree on entity count");
  }

  RankingReport report;
  report.ranks.resize(2 * triples.size());
  auto worker = [&](std::size_t begin, std::size_t end) {
    CandidateScorer scorer(spec, params);
    std::vector<double> scores(params.num_entities());
    for (std::size_t q = begin; q < end; ++q) {
      const Triple& t = triples[q / 2];
      const Slot slot = q % 2 == 0 ? Slot::Subject : Slot::Object;
      scorer.score_all(t, slot, scores);
      const EntityId truth = slot == Slot::Subject ? t.subject : t.object;
      auto& r = report.ranks[q];
      r.triple = t;
      r.slot = slot;
      r.raw = rank_of(scores, truth);
      r.filtered = rank_of(scores, truth, store.filter.known(t, slot));
    }
  };
  const std::size_t n_queries = report.ranks.size();
  const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(n_queries)));
  if (threads == 1) {
    worker(0, n_queries);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_queries + threads - 1) / threads;
    for (unsigned i = 0; i < threads; ++i) {
      const std::size_t b = i * chunk;
      const std::size_t e = std::min(n_queries, b + chunk);
      if (b < e) pool.emplace_back(worker, b, e);
    }
    for (auto& th : pool) th.join();
  }

  std::vector<double> raw, filt;
  raw.reserve(n_queries);
  filt.reserve(n_queries);
  std::map<RelationId, std::pair<std::vector<double>, std::vector<double>>> by_rel;
  for (const auto& r : report.ranks) {
    raw.push_back(r.raw);
    filt.push_back(r.filtered);
    if (opts.per_relation) {
      by_rel[r.triple.predicate].first.push_back(r.filtered);
      by_rel[r.triple.predicate].second.push_back(r.raw);
    }
  }
  report.filtered = metrics_from_ranks(filt);
  report.raw = metrics_from_ranks(raw);
  report.n_queries = n_queries;
  for (const auto& [rel, fr] : by_rel) {
    report.per_relation[store.relations.name(rel)] = {metrics_from_ranks(fr.first),
                                                     metrics_from_ranks(fr.second)};
  }
  return report;
}

// Average precision: sort by score descending (stable, so ties keep input
// order) and sum precision@k at every positive, divided by #positives.
inline double auc_pr(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t positives = 0;
  for (int l : labels) positives += l != 0;
  if (positives == 0) throw Error(ErrorCode::NoPositives, "AUC-PR needs at least one positive label");
  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] != 0) {
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  return ap / static_cast<double>(positives);
}

inline double evaluate_auc_pr(const ModelSpec& spec, const EmbeddingSet& params,
                              std::span<const LabeledTriple> queries) {
  validate_shapes(spec, params);
  Scorer scorer(spec, params);
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(queries.size());
  labels.reserve(queries.size());
  for (const auto& q : queries) {
    validate_triple(params, q.triple);
    scores.push_back(scorer.score(q.triple));
    labels.push_back(q.positive ? 1 : 0);
  }
  return auc_pr(scores, labels);
}

// Model-selection metric evaluated during training; higher is better.
using Validator = std::function<double(const ModelSpec&, const EmbeddingSet&)>;

inline Validator filtered_mrr_validator(const TripleStore& store, EvalOptions opts = {}) {
  return [&store, opts](const ModelSpec& spec, const EmbeddingSet& params) {
    return evaluate_link_prediction(spec, params, store, Split::Valid, opts).filtered.mrr;
  };
}

inline Validator auc_pr_validator(std::vector<LabeledTriple> queries) {
  return [queries = std::move(queries)](const ModelSpec& spec, const EmbeddingSet& params) {
    return evaluate_auc_pr(spec, params, queries);
  };
}

}  // namespace hole
