#pragma once

// Holographic associative memory: pairs are stored by circular convolution
// and superposition, read back by circular correlation, and denoised with
// a nearest-item clean-up table.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "hole/error.hpp"
#include "hole/holo_ops.hpp"
#include "hole/models.hpp"
#include "hole/rng.hpp"

namespace hole {

struct MemoryTrace {
  DenseVector trace;
  std::size_t stored_count = 0;  // diagnostics only
};

using KeyValue = std::pair<DenseVector, DenseVector>;

inline MemoryTrace store_pairs(std::span<const KeyValue> pairs, std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "memory dimension must be >= 1");
  MemoryTrace m{DenseVector(dim, 0.0), 0};
  DenseVector bound(dim);
  for (const auto& [key, value] : pairs) {
    if (key.size() != dim || value.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "key/value dimension differs from the memory");
    }
    detail::require_finite(key);
    detail::require_finite(value);
    thread_fft_context().cconv(key, value, bound);
    for (std::size_t i = 0; i < dim; ++i) m.trace[i] += bound[i];
    ++m.stored_count;
  }
  return m;
}

// Noisy value associated with key; no clean-up.
inline DenseVector retrieve(const MemoryTrace& m, std::span<const double> key) {
  return ccorr(key, m.trace);
}

struct CleanupItem {
  std::uint32_t id = 0;
  DenseVector vector;
};

using CleanupTable = std::vector<CleanupItem>;

struct CleanupResult {
  std::uint32_t id = 0;
  const DenseVector* vector = nullptr;
};

// Item with the largest dot product against `noisy`; ties go to the lowest id.
inline CleanupResult cleanup(std::span<const double> noisy, const CleanupTable& table) {
  if (table.empty()) throw Error(ErrorCode::EmptyTable, "clean-up table is empty");
  const CleanupItem* best = nullptr;
  double best_dot = -std::numeric_limits<double>::infinity();
  for (const auto& item : table) {
    detail::require_same_length(noisy, item.vector);
    const double s = dot(item.vector, noisy);
    if (best == nullptr || s > best_dot || (s == best_dot && item.id < best->id)) {
      best = &item;
      best_dot = s;
    }
  }
  return {best->id, &best->vector};
}

// Sum of cconv(r_p, e_s) over triples (s, p, object): the object vector as
// a memory of its incoming subject-predicate pairs.
inline DenseVector store_relational(std::span<const Triple> triples, const EmbeddingSet& params,
                                    EntityId object) {
  const std::size_t d = params.entities.cols();
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "entity dimension must be >= 1");
  if (params.relations.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "relation and entity dimensions differ");
  }
  DenseVector out(d, 0.0);
  DenseVector bound(d);
  for (const auto& t : triples) {
    if (t.object != object) {
      throw Error(ErrorCode::ObjectMismatch, "triple object differs from the requested object");
    }
    validate_triple(params, t);
    thread_fft_context().cconv(params.relations.row(t.predicate), params.entities.row(t.subject),
                               bound);
    for (std::size_t i = 0; i < d; ++i) out[i] += bound[i];
  }
  return out;
}

// Entries i.i.d. normal with variance 1/d, then scaled to unit length.
inline DenseVector random_unit_vector(std::size_t d, Rng& rng) {
  DenseVector v(d);
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  for (auto& x : v) x = sd * standard_normal(rng);
  const double n = std::sqrt(squared_norm(v));
  if (n > 0) {
    for (auto& x : v) x /= n;
  }
  return v;
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(squared_norm(a));
  const double nb = std::sqrt(squared_norm(b));
  if (na == 0 || nb == 0) return 0.0;
  return dot(a, b) / (na * nb);
}

struct CapacityRow {
  std::size_t d = 0;
  std::size_t k = 0;
  std::size_t trial = 0;
  double cosine = 0.0;
  bool cleanup_correct = false;
};

// One trial: k random unit key/value pairs are stored; each key is read
// back and cleaned up against the k stored values. One row per pair.
inline std::vector<CapacityRow> capacity_trial(std::size_t d, std::size_t k, std::size_t trial,
                                               std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::MemoryDemo, (static_cast<std::uint64_t>(d) << 40) ^
                                                   (static_cast<std::uint64_t>(k) << 20) ^ trial);
  std::vector<KeyValue> pairs;
  pairs.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    DenseVector key = random_unit_vector(d, rng);
    DenseVector value = random_unit_vector(d, rng);
    pairs.emplace_back(std::move(key), std::move(value));
  }
  const MemoryTrace m = store_pairs(pairs, d);
  CleanupTable table;
  table.reserve(k);
  for (std::size_t i = 0; i < k; ++i) table.push_back({static_cast<std::uint32_t>(i), pairs[i].second});
  std::vector<CapacityRow> rows;
  rows.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const DenseVector noisy = retrieve(m, pairs[i].first);
    rows.push_back({d, k, trial, cosine(noisy, pairs[i].second), cleanup(noisy, table).id == i});
  }
  return rows;
}

inline void write_capacity_header(std::ostream& out) { out << "d,k,trial,cosine,cleanup_correct\n"; }

inline void write_capacity_row(std::ostream& out, const CapacityRow& r) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g", r.cosine);
  out << r.d << ',' << r.k << ',' << r.trial << ',' << buf << ',' << (r.cleanup_correct ? 1 : 0)
      << '\n';
}

}  // namespace hole
