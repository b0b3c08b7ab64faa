#pragma once

// Triple ingestion (TAB-separated subject/predicate/object lines),
// vocabulary indexing and the known-true filter index used for filtered
// ranking and negative-sample rejection.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hole/error.hpp"
#include "hole/models.hpp"

namespace hole {

using StringTriple = std::array<std::string, 3>;

// Bidirectional name <-> dense id map; ids assigned in first-appearance order.
class Vocabulary {
 public:
  std::uint32_t add(std::string_view name) {
    auto it = ids_.find(std::string(name));
    if (it != ids_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return id;
  }

  std::optional<std::uint32_t> find(std::string_view name) const {
    auto it = ids_.find(std::string(name));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return names_.size(); }

  // FNV-1a over the names in id order, each terminated by '\n'.
  std::uint64_t hash() const noexcept { return hash_names(names_); }

  static std::uint64_t hash_names(const std::vector<std::string>& names) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char c) {
      h ^= c;
      h *= 0x100000001b3ULL;
    };
    for (const auto& n : names) {
      for (char c : n) mix(static_cast<unsigned char>(c));
      mix('\n');
    }
    return h;
  }

  static Vocabulary from_names(const std::vector<std::string>& names) {
    Vocabulary v;
    for (const auto& n : names) v.add(n);
    return v;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

// (predicate, subject) -> sorted objects and (predicate, object) -> sorted
// subjects over a set of triples.
class FilterIndex {
 public:
  FilterIndex() = default;
  explicit FilterIndex(std::span<const std::vector<Triple>* const> splits) {
    for (const auto* split : splits) {
      for (const auto& t : *split) insert(t);
    }
    finalize();
  }

  void insert(const Triple& t) {
    objects_[key(t.predicate, t.subject)].push_back(t.object);
    subjects_[key(t.predicate, t.object)].push_back(t.subject);
  }

  void finalize() {
    for (auto* m : {&objects_, &subjects_}) {
      for (auto& [k, v] : *m) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      }
    }
  }

  bool contains(const Triple& t) const {
    auto it = objects_.find(key(t.predicate, t.subject));
    if (it == objects_.end()) return false;
    return std::binary_search(it->second.begin(), it->second.end(), t.object);
  }

  // Known entities completing (s, p, ?) or (?, p, o).
  std::span<const EntityId> objects(RelationId p, EntityId s) const {
    auto it = objects_.find(key(p, s));
    if (it == objects_.end()) return {};
    return it->second;
  }
  std::span<const EntityId> subjects(RelationId p, EntityId o) const {
    auto it = subjects_.find(key(p, o));
    if (it == subjects_.end()) return {};
    return it->second;
  }

  std::span<const EntityId> known(const Triple& t, Slot slot) const {
    return slot == Slot::Subject ? subjects(t.predicate, t.object) : objects(t.predicate, t.subject);
  }

  std::size_t num_subject_keys() const noexcept { return objects_.size(); }
  std::size_t num_object_keys() const noexcept { return subjects_.size(); }

  std::size_t num_triples() const noexcept {
    std::size_t n = 0;
    for (const auto& [k, v] : objects_) n += v.size();
    return n;
  }

 private:
  static std::uint64_t key(RelationId p, EntityId e) noexcept {
    return (static_cast<std::uint64_t>(p) << 32) | e;
  }

  std::unordered_map<std::uint64_t, std::vector<EntityId>> objects_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> subjects_;
};

// A triple with a binary truth label, used for classification queries.
struct LabeledTriple {
  Triple triple;
  bool positive = false;
};

enum class Split { Train, Valid, Test };

struct TripleStore {
  Vocabulary entities;
  Vocabulary relations;
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  FilterIndex filter;        // union of all splits
  FilterIndex train_filter;  // training split only, for negative rejection
  std::vector<std::string> diagnostics;

  const std::vector<Triple>& split(Split s) const {
    switch (s) {
      case Split::Train: return train;
      case Split::Valid: return valid;
      case Split::Test: return test;
    }
    return train;
  }

  std::size_t total_triples() const noexcept { return train.size() + valid.size() + test.size(); }

  StringTriple names(const Triple& t) const {
    return {entities.name(t.subject), relations.name(t.predicate), entities.name(t.object)};
  }

  void rebuild_indexes() {
    const std::vector<Triple>* all[] = {&train, &valid, &test};
    filter = FilterIndex(all);
    const std::vector<Triple>* tr[] = {&train};
    train_filter = FilterIndex(tr);
  }
};

// One triple per non-empty line, exactly three TAB-separated non-empty
// fields in subject, predicate, object order. A trailing CR is tolerated.
inline std::vector<StringTriple> parse_triples(std::istream& in) {
  std::vector<StringTriple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    StringTriple t;
    std::size_t field = 0;
    std::size_t start = 0;
    bool ok = true;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      const std::size_t end = tab == std::string::npos ? line.size() : tab;
      if (field < 3) t[field] = line.substr(start, end - start);
      ++field;
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (field != 3) {
      throw MalformedLineError(line_no, "expected 3 TAB-separated fields, found " +
                                            std::to_string(field));
    }
    for (const auto& f : t) ok = ok && !f.empty();
    if (!ok) throw MalformedLineError(line_no, "empty field");
    out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<StringTriple> parse_triples(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_triples(in);
}

inline std::vector<StringTriple> read_triples_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return parse_triples(in);
}

// Assembles vocabularies over train, valid, test (in that order, first
// appearance). Entities and relations already present in the seed
// vocabularies keep their ids. A triple repeated in a later split is
// dropped from that split with a diagnostic, keeping splits disjoint.
inline TripleStore build_store(const std::vector<StringTriple>& train,
                               const std::vector<StringTriple>& valid,
                               const std::vector<StringTriple>& test,
                               Vocabulary entity_seed = {}, Vocabulary relation_seed = {}) {
  TripleStore store;
  store.entities = std::move(entity_seed);
  store.relations = std::move(relation_seed);
  std::set<Triple> seen;
  const std::pair<const std::vector<StringTriple>*, std::vector<Triple>*> parts[] = {
      {&train, &store.train}, {&valid, &store.valid}, {&test, &store.test}};
  const char* split_names[] = {"train", "valid", "test"};
  int split_no = 0;
  for (const auto& [src, dst] : parts) {
    std::set<Triple> in_this_split;
    dst->reserve(src->size());
    for (const auto& st : *src) {
      Triple t{store.entities.add(st[0]), store.relations.add(st[1]), store.entities.add(st[2])};
      if (seen.contains(t) && !in_this_split.contains(t)) {
        store.diagnostics.push_back("DuplicateTripleAcrossSplits: " + st[0] + "\t" + st[1] + "\t" +
                                    st[2] + " repeated in " + split_names[split_no]);
        continue;
      }
      seen.insert(t);
      in_this_split.insert(t);
      dst->push_back(t);
    }
    ++split_no;
  }
  store.rebuild_indexes();
  return store;
}

inline TripleStore load_store(const std::string& train_path, const std::string& valid_path,
                              const std::string& test_path) {
  auto read_opt = [](const std::string& p) {
    return p.empty() ? std::vector<StringTriple>{} : read_triples_file(p);
  };
  return build_store(read_opt(train_path), read_opt(valid_path), read_opt(test_path));
}

inline void write_triples(std::ostream& out, const TripleStore& store,
                          std::span<const Triple> triples) {
  for (const auto& t : triples) {
    out << store.entities.name(t.subject) << '\t' << store.relations.name(t.predicate) << '\t'
        << store.entities.name(t.object) << '\n';
  }
}

}  // namespace hole
