#pragma once

// Countries benchmark builder: locatedIn / neighborOf triples over
// countries, subregions and regions, an 80/10/10 country split in which
// every test country keeps a neighbor in training, and the three removal
// settings of increasing difficulty.

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hole/error.hpp"
#include "hole/kgdata.hpp"
#include "hole/rng.hpp"

namespace hole {

struct CountryRecord {
  std::string name;
  std::string region;
  std::string subregion;
  std::vector<std::string> borders;
};

struct CountriesRaw {
  std::vector<CountryRecord> countries;
  std::vector<std::string> diagnostics;

  // Drops self-borders, duplicate and unknown neighbor names, then makes
  // neighbor lists symmetric. Checks the one-region/one-subregion rules.
  void normalize() {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < countries.size(); ++i) {
      const auto& c = countries[i];
      if (c.name.empty() || c.region.empty() || c.subregion.empty()) {
        throw Error(ErrorCode::InvalidCountries,
                    "country '" + c.name + "' needs exactly one region and one subregion");
      }
      if (!index.emplace(c.name, i).second) {
        throw Error(ErrorCode::InvalidCountries, "duplicate country '" + c.name + "'");
      }
    }
    std::map<std::string, std::string> subregion_region;
    for (const auto& c : countries) {
      auto [it, inserted] = subregion_region.emplace(c.subregion, c.region);
      if (!inserted && it->second != c.region) {
        throw Error(ErrorCode::InvalidCountries,
                    "subregion '" + c.subregion + "' lies in more than one region");
      }
    }
    for (const auto& c : countries) {
      if (index.contains(c.subregion) || index.contains(c.region) ||
          subregion_region.contains(c.region)) {
        throw Error(ErrorCode::InvalidCountries, "names of countries, subregions and regions overlap");
      }
    }
    std::vector<std::set<std::string>> sym(countries.size());
    for (std::size_t i = 0; i < countries.size(); ++i) {
      for (const auto& b : countries[i].borders) {
        auto it = index.find(b);
        if (it == index.end()) {
          diagnostics.push_back("unknown neighbor '" + b + "' of '" + countries[i].name + "' dropped");
          continue;
        }
        if (it->second == i) continue;
        sym[i].insert(b);
        if (!sym[it->second].contains(countries[i].name)) {
          sym[it->second].insert(countries[i].name);
        }
      }
    }
    for (std::size_t i = 0; i < countries.size(); ++i) {
      std::vector<std::string> before(countries[i].borders);
      countries[i].borders.assign(sym[i].begin(), sym[i].end());
      std::sort(before.begin(), before.end());
      before.erase(std::unique(before.begin(), before.end()), before.end());
      if (before.size() < countries[i].borders.size()) {
        diagnostics.push_back("neighbor list of '" + countries[i].name + "' symmetrized");
      }
    }
  }

  // JSON array of {name, region, subregion, borders: [names]}.
  static CountriesRaw from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw Error(ErrorCode::InvalidCountries, "expected a JSON array");
    CountriesRaw raw;
    for (const auto& item : j) {
      try {
        CountryRecord c;
        c.name = item.at("name").get<std::string>();
        c.region = item.at("region").get<std::string>();
        c.subregion = item.at("subregion").get<std::string>();
        if (item.contains("borders")) c.borders = item.at("borders").get<std::vector<std::string>>();
        raw.countries.push_back(std::move(c));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidCountries, e.what());
      }
    }
    raw.normalize();
    return raw;
  }

  static CountriesRaw load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidCountries, e.what());
    }
    return from_json(j);
  }
};

enum class CountriesSetting { S1, S2, S3 };

inline std::string_view to_string(CountriesSetting s) {
  switch (s) {
    case CountriesSetting::S1: return "S1";
    case CountriesSetting::S2: return "S2";
    case CountriesSetting::S3: return "S3";
  }
  return "?";
}

inline std::optional<CountriesSetting> parse_setting(std::string_view s) {
  if (s == "S1" || s == "s1") return CountriesSetting::S1;
  if (s == "S2" || s == "s2") return CountriesSetting::S2;
  if (s == "S3" || s == "s3") return CountriesSetting::S3;
  return std::nullopt;
}

struct SplitSizes {
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;
};

// 10% each for valid and test, rounded half up; the remainder trains.
constexpr SplitSizes countries_split_sizes(std::size_t n) {
  const std::size_t tenth = (n + 5) / 10;
  const std::size_t held = std::min(n, 2 * tenth);
  const std::size_t valid = std::min(tenth, held);
  return {n - held, valid, held - valid};
}

inline constexpr const char* kLocatedIn = "locatedIn";
inline constexpr const char* kNeighborOf = "neighborOf";

struct CountriesDataset {
  TripleStore store;
  std::vector<LabeledTriple> valid_queries;
  std::vector<LabeledTriple> test_queries;
  std::vector<Triple> removed;  // every triple withheld from training
  std::vector<std::string> train_countries, valid_countries, test_countries;
  std::vector<EntityId> regions;
  CountriesSetting setting = CountriesSetting::S1;
  std::uint64_t seed = 0;
  std::size_t split_attempts = 0;
};

inline CountriesDataset build_countries(const CountriesRaw& raw, CountriesSetting setting,
                                        std::uint64_t seed) {
  const std::size_t n = raw.countries.size();
  if (n < 3) throw Error(ErrorCode::InvalidCountries, "need at least 3 countries");

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(raw.countries[i].name, i);
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& b : raw.countries[i].borders) neighbors[i].push_back(index.at(b));
  }

  // Partition: test countries are drawn from those with neighbors, then the
  // partition is rejected unless each keeps a neighbor in training.
  const SplitSizes sizes = countries_split_sizes(n);
  enum class Part { Train, Valid, Test };
  std::vector<Part> part(n, Part::Train);
  Rng rng = make_rng(seed, Stream::CountriesSplit);
  std::size_t attempts = 0;
  constexpr std::size_t kMaxAttempts = 10000;
  bool found = false;
  std::vector<std::size_t> order(n);
  while (!found && attempts < kMaxAttempts) {
    ++attempts;
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle(order.begin(), order.end(), rng);
    std::fill(part.begin(), part.end(), Part::Train);
    std::size_t n_test = 0, n_valid = 0;
    for (std::size_t i : order) {
      if (n_test < sizes.test && !neighbors[i].empty()) {
        part[i] = Part::Test;
        ++n_test;
      }
    }
    if (n_test < sizes.test) break;
    for (std::size_t i : order) {
      if (n_valid < sizes.valid && part[i] == Part::Train) {
        part[i] = Part::Valid;
        ++n_valid;
      }
    }
    found = true;
    for (std::size_t i = 0; i < n && found; ++i) {
      if (part[i] != Part::Test) continue;
      found = std::any_of(neighbors[i].begin(), neighbors[i].end(),
                          [&](std::size_t j) { return part[j] == Part::Train; });
    }
  }
  if (!found) {
    throw Error(ErrorCode::ConstraintUnsatisfiable,
                "no country partition with a training neighbor for every test country after " +
                    std::to_string(attempts) + " attempts");
  }

  // Vocabulary: countries, then subregions, then regions, in input order.
  Vocabulary ents;
  Vocabulary rels;
  for (const auto& c : raw.countries) ents.add(c.name);
  for (const auto& c : raw.countries) ents.add(c.subregion);
  for (const auto& c : raw.countries) ents.add(c.region);
  const RelationId located = rels.add(kLocatedIn);
  const RelationId neighbor = rels.add(kNeighborOf);

  CountriesDataset ds;
  ds.setting = setting;
  ds.seed = seed;
  ds.split_attempts = attempts;
  std::set<EntityId> region_ids;
  for (const auto& c : raw.countries) region_ids.insert(*ents.find(c.region));
  ds.regions.assign(region_ids.begin(), region_ids.end());

  std::vector<EntityId> region_ids_by_country(n), subregion_ids_by_country(n);
  for (std::size_t i = 0; i < n; ++i) {
    region_ids_by_country[i] = *ents.find(raw.countries[i].region);
    subregion_ids_by_country[i] = *ents.find(raw.countries[i].subregion);
  }
  auto country_id = [](std::size_t i) { return static_cast<EntityId>(i); };
  auto region_of = [&](std::size_t i) { return region_ids_by_country[i]; };
  auto subregion_of = [&](std::size_t i) { return subregion_ids_by_country[i]; };

  std::set<Triple> removed;
  for (std::size_t i = 0; i < n; ++i) {
    if (part[i] == Part::Train) continue;
    removed.insert({country_id(i), located, region_of(i)});
    if (setting != CountriesSetting::S1) removed.insert({country_id(i), located, subregion_of(i)});
    if (setting == CountriesSetting::S3) {
      for (std::size_t j : neighbors[i]) removed.insert({country_id(j), located, region_of(j)});
    }
  }

  std::vector<Triple> all;
  for (std::size_t i = 0; i < n; ++i) {
    all.push_back({country_id(i), located, subregion_of(i)});
    all.push_back({country_id(i), located, region_of(i)});
  }
  std::set<std::pair<EntityId, EntityId>> sub_edges;
  for (std::size_t i = 0; i < n; ++i) sub_edges.insert({subregion_of(i), region_of(i)});
  for (const auto& [s, r] : sub_edges) all.push_back({s, located, r});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : neighbors[i]) all.push_back({country_id(i), neighbor, country_id(j)});
  }

  ds.store.entities = std::move(ents);
  ds.store.relations = std::move(rels);
  for (const auto& t : all) {
    if (!removed.contains(t)) ds.store.train.push_back(t);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Triple fact{country_id(i), located, region_of(i)};
    const auto& name = raw.countries[i].name;
    if (part[i] == Part::Train) {
      ds.train_countries.push_back(name);
      continue;
    }
    auto& split = part[i] == Part::Valid ? ds.store.valid : ds.store.test;
    auto& queries = part[i] == Part::Valid ? ds.valid_queries : ds.test_queries;
    (part[i] == Part::Valid ? ds.valid_countries : ds.test_countries).push_back(name);
    split.push_back(fact);
    for (EntityId r : ds.regions) queries.push_back({{country_id(i), located, r}, r == fact.object});
  }
  ds.removed.assign(removed.begin(), removed.end());
  ds.store.rebuild_indexes();
  return ds;
}

}  // namespace hole
