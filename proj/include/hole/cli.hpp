#pragma once

// Command-line front end: train, evaluate, predict, memdemo,
// build-countries. `run` is the whole program minus process plumbing, so
// tests drive it in-process.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hole/assocmem.hpp"
#include "hole/checkpoint.hpp"
#include "hole/countries.hpp"
#include "hole/error.hpp"
#include "hole/eval.hpp"
#include "hole/kgdata.hpp"
#include "hole/models.hpp"
#include "hole/training.hpp"

#ifndef HOLE_GIT_DESCRIBE
#define HOLE_GIT_DESCRIBE "unknown"
#endif

namespace hole::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Usage-class failure (bad flag value, unknown name); exits 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value file. '#' starts a comment; blank lines are ignored.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config: line " + std::to_string(line_no) + " is not key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

struct ModelArgs {
  std::string family = "hole";
  std::size_t dim = 150;
  std::size_t hidden = 0;
  std::string transe_norm = "l2";

  ModelSpec resolve() const {
    const auto f = parse_family(family);
    if (!f) throw Error(ErrorCode::Config, "model: unknown family '" + family + "'");
    DistanceNorm norm;
    if (transe_norm == "l1") {
      norm = DistanceNorm::L1;
    } else if (transe_norm == "l2") {
      norm = DistanceNorm::SquaredL2;
    } else {
      throw Error(ErrorCode::Config, "transe-norm: expected l1 or l2");
    }
    if (dim == 0) throw Error(ErrorCode::Config, "dim: must be >= 1");
    auto spec = ModelSpec::make(*f, dim, hidden, norm);
    spec.validate();
    return spec;
  }
};

struct TrainArgs {
  ModelArgs model;
  std::string train_path, valid_path, test_path, valid_queries, out_dir;
  std::string loss = "ranking";
  double margin = 0.2, lambda = 0.0, lr = 0.1, eps = 1e-8;
  std::size_t negatives = 1, batch = 128, epochs = 500, patience = 5, eval_every = 10;
  std::size_t valid_max = 0;
  std::string entity_norm = "1", relation_norm = "none";
  bool raw_hinge = false;
  bool log_seconds = false;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  TrainConfig resolve() const {
    TrainConfig c;
    if (loss == "ranking") {
      c.loss = LossKind::MarginRanking;
    } else if (loss == "logistic") {
      c.loss = LossKind::Logistic;
    } else {
      throw Error(ErrorCode::Config, "loss: expected ranking or logistic");
    }
    auto bound = [](const std::string& key, const std::string& v) -> std::optional<double> {
      if (v == "none" || v.empty()) return std::nullopt;
      try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used == v.size()) return x;
      } catch (const std::exception&) {
      }
      throw Error(ErrorCode::Config, key + ": expected a number or none");
    };
    c.margin = margin;
    c.lambda = lambda;
    c.learning_rate = lr;
    c.adagrad_eps = eps;
    c.negatives_per_positive = negatives;
    c.batch_size = batch;
    c.max_epochs = epochs;
    c.patience = patience;
    c.eval_every = eval_every;
    c.entity_norm = bound("entity-norm", entity_norm);
    c.relation_norm = bound("relation-norm", relation_norm);
    c.seed = seed;
    c.hinge_on_raw_scores = raw_hinge;
    c.validate();
    return c;
  }
};

// TAB-separated s, p, o, label (1 = true, 0 = false).
inline std::vector<LabeledTriple> read_labeled_queries(const std::string& path,
                                                       const Vocabulary& entities,
                                                       const Vocabulary& relations) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::vector<LabeledTriple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) f.push_back(cell);
    if (f.size() != 4 || (f[3] != "0" && f[3] != "1")) {
      throw MalformedLineError(line_no, "expected subject, predicate, object, label(0/1)");
    }
    const auto s = entities.find(f[0]);
    const auto p = relations.find(f[1]);
    const auto o = entities.find(f[2]);
    if (!s || !o) throw Error(ErrorCode::VocabularyMismatch, "query entity not in checkpoint: " + (s ? f[2] : f[0]));
    if (!p) throw Error(ErrorCode::VocabularyMismatch, "query relation not in checkpoint: " + f[1]);
    out.push_back({{*s, *p, *o}, f[3] == "1"});
  }
  return out;
}

inline void write_labeled_queries(std::ostream& out, const TripleStore& store,
                                  std::span<const LabeledTriple> queries) {
  for (const auto& q : queries) {
    const auto n = store.names(q.triple);
    out << n[0] << '\t' << n[1] << '\t' << n[2] << '\t' << (q.positive ? 1 : 0) << '\n';
  }
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

inline int run_train(const TrainArgs& a, std::ostream& out) {
  const ModelSpec spec = a.model.resolve();
  const TrainConfig config = a.resolve();
  if (a.threads == 0) throw Error(ErrorCode::Config, "threads: must be >= 1");
  TripleStore store = load_store(a.train_path, a.valid_path, a.test_path);
  for (const auto& d : store.diagnostics) out << "note: " << d << '\n';

  Validator validator;
  std::string metric_name = "none";
  if (!a.valid_queries.empty()) {
    validator = auc_pr_validator(read_labeled_queries(a.valid_queries, store.entities, store.relations));
    metric_name = "auc_pr";
  } else if (!store.valid.empty()) {
    validator = filtered_mrr_validator(store, {a.threads, a.valid_max, false});
    metric_name = "mrr_filtered";
  }
  TrainResult result = train(spec, config, store, validator);

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  save_checkpoint((dir / "model.bin").string(),
                  {spec, store.entities.names(), store.relations.names(), result.params});
  {
    std::ofstream log(dir / "log.csv");
    if (!log) throw Error(ErrorCode::Io, "cannot write log.csv");
    log << "epoch,loss,val_metric,seconds\n";
    for (const auto& e : result.log) {
      log << e.epoch << ',' << format_double(e.loss) << ','
          << (e.val_metric ? format_double(*e.val_metric) : "") << ','
          << (a.log_seconds ? format_double(e.seconds) : "") << '\n';
    }
  }
  nlohmann::json m;
  m["command"] = "train";
  m["git_describe"] = HOLE_GIT_DESCRIBE;
  m["seed"] = a.seed;
  m["model"] = {{"family", to_string(spec.family)},
                {"dim", spec.entity_dim},
                {"relation_dim", spec.relation_dim},
                {"hidden", spec.hidden},
                {"transe_norm", to_string(spec.transe_norm)}};
  auto opt_json = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  m["training"] = {{"loss", to_string(config.loss)},
                   {"margin", config.margin},
                   {"lambda", config.lambda},
                   {"lr", config.learning_rate},
                   {"eps", config.adagrad_eps},
                   {"negatives", config.negatives_per_positive},
                   {"batch", config.batch_size},
                   {"epochs", config.max_epochs},
                   {"patience", config.patience},
                   {"eval_every", config.eval_every},
                   {"entity_norm", opt_json(config.entity_norm)},
                   {"relation_norm", opt_json(config.relation_norm)},
                   {"raw_hinge", config.hinge_on_raw_scores},
                   {"valid_max", a.valid_max},
                   {"validation_metric", metric_name}};
  m["data"] = {{"train", a.train_path},
               {"valid", a.valid_path},
               {"test", a.test_path},
               {"valid_queries", a.valid_queries},
               {"entities", store.entities.size()},
               {"relations", store.relations.size()},
               {"entity_hash", store.entities.hash()},
               {"relation_hash", store.relations.hash()}};
  m["result"] = {{"epochs_run", result.epochs_run},
                 {"best_epoch", result.best_epoch},
                 {"best_metric", opt_json(result.best_metric)}};
  write_json(dir / "manifest.json", m);
  out << "trained " << to_string(spec.family) << " for " << result.epochs_run << " epochs";
  if (result.best_metric) out << ", best " << metric_name << ' ' << *result.best_metric << " at epoch " << result.best_epoch;
  out << "\nwrote " << (dir / "model.bin").string() << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint, train_path, valid_path, test_path, queries, out_path, task = "link";
  std::string label;
  unsigned threads = 1;
  std::size_t max_triples = 0;
  bool per_relation = false;
};

inline int run_evaluate(const EvalArgs& a, std::ostream& out) {
  if (a.task != "link" && a.task != "auc-pr") throw Error(ErrorCode::Config, "task: expected link or auc-pr");
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const Vocabulary ents = Vocabulary::from_names(ck.entity_names);
  const Vocabulary rels = Vocabulary::from_names(ck.relation_names);
  nlohmann::json report;
  if (a.task == "auc-pr") {
    if (a.queries.empty()) throw Error(ErrorCode::Config, "queries: required for --task auc-pr");
    const auto queries = read_labeled_queries(a.queries, ents, rels);
    const double ap = evaluate_auc_pr(ck.spec, ck.params, queries);
    char buf[64];
    std::snprintf(buf, sizeof buf, "AUC-PR %.6f\n", ap);
    out << buf;
    report = {{"auc_pr", ap}, {"n_queries", queries.size()}};
  } else {
    if (a.test_path.empty()) throw Error(ErrorCode::Config, "test: required for --task link");
    auto read_opt = [](const std::string& p) {
      return p.empty() ? std::vector<StringTriple>{} : read_triples_file(p);
    };
    const TripleStore store = build_store(read_opt(a.train_path), read_opt(a.valid_path),
                                          read_triples_file(a.test_path), ents, rels);
    require_same_vocabulary(ck, store);
    const auto r = evaluate_link_prediction(ck.spec, ck.params, store, Split::Test,
                                            {a.threads, a.max_triples, a.per_relation});
    out << r.to_table(a.label.empty() ? std::string(to_string(ck.spec.family)) : a.label);
    report = r.to_json();
  }
  if (!a.out_path.empty()) {
    write_json(a.out_path, report);
  } else {
    out << report.dump(2) << '\n';
  }
  return kExitOk;
}

struct PredictArgs {
  std::string checkpoint, s = "?", p, o = "?";
  std::size_t k = 10;
};

inline int run_predict(const PredictArgs& a, std::ostream& out) {
  const int wild = (a.s == "?") + (a.p == "?") + (a.o == "?");
  if (wild != 1) throw UsageError("query: exactly one of --s, --p, --o must be '?'");
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const Vocabulary ents = Vocabulary::from_names(ck.entity_names);
  const Vocabulary rels = Vocabulary::from_names(ck.relation_names);
  auto entity = [&](const std::string& n) -> EntityId {
    if (n == "?") return 0;
    const auto id = ents.find(n);
    if (!id) throw Error(ErrorCode::UnknownEntity, "unknown entity '" + n + "'");
    return *id;
  };
  auto relation = [&](const std::string& n) -> RelationId {
    if (n == "?") return 0;
    const auto id = rels.find(n);
    if (!id) throw Error(ErrorCode::UnknownRelation, "unknown relation '" + n + "'");
    return *id;
  };
  Triple q{entity(a.s), relation(a.p), entity(a.o)};
  Scorer scorer(ck.spec, ck.params);
  const bool over_relations = a.p == "?";
  const std::size_t n = over_relations ? ck.params.num_relations() : ck.params.num_entities();
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    Triple t = q;
    if (over_relations) {
      t.predicate = static_cast<RelationId>(i);
    } else if (a.s == "?") {
      t.subject = static_cast<EntityId>(i);
    } else {
      t.object = static_cast<EntityId>(i);
    }
    scores[i] = scorer.score(t);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return scores[x] > scores[y]; });
  const std::size_t shown = std::min(a.k, n);
  char buf[32];
  for (std::size_t i = 0; i < shown; ++i) {
    const auto id = static_cast<std::uint32_t>(order[i]);
    std::snprintf(buf, sizeof buf, "%.6f", sigmoid(scores[id]));
    out << (over_relations ? rels.name(id) : ents.name(id)) << ' ' << buf << '\n';
  }
  return kExitOk;
}

struct MemArgs {
  std::vector<std::size_t> dims{1024};
  std::vector<std::size_t> ks{1, 5, 10, 20, 80};
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::string out_path;
};

inline int run_memdemo(const MemArgs& a, std::ostream& out) {
  for (auto d : a.dims) {
    if (d == 0) throw Error(ErrorCode::Config, "d: must be >= 1");
  }
  std::ofstream file;
  if (!a.out_path.empty()) {
    file.open(a.out_path);
    if (!file) throw Error(ErrorCode::Io, "cannot write " + a.out_path);
  }
  std::ostream& csv = a.out_path.empty() ? out : file;
  write_capacity_header(csv);
  for (auto d : a.dims) {
    for (auto k : a.ks) {
      for (std::size_t t = 0; t < a.trials; ++t) {
        for (const auto& row : capacity_trial(d, k, t, a.seed)) write_capacity_row(csv, row);
      }
    }
  }
  return kExitOk;
}

struct CountriesArgs {
  std::string countries = "data/countries.json";
  std::string setting = "S1";
  std::uint64_t seed = 0;
  std::string out_dir;
};

inline int run_build_countries(const CountriesArgs& a, std::ostream& out) {
  const auto setting = parse_setting(a.setting);
  if (!setting) throw Error(ErrorCode::Config, "setting: expected S1, S2 or S3");
  const CountriesRaw raw = CountriesRaw::load(a.countries);
  const CountriesDataset ds = build_countries(raw, *setting, a.seed);
  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw Error(ErrorCode::Io, std::string("cannot write ") + name);
    return f;
  };
  {
    auto f = open("train.tsv");
    write_triples(f, ds.store, ds.store.train);
  }
  {
    auto f = open("valid.tsv");
    write_triples(f, ds.store, ds.store.valid);
  }
  {
    auto f = open("test.tsv");
    write_triples(f, ds.store, ds.store.test);
  }
  {
    auto f = open("valid_queries.tsv");
    write_labeled_queries(f, ds.store, ds.valid_queries);
  }
  {
    auto f = open("test_queries.tsv");
    write_labeled_queries(f, ds.store, ds.test_queries);
  }
  nlohmann::json m;
  m["command"] = "build-countries";
  m["git_describe"] = HOLE_GIT_DESCRIBE;
  m["seed"] = a.seed;
  m["setting"] = to_string(*setting);
  m["source"] = a.countries;
  m["countries"] = raw.countries.size();
  m["split"] = {{"train", ds.train_countries.size()},
                {"valid", ds.valid_countries.size()},
                {"test", ds.test_countries.size()},
                {"attempts", ds.split_attempts}};
  m["triples"] = {{"train", ds.store.train.size()},
                  {"removed", ds.removed.size()},
                  {"valid_queries", ds.valid_queries.size()},
                  {"test_queries", ds.test_queries.size()}};
  m["valid_countries"] = ds.valid_countries;
  m["test_countries"] = ds.test_countries;
  m["diagnostics"] = raw.diagnostics;
  write_json(dir / "manifest.json", m);
  out << "wrote " << to_string(*setting) << " split (" << ds.train_countries.size() << '/'
      << ds.valid_countries.size() << '/' << ds.test_countries.size() << " countries) to "
      << dir.string() << '\n';
  return kExitOk;
}

// Expands --config FILE into flags placed ahead of the user's own flags, so
// explicit flags win (options keep the last value given).
inline std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                              CLI::App& app) {
  if (args.empty()) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[0]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  std::vector<std::string> expanded{args[0]};
  for (auto [key, value] : read_config_file(config_path)) {
    std::replace(key.begin(), key.end(), '_', '-');
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") throw UsageError("config: unknown key '" + key + "'");
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1") {
        expanded.push_back("--" + key);
      } else if (value != "false" && value != "0") {
        throw UsageError("config: " + key + " expects true or false");
      }
      continue;
    }
    expanded.push_back("--" + key);
    std::stringstream ss(value);
    std::string part;
    if (opt->get_expected_max() > 1) {
      while (ss >> part) expanded.push_back(part);
    } else {
      expanded.push_back(value);
    }
  }
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Holographic embeddings of knowledge graphs", "hole"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;

  TrainArgs ta;
  ta.threads = default_threads();
  auto* train_cmd = app.add_subcommand("train", "Train a model and write model.bin, log.csv, manifest.json");
  auto add_model = [](CLI::App* c, ModelArgs& m) {
    c->add_option("--model", m.family, "hole, transe, rescal, distmult or ermlp")->capture_default_str();
    c->add_option("--dim", m.dim, "Entity embedding dimension")->capture_default_str();
    c->add_option("--hidden", m.hidden, "ER-MLP hidden width (0 = dim)")->capture_default_str();
    c->add_option("--transe-norm", m.transe_norm, "TransE distance: l1 or l2 (squared)")->capture_default_str();
  };
  add_model(train_cmd, ta.model);
  train_cmd->add_option("--config", config_path, "key=value file; flags override it");
  train_cmd->add_option("--train", ta.train_path, "Training triples (TSV)")->required();
  train_cmd->add_option("--valid", ta.valid_path, "Validation triples (TSV)");
  train_cmd->add_option("--test", ta.test_path, "Test triples (TSV), only used for filtering");
  train_cmd->add_option("--valid-queries", ta.valid_queries,
                        "Labelled validation queries (TSV s p o label); selects by AUC-PR");
  train_cmd->add_option("--out", ta.out_dir, "Output directory")->required();
  train_cmd->add_option("--loss", ta.loss, "ranking or logistic")->capture_default_str();
  train_cmd->add_option("--margin", ta.margin, "Ranking margin")->capture_default_str();
  train_cmd->add_option("--lambda", ta.lambda, "L2 regularization weight")->capture_default_str();
  train_cmd->add_option("--lr", ta.lr, "AdaGrad learning rate")->capture_default_str();
  train_cmd->add_option("--eps", ta.eps, "AdaGrad epsilon")->capture_default_str();
  train_cmd->add_option("--negatives", ta.negatives, "Negatives per positive")->capture_default_str();
  train_cmd->add_option("--batch", ta.batch, "Mini-batch size")->capture_default_str();
  train_cmd->add_option("--epochs", ta.epochs, "Maximum epochs")->capture_default_str();
  train_cmd->add_option("--patience", ta.patience, "Evaluations without improvement before stopping (0 = never)")->capture_default_str();
  train_cmd->add_option("--eval-every", ta.eval_every, "Epochs between validations")->capture_default_str();
  train_cmd->add_option("--valid-max", ta.valid_max, "Validate on the first N valid triples (0 = all)")->capture_default_str();
  train_cmd->add_option("--entity-norm", ta.entity_norm, "Entity norm bound, or none")->capture_default_str();
  train_cmd->add_option("--relation-norm", ta.relation_norm, "Relation norm bound, or none")->capture_default_str();
  train_cmd->add_flag("--raw-hinge", ta.raw_hinge, "Apply the ranking hinge to raw scores instead of probabilities");
  train_cmd->add_flag("--log-seconds", ta.log_seconds, "Fill the wall-time column of log.csv (not reproducible)");
  train_cmd->add_option("--seed", ta.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--threads", ta.threads, "Threads for validation scoring");

  EvalArgs ea;
  ea.threads = default_threads();
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  eval_cmd->add_option("--config", config_path, "key=value file; flags override it");
  eval_cmd->add_option("--checkpoint", ea.checkpoint, "model.bin written by train")->required();
  eval_cmd->add_option("--task", ea.task, "link or auc-pr")->capture_default_str();
  eval_cmd->add_option("--train", ea.train_path, "Training triples, for filtering");
  eval_cmd->add_option("--valid", ea.valid_path, "Validation triples, for filtering");
  eval_cmd->add_option("--test", ea.test_path, "Test triples to rank");
  eval_cmd->add_option("--queries", ea.queries, "Labelled queries (TSV s p o label) for auc-pr");
  eval_cmd->add_option("--out", ea.out_path, "Write the JSON report here instead of stdout");
  eval_cmd->add_option("--label", ea.label, "Row label in the table");
  eval_cmd->add_option("--max-triples", ea.max_triples, "Rank only the first N test triples (0 = all)");
  eval_cmd->add_flag("--per-relation", ea.per_relation, "Add per-relation metrics to the JSON");
  eval_cmd->add_option("--threads", ea.threads, "Scoring threads");
  eval_cmd->add_option("--seed", ta.seed, "Accepted for uniformity; evaluation is deterministic");

  PredictArgs pa;
  auto* predict_cmd = app.add_subcommand("predict", "Rank completions of a triple with one '?' slot");
  predict_cmd->add_option("--config", config_path, "key=value file; flags override it");
  predict_cmd->add_option("--checkpoint", pa.checkpoint, "model.bin written by train")->required();
  predict_cmd->add_option("--s", pa.s, "Subject name or ?")->capture_default_str();
  predict_cmd->add_option("--p", pa.p, "Relation name or ?")->required();
  predict_cmd->add_option("--o", pa.o, "Object name or ?")->capture_default_str();
  predict_cmd->add_option("-k,--top", pa.k, "Number of completions")->capture_default_str();

  MemArgs ma;
  auto* mem_cmd = app.add_subcommand("memdemo", "Associative-memory capacity sweep (CSV)");
  mem_cmd->add_option("--config", config_path, "key=value file; flags override it");
  mem_cmd->add_option("--d", ma.dims, "Dimensions")->capture_default_str()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  mem_cmd->add_option("--k", ma.ks, "Stored pair counts")->capture_default_str()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  mem_cmd->add_option("--trials", ma.trials, "Trials per (d, k)")->capture_default_str();
  mem_cmd->add_option("--seed", ma.seed, "Random seed")->capture_default_str();
  mem_cmd->add_option("--out", ma.out_path, "CSV path (default stdout)");

  CountriesArgs ca;
  auto* countries_cmd = app.add_subcommand("build-countries", "Write a Countries S1/S2/S3 split");
  countries_cmd->add_option("--config", config_path, "key=value file; flags override it");
  countries_cmd->add_option("--countries", ca.countries, "Country records (JSON)")->capture_default_str();
  countries_cmd->add_option("--setting", ca.setting, "S1, S2 or S3")->capture_default_str();
  countries_cmd->add_option("--seed", ca.seed, "Split seed")->capture_default_str();
  countries_cmd->add_option("--out", ca.out_dir, "Output directory")->required();

  try {
    std::vector<std::string> expanded = expand_config(args, app);
    std::vector<const char*> argv{"hole"};
    for (const auto& s : expanded) argv.push_back(s.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands()[0]->help());
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }
    if (*train_cmd) return run_train(ta, out);
    if (*eval_cmd) return run_evaluate(ea, out);
    if (*predict_cmd) return run_predict(pa, out);
    if (*mem_cmd) return run_memdemo(ma, out);
    if (*countries_cmd) return run_build_countries(ca, out);
    err << "error: no command\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::Config:
      case ErrorCode::UnknownEntity:
      case ErrorCode::UnknownRelation:
        return kExitUsage;
      default:
        return kExitRuntime;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace hole::cli
