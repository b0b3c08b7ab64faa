#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hole/cli.hpp"

namespace fs = std::filesystem;
using hole::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hole_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream train(dir_ / "train.tsv");
    for (int i = 0; i < 12; ++i) {
      train << "n" << i << "\tnext\tn" << (i + 1) % 12 << '\n';
      train << "n" << i << "\tparity\t" << (i % 2 ? "odd" : "even") << '\n';
    }
    std::ofstream valid(dir_ / "valid.tsv");
    valid << "n0\tnext\tn2\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::vector<std::string> train_args(const std::string& out) const {
    return {"train", "--train", (dir_ / "train.tsv").string(), "--valid", (dir_ / "valid.tsv").string(),
            "--out", (dir_ / out).string(), "--dim", "8", "--epochs", "6", "--eval-every", "2",
            "--batch", "4", "--seed", "3", "--threads", "2"};
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, MissingTrainIsUsageError) {
  const auto r = call({"train", "--out", (dir_ / "x").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("train"), std::string::npos);
}

TEST_F(CliTest, HelpExitsZero) {
  EXPECT_EQ(call({"--help"}).code, 0);
  const auto r = call({"train", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--negatives"), std::string::npos);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"bogus"}).code, 2);
}

TEST_F(CliTest, TrainWritesArtifactsAndIsReproducible) {
  ASSERT_EQ(call(train_args("a")).code, 0);
  ASSERT_EQ(call(train_args("b")).code, 0);
  for (const char* f : {"model.bin", "log.csv", "manifest.json"}) EXPECT_TRUE(fs::exists(dir_ / "a" / f)) << f;
  EXPECT_EQ(slurp(dir_ / "a" / "log.csv"), slurp(dir_ / "b" / "log.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "model.bin"), slurp(dir_ / "b" / "model.bin"));
  const auto log = slurp(dir_ / "a" / "log.csv");
  EXPECT_EQ(log.rfind("epoch,loss,val_metric,seconds\n", 0), 0u);
  const auto m = nlohmann::json::parse(slurp(dir_ / "a" / "manifest.json"));
  EXPECT_EQ(m["seed"], 3);
  EXPECT_EQ(m["model"]["family"], "hole");
  EXPECT_TRUE(m.contains("git_describe"));
  EXPECT_EQ(m["training"]["validation_metric"], "mrr_filtered");
}

TEST_F(CliTest, ConfigFileIsOverriddenByFlags) {
  std::ofstream cfg(dir_ / "run.cfg");
  cfg << "# tiny run\nepochs = 2\ndim=4\nseed=9\n";
  cfg.close();
  auto args = train_args("c");
  args.push_back("--config");
  args.push_back((dir_ / "run.cfg").string());
  ASSERT_EQ(call(args).code, 0);
  const auto m = nlohmann::json::parse(slurp(dir_ / "c" / "manifest.json"));
  EXPECT_EQ(m["training"]["epochs"], 6);  // flag wins
  EXPECT_EQ(m["seed"], 3);

  std::ofstream only(dir_ / "only.cfg");
  only << "train=" << (dir_ / "train.tsv").string() << "\nout=" << (dir_ / "d").string()
       << "\nepochs=1\nentity_norm=none\n";
  only.close();
  ASSERT_EQ(call({"train", "--config", (dir_ / "only.cfg").string()}).code, 0);
  const auto md = nlohmann::json::parse(slurp(dir_ / "d" / "manifest.json"));
  EXPECT_EQ(md["training"]["epochs"], 1);
  EXPECT_TRUE(md["training"]["entity_norm"].is_null());

  std::ofstream bad(dir_ / "bad.cfg");
  bad << "no_such_key=1\n";
  bad.close();
  const auto r = call({"train", "--config", (dir_ / "bad.cfg").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("no-such-key"), std::string::npos);
}

TEST_F(CliTest, InvalidHyperparameterIsUsageError) {
  auto args = train_args("e");
  args.insert(args.end(), {"--lr", "-1"});
  EXPECT_EQ(call(args).code, 2);
}

TEST_F(CliTest, PredictAndEvaluate) {
  ASSERT_EQ(call(train_args("m")).code, 0);
  const auto ck = (dir_ / "m" / "model.bin").string();
  const auto p = call({"predict", "--checkpoint", ck, "--s", "n3", "--p", "next", "-k", "1000"});
  ASSERT_EQ(p.code, 0);
  EXPECT_EQ(std::count(p.out.begin(), p.out.end(), '\n'), 14);  // every entity once
  const auto rel = call({"predict", "--checkpoint", ck, "--s", "n3", "--p", "?", "--o", "odd"});
  ASSERT_EQ(rel.code, 0);
  EXPECT_EQ(std::count(rel.out.begin(), rel.out.end(), '\n'), 2);
  EXPECT_EQ(call({"predict", "--checkpoint", ck, "--s", "mars", "--p", "next"}).code, 2);
  EXPECT_EQ(call({"predict", "--checkpoint", ck, "--s", "n1", "--p", "next", "--o", "n2"}).code, 2);

  const auto e = call({"evaluate", "--checkpoint", ck, "--train", (dir_ / "train.tsv").string(), "--test",
                       (dir_ / "valid.tsv").string(), "--threads", "1"});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("mrr_filtered"), std::string::npos);

  std::ofstream q(dir_ / "q.tsv");
  q << "n0\tnext\tn1\t1\nn0\tnext\tn7\t0\n";
  q.close();
  const auto a = call({"evaluate", "--checkpoint", ck, "--task", "auc-pr", "--queries", (dir_ / "q.tsv").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("AUC-PR"), std::string::npos);
}

TEST_F(CliTest, CheckpointErrors) {
  ASSERT_EQ(call(train_args("m")).code, 0);
  const auto ck = dir_ / "m" / "model.bin";
  std::ofstream other(dir_ / "other.tsv");
  other << "x\tnext\ty\n";
  other.close();
  const auto mism = call({"evaluate", "--checkpoint", ck.string(), "--train", (dir_ / "other.tsv").string(),
                          "--test", (dir_ / "other.tsv").string()});
  EXPECT_EQ(mism.code, 1);
  EXPECT_NE(mism.err.find("VocabularyMismatch"), std::string::npos);

  auto bytes = slurp(ck);
  bytes[0] = '#';
  std::ofstream(dir_ / "broken.bin", std::ios::binary) << bytes;
  const auto r = call({"predict", "--checkpoint", (dir_ / "broken.bin").string(), "--s", "n1", "--p", "next"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("checkpoint"), std::string::npos);
}

TEST_F(CliTest, MemDemoRows) {
  const auto r = call({"memdemo", "--d", "64", "--k", "1", "3", "--trials", "5", "--seed", "1"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1 + 5 * (1 + 3));
  const auto empty = call({"memdemo", "--trials", "0"});
  EXPECT_EQ(empty.out, "d,k,trial,cosine,cleanup_correct\n");
  EXPECT_EQ(call({"memdemo", "--d", "0"}).code, 2);
}

TEST_F(CliTest, BuildCountriesWritesSplit) {
  const auto out = dir_ / "countries";
  const auto r = call({"build-countries", "--countries", HOLE_DATA_DIR "/countries.json", "--setting", "S2",
                       "--seed", "1", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"train.tsv", "valid.tsv", "test.tsv", "valid_queries.tsv", "test_queries.tsv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto q = slurp(out / "test_queries.tsv");
  EXPECT_EQ(std::count(q.begin(), q.end(), '\n'), 5 * 25);
  EXPECT_EQ(call({"build-countries", "--setting", "S9", "--out", out.string()}).code, 2);
}
