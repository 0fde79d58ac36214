#include <gtest/gtest.h>

#include <sstream>

#include "commands.hpp"
#include "test_support.hpp"

using namespace gad;
using namespace gad::testing;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<nlohmann::json> json_lines(const std::string& text) {
  std::vector<nlohmann::json> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("cli");
    save_graph(path("train1.gadg"), labelled_graph(150, 6, 1, "train1"));
    save_graph(path("train2.gadg"), labelled_graph(150, 11, 2, "train2"));
    save_graph(path("test.gadg"), labelled_graph(120, 9, 3, "test"));
    std::ofstream(path("config.json")) << R"({"train": {"epochs": 3, "n_k": 5, "seed": 2},
      "encoder": {"hidden": 8}, "align": {"unified_dim": 8}, "zero_shot": {"n_k": 5}})";
    const Result r = run({"train", "--config", path("config.json"), "--out", path("model.gadp"), path("train1.gadg"),
                          path("train2.gadg")});
    ASSERT_EQ(r.code, 0) << r.err;
    training_log_ = new std::string(r.out);
  }
  static void TearDownTestSuite() {
    delete dir_;
    delete training_log_;
  }
  static std::string path(const std::string& name) { return (*dir_ / name).string(); }

  static TempDir* dir_;
  static std::string* training_log_;
};

TempDir* CliTest::dir_ = nullptr;
std::string* CliTest::training_log_ = nullptr;

}  // namespace

TEST_F(CliTest, TrainLogsOneLinePerEpochAndDataset) {
  const auto rows = json_lines(*training_log_);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].at("dataset"), "train1");
  EXPECT_EQ(rows[1].at("dataset"), "train2");
  EXPECT_EQ(rows[5].at("epoch"), 3);
  const Checkpoint ckpt = load_checkpoint(path("model.gadp"));
  EXPECT_EQ(ckpt.config_echo.at("train").at("epochs"), 3);
  EXPECT_EQ(ckpt.model.config.align.unified_dim, 8u);
}

TEST_F(CliTest, FewShotScoreAndEval) {
  Result r = run({"score", "--mode", "fewshot", "--checkpoint", path("model.gadp"), "--graph", path("test.gadg"), "--out",
                  path("few.csv"), "--normal-ids", "0,1,2,3,4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("few.csv"));
  EXPECT_EQ(csv.rfind("node_id,score\n5,", 0), 0u);
  r = run({"eval", "--scores", path("few.csv"), "--graph", path("test.gadg")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  for (const char* key : {"auroc", "auprc", "positives", "negatives", "dataset", "scored"})
    EXPECT_TRUE(report.contains(key)) << key;
  EXPECT_EQ(report.at("scored"), 115);

  // The report matches the library metrics on the same ids.
  const Graph g = load_graph(path("test.gadg"));
  std::vector<double> s;
  std::vector<std::uint8_t> y;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    y.push_back(g.labels()[std::stoul(line.substr(0, comma))]);
    s.push_back(std::stod(line.substr(comma + 1)));
  }
  EXPECT_NEAR(report.at("auroc").get<double>(), brute_auroc(s, y), 1e-12);
}

TEST_F(CliTest, ZeroShotOnUnlabelledGraph) {
  save_graph(path("unlabelled.gadg"), load_graph(path("test.gadg")).without_labels());
  const Result r = run({"score", "--mode", "zeroshot", "--checkpoint", path("model.gadp"), "--graph",
                        path("unlabelled.gadg"), "--out", path("zero.csv"), "--trace", path("trace.json"),
                        "--config", path("config.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto trace = nlohmann::json::parse(slurp(path("trace.json")));
  EXPECT_EQ(trace.at("rounds").size(), 3u);
  EXPECT_EQ(trace.at("rounds")[0].at("context").size(), 5u);
  // n rows + header.
  const std::string csv = slurp(path("zero.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 121);
}

TEST_F(CliTest, ScoreIsByteIdenticalAcrossRuns) {
  for (const char* name : {"a.csv", "b.csv"}) {
    ASSERT_EQ(run({"score", "--mode", "zeroshot", "--checkpoint", path("model.gadp"), "--graph", path("test.gadg"),
                   "--out", path(name)})
                  .code,
              0);
  }
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}

TEST_F(CliTest, ExitCodes) {
  // Contract: fewshot without ids, zeroshot with ids.
  EXPECT_EQ(run({"score", "--mode", "fewshot", "--checkpoint", path("model.gadp"), "--graph", path("test.gadg"),
                 "--out", path("x.csv")})
                .code,
            cli::kExitConfig);
  EXPECT_EQ(run({"score", "--mode", "zeroshot", "--checkpoint", path("model.gadp"), "--graph", path("test.gadg"),
                 "--out", path("x.csv"), "--normal-ids", "1"})
                .code,
            cli::kExitConfig);
  // Parse errors and unknown subcommands.
  EXPECT_EQ(run({}).code, cli::kExitConfig);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitConfig);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
  // Data errors.
  EXPECT_EQ(run({"eval", "--scores", path("missing.csv"), "--graph", path("test.gadg")}).code, cli::kExitData);
  std::ofstream(path("bad_ids.csv")) << "node_id,score\n0,0.5\n999,0.1\n";
  EXPECT_EQ(run({"eval", "--scores", path("bad_ids.csv"), "--graph", path("test.gadg")}).code, cli::kExitData);
  std::ofstream(path("dup_ids.csv")) << "node_id,score\n0,0.5\n0,0.1\n";
  EXPECT_EQ(run({"eval", "--scores", path("dup_ids.csv"), "--graph", path("test.gadg")}).code, cli::kExitConfig);
  // Unknown config key.
  std::ofstream(path("bad.json")) << R"({"train": {"epoch": 1}})";
  EXPECT_EQ(run({"train", "--config", path("bad.json"), "--out", path("y.gadp"), path("train1.gadg")}).code,
            cli::kExitConfig);
}

TEST_F(CliTest, InjectWritesRequestedLabels) {
  save_graph(path("clean.gadg"), random_graph(100, 200, 4, 3));
  Result r = run({"inject", path("clean.gadg"), path("dirty.gadg"), "--clique-size", "4", "--clique-count", "2",
                  "--attribute-count", "5", "--seed", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Graph g = load_graph(path("dirty.gadg"));
  EXPECT_EQ(g.anomaly_count(), 13u);
  EXPECT_EQ(nlohmann::json::parse(slurp(path("dirty.meta.json"))).at("anomaly_count"), 13);
  r = run({"inject", path("clean.gadg"), path("dirty2.gadg"), "--clique-size", "4", "--clique-count", "2",
           "--attribute-count", "5", "--seed", "7"});
  EXPECT_EQ(slurp(path("dirty.gadg")), slurp(path("dirty2.gadg")));
  // Infeasible spec is a config/contract error.
  EXPECT_EQ(run({"inject", path("clean.gadg"), path("z.gadg"), "--clique-size", "50", "--clique-count", "3"}).code,
            cli::kExitConfig);
}

TEST_F(CliTest, SynthPreset) {
  const Result r = run({"synth", "--preset", "acceptance", "--out", path("suite"), "--nodes", "200", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* name : {"train_a", "train_b", "train_c", "test_a", "test_b"}) {
    const Graph g = load_graph(path(std::string("suite/") + name + ".gadg"));
    EXPECT_EQ(g.node_count(), 200u);
    EXPECT_GT(g.anomaly_count(), 0u);
  }
}

TEST_F(CliTest, SweepRowsAndOrderIndependence) {
  const auto base = std::vector<std::string>{"sweep", "--param", "n_k", "--mode", "fewshot", "--graphs",
                                             path("test.gadg"), "--checkpoint", path("model.gadp"), "--repeats", "2"};
  auto with = [&](const char* values) {
    auto args = base;
    args.insert(args.end(), {"--values", values});
    return run(args);
  };
  const Result a = with("2,10"), b = with("10,2");
  ASSERT_EQ(a.code, 0) << a.err;
  const auto rows = nlohmann::json::parse(a.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].at("value"), 2);
  EXPECT_EQ(rows[0].at("seeds").size(), 2u);
  EXPECT_TRUE(rows[0].contains("auroc_std"));
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, BenchAndExport) {
  Result r = run({"bench", "--checkpoint", path("model.gadp"), "--nodes", "300", "--edges", "600,1200", "--dim", "16",
                  "--repeats", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = nlohmann::json::parse(r.out);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& row : rows) EXPECT_GT(row.at("seconds").get<double>(), 0.0);
  EXPECT_EQ(run({"bench", "--checkpoint", path("model.gadp"), "--edges", "600"}).code, cli::kExitConfig);

  r = run({"export", "--graph", path("test.gadg"), "--out", path("emb.csv"), "--embeddings", "--checkpoint",
           path("model.gadp")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("emb.csv")).rfind("node_id,h0,h1", 0), 0u);
  r = run({"export", "--graph", path("test.gadg"), "--out", path("att.csv"), "--attention", "--checkpoint",
           path("model.gadp"), "--normal-ids", "0,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("att.csv")).rfind("query_id,ctx_0,ctx_1\n", 0), 0u);
  EXPECT_EQ(run({"export", "--graph", path("test.gadg"), "--out", path("e.csv"), "--edges"}).code, 0);
  EXPECT_EQ(run({"export", "--graph", path("test.gadg"), "--out", path("e.csv")}).code, cli::kExitConfig);
}
