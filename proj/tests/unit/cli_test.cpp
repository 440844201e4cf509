#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bhavnet/checkpoint.hpp"
#include "bhavnet/hyperparams.hpp"
#include "bhavnet/synthetic.hpp"
#include "cli.hpp"

using namespace bhavnet;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "bhavnet");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

class CliTest : public ::testing::Test {
 protected:
  fs::path dir = fs::temp_directory_path() / "bhavnet_cli_test";

  void SetUp() override {
    fs::remove_all(dir);
    fs::create_directories(dir);
    write(dir / "emb.txt",
          "hot 1 0 0 0\ncold -1 0.1 0 0\nicy -0.9 0.2 0 0\nbig 0 1 0 0\nsmall 0 -1 0.1 0\n");
    write(dir / "fixture.tsv", "hot\tcold\t1\ncold\ticy\t0\nbig\tsmall\t1\n");

    SyntheticSpec spec;
    spec.dim = 8;
    spec.train = 40;
    spec.dev = 0;
    spec.test = 0;
    const SyntheticTask task = make_synthetic_task(spec);
    write_embeddings(task.table, dir / "syn_emb.txt");
    write(dir / "syn_pairs.tsv", format_pairs(task.train));
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string p(const char* name) const { return (dir / name).string(); }

  // Small model, three epochs.
  Result train_small(const std::string& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"train",       "--embeddings", p("syn_emb.txt"), "--pairs", p("syn_pairs.tsv"),
                                  "--out",       out,            "--d_prime",      "4",       "--fused_dim",
                                  "8",           "--H",          "2",              "--L_layers", "1",
                                  "--epochs",    "3",            "--batch_size",   "8",       "--quiet",
                                  "--split",     "0.6,0.2,0.2"};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  }
};

}  // namespace

TEST_F(CliTest, HelpListsEveryHyperparameter) {
  for (const char* sub : {"train", "graph-dump", "gradcheck"}) {
    const Result r = run({sub, "--help"});
    EXPECT_EQ(r.code, 0);
    for (const auto& key : hyperparam_keys()) EXPECT_NE(r.out.find("--" + key), std::string::npos) << sub << " " << key;
  }
}

TEST_F(CliTest, MissingEmbeddingsFlagIsAConfigError) {
  const Result r = run({"train", "--pairs", p("fixture.tsv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--embeddings"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownConfigKeyIsAConfigError) {
  write(dir / "bad.json", R"({"depth": 3})");
  const Result r = run({"gradcheck", "--config", p("bad.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("depth"), std::string::npos) << r.err;
}

TEST_F(CliTest, GraphDumpReproducesSharedWordFixture) {
  const Result r = run({"graph-dump", "--embeddings", p("emb.txt"), "--pairs", p("fixture.tsv"), "--tau", "1.01", "--d_prime", "4",
                        "--fused_dim", "8", "--H", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("0 1 1 1\n1 0 1 1\n# nodes 3\n", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("# components 2"), std::string::npos);
}

TEST_F(CliTest, GradcheckPassesOnTinyConfig) {
  const Result r = run({"gradcheck"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("OK"), std::string::npos);
  const double err = std::stod(r.out.substr(r.out.find("max_relative_error ") + 19));
  EXPECT_LT(err, 1e-4);
}

TEST_F(CliTest, TrainWritesRunDirectoryAndEchoesConfig) {
  const std::string out = p("run");
  const Result r = train_small(out, {"--lambda", "0", "--seed", "9"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "run" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(dir / "run" / "checkpoints" / "best.ckpt"));
  EXPECT_TRUE(fs::exists(dir / "run" / "report.txt"));
  EXPECT_NE(r.out.find("mean_margin_contribution 0\n"), std::string::npos) << r.out;

  const HyperParams echoed = load_hyperparams(dir / "run" / "config.json");
  EXPECT_EQ(echoed.lambda_w, 0.0);
  EXPECT_EQ(echoed.seed, 9u);
  EXPECT_EQ(echoed.epochs, 3u);
  // Running again from the echoed config gives the same effective config.
  const Result again = run({"train", "--embeddings", p("syn_emb.txt"), "--pairs", p("syn_pairs.tsv"), "--out", p("run2"),
                            "--config", (dir / "run" / "config.json").string(), "--quiet", "--split", "0.6,0.2,0.2"});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(load_hyperparams(dir / "run2" / "config.json"), echoed);
  std::ifstream a(dir / "run" / "metrics.csv"), b(dir / "run2" / "metrics.csv");
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}), std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST_F(CliTest, FlagsOverrideConfigFile) {
  write(dir / "cfg.json", R"({"epochs": 7, "lr": 0.5})");
  const Result r = train_small(p("run"), {"--config", p("cfg.json"), "--epochs", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const HyperParams hp = load_hyperparams(dir / "run" / "config.json");
  EXPECT_EQ(hp.epochs, 2u);
  EXPECT_EQ(hp.lr, 0.5);
}

TEST_F(CliTest, RunRootFromEnvironment) {
  const std::string root = p("root");
  ::setenv(cli::kRunRootEnv, root.c_str(), 1);
  const Result r = train_small("", {"--run-name", "named", "--epochs", "1"});
  ::unsetenv(cli::kRunRootEnv);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "root" / "named" / "report.txt"));
}

TEST_F(CliTest, PredictEvalAndErrorCodes) {
  ASSERT_EQ(train_small(p("run")).code, 0);
  const std::string ckpt = (dir / "run" / "checkpoints" / "best.ckpt").string();

  const Result pr = run({"predict", "--checkpoint", ckpt, "--embeddings", p("syn_emb.txt"), "a0", "b0"});
  ASSERT_EQ(pr.code, 0) << pr.err;
  std::istringstream fields(pr.out);
  double prob, ss, sa;
  int label;
  ASSERT_TRUE(fields >> prob >> ss >> sa >> label) << pr.out;
  EXPECT_EQ(label, prob >= 0.5 ? 1 : 0);

  const Result oov = run({"predict", "--checkpoint", ckpt, "--embeddings", p("syn_emb.txt"), "a0", "zebra"});
  EXPECT_EQ(oov.code, 3);
  EXPECT_NE(oov.err.find("zebra"), std::string::npos) << oov.err;

  const Result ev = run({"eval", "--checkpoint", ckpt, "--embeddings", p("syn_emb.txt"), "--pairs", p("syn_pairs.tsv")});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_NE(ev.out.find("macro_f1"), std::string::npos);

  write(dir / "corrupt.ckpt", "BHAVNETC garbage");
  EXPECT_EQ(run({"eval", "--checkpoint", p("corrupt.ckpt"), "--embeddings", p("syn_emb.txt"), "--pairs", p("syn_pairs.tsv")}).code,
            4);
  EXPECT_EQ(run({"predict", "--checkpoint", p("nothing.ckpt"), "--embeddings", p("syn_emb.txt"), "a0", "b0"}).code, 4);
}

TEST_F(CliTest, BadInputsAreConfigErrors) {
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"gradcheck", "--H", "3"}).code, 2);
  EXPECT_EQ(run({"gradcheck", "--H", "two"}).code, 2);
  EXPECT_EQ(train_small(p("run"), {"--split", "0.5,0.5"}).code, 2);
  EXPECT_EQ(run({"graph-dump", "--embeddings", p("missing.txt"), "--pairs", p("fixture.tsv")}).code, 2);
}
