#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "json.hpp"
#include "lbd/error.hpp"
#include "lbd/stages.hpp"
#include "lbd/text_format.hpp"
#include "support.hpp"

namespace lbd {
namespace {

namespace fs = std::filesystem;

// Runs the CLI with stdout/stderr captured to a file; returns the exit code.
int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(LBD_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto corpus = testing::random_corpus(40, 17);
    testing::write_text(dir_ / "corpus.jsonl", corpus.corpus_jsonl());
    testing::write_text(dir_ / "vocab.tsv", corpus.vocabulary_tsv);
    std::string pairs = "# candidate pairs\n";
    for (int i = 0; i < 4; ++i) {
      for (int j = 4; j < 9; ++j) pairs += corpus.codes[i] + "\t" + corpus.codes[j] + "\n";
    }
    testing::write_text(dir_ / "pairs.txt", pairs);
    art_ = "--artifacts " + (dir_ / "art").string();
  }

  int run(const std::string& args) { return run_cli(args + " " + art_, dir_ / "log.txt"); }
  std::string log() const { return read_file(dir_ / "log.txt"); }

  testing::TempDir dir_{"cli"};
  std::string art_;
};

TEST_F(CliTest, StageBeforeItsInputsIsMissingArtifact) {
  EXPECT_EQ(run("embed"), exit_code_for(ErrorKind::kMissingArtifact));
  EXPECT_NE(log().find("build-graph"), std::string::npos);
  EXPECT_NE(exit_code_for(ErrorKind::kMissingArtifact), 0);
}

TEST_F(CliTest, BadFlagsAndMissingFiles) {
  EXPECT_EQ(run("frobnicate"), exit_code_for(ErrorKind::kInvalidArgument));
  EXPECT_EQ(run("ingest " + (dir_ / "nope.jsonl").string() + " " + (dir_ / "vocab.tsv").string()),
            exit_code_for(ErrorKind::kIoFailure));
}

TEST_F(CliTest, FullPipeline) {
  const std::string in = (dir_ / "corpus.jsonl").string() + " " + (dir_ / "vocab.tsv").string();
  ASSERT_EQ(run("ingest " + in), 0) << log();
  ASSERT_EQ(run("build-graph"), 0) << log();
  ASSERT_EQ(run("embed --dim 8 --epochs 2 --seed 3"), 0) << log();
  ASSERT_EQ(run("train-predictor --epochs 5"), 0) << log();
  ASSERT_EQ(run("rank " + (dir_ / "pairs.txt").string() + " --threshold 0.7"), 0) << log();

  const std::string ranked = read_file(dir_ / "art" / artifact::kRanked);
  EXPECT_TRUE(ranked.starts_with("code_a\tcode_b\tscore\tlabel_a\tlabel_b\tpromising\n"));
  EXPECT_EQ(std::count(ranked.begin(), ranked.end(), '\n'), 21);

  const auto out1 = dir_ / "q1.json";
  const auto out2 = dir_ / "q2.json";
  const std::string q = "query C0011849 C0020538 --topics 4 --knn-k 2 --iterations 40 --seed 5 "
                        "--bias coded=3,lemma=1,entity=3,ngram=2 -o ";
  ASSERT_EQ(run(q + out1.string()), 0) << log();
  ASSERT_EQ(run(q + out2.string()), 0) << log();
  EXPECT_EQ(read_file(out1), read_file(out2));
  const auto doc = nlohmann::json::parse(read_file(out1));
  EXPECT_EQ(doc["query"]["params"]["bias"]["coded"], 3);

  ASSERT_EQ(run("export-figure " + out1.string()), 0) << log();
  EXPECT_TRUE(fs::exists(dir_ / "q1.svg"));
  EXPECT_TRUE(fs::exists(dir_ / "q1.coords.tsv"));

  const auto manifest =
      nlohmann::json::parse(read_file(dir_ / "art" / "manifest-embed.json"));
  EXPECT_EQ(manifest["seeds"]["embed"], 3);
  const std::string graph_path = (dir_ / "art" / artifact::kGraph).string();
  EXPECT_EQ(manifest["inputs"][graph_path], sha256_hex(read_file(graph_path)));

  EXPECT_EQ(run("query C0011849 C0020538 --bias coded=9"),
            exit_code_for(ErrorKind::kInvalidArgument));
  EXPECT_EQ(run("query C0011849 C9999999"), exit_code_for(ErrorKind::kNodeNotFound));
}

TEST_F(CliTest, EnvironmentAndConfigFileDefaults) {
  const std::string in = (dir_ / "corpus.jsonl").string() + " " + (dir_ / "vocab.tsv").string();
  ASSERT_EQ(run("ingest " + in), 0) << log();
  ASSERT_EQ(run("build-graph"), 0) << log();
  testing::write_text(dir_ / "lbd.toml", "seed = 21\n[embed]\ndim = 6\n");
  ASSERT_EQ(run("--config " + (dir_ / "lbd.toml").string() + " embed --epochs 1"), 0) << log();
  auto manifest = nlohmann::json::parse(read_file(dir_ / "art" / "manifest-embed.json"));
  EXPECT_EQ(manifest["config"]["dim"], 6);
  EXPECT_EQ(manifest["seeds"]["embed"], 21);

  // Flags beat the environment, which beats the config file.
  ASSERT_EQ(run("--config " + (dir_ / "lbd.toml").string() + " embed --epochs 1 --dim 5"), 0);
  manifest = nlohmann::json::parse(read_file(dir_ / "art" / "manifest-embed.json"));
  EXPECT_EQ(manifest["config"]["dim"], 5);
  ::setenv("LBD_DIM", "7", 1);
  ASSERT_EQ(run("--config " + (dir_ / "lbd.toml").string() + " embed --epochs 1"), 0);
  ::unsetenv("LBD_DIM");
  manifest = nlohmann::json::parse(read_file(dir_ / "art" / "manifest-embed.json"));
  EXPECT_EQ(manifest["config"]["dim"], 7);
}

TEST(PairsFile, ParsesCommentsAndRejectsOddRows) {
  const auto pairs = parse_pairs_file("# header\nc1 c2\n\nc3\tc4  # trailing\n");
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[1].b, "c4");
  EXPECT_THROW(parse_pairs_file("c1 c2 c3\n"), Error);
}

}  // namespace
}  // namespace lbd
