#ifndef LBD_TESTS_SUPPORT_HPP_
#define LBD_TESTS_SUPPORT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lbd/embed.hpp"
#include "lbd/graph.hpp"
#include "lbd/ingest.hpp"
#include "lbd/predictor.hpp"
#include "lbd/query.hpp"
#include "lbd/random.hpp"

namespace lbd::testing {

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& contents);

// A corpus plus the vocabulary file text that goes with it.
struct SyntheticCorpus {
  std::vector<Document> docs;
  std::string vocabulary_tsv;
  std::vector<std::string> codes;

  std::string corpus_jsonl() const;
};

// Random abstracts mentioning 12 coded terms among filler words.
SyntheticCorpus random_corpus(int documents, std::uint64_t seed);

// Theme A sentences mention the source code, theme B sentences the target,
// and the two only meet through sentences drawn from a connector theme.
struct BridgedCorpus {
  SyntheticCorpus corpus;
  std::string source_code;
  std::string target_code;
  std::vector<std::string> connector_words;
};
BridgedCorpus bridged_corpus(std::uint64_t seed);

// In-memory ingest -> graph -> embed.
struct Pipeline {
  Vocabulary vocab;
  SemanticGraph graph;
  EmbeddingTable table;
};
Pipeline build_pipeline(const SyntheticCorpus& corpus, const EmbedParams& params);

// Hand-built inputs behind the golden files: a one-unit scorer where
// score = sigmoid(relu(u * v)) over 1-d embeddings, and a two-topic model
// with a peaked and a uniform distribution.
RankedTable golden_ranked_table(double promising_threshold = 0.7);
std::string golden_topic_listings();
std::string read_golden(const std::string& name);

// Random connected or disconnected token sets over `sentences` sentence
// nodes and `tokens` lemma nodes.
std::vector<TokenSet> random_token_sets(int sentences, int tokens, double density, Rng& rng);

}  // namespace lbd::testing

#endif  // LBD_TESTS_SUPPORT_HPP_
