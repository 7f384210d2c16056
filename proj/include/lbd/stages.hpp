#ifndef LBD_STAGES_HPP_
#define LBD_STAGES_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"
#include "lbd/embed.hpp"
#include "lbd/error.hpp"
#include "lbd/graph.hpp"
#include "lbd/ingest.hpp"
#include "lbd/predictor.hpp"
#include "lbd/query.hpp"

namespace lbd {

// Stage artifact file names inside the artifact directory.
namespace artifact {
inline constexpr const char* kTokens = "tokens.jsonl";
inline constexpr const char* kSentences = "sentences.jsonl";
inline constexpr const char* kVocabulary = "vocab.tsv";
inline constexpr const char* kNgrams = "ngrams.txt";
inline constexpr const char* kGraph = "graph.txt";
inline constexpr const char* kEmbeddings = "embeddings.txt";
inline constexpr const char* kTrainingPairs = "pairs.tsv";
inline constexpr const char* kPredictor = "predictor.txt";
inline constexpr const char* kRanked = "ranked.tsv";
}  // namespace artifact

// Written atomically as manifest-<command>.json at the end of every command.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  // file path -> sha256
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
  nlohmann::json seeds = nlohmann::json::object();
  double elapsed_seconds = 0.0;

  nlohmann::json to_json() const;
  std::filesystem::path write(const std::filesystem::path& dir) const;
};

// Distinct process exit code per error class.
int exit_code_for(ErrorKind kind);

struct IngestStageOptions {
  std::filesystem::path corpus;
  std::filesystem::path vocabulary;
  std::optional<std::filesystem::path> entities;
  std::optional<std::filesystem::path> pos_lexicon;
  std::optional<std::filesystem::path> stopwords;
  int ngram_min_count = 3;
};

struct PredictorStageOptions {
  int neg_ratio = 5;
  std::uint64_t pair_seed = 11;
  PredictorTrainParams train;
};

struct RankStageOptions {
  std::filesystem::path pairs_file;
  double promising_threshold = 0.7;
  double secondary_threshold = 0.5;
  std::optional<std::filesystem::path> output;
};

struct QueryStageOptions {
  std::string source;
  std::string target;
  QueryParams params;
  std::optional<std::filesystem::path> output;
};

RunManifest stage_ingest(const std::filesystem::path& dir, const IngestStageOptions& options);
RunManifest stage_build_graph(const std::filesystem::path& dir);
RunManifest stage_embed(const std::filesystem::path& dir, const EmbedParams& params);
RunManifest stage_train_predictor(const std::filesystem::path& dir,
                                  const PredictorStageOptions& options);
RunManifest stage_rank(const std::filesystem::path& dir, const RankStageOptions& options);
RunManifest stage_query(const std::filesystem::path& dir, const QueryStageOptions& options);
// Writes <prefix>.svg and <prefix>.coords.tsv from a serialized query result.
RunManifest stage_export_figure(const std::filesystem::path& query_result,
                                const std::filesystem::path& output_prefix);

// Pairs file: two whitespace-separated codes per line; '#' starts a comment.
std::vector<CodePair> parse_pairs_file(std::string_view contents);

// Loaded artifacts shared by the query service.
struct Artifacts {
  Vocabulary vocab;
  SemanticGraph graph;
  EmbeddingTable table;
  std::optional<PredictorModel> predictor;
  std::string digest;  // combined sha256 of the loaded files
};

// Throws MissingArtifact when the graph, embeddings or vocabulary are absent.
// The predictor is optional.
Artifacts load_artifacts(const std::filesystem::path& dir);

}  // namespace lbd

#endif  // LBD_STAGES_HPP_
