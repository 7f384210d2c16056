#include "lbd/stages.hpp"

#include <chrono>

#include "lbd/figure.hpp"
#include "lbd/text_format.hpp"

namespace lbd {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path require(const fs::path& dir, const char* name, const char* produced_by) {
  fs::path path = dir / name;
  if (!fs::exists(path)) {
    throw Error(ErrorKind::kMissingArtifact, path.string() + " not found; run `" +
                                                 produced_by + "` first");
  }
  return path;
}

// Reads an input and records its digest.
std::string read_input(RunManifest& manifest, const fs::path& path) {
  std::string contents = read_file(path);
  manifest.inputs[path.string()] = sha256_hex(contents);
  return contents;
}

void write_output(RunManifest& manifest, const fs::path& path, std::string_view contents) {
  write_file_atomic(path, contents);
  manifest.outputs[path.string()] = sha256_hex(contents);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

std::set<std::string, std::less<>> to_set(const std::vector<std::string>& words) {
  return {words.begin(), words.end()};
}

}  // namespace

json RunManifest::to_json() const {
  return json{{"command", command},   {"config", config},   {"inputs", inputs},
              {"outputs", outputs},   {"seeds", seeds},     {"elapsed_seconds", elapsed_seconds}};
}

fs::path RunManifest::write(const fs::path& dir) const {
  const fs::path path = dir / ("manifest-" + command + ".json");
  write_file_atomic(path, to_json().dump(2) + "\n");
  return path;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return 2;
    case ErrorKind::kMissingArtifact: return 3;
    case ErrorKind::kIoFailure: return 4;
    case ErrorKind::kMalformedRecord:
    case ErrorKind::kDuplicateDocId:
    case ErrorKind::kDuplicateSentence: return 5;
    case ErrorKind::kNodeNotFound:
    case ErrorKind::kMissingEmbedding: return 6;
    case ErrorKind::kNoPath:
    case ErrorKind::kEmptyPath: return 7;
    case ErrorKind::kEmptyGraph:
    case ErrorKind::kEmptyCorpus:
    case ErrorKind::kInsufficientCodedTerms:
    case ErrorKind::kTooFewPoints: return 8;
    case ErrorKind::kSamePair: return 9;
  }
  return 1;
}

RunManifest stage_ingest(const fs::path& dir, const IngestStageOptions& options) {
  Stopwatch timer;
  RunManifest manifest;
  manifest.command = "ingest";
  ensure_dir(dir);

  const auto docs = parse_corpus(read_input(manifest, options.corpus));
  const std::string vocab_text = read_input(manifest, options.vocabulary);
  const Vocabulary vocab = parse_vocabulary(vocab_text);
  IngestOptions ingest;
  ingest.ngram_min_count = options.ngram_min_count;
  if (options.entities) {
    read_input(manifest, *options.entities);
    ingest.entity_lexicon = load_phrase_list(*options.entities);
  }
  if (options.pos_lexicon) {
    read_input(manifest, *options.pos_lexicon);
    ingest.pos_lexicon = load_pos_lexicon(*options.pos_lexicon);
  }
  if (options.stopwords) {
    read_input(manifest, *options.stopwords);
    ingest.stopwords = to_set(load_phrase_list(*options.stopwords));
  }
  const IngestResult result = ingest_corpus(docs, vocab, ingest);

  std::string sentences;
  for (const auto& s : result.sentences) {
    sentences += json{{"sent_id", s.sent_id}, {"doc_id", s.doc_id}, {"text", s.text}}.dump() + "\n";
  }
  std::string ngrams;
  for (const auto& n : result.ngrams) ngrams += n + "\n";
  write_output(manifest, dir / artifact::kTokens, serialize_token_sets(result.token_sets));
  write_output(manifest, dir / artifact::kSentences, sentences);
  write_output(manifest, dir / artifact::kNgrams, ngrams);
  write_output(manifest, dir / artifact::kVocabulary, serialize_vocabulary(vocab));

  manifest.config = {{"ngram_min_count", options.ngram_min_count},
                     {"documents", docs.size()},
                     {"sentences", result.sentences.size()},
                     {"vocabulary_entries", vocab.size()}};
  manifest.elapsed_seconds = timer.seconds();
  manifest.write(dir);
  return manifest;
}

RunManifest stage_build_graph(const fs::path& dir) {
  Stopwatch timer;
  RunManifest manifest;
  manifest.command = "build-graph";
  const auto sets = parse_token_sets(read_input(manifest, require(dir, artifact::kTokens, "ingest")));
  const SemanticGraph graph = build_graph(sets);
  write_output(manifest, dir / artifact::kGraph, graph.serialize());
  manifest.config = {{"nodes", graph.node_count()}, {"edges", graph.edge_count()}};
  manifest.elapsed_seconds = timer.seconds();
  manifest.write(dir);
  return manifest;
}

RunManifest stage_embed(const fs::path& dir, const EmbedParams& params) {
  Stopwatch timer;
  RunManifest manifest;
  manifest.command = "embed";
  params.validate();
  const SemanticGraph graph =
      SemanticGraph::parse(read_input(manifest, require(dir, artifact::kGraph, "build-graph")));
  EmbedReport report;
  const EmbeddingTable table = train_embeddings(graph, params, &report);
  write_output(manifest, dir / artifact::kEmbeddings, table.serialize());
  manifest.config = {{"dim", params.dim},
                     {"walk_length", params.walk_length},
                     {"walks_per_node", params.walks_per_node},
                     {"window", params.window},
                     {"negatives_per_positive", params.negatives_per_positive},
                     {"epochs", params.epochs},
                     {"learning_rate", params.learning_rate},
                     {"epoch_loss", report.epoch_loss}};
  manifest.seeds = {{"embed", params.seed}};
  manifest.elapsed_seconds = timer.seconds();
  manifest.write(dir);
  return manifest;
}

RunManifest stage_train_predictor(const fs::path& dir, const PredictorStageOptions& options) {
  Stopwatch timer;
  RunManifest manifest;
  manifest.command = "train-predictor";
  const SemanticGraph graph =
      SemanticGraph::parse(read_input(manifest, require(dir, artifact::kGraph, "build-graph")));
  const EmbeddingTable table =
      EmbeddingTable::parse(read_input(manifest, require(dir, artifact::kEmbeddings, "embed")));
  const auto pairs = make_training_pairs(graph, options.neg_ratio, options.pair_seed);
  PredictorReport report;
  const PredictorModel model = train_predictor(pairs, table, options.train, &report);

  std::string pairs_tsv = "a\tb\tlabel\n";
  for (const auto& p : pairs) {
    pairs_tsv += p.a + '\t' + p.b + '\t' +
                 (p.label == PairLabel::kPositive ? "positive" : "negative") + '\n';
  }
  write_output(manifest, dir / artifact::kTrainingPairs, pairs_tsv);
  write_output(manifest, dir / artifact::kPredictor, model.serialize());
  manifest.config = {{"neg_ratio", options.neg_ratio},
                     {"epochs", options.train.epochs},
                     {"learning_rate", options.train.learning_rate},
                     {"margin", options.train.margin},
                     {"hidden", options.train.hidden},
                     {"pairs", pairs.size()},
                     {"epoch_loss", report.epoch_loss}};
  manifest.seeds = {{"pairs", options.pair_seed}, {"train", options.train.seed}};
  manifest.elapsed_seconds = timer.seconds();
  manifest.write(dir);
  return manifest;
}

std::vector<CodePair> parse_pairs_file(std::string_view contents) {
  std::vector<CodePair> pairs;
  std::size_t line_no = 0;
  for (std::string_view line : split(contents, '\n')) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!current.empty()) fields.push_back(std::move(current));
        current.clear();
      } else {
        current.push_back(c);
      }
    }
    if (!current.empty()) fields.push_back(std::move(current));
    if (fields.empty()) continue;
    if (fields.size() != 2) {
      throw Error(ErrorKind::kMalformedRecord,
                  "pairs file line " + std::to_string(line_no) + ": expected two codes");
    }
    pairs.push_back({fields[0], fields[1]});
  }
  return pairs;
}

Artifacts load_artifacts(const fs::path& dir) {
  Artifacts artifacts;
  std::string combined;
  const auto load = [&](const char* name, const char* stage) {
    std::string text = read_file(require(dir, name, stage));
    combined += sha256_hex(text);
    return text;
  };
  artifacts.vocab = parse_vocabulary(load(artifact::kVocabulary, "ingest"));
  artifacts.graph = SemanticGraph::parse(load(artifact::kGraph, "build-graph"));
  artifacts.table = EmbeddingTable::parse(load(artifact::kEmbeddings, "embed"));
  if (fs::exists(dir / artifact::kPredictor)) {
    artifacts.predictor = PredictorModel::parse(load(artifact::kPredictor, "train-predictor"));
  }
  artifacts.digest = sha256_hex(combined);
  return artifacts;
}

RunManifest stage_rank(const fs::path& dir, const RankStageOptions& options) {
  Stopwatch timer;
  RunManifest manifest;
  manifest.command = "rank";
  const Vocabulary vocab =
      parse_vocabulary(read_input(manifest, require(dir, artifact::kVocabulary, "ingest")));
  const EmbeddingTable table =
      EmbeddingTable::parse(read_input(manifest, require(dir, artifact::kEmbeddings, "embed")));
  const PredictorModel model = PredictorModel::parse(
      read_input(manifest, require(dir, artifact::kPredictor, "train-predictor")));
  const auto pairs = parse_pairs_file(read_input(manifest, options.pairs_file));
  const RankedTable ranked = rank_candidates(model, table, vocab, pairs,
                                             options.promising_threshold,
                                             options.secondary_threshold);
  write_output(manifest, options.output.value_or(dir / artifact::kRanked), ranked.to_tsv());
  manifest.config = {{"promising_threshold", options.promising_threshold},
                     {"secondary_threshold", options.secondary_threshold},
                     {"pairs", pairs.size()}};
  manifest.elapsed_seconds = timer.seconds();
  manifest.write(dir);
  return manifest;
}

RunManifest stage_query(const fs::path& dir, const QueryStageOptions& options) {
  Stopwatch timer;
  RunManifest manifest;
  manifest.command = "query";
  options.params.validate();
  const Vocabulary vocab =
      parse_vocabulary(read_input(manifest, require(dir, artifact::kVocabulary, "ingest")));
  const SemanticGraph graph =
      SemanticGraph::parse(read_input(manifest, require(dir, artifact::kGraph, "build-graph")));
  const EmbeddingTable table =
      EmbeddingTable::parse(read_input(manifest, require(dir, artifact::kEmbeddings, "embed")));
  const QueryResult result =
      run_query(graph, table, vocab, options.source, options.target, options.params);

  const fs::path out = options.output.value_or(
      dir / ("query-" + to_lower(options.source) + "-" + to_lower(options.target) + ".json"));
  write_output(manifest, out, result.serialize());
  manifest.config = {{"source", result.source},
                     {"target", result.target},
                     {"params", options.params.to_json()}};
  manifest.seeds = {{"lda", options.params.seed}};
  manifest.elapsed_seconds = timer.seconds();
  manifest.write(dir);
  return manifest;
}

RunManifest stage_export_figure(const fs::path& query_result, const fs::path& output_prefix) {
  Stopwatch timer;
  RunManifest manifest;
  manifest.command = "export-figure";
  const json result = json::parse(read_input(manifest, query_result), nullptr, false);
  if (result.is_discarded()) {
    throw Error(ErrorKind::kMalformedRecord, query_result.string() + " is not valid JSON");
  }
  fs::path svg = output_prefix;
  svg += ".svg";
  fs::path coords = output_prefix;
  coords += ".coords.tsv";
  if (output_prefix.has_parent_path()) ensure_dir(output_prefix.parent_path());
  write_output(manifest, svg, render_svg(result));
  write_output(manifest, coords, coordinate_table(result));
  manifest.elapsed_seconds = timer.seconds();
  manifest.write(output_prefix.has_parent_path() ? output_prefix.parent_path() : fs::path("."));
  return manifest;
}

}  // namespace lbd
