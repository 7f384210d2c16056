// Command-line driver for the discovery pipeline. Each subcommand reads the
// previous stage's artifacts from --artifacts and writes its own plus a
// manifest. Option precedence: flags, then LBD_* environment variables, then
// the INI/TOML --config file (top-level keys for global options, [command]
// sections for the rest).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "lbd/error.hpp"
#include "lbd/service.hpp"
#include "lbd/stages.hpp"

namespace fs = std::filesystem;

namespace {

struct Settings {
  fs::path artifacts = "artifacts";
  std::optional<std::uint64_t> seed;

  // ingest
  fs::path corpus;
  fs::path vocabulary;
  std::optional<fs::path> entities;
  std::optional<fs::path> pos_lexicon;
  std::optional<fs::path> stopwords;
  int ngram_min_count = 3;

  // embed
  lbd::EmbedParams embed;

  // train-predictor
  lbd::PredictorStageOptions predictor;

  // rank
  fs::path pairs_file;
  double threshold = 0.7;
  double secondary_threshold = 0.5;
  std::optional<fs::path> output;

  // query
  std::string source;
  std::string target;
  int topics = 50;
  int knn_k = 5;
  std::string bias = "coded=4,lemma=1,entity=3,ngram=1";
  std::optional<double> alpha;
  double beta = 0.01;
  int iterations = 500;
  std::size_t cap = 2000;

  // export-figure
  fs::path query_result;
  std::optional<fs::path> prefix;

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t cache_size = 64;
  std::optional<fs::path> static_dir;
};

void print_manifest(const lbd::RunManifest& manifest) {
  for (const auto& [path, digest] : manifest.outputs) {
    std::cout << "wrote " << path << "  sha256=" << digest.substr(0, 12) << "\n";
  }
}

std::optional<std::string> config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.starts_with("--config=")) return std::string(arg.substr(9));
  }
  if (const char* env = std::getenv("LBD_CONFIG"); env && *env) return env;
  return std::nullopt;
}

// Installs config file values as option defaults, so anything given on the
// command line or in the environment still overrides them.
void apply_config(CLI::App& app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw lbd::Error(lbd::ErrorKind::kIoFailure, "cannot read config " + path);
  for (const auto& item : CLI::ConfigTOML().from_config(in)) {
    if (item.name == "++" || item.name == "--" || item.inputs.empty()) continue;
    CLI::App* scope = &app;
    if (!item.parents.empty()) {
      scope = app.get_subcommand_no_throw(item.parents.front());
      if (scope == nullptr || item.parents.size() > 1) {
        throw lbd::Error(lbd::ErrorKind::kInvalidArgument,
                         "unknown config section " + item.fullname());
      }
    }
    CLI::Option* opt = scope->get_option_no_throw("--" + item.name);
    if (opt == nullptr && scope != &app) opt = app.get_option_no_throw("--" + item.name);
    if (opt == nullptr) {
      throw lbd::Error(lbd::ErrorKind::kInvalidArgument, "unknown config key " + item.fullname());
    }
    try {
      opt->default_val(item.inputs.front());
    } catch (const CLI::Error& e) {
      throw lbd::Error(lbd::ErrorKind::kInvalidArgument,
                       "config key " + item.fullname() + ": " + e.what());
    }
  }
}

int serve(const Settings& s) {
  lbd::Service service(s.cache_size);
  httplib::Server server;
  service.bind(server);
  if (s.static_dir && !server.set_mount_point("/", s.static_dir->string())) {
    throw lbd::Error(lbd::ErrorKind::kIoFailure, "static directory not found: " +
                                                      s.static_dir->string());
  }
  // Requests answer 503 until the artifacts are in memory.
  std::thread loader([&] {
    try {
      service.load(lbd::load_artifacts(s.artifacts));
      std::cerr << "artifacts loaded, session " << service.session_id() << "\n";
    } catch (const lbd::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      server.stop();
    }
  });
  std::cerr << "listening on " << s.host << ":" << s.port << "\n";
  const bool ok = server.listen(s.host, s.port);
  loader.join();
  if (!service.ready()) return lbd::exit_code_for(lbd::ErrorKind::kMissingArtifact);
  return ok ? 0 : lbd::exit_code_for(lbd::ErrorKind::kIoFailure);
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  CLI::App app{"Literature-based discovery pipeline"};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "INI/TOML file with option defaults")
      ->envname("LBD_CONFIG");
  app.add_option("--artifacts", s.artifacts, "Artifact directory")
      ->envname("LBD_ARTIFACTS")
      ->capture_default_str();
  app.add_option("--seed", s.seed, "Seed for the stage's random draws")->envname("LBD_SEED");

  auto* ingest = app.add_subcommand("ingest", "Tokenize a corpus into the token store");
  ingest->add_option("corpus", s.corpus, "JSONL corpus (doc_id, title, body)")->required();
  ingest->add_option("vocabulary", s.vocabulary, "Coded vocabulary TSV")->required();
  ingest->add_option("--entities", s.entities, "Entity phrase list");
  ingest->add_option("--pos-lexicon", s.pos_lexicon, "word<TAB>pos lexicon");
  ingest->add_option("--stopwords", s.stopwords, "Stopword list, one per line");
  ingest->add_option("--ngram-min-count", s.ngram_min_count)
      ->envname("LBD_NGRAM_MIN_COUNT")
      ->capture_default_str();

  auto* build_graph = app.add_subcommand("build-graph", "Build the sentence-token graph");

  auto* embed = app.add_subcommand("embed", "Train node embeddings");
  embed->add_option("--dim", s.embed.dim)->envname("LBD_DIM")->capture_default_str();
  embed->add_option("--walk-length", s.embed.walk_length)->capture_default_str();
  embed->add_option("--walks-per-node", s.embed.walks_per_node)->capture_default_str();
  embed->add_option("--window", s.embed.window)->capture_default_str();
  embed->add_option("--negatives", s.embed.negatives_per_positive)->capture_default_str();
  embed->add_option("--epochs", s.embed.epochs)->capture_default_str();
  embed->add_option("--lr", s.embed.learning_rate)->capture_default_str();

  auto* train = app.add_subcommand("train-predictor", "Train the pair predictor");
  train->add_option("--neg-ratio", s.predictor.neg_ratio)->capture_default_str();
  train->add_option("--pair-seed", s.predictor.pair_seed)->capture_default_str();
  train->add_option("--epochs", s.predictor.train.epochs)->capture_default_str();
  train->add_option("--lr", s.predictor.train.learning_rate)->capture_default_str();
  train->add_option("--margin", s.predictor.train.margin)->capture_default_str();
  train->add_option("--hidden", s.predictor.train.hidden)->capture_default_str();

  auto* rank = app.add_subcommand("rank", "Score and rank candidate code pairs");
  rank->add_option("pairs", s.pairs_file, "Two codes per line")->required();
  rank->add_option("--threshold", s.threshold, "Promising cutoff")
      ->envname("LBD_THRESHOLD")
      ->capture_default_str();
  rank->add_option("--secondary-threshold", s.secondary_threshold)->capture_default_str();
  rank->add_option("-o,--output", s.output);

  auto* query = app.add_subcommand("query", "Build the topic network between two codes");
  query->add_option("source", s.source)->required();
  query->add_option("target", s.target)->required();
  query->add_option("--topics", s.topics)->envname("LBD_TOPICS")->capture_default_str();
  query->add_option("--knn-k", s.knn_k)->envname("LBD_KNN_K")->capture_default_str();
  query->add_option("--bias", s.bias, "e.g. coded=4,lemma=1,entity=3,ngram=1")
      ->envname("LBD_BIAS")
      ->capture_default_str();
  query->add_option("--alpha", s.alpha, "Dirichlet prior on topics (default 50/K)");
  query->add_option("--beta", s.beta)->capture_default_str();
  query->add_option("--iterations", s.iterations)->capture_default_str();
  query->add_option("--cap", s.cap, "Max sentences in the neighborhood")
      ->envname("LBD_CAP")
      ->capture_default_str();
  query->add_option("-o,--output", s.output);

  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
  serve_cmd->add_option("--host", s.host)->envname("LBD_HOST")->capture_default_str();
  serve_cmd->add_option("--port", s.port)->envname("LBD_PORT")->capture_default_str();
  serve_cmd->add_option("--cache-size", s.cache_size)
      ->envname("LBD_CACHE_SIZE")
      ->capture_default_str();
  serve_cmd->add_option("--static", s.static_dir, "Directory served at /")
      ->envname("LBD_STATIC");

  auto* figure = app.add_subcommand("export-figure", "Render a query result as SVG + TSV");
  figure->add_option("query_result", s.query_result)->required();
  figure->add_option("-o,--output", s.prefix, "Output prefix (default: input stem)");

  for (auto* sub : app.get_subcommands([](CLI::App*) { return true; })) sub->fallthrough();

  try {
    if (const auto path = config_path(argc, argv)) apply_config(app, *path);
  } catch (const lbd::Error& e) {
    std::cerr << "error [" << lbd::error_kind_name(e.kind()) << "]: " << e.what() << "\n";
    return lbd::exit_code_for(e.kind());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lbd::exit_code_for(lbd::ErrorKind::kInvalidArgument);
  }

  try {
    if (*ingest) {
      print_manifest(lbd::stage_ingest(
          s.artifacts, {s.corpus, s.vocabulary, s.entities, s.pos_lexicon, s.stopwords,
                        s.ngram_min_count}));
    } else if (*build_graph) {
      print_manifest(lbd::stage_build_graph(s.artifacts));
    } else if (*embed) {
      if (s.seed) s.embed.seed = *s.seed;
      print_manifest(lbd::stage_embed(s.artifacts, s.embed));
    } else if (*train) {
      if (s.seed) s.predictor.train.seed = *s.seed;
      print_manifest(lbd::stage_train_predictor(s.artifacts, s.predictor));
    } else if (*rank) {
      print_manifest(lbd::stage_rank(
          s.artifacts, {s.pairs_file, s.threshold, s.secondary_threshold, s.output}));
    } else if (*query) {
      lbd::QueryStageOptions options{s.source, s.target, {}, s.output};
      options.params.topics = s.topics;
      options.params.knn_k = s.knn_k;
      options.params.bias = lbd::parse_bias_weights(s.bias);
      options.params.alpha = s.alpha;
      options.params.beta = s.beta;
      options.params.iterations = s.iterations;
      options.params.cap = s.cap;
      if (s.seed) options.params.seed = *s.seed;
      print_manifest(lbd::stage_query(s.artifacts, options));
    } else if (*figure) {
      fs::path prefix = s.prefix.value_or(s.query_result.parent_path() /
                                          s.query_result.stem());
      print_manifest(lbd::stage_export_figure(s.query_result, prefix));
    } else if (*serve_cmd) {
      return serve(s);
    }
  } catch (const lbd::Error& e) {
    std::cerr << "error [" << lbd::error_kind_name(e.kind()) << "]: " << e.what() << "\n";
    return lbd::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
