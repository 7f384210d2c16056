#include "support.hpp"

#include <unistd.h>

#include <fstream>

#include "json.hpp"
#include "lbd/error.hpp"

namespace lbd::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static int counter = 0;
  path_ = fs::temp_directory_path() /
          ("lbd-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot write " + path.string());
}

std::string SyntheticCorpus::corpus_jsonl() const {
  std::string out;
  for (const auto& d : docs) {
    out += nlohmann::json{{"doc_id", d.doc_id}, {"title", d.title}, {"body", d.body}}.dump();
    out += "\n";
  }
  return out;
}

namespace {

struct Term {
  std::string code;
  std::string name;
};

const std::vector<Term>& random_terms() {
  static const std::vector<Term> terms = {
      {"C0011849", "diabetes"},        {"C0021655", "insulin resistance"},
      {"C0028754", "obesity"},         {"C0021368", "inflammation"},
      {"C0042866", "vitamin d"},       {"C0005938", "bone density"},
      {"C0022658", "kidney disease"},  {"C0020538", "hypertension"},
      {"C0079201", "deforestation"},   {"C0001175", "immunodeficiency syndrome"},
      {"C0024530", "malaria"},         {"C0043251", "land use"},
  };
  return terms;
}

const std::vector<std::string> kFiller = {
    "patients", "showed",   "increased", "levels",    "during",   "clinical", "trials",
    "rural",    "cohort",   "measured",  "reduction", "treatment", "outcome", "samples",
    "regional", "exposure", "markers",   "baseline",  "followed", "analysis", "risk",
};

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string sentence_from(std::vector<std::string> words) {
  std::string out;
  for (const auto& w : words) out += (out.empty() ? capitalize(w) : " " + w);
  return out + ".";
}

}  // namespace

SyntheticCorpus random_corpus(int documents, std::uint64_t seed) {
  Rng rng(seed);
  SyntheticCorpus out;
  out.vocabulary_tsv = "code\tcanonical_name\tsynonym\n";
  for (const auto& t : random_terms()) {
    out.codes.push_back(t.code);
    out.vocabulary_tsv += t.code + "\t" + t.name + "\t" + t.name + "\n";
  }
  const auto& terms = random_terms();
  for (int d = 0; d < documents; ++d) {
    std::string body;
    const int sentences = 2 + static_cast<int>(rng.uniform_index(4));
    for (int s = 0; s < sentences; ++s) {
      std::vector<std::string> words;
      for (int w = 0; w < 6; ++w) words.push_back(kFiller[rng.uniform_index(kFiller.size())]);
      const int mentions = 1 + static_cast<int>(rng.uniform_index(2));
      for (int m = 0; m < mentions; ++m) {
        const std::size_t pos = 1 + rng.uniform_index(words.size() - 1);
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos),
                     terms[rng.uniform_index(terms.size())].name);
      }
      body += (body.empty() ? "" : " ") + sentence_from(words);
    }
    out.docs.push_back({"doc" + std::to_string(d),
                        sentence_from({"study", "of", terms[d % terms.size()].name}), body});
  }
  return out;
}

BridgedCorpus bridged_corpus(std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::string> theme_a = {"forest", "logging", "canopy", "timber",
                                            "clearing", "soil", "erosion", "habitat"};
  const std::vector<std::string> theme_b = {"viral", "immune", "antibody", "lymphocyte",
                                            "infection", "therapy", "plasma", "antigen"};
  const std::vector<std::string> bridge = {"mosquito", "vector", "larvae", "breeding",
                                           "wetland", "parasite", "transmission", "swarm"};
  BridgedCorpus out;
  out.source_code = "C1000001";
  out.target_code = "C2000002";
  out.connector_words = bridge;
  out.corpus.codes = {out.source_code, out.target_code};
  out.corpus.vocabulary_tsv =
      "code\tcanonical_name\tsynonym\n"
      "C1000001\tdeforestation\tdeforestation\n"
      "C2000002\timmunodeficiency\timmunodeficiency\n";

  const auto draw = [&](const std::vector<std::string>& pool, int n) {
    std::vector<std::string> words;
    for (int i = 0; i < n; ++i) words.push_back(pool[rng.uniform_index(pool.size())]);
    return words;
  };
  int doc = 0;
  const auto add_doc = [&](std::vector<std::string> words) {
    out.corpus.docs.push_back({"d" + std::to_string(doc++), "", sentence_from(std::move(words))});
  };
  for (int i = 0; i < 30; ++i) {
    auto words = draw(theme_a, 5);
    if (i % 2 == 0) words.insert(words.begin() + 1, "deforestation");
    add_doc(words);
  }
  for (int i = 0; i < 30; ++i) {
    auto words = draw(theme_b, 5);
    if (i % 2 == 0) words.insert(words.begin() + 1, "immunodeficiency");
    add_doc(words);
  }
  // Connector sentences carry one word from a side theme each.
  for (int i = 0; i < 30; ++i) {
    auto words = draw(bridge, 5);
    words.push_back(i % 2 == 0 ? theme_a[rng.uniform_index(theme_a.size())]
                               : theme_b[rng.uniform_index(theme_b.size())]);
    add_doc(words);
  }
  return out;
}

Pipeline build_pipeline(const SyntheticCorpus& corpus, const EmbedParams& params) {
  Pipeline out;
  out.vocab = parse_vocabulary(corpus.vocabulary_tsv);
  IngestOptions options;
  options.ngram_min_count = 3;
  const auto ingested = ingest_corpus(corpus.docs, out.vocab, options);
  out.graph = SemanticGraph::build(ingested.token_sets);
  out.table = train_embeddings(out.graph, params);
  return out;
}

RankedTable golden_ranked_table(double promising_threshold) {
  Vocabulary vocab;
  vocab.add("c1", "Acquired Immunodeficiency Syndrome", "aids");
  vocab.add("c2", "Malaria", "malaria");
  vocab.add("c3", "Deforestation", "deforestation");
  vocab.add("c4", "Land Use", "land use");
  vocab.add("c5", "Zoonoses", "zoonoses");
  const EmbeddingTable table(1, 0, {"m:c1", "m:c2", "m:c3", "m:c4", "m:c5"},
                             {1.0, 0.5, 2.0, -1.0, 0.25});
  PredictorModel model(1, 1, 0);
  auto w = model.mutable_parameters();  // W1 = [1 0], b1 = 0, w2 = 1, b2 = 0
  std::fill(w.begin(), w.end(), 0.0);
  w[0] = 1.0;
  w[3] = 1.0;
  const std::vector<CodePair> pairs = {{"c1", "c3"}, {"c1", "c2"}, {"c2", "c3"},
                                       {"c3", "c4"}, {"c1", "c4"}, {"c2", "c5"}};
  return rank_candidates(model, table, vocab, pairs, promising_threshold);
}

std::string golden_topic_listings() {
  Vocabulary vocab;
  vocab.add("c0079201", "Deforestation", "deforestation");
  vocab.add("d004271", "DNA, Fungal", "fungal dna");
  TopicModel model;
  model.topics = 2;
  model.vocabulary = {"e:amazon_basin",  "e:clinical_trial", "l:adj:rural",
                      "l:noun:deforestation", "l:noun:disease", "l:noun:forest",
                      "l:verb:follow",   "m:c0079201",       "m:d004271",
                      "n:land_use",      "n:risk_factor",    "n:tropical_forest"};
  model.probabilities = {0.180, 0.010, 0.023, 0.150, 0.050, 0.120,
                         0.005, 0.200, 0.017, 0.120, 0.075, 0.050};
  model.probabilities.resize(24, 1.0 / 12);
  model.topic_totals = {100, 100};
  std::string out;
  for (const auto& listing : topic_listings(model, vocab)) out += format_topic_listing(listing);
  return out;
}

std::string read_golden(const std::string& name) {
  std::ifstream in(std::filesystem::path(LBD_GOLDEN_DIR) / name, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoFailure, "missing golden file " + name);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<TokenSet> random_token_sets(int sentences, int tokens, double density, Rng& rng) {
  std::vector<TokenSet> sets;
  for (int s = 0; s < sentences; ++s) {
    TokenSet ts;
    ts.sent_id = "s:d" + std::to_string(s) + ":0";
    for (int t = 0; t < tokens; ++t) {
      if (rng.uniform_real() < density) {
        ts.counts["l:noun:t" + std::to_string(t)] = 1 + static_cast<std::uint32_t>(rng.uniform_index(3));
      }
    }
    sets.push_back(std::move(ts));
  }
  return sets;
}

}  // namespace lbd::testing
