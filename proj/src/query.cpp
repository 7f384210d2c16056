#include "lbd/query.hpp"

#include <algorithm>

#include "lbd/error.hpp"
#include "lbd/predictor.hpp"
#include "lbd/text_format.hpp"

namespace lbd {

namespace {

using json = nlohmann::json;

template <typename T>
T field_or(const json& body, const char* name, T fallback) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) return fallback;
  const auto invalid = [&] {
    return Error(ErrorKind::kInvalidArgument, std::string("invalid value for '") + name + "'");
  };
  if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) throw invalid();
    if (it->is_number_unsigned()) return static_cast<T>(it->get<std::uint64_t>());
    if (it->get<std::int64_t>() < 0) throw invalid();
    return static_cast<T>(it->get<std::int64_t>());
  } else {
    if (!it->is_number()) throw invalid();
    return it->get<T>();
  }
}

}  // namespace

void QueryParams::validate() const {
  bias.validate();
  lda().validate();
  if (knn_k < 1) throw Error(ErrorKind::kInvalidArgument, "knn_k must be >= 1");
  if (cap < 1) throw Error(ErrorKind::kInvalidArgument, "cap must be >= 1");
  if (!(outlier_sigma >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "outlier_sigma must be >= 0");
}

LdaParams QueryParams::lda() const {
  LdaParams p;
  p.topics = topics;
  p.alpha = alpha;
  p.beta = beta;
  p.iterations = iterations;
  p.seed = seed;
  return p;
}

json QueryParams::to_json() const {
  return json{{"topics", topics},
              {"knn_k", knn_k},
              {"bias", {{"coded", bias.coded}, {"lemma", bias.lemma},
                        {"entity", bias.entity}, {"ngram", bias.ngram}}},
              {"alpha", alpha ? json(*alpha) : json(nullptr)},
              {"effective_alpha", lda().effective_alpha()},
              {"beta", beta},
              {"iterations", iterations},
              {"cap", cap},
              {"seed", seed},
              {"outlier_sigma", outlier_sigma}};
}

QueryParams QueryParams::from_json(const json& body) {
  if (!body.is_object()) throw Error(ErrorKind::kInvalidArgument, "parameters must be an object");
  QueryParams p;
  const auto signed_field = [&](const char* name, int fallback) {
    auto it = body.find(name);
    if (it == body.end() || it->is_null()) return fallback;
    if (!it->is_number_integer()) {
      throw Error(ErrorKind::kInvalidArgument, std::string("invalid value for '") + name + "'");
    }
    const auto value = it->get<std::int64_t>();
    if (value < -1000000 || value > 1000000) {
      throw Error(ErrorKind::kInvalidArgument, std::string("value out of range for '") + name + "'");
    }
    return static_cast<int>(value);
  };
  p.topics = signed_field("topics", p.topics);
  p.knn_k = signed_field("knn_k", p.knn_k);
  p.iterations = signed_field("iterations", p.iterations);
  p.cap = field_or<std::size_t>(body, "cap", p.cap);
  p.seed = field_or<std::uint64_t>(body, "seed", p.seed);
  p.beta = field_or<double>(body, "beta", p.beta);
  p.outlier_sigma = field_or<double>(body, "outlier_sigma", p.outlier_sigma);
  if (auto it = body.find("alpha"); it != body.end() && !it->is_null()) {
    p.alpha = field_or<double>(body, "alpha", 0.0);
  }
  if (auto it = body.find("bias"); it != body.end() && !it->is_null()) {
    if (it->is_string()) {
      p.bias = parse_bias_weights(it->get<std::string>());
    } else if (it->is_object()) {
      for (const auto& [name, value] : it->items()) {
        if (!value.is_number_integer()) {
          throw Error(ErrorKind::kInvalidArgument, "bias weights must be integers");
        }
        const auto w = value.get<std::int64_t>();
        p.bias.set(name, static_cast<int>(std::clamp<std::int64_t>(w, -1, 1000)));
      }
    } else {
      throw Error(ErrorKind::kInvalidArgument, "bias must be an object or string");
    }
  }
  p.validate();
  return p;
}

std::string format_topic_term(const TopicTerm& term) {
  std::string out = term.token;
  if (!term.label.empty()) out += " - " + term.label;
  return out + ": " + format_fixed(term.probability, 3);
}

std::string format_topic_listing(const TopicListing& listing) {
  std::string out = "Topic " + std::to_string(listing.topic) + "\n";
  for (const auto& term : listing.terms) out += format_topic_term(term) + "\n";
  return out;
}

std::string topic_node_id(int k) { return "topic_" + std::to_string(k); }

std::vector<std::string> QueryResult::path_outliers() const {
  std::vector<std::string> out;
  for (const auto& id : active_path) {
    if (network.size() > 0 && layout.outliers.size() == network.size() &&
        layout.outliers[network.index_of(id)]) {
      out.push_back(id);
    }
  }
  return out;
}

json QueryResult::to_json() const {
  json nodes = json::array();
  for (std::uint32_t i = 0; i < network.size(); ++i) {
    const std::string& id = network.ids()[i];
    const char* kind = id == source ? "source" : id == target ? "target" : "topic";
    nodes.push_back({{"id", id},
                     {"kind", kind},
                     {"x", layout.coords[i][0]},
                     {"y", layout.coords[i][1]},
                     {"outlier", static_cast<bool>(layout.outliers[i])}});
  }
  json edges = json::array();
  for (const auto& e : network.edges()) {
    edges.push_back({{"source", network.ids()[e.a]},
                     {"target", network.ids()[e.b]},
                     {"weight", e.weight}});
  }
  json topics = json::array();
  for (const auto& listing : listings) {
    json terms = json::array();
    for (const auto& term : listing.terms) {
      terms.push_back({{"token", term.token},
                       {"label", term.label},
                       {"probability", term.probability},
                       {"display", format_topic_term(term)}});
    }
    topics.push_back({{"id", listing.node_id},
                      {"index", listing.topic},
                      {"tokens", listing.token_count},
                      {"terms", terms}});
  }
  return json{
      {"query", {{"source", source}, {"target", target}, {"params", params.to_json()}}},
      {"corpus_path", corpus_path.nodes},
      {"sentence_count", sentences.size()},
      {"vocabulary_size", model.vocabulary.size()},
      {"network", {{"knn_k", network.knn_k()}, {"nodes", nodes}, {"edges", edges}}},
      {"active_path", active_path},
      {"via", via ? json(*via) : json(nullptr)},
      {"path_valid", path_valid},
      {"path_outliers", path_outliers()},
      {"warnings", {{"k_too_large", model.k_too_large},
                    {"degenerate_layout", layout.degenerate}}},
      {"topics", topics},
  };
}

std::string QueryResult::serialize() const { return to_json().dump(2) + "\n"; }

std::vector<TopicListing> topic_listings(const TopicModel& model, const Vocabulary& vocab,
                                         std::size_t n) {
  std::vector<TopicListing> out;
  for (int k = 0; k < model.topics; ++k) {
    TopicListing listing;
    listing.topic = k;
    listing.node_id = topic_node_id(k);
    listing.token_count = k < static_cast<int>(model.topic_totals.size()) ? model.topic_totals[k] : 0;
    for (auto& [token, probability] : model.top_terms(k, n)) {
      std::string label;
      if (token_type_of(token) == TokenType::kCoded) label = vocab.label(token.substr(2));
      listing.terms.push_back({std::move(token), std::move(label), probability});
    }
    out.push_back(std::move(listing));
  }
  return out;
}

QueryResult run_query(const SemanticGraph& graph, const EmbeddingTable& table,
                      const Vocabulary& vocab, std::string_view source_code,
                      std::string_view target_code, const QueryParams& params) {
  params.validate();
  QueryResult result;
  result.params = params;
  result.source = coded_node_id(source_code);
  result.target = coded_node_id(target_code);
  graph.index_of(result.source);
  graph.index_of(result.target);

  result.corpus_path = shortest_path(graph, result.source, result.target);
  result.sentences = extract_neighborhood(graph, result.corpus_path, params.cap);
  std::vector<WeightedDoc> docs;
  docs.reserve(result.sentences.size());
  for (const auto& sent : result.sentences) {
    docs.push_back(apply_bias(first_order_tokens(graph, sent), params.bias));
  }
  result.model = fit_lda(docs, params.lda());
  const auto centroids = topic_centroids(result.model, table);

  std::vector<NetworkPoint> points;
  for (int k = 0; k < result.model.topics; ++k) points.push_back({topic_node_id(k), centroids[k]});
  std::vector<std::string> endpoints = {result.source};
  if (result.target != result.source) endpoints.push_back(result.target);
  for (const auto& endpoint : endpoints) {
    if (!table.contains(endpoint)) throw Error(ErrorKind::kMissingEmbedding, endpoint);
    const auto vec = table.vector_of(endpoint);
    points.push_back({endpoint, {vec.begin(), vec.end()}});
  }
  result.network = build_knn(std::move(points), params.knn_k);
  result.active_path = network_path(result.network, result.source, result.target);
  result.path_valid = !has_repeated_edge(result.active_path);

  LayoutOptions layout_options;
  layout_options.outlier_sigma = params.outlier_sigma;
  result.layout = layout_2d(result.network.vectors(), layout_options);

  result.listings = topic_listings(result.model, vocab);
  return result;
}

QueryResult reroute_via(const QueryResult& result, std::string_view via_node) {
  const ViaPath path = via_path(result.network, result.source, via_node, result.target);
  QueryResult out = result;
  out.active_path = path.nodes;
  out.path_valid = path.valid;
  out.via = std::string(via_node);
  return out;
}

}  // namespace lbd
