#ifndef LBD_QUERY_HPP_
#define LBD_QUERY_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lbd/embed.hpp"
#include "lbd/graph.hpp"
#include "lbd/ingest.hpp"
#include "lbd/lda.hpp"
#include "lbd/topic_network.hpp"

namespace lbd {

struct QueryParams {
  int topics = 50;
  int knn_k = 5;
  BiasWeights bias;
  std::optional<double> alpha;
  double beta = 0.01;
  int iterations = 500;
  std::size_t cap = 2000;
  std::uint64_t seed = 42;
  double outlier_sigma = 2.0;

  void validate() const;
  LdaParams lda() const;

  nlohmann::json to_json() const;
  // Missing fields keep their defaults; wrong types or out-of-range values
  // throw InvalidArgument.
  static QueryParams from_json(const nlohmann::json& body);
};

struct TopicTerm {
  std::string token;
  // Canonical vocabulary name for coded tokens, empty otherwise.
  std::string label;
  double probability = 0.0;
};

// "l:adj:rural: 0.023" or, for labelled coded terms,
// "m:d004271 - DNA, Fungal: 0.017".
std::string format_topic_term(const TopicTerm& term);

struct TopicListing {
  int topic = 0;
  std::string node_id;
  std::uint64_t token_count = 0;
  std::vector<TopicTerm> terms;
};

// "Topic <k>" followed by one formatted term per line.
std::string format_topic_listing(const TopicListing& listing);

std::string topic_node_id(int k);

// Top-n listing per topic; coded tokens carry their vocabulary label.
std::vector<TopicListing> topic_listings(const TopicModel& model, const Vocabulary& vocab,
                                         std::size_t n = 10);

struct QueryResult {
  std::string source;  // coded node ids
  std::string target;
  QueryParams params;
  GraphPath corpus_path;
  std::vector<std::string> sentences;
  TopicModel model;
  TopicNetwork network;
  Layout layout;  // rows follow network.ids()
  std::vector<TopicListing> listings;
  std::vector<std::string> active_path;
  std::optional<std::string> via;
  bool path_valid = true;

  // Nodes of the active path flagged as layout outliers.
  std::vector<std::string> path_outliers() const;

  nlohmann::json to_json() const;
  // Canonical serialization; identical results give identical bytes.
  std::string serialize() const;
};

// shortest_path -> extract_neighborhood -> first_order_tokens -> apply_bias
// -> fit_lda -> topic_centroids -> build_knn -> network_path -> layout_2d.
QueryResult run_query(const SemanticGraph& graph, const EmbeddingTable& table,
                      const Vocabulary& vocab, std::string_view source_code,
                      std::string_view target_code, const QueryParams& params);

// Copy of `result` whose active path runs through `via_node`.
QueryResult reroute_via(const QueryResult& result, std::string_view via_node);

}  // namespace lbd

#endif  // LBD_QUERY_HPP_
