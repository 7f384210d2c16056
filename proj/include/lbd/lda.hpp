#ifndef LBD_LDA_HPP_
#define LBD_LDA_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <string>
#include <utility>
#include <vector>

#include "lbd/ingest.hpp"

namespace lbd {

// Per-type integer multipliers applied to token counts before LDA. Each
// weight must lie in [1, 5].
struct BiasWeights {
  int coded = 4;
  int lemma = 1;
  int entity = 3;
  int ngram = 1;

  void validate() const;
  // Sets one weight by type name ("coded", "lemma", "entity", "ngram").
  void set(std::string_view type_name, int value);
  int weight_of(TokenType type) const;
  bool operator==(const BiasWeights&) const = default;
};

// Parses "coded=4,lemma=1,entity=3,ngram=1"; omitted types keep defaults.
BiasWeights parse_bias_weights(std::string_view text);

struct WeightedDoc {
  std::string id;
  std::map<std::string, std::uint64_t> counts;
};

WeightedDoc apply_bias(const TokenSet& tokens, const BiasWeights& weights);

struct LdaParams {
  int topics = 50;
  // Defaults to 50 / topics when unset.
  std::optional<double> alpha;
  double beta = 0.01;
  int iterations = 500;
  std::uint64_t seed = 42;

  double effective_alpha() const { return alpha ? *alpha : 50.0 / topics; }
  void validate() const;
};

struct TopicModel {
  int topics = 0;
  // Sorted token keys; column order of the matrices below.
  std::vector<std::string> vocabulary;
  // topics x |vocabulary|, row k is the distribution of topic k.
  std::vector<double> probabilities;
  std::vector<std::uint64_t> token_counts;
  std::vector<std::uint64_t> topic_totals;
  // Set when there are more topics than non-empty documents.
  bool k_too_large = false;

  std::span<const double> distribution(int k) const {
    return {probabilities.data() + static_cast<std::size_t>(k) * vocabulary.size(),
            vocabulary.size()};
  }
  // Most probable tokens of topic k, ties broken by key.
  std::vector<std::pair<std::string, double>> top_terms(int k, std::size_t n = 10) const;
};

// Collapsed Gibbs sampling. Documents are swept in sorted id order and each
// weighted count expands into that many token occurrences. Topic
// distributions use (n_kt + beta) / (n_k + beta * V).
TopicModel fit_lda(std::span<const WeightedDoc> docs, const LdaParams& params);

}  // namespace lbd

#endif  // LBD_LDA_HPP_
