#include "lbd/lda.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "lbd/error.hpp"
#include "lbd/random.hpp"
#include "lbd/text_format.hpp"

namespace lbd {

void BiasWeights::validate() const {
  for (int w : {coded, lemma, entity, ngram}) {
    if (w < 1 || w > 5) {
      throw Error(ErrorKind::kInvalidArgument,
                  "bias weight " + std::to_string(w) + " outside [1, 5]");
    }
  }
}

void BiasWeights::set(std::string_view type_name, int value) {
  const std::string name = to_lower(type_name);
  if (name == "coded" || name == "mesh" || name == "umls") {
    coded = value;
  } else if (name == "lemma" || name == "lemmas") {
    lemma = value;
  } else if (name == "entity" || name == "entities") {
    entity = value;
  } else if (name == "ngram" || name == "ngrams") {
    ngram = value;
  } else {
    throw Error(ErrorKind::kInvalidArgument, "unknown token type '" + name + "'");
  }
}

int BiasWeights::weight_of(TokenType type) const {
  switch (type) {
    case TokenType::kCoded: return coded;
    case TokenType::kLemma: return lemma;
    case TokenType::kEntity: return entity;
    case TokenType::kNgram: return ngram;
  }
  return 1;
}

BiasWeights parse_bias_weights(std::string_view text) {
  BiasWeights weights;
  if (trim(text).empty()) return weights;
  for (std::string_view item : split(text, ',')) {
    const auto kv = split(trim(item), '=');
    if (kv.size() != 2) {
      throw Error(ErrorKind::kInvalidArgument, "bad bias item '" + std::string(item) + "'");
    }
    const std::string name = to_lower(trim(kv[0]));
    int value = 0;
    try {
      value = static_cast<int>(std::min<std::uint64_t>(parse_uint(trim(kv[1])), 1000));
    } catch (const Error&) {
      throw Error(ErrorKind::kInvalidArgument, "bad bias value '" + std::string(kv[1]) + "'");
    }
    weights.set(name, value);
  }
  weights.validate();
  return weights;
}

WeightedDoc apply_bias(const TokenSet& tokens, const BiasWeights& weights) {
  weights.validate();
  WeightedDoc doc;
  doc.id = tokens.sent_id;
  for (const auto& [key, count] : tokens.counts) {
    const auto type = token_type_of(key);
    if (!type) throw Error(ErrorKind::kInvalidArgument, "invalid token key " + key);
    doc.counts.emplace(key, static_cast<std::uint64_t>(count) * weights.weight_of(*type));
  }
  return doc;
}

void LdaParams::validate() const {
  if (topics < 1) throw Error(ErrorKind::kInvalidArgument, "topic count must be >= 1");
  if (!(effective_alpha() > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "alpha and beta must be positive");
  }
  if (iterations < 0) throw Error(ErrorKind::kInvalidArgument, "iterations must be >= 0");
}

std::vector<std::pair<std::string, double>> TopicModel::top_terms(int k, std::size_t n) const {
  const auto dist = distribution(k);
  std::vector<std::size_t> order(vocabulary.size());
  std::iota(order.begin(), order.end(), 0);
  // Vocabulary is sorted, so index order is key order.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
  order.resize(std::min(n, order.size()));
  std::vector<std::pair<std::string, double>> out;
  out.reserve(order.size());
  for (std::size_t t : order) out.emplace_back(vocabulary[t], dist[t]);
  return out;
}

TopicModel fit_lda(std::span<const WeightedDoc> docs, const LdaParams& params) {
  params.validate();
  std::vector<const WeightedDoc*> sorted;
  std::map<std::string, std::size_t> vocab_index;
  for (const auto& doc : docs) {
    std::uint64_t length = 0;
    for (const auto& [key, count] : doc.counts) {
      if (count == 0) continue;
      vocab_index.emplace(key, 0);
      length += count;
    }
    if (length > 0) sorted.push_back(&doc);
  }
  if (sorted.empty()) throw Error(ErrorKind::kEmptyCorpus, "no non-empty documents for LDA");
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const WeightedDoc* a, const WeightedDoc* b) { return a->id < b->id; });

  TopicModel model;
  model.topics = params.topics;
  for (auto& [key, index] : vocab_index) {
    index = model.vocabulary.size();
    model.vocabulary.push_back(key);
  }
  const std::size_t k_count = params.topics;
  const std::size_t v_count = model.vocabulary.size();
  model.k_too_large = k_count > sorted.size();

  // Token occurrences per document, in key order.
  std::vector<std::vector<std::uint32_t>> words(sorted.size());
  for (std::size_t d = 0; d < sorted.size(); ++d) {
    for (const auto& [key, count] : sorted[d]->counts) {
      words[d].insert(words[d].end(), count, static_cast<std::uint32_t>(vocab_index.at(key)));
    }
  }

  Rng rng(params.seed);
  std::vector<std::vector<std::uint32_t>> assignment(sorted.size());
  std::vector<std::uint64_t> doc_topic(sorted.size() * k_count, 0);
  std::vector<std::uint64_t> topic_word(k_count * v_count, 0);
  std::vector<std::uint64_t> topic_total(k_count, 0);
  for (std::size_t d = 0; d < sorted.size(); ++d) {
    assignment[d].resize(words[d].size());
    for (std::size_t i = 0; i < words[d].size(); ++i) {
      const auto z = static_cast<std::uint32_t>(rng.uniform_index(k_count));
      assignment[d][i] = z;
      ++doc_topic[d * k_count + z];
      ++topic_word[z * v_count + words[d][i]];
      ++topic_total[z];
    }
  }

  const double alpha = params.effective_alpha();
  const double beta = params.beta;
  const double v_beta = beta * static_cast<double>(v_count);
  std::vector<double> weights(k_count);
  for (int iter = 0; iter < params.iterations && k_count > 1; ++iter) {
    for (std::size_t d = 0; d < sorted.size(); ++d) {
      std::uint64_t* nd = doc_topic.data() + d * k_count;
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const std::uint32_t w = words[d][i];
        std::uint32_t z = assignment[d][i];
        --nd[z];
        --topic_word[z * v_count + w];
        --topic_total[z];
        double sum = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
          sum += (static_cast<double>(nd[k]) + alpha) *
                 (static_cast<double>(topic_word[k * v_count + w]) + beta) /
                 (static_cast<double>(topic_total[k]) + v_beta);
          weights[k] = sum;
        }
        const double r = rng.uniform_real() * sum;
        z = static_cast<std::uint32_t>(
            std::upper_bound(weights.begin(), weights.end(), r) - weights.begin());
        if (z >= k_count) z = static_cast<std::uint32_t>(k_count - 1);
        assignment[d][i] = z;
        ++nd[z];
        ++topic_word[z * v_count + w];
        ++topic_total[z];
      }
    }
  }

  model.probabilities.resize(k_count * v_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double denom = static_cast<double>(topic_total[k]) + v_beta;
    for (std::size_t t = 0; t < v_count; ++t) {
      model.probabilities[k * v_count + t] =
          (static_cast<double>(topic_word[k * v_count + t]) + beta) / denom;
    }
  }
  model.token_counts = std::move(topic_word);
  model.topic_totals = std::move(topic_total);
  return model;
}

}  // namespace lbd
