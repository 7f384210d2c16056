#ifndef LBD_PREDICTOR_HPP_
#define LBD_PREDICTOR_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lbd/embed.hpp"
#include "lbd/graph.hpp"
#include "lbd/ingest.hpp"

namespace lbd {

enum class PairLabel { kNegative = 0, kPositive = 1 };

// Unordered pair of coded-term node ids, stored with a < b.
struct PairExample {
  std::string a;
  std::string b;
  PairLabel label;

  bool operator==(const PairExample&) const = default;
};

// "c0079201" or "m:c0079201" -> "m:c0079201".
std::string coded_node_id(std::string_view code);

// Positives: every coded pair that shares a sentence. Negatives: up to
// neg_ratio * |positives| distinct coded pairs that never share one, drawn
// uniformly with the given seed. Both groups are returned sorted.
std::vector<PairExample> make_training_pairs(const SemanticGraph& g, int neg_ratio,
                                             std::uint64_t seed);

// One-hidden-layer scorer over the symmetric features [u*v ; |u-v|]:
//   score = sigmoid(w2 . relu(W1 phi + b1) + b2)
class PredictorModel {
 public:
  PredictorModel() = default;
  PredictorModel(int embed_dim, int hidden, std::uint64_t seed);

  int embed_dim() const { return embed_dim_; }
  int input_dim() const { return 2 * embed_dim_; }
  int hidden() const { return hidden_; }

  // Layout: W1 (hidden x input_dim, row-major), b1, w2, b2.
  std::span<const double> parameters() const { return params_; }
  std::span<double> mutable_parameters() { return params_; }

  static std::vector<double> features(std::span<const double> u, std::span<const double> v);

  double score(std::span<const double> features) const;
  // Writes d(score)/d(parameters) into `grad` (size parameters().size()) and
  // returns the score.
  double score_with_gradient(std::span<const double> features, std::span<double> grad) const;

  std::string serialize() const;
  static PredictorModel parse(std::string_view text);

  bool operator==(const PredictorModel&) const = default;

 private:
  int embed_dim_ = 0;
  int hidden_ = 0;
  std::vector<double> params_;
};

struct PredictorTrainParams {
  int epochs = 50;
  double learning_rate = 0.05;
  double margin = 0.2;
  int hidden = 32;
  std::uint64_t seed = 7;
};

struct PredictorReport {
  // Mean margin ranking loss over the matched (positive, negative) samples.
  std::vector<double> epoch_loss;
};

// Minimizes max(0, margin - score(p) + score(n)) by SGD. Each epoch shuffles
// positives and negatives and walks max(|P|, |N|) matched samples, cycling the
// shorter list.
PredictorModel train_predictor(std::span<const PairExample> pairs, const EmbeddingTable& table,
                               const PredictorTrainParams& params,
                               PredictorReport* report = nullptr);

// a and b are coded node ids or bare codes.
double score_pair(const PredictorModel& model, const EmbeddingTable& table,
                  std::string_view a, std::string_view b);

struct CodePair {
  std::string a;
  std::string b;
};

std::vector<CodePair> cross_pairs(std::span<const std::string> codes_a,
                                  std::span<const std::string> codes_b);

struct RankedRow {
  std::string code_a;
  std::string code_b;
  double score = 0.0;
  std::string label_a;
  std::string label_b;
  bool promising = false;
  bool secondary = false;
};

struct RankedTable {
  std::vector<RankedRow> rows;
  double promising_threshold = 0.7;
  double secondary_threshold = 0.5;

  // Columns: code_a code_b score label_a label_b promising.
  std::string to_tsv() const;
};

// Scores each pair, sorts by score descending (ties by code pair) and flags
// rows strictly above each threshold.
RankedTable rank_candidates(const PredictorModel& model, const EmbeddingTable& table,
                            const Vocabulary& vocab, std::span<const CodePair> pairs,
                            double promising_threshold = 0.7,
                            double secondary_threshold = 0.5);

}  // namespace lbd

#endif  // LBD_PREDICTOR_HPP_
