#ifndef LBD_EMBED_HPP_
#define LBD_EMBED_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lbd/graph.hpp"

namespace lbd {

struct EmbedParams {
  int dim = 64;
  int walk_length = 8;
  int walks_per_node = 10;
  int window = 3;
  int negatives_per_positive = 5;
  int epochs = 5;
  // Decays linearly towards zero over the whole run.
  double learning_rate = 0.025;
  std::uint64_t seed = 42;

  // Throws InvalidArgument unless every field is positive and dim is in [2, 512].
  void validate() const;
};

// One d-dimensional vector per node id, stored row-major in id order.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  // Rows of `data` follow `ids`; the table re-sorts both by id.
  EmbeddingTable(int dim, std::uint64_t seed, std::vector<std::string> ids,
                 std::vector<double> data);

  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  bool contains(std::string_view id) const;
  // Throws NodeNotFound.
  std::span<const double> vector_of(std::string_view id) const;
  std::span<const double> row(std::size_t index) const {
    return {data_.data() + index * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }

  // Header "dim=<d> seed=<s> nodes=<n>" then `id v1 ... vd` per node, each
  // value in shortest round-trip decimal form.
  std::string serialize() const;
  static EmbeddingTable parse(std::string_view text);

 private:
  int dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline std::span<const double> vector_of(const EmbeddingTable& table, std::string_view id) {
  return table.vector_of(id);
}

struct EmbedReport {
  // Mean negative-sampling loss per positive pair, one entry per epoch.
  std::vector<double> epoch_loss;
};

// Skip-gram with negative sampling over uniform random walks. Negatives are
// drawn proportionally to degree^0.75. Sequential and seed-deterministic.
EmbeddingTable train_embeddings(const NodeAdjacency& graph, const EmbedParams& params,
                                EmbedReport* report = nullptr);
EmbeddingTable train_embeddings(const SemanticGraph& graph, const EmbedParams& params,
                                EmbedReport* report = nullptr);

}  // namespace lbd

#endif  // LBD_EMBED_HPP_
