#ifndef LBD_GRAPH_HPP_
#define LBD_GRAPH_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lbd/ingest.hpp"

namespace lbd {

inline bool is_sentence_id(std::string_view id) { return id.starts_with("s:"); }
inline bool is_coded_id(std::string_view id) { return id.starts_with("m:"); }

struct GraphPath {
  std::vector<std::string> nodes;

  std::size_t length() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  bool operator==(const GraphPath&) const = default;
};

// Plain adjacency over dense node indices, shared with the embedding trainer.
struct NodeAdjacency {
  std::vector<std::string> ids;
  std::vector<std::vector<std::uint32_t>> neighbors;
};

// Bipartite graph between sentence nodes ("s:...") and token nodes. Nodes are
// stored in lexicographic id order so index order equals id order, and every
// adjacency list is sorted.
class SemanticGraph {
 public:
  struct Neighbor {
    std::uint32_t node;
    std::uint32_t count;
  };

  static SemanticGraph build(std::span<const TokenSet> token_sets);

  std::size_t node_count() const { return ids_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::string& id(std::uint32_t index) const { return ids_[index]; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const Neighbor> neighbors(std::uint32_t index) const { return adjacency_[index]; }
  std::size_t degree(std::uint32_t index) const { return adjacency_[index].size(); }

  bool contains(std::string_view id) const;
  // Throws NodeNotFound.
  std::uint32_t index_of(std::string_view id) const;

  NodeAdjacency adjacency() const;

  // Text form: "nodes <N>" followed by N ids, then "edges <M>" followed by
  // M sorted `sent_id<TAB>token_key<TAB>count` rows.
  std::string serialize() const;
  static SemanticGraph parse(std::string_view text);

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::size_t edge_count_ = 0;
};

inline SemanticGraph build_graph(std::span<const TokenSet> token_sets) {
  return SemanticGraph::build(token_sets);
}

// Minimum-hop path by breadth-first search expanding neighbors in id order.
GraphPath shortest_path(const SemanticGraph& g, std::string_view src, std::string_view dst);

// Sentences on the path plus every sentence adjacent to a token on the path.
// Above `cap`, keeps the sentences adjacent to the most path tokens (ties by
// sent_id). Returned in sorted order.
std::vector<std::string> extract_neighborhood(const SemanticGraph& g, const GraphPath& path,
                                              std::size_t cap);

TokenSet first_order_tokens(const SemanticGraph& g, std::string_view sent_id);

}  // namespace lbd

#endif  // LBD_GRAPH_HPP_
