#include "lbd/graph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <set>

#include "lbd/error.hpp"
#include "lbd/text_format.hpp"

namespace lbd {

SemanticGraph SemanticGraph::build(std::span<const TokenSet> token_sets) {
  SemanticGraph g;
  std::set<std::string_view> sentence_ids;
  std::set<std::string_view> all_ids;
  for (const auto& ts : token_sets) {
    if (!is_sentence_id(ts.sent_id)) {
      throw Error(ErrorKind::kInvalidArgument, "not a sentence id: " + ts.sent_id);
    }
    if (!sentence_ids.insert(ts.sent_id).second) {
      throw Error(ErrorKind::kDuplicateSentence, ts.sent_id);
    }
    all_ids.insert(ts.sent_id);
    for (const auto& [key, count] : ts.counts) {
      if (!parse_token(key) || count == 0) {
        throw Error(ErrorKind::kInvalidArgument, "invalid token " + key + " in " + ts.sent_id);
      }
      all_ids.insert(key);
    }
  }
  g.ids_.assign(all_ids.begin(), all_ids.end());
  g.index_.reserve(g.ids_.size());
  for (std::uint32_t i = 0; i < g.ids_.size(); ++i) g.index_.emplace(g.ids_[i], i);
  g.adjacency_.resize(g.ids_.size());
  for (const auto& ts : token_sets) {
    const std::uint32_t s = g.index_.at(ts.sent_id);
    for (const auto& [key, count] : ts.counts) {
      const std::uint32_t t = g.index_.at(key);
      g.adjacency_[s].push_back({t, count});
      g.adjacency_[t].push_back({s, count});
      ++g.edge_count_;
    }
  }
  for (auto& list : g.adjacency_) {
    std::sort(list.begin(), list.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
  }
  return g;
}

bool SemanticGraph::contains(std::string_view id) const {
  return index_.contains(std::string(id));
}

std::uint32_t SemanticGraph::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw Error(ErrorKind::kNodeNotFound, std::string(id));
  return it->second;
}

NodeAdjacency SemanticGraph::adjacency() const {
  NodeAdjacency out;
  out.ids = ids_;
  out.neighbors.resize(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    for (const auto& nb : adjacency_[i]) out.neighbors[i].push_back(nb.node);
  }
  return out;
}

std::string SemanticGraph::serialize() const {
  std::string out = "nodes " + std::to_string(ids_.size()) + "\n";
  for (const auto& id : ids_) out += id + "\n";
  out += "edges " + std::to_string(edge_count_) + "\n";
  for (std::uint32_t i = 0; i < ids_.size(); ++i) {
    if (!is_sentence_id(ids_[i])) continue;
    for (const auto& nb : adjacency_[i]) {
      out += ids_[i] + '\t' + ids_[nb.node] + '\t' + std::to_string(nb.count) + '\n';
    }
  }
  return out;
}

SemanticGraph SemanticGraph::parse(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  std::size_t pos = 0;
  const auto header = [&](std::string_view name) -> std::size_t {
    if (pos >= lines.size() || !lines[pos].starts_with(name)) {
      throw Error(ErrorKind::kMalformedRecord, "graph file: expected '" +
                                                   std::string(name) + "' header");
    }
    return parse_uint(lines[pos++].substr(name.size()));
  };
  const std::size_t node_count = header("nodes ");
  if (pos + node_count > lines.size()) {
    throw Error(ErrorKind::kMalformedRecord, "graph file: truncated node list");
  }
  std::map<std::string, std::map<std::string, std::uint32_t>> edges;
  for (std::size_t i = 0; i < node_count; ++i, ++pos) {
    if (is_sentence_id(lines[pos])) edges[std::string(lines[pos])];
  }
  const std::size_t edge_count = header("edges ");
  if (pos + edge_count != lines.size()) {
    throw Error(ErrorKind::kMalformedRecord, "graph file: edge count mismatch");
  }
  for (; pos < lines.size(); ++pos) {
    const auto fields = split(lines[pos], '\t');
    if (fields.size() != 3) {
      throw Error(ErrorKind::kMalformedRecord, "graph file: bad edge row");
    }
    auto& counts = edges[std::string(fields[0])];
    counts[std::string(fields[1])] = static_cast<std::uint32_t>(parse_uint(fields[2]));
  }
  std::vector<TokenSet> sets;
  for (auto& [sent, counts] : edges) sets.push_back({sent, std::move(counts)});
  SemanticGraph g = build(sets);
  if (g.node_count() != node_count) {
    throw Error(ErrorKind::kMalformedRecord, "graph file: node list mismatch");
  }
  return g;
}

GraphPath shortest_path(const SemanticGraph& g, std::string_view src, std::string_view dst) {
  const std::uint32_t from = g.index_of(src);
  const std::uint32_t to = g.index_of(dst);
  constexpr std::uint32_t kUnseen = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> parent(g.node_count(), kUnseen);
  parent[from] = from;
  std::deque<std::uint32_t> frontier{from};
  while (!frontier.empty() && parent[to] == kUnseen) {
    const std::uint32_t u = frontier.front();
    frontier.pop_front();
    for (const auto& nb : g.neighbors(u)) {
      if (parent[nb.node] != kUnseen) continue;
      parent[nb.node] = u;
      frontier.push_back(nb.node);
    }
  }
  if (parent[to] == kUnseen) {
    throw Error(ErrorKind::kNoPath, std::string(src) + " -> " + std::string(dst));
  }
  GraphPath path;
  for (std::uint32_t v = to;; v = parent[v]) {
    path.nodes.push_back(g.id(v));
    if (v == from) break;
  }
  std::reverse(path.nodes.begin(), path.nodes.end());
  return path;
}

std::vector<std::string> extract_neighborhood(const SemanticGraph& g, const GraphPath& path,
                                              std::size_t cap) {
  if (path.nodes.empty()) throw Error(ErrorKind::kEmptyPath, "empty path");
  if (cap < 1) throw Error(ErrorKind::kInvalidArgument, "neighborhood cap must be >= 1");
  // sentence index -> number of path tokens it touches
  std::map<std::uint32_t, std::size_t> incidence;
  for (const auto& id : path.nodes) {
    const std::uint32_t v = g.index_of(id);
    if (is_sentence_id(id)) {
      incidence.try_emplace(v, 0);
      continue;
    }
    for (const auto& nb : g.neighbors(v)) ++incidence[nb.node];
  }
  std::vector<std::pair<std::uint32_t, std::size_t>> ranked(incidence.begin(), incidence.end());
  if (ranked.size() > cap) {
    // Index order equals id order, so the index breaks ties lexicographically.
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    ranked.resize(cap);
  }
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (const auto& [v, score] : ranked) out.push_back(g.id(v));
  std::sort(out.begin(), out.end());
  return out;
}

TokenSet first_order_tokens(const SemanticGraph& g, std::string_view sent_id) {
  if (!is_sentence_id(sent_id)) {
    throw Error(ErrorKind::kNodeNotFound, "not a sentence node: " + std::string(sent_id));
  }
  const std::uint32_t s = g.index_of(sent_id);
  TokenSet out;
  out.sent_id = std::string(sent_id);
  for (const auto& nb : g.neighbors(s)) out.counts.emplace(g.id(nb.node), nb.count);
  return out;
}

}  // namespace lbd
