#include "lbd/embed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lbd/error.hpp"
#include "lbd/random.hpp"
#include "lbd/text_format.hpp"

namespace lbd {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double dot(const double* a, const double* b, int n) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

}  // namespace

void EmbedParams::validate() const {
  if (dim < 2 || dim > 512) {
    throw Error(ErrorKind::kInvalidArgument, "embedding dim must be in [2, 512]");
  }
  if (walk_length < 1 || walks_per_node < 1 || window < 1 || negatives_per_positive < 1 ||
      epochs < 1 || !(learning_rate > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "embedding parameters must be positive");
  }
}

EmbeddingTable::EmbeddingTable(int dim, std::uint64_t seed, std::vector<std::string> ids,
                               std::vector<double> data)
    : dim_(dim), seed_(seed) {
  if (dim < 1 || data.size() != ids.size() * static_cast<std::size_t>(dim)) {
    throw Error(ErrorKind::kInvalidArgument, "embedding table shape mismatch");
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  ids_.reserve(ids.size());
  data_.reserve(data.size());
  for (std::size_t src : order) {
    if (!std::all_of(data.begin() + src * dim, data.begin() + (src + 1) * dim,
                     [](double v) { return std::isfinite(v); })) {
      throw Error(ErrorKind::kInvalidArgument, "non-finite embedding for " + ids[src]);
    }
    if (!index_.emplace(ids[src], ids_.size()).second) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate embedding id " + ids[src]);
    }
    ids_.push_back(std::move(ids[src]));
    data_.insert(data_.end(), data.begin() + src * dim, data.begin() + (src + 1) * dim);
  }
}

bool EmbeddingTable::contains(std::string_view id) const {
  return index_.contains(std::string(id));
}

std::span<const double> EmbeddingTable::vector_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw Error(ErrorKind::kNodeNotFound, std::string(id));
  return row(it->second);
}

std::string EmbeddingTable::serialize() const {
  std::string out = "dim=" + std::to_string(dim_) + " seed=" + std::to_string(seed_) +
                    " nodes=" + std::to_string(ids_.size()) + "\n";
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    out += ids_[i];
    for (double v : row(i)) {
      out.push_back(' ');
      out += format_double(v);
    }
    out.push_back('\n');
  }
  return out;
}

EmbeddingTable EmbeddingTable::parse(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorKind::kMalformedRecord, "embedding file: no header");
  const auto header = split(lines[0], ' ');
  const auto field = [&](std::size_t i, std::string_view name) {
    if (header.size() != 3 || !header[i].starts_with(name)) {
      throw Error(ErrorKind::kMalformedRecord, "embedding file: bad header");
    }
    return parse_uint(header[i].substr(name.size()));
  };
  const auto dim = static_cast<int>(field(0, "dim="));
  const std::uint64_t seed = field(1, "seed=");
  const std::size_t count = field(2, "nodes=");
  if (lines.size() != count + 1) {
    throw Error(ErrorKind::kMalformedRecord, "embedding file: node count mismatch");
  }
  std::vector<std::string> ids;
  std::vector<double> data;
  ids.reserve(count);
  data.reserve(count * dim);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto parts = split(lines[i], ' ');
    if (parts.size() != static_cast<std::size_t>(dim) + 1) {
      throw Error(ErrorKind::kMalformedRecord,
                  "embedding file: line " + std::to_string(i + 1) + " has wrong width");
    }
    ids.emplace_back(parts[0]);
    for (std::size_t j = 1; j < parts.size(); ++j) data.push_back(parse_double(parts[j]));
  }
  return EmbeddingTable(dim, seed, std::move(ids), std::move(data));
}

EmbeddingTable train_embeddings(const NodeAdjacency& graph, const EmbedParams& params,
                                EmbedReport* report) {
  params.validate();
  const std::size_t n = graph.ids.size();
  if (n == 0) throw Error(ErrorKind::kEmptyGraph, "cannot embed an empty graph");
  const int d = params.dim;
  Rng rng(params.seed);

  std::vector<double> input(n * d);
  for (double& v : input) v = rng.uniform_real(-0.5 / d, 0.5 / d);
  std::vector<double> output(n * d, 0.0);

  // Walks: walks_per_node rounds, each visiting every node in index order.
  std::vector<std::uint32_t> walk_nodes;
  std::vector<std::size_t> walk_offsets{0};
  for (int round = 0; round < params.walks_per_node; ++round) {
    for (std::uint32_t start = 0; start < n; ++start) {
      std::uint32_t current = start;
      walk_nodes.push_back(current);
      for (int step = 1; step < params.walk_length; ++step) {
        const auto& nbrs = graph.neighbors[current];
        if (nbrs.empty()) break;
        current = nbrs[rng.uniform_index(nbrs.size())];
        walk_nodes.push_back(current);
      }
      walk_offsets.push_back(walk_nodes.size());
    }
  }

  // Cumulative degree^0.75 table for negative draws.
  std::vector<double> cumulative(n);
  double total_weight = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total_weight += std::pow(static_cast<double>(graph.neighbors[i].size()), 0.75);
    cumulative[i] = total_weight;
  }
  const auto draw_negative = [&]() -> std::uint32_t {
    const double r = rng.uniform_real() * total_weight;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    if (it == cumulative.end()) --it;
    return static_cast<std::uint32_t>(it - cumulative.begin());
  };

  const std::size_t walk_count = walk_offsets.size() - 1;
  const double total_steps = static_cast<double>(params.epochs) * walk_nodes.size();
  double step = 0.0;
  std::vector<double> grad(d);
  std::vector<std::uint32_t> targets;

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t positives = 0;
    for (std::size_t w = 0; w < walk_count && total_weight > 0.0; ++w) {
      const std::size_t begin = walk_offsets[w];
      const std::size_t end = walk_offsets[w + 1];
      for (std::size_t i = begin; i < end; ++i, step += 1.0) {
        const double lr =
            params.learning_rate * std::max(1e-4, 1.0 - step / total_steps);
        const std::uint32_t center = walk_nodes[i];
        double* center_vec = input.data() + static_cast<std::size_t>(center) * d;
        const std::size_t lo = i - std::min<std::size_t>(i - begin, params.window);
        const std::size_t hi = std::min(end, i + params.window + 1);
        for (std::size_t j = lo; j < hi; ++j) {
          if (j == i) continue;
          const std::uint32_t context = walk_nodes[j];
          targets.assign(1, context);
          for (int k = 0; k < params.negatives_per_positive; ++k) {
            const std::uint32_t neg = draw_negative();
            if (neg != context) targets.push_back(neg);
          }
          std::fill(grad.begin(), grad.end(), 0.0);
          for (std::size_t t = 0; t < targets.size(); ++t) {
            double* target_vec = output.data() + static_cast<std::size_t>(targets[t]) * d;
            const double score = dot(center_vec, target_vec, d);
            const double label = t == 0 ? 1.0 : 0.0;
            epoch_loss += t == 0 ? softplus(-score) : softplus(score);
            const double g = (label - sigmoid(score)) * lr;
            for (int k = 0; k < d; ++k) {
              grad[k] += g * target_vec[k];
              target_vec[k] += g * center_vec[k];
            }
          }
          for (int k = 0; k < d; ++k) center_vec[k] += grad[k];
          ++positives;
        }
      }
    }
    if (report) {
      report->epoch_loss.push_back(positives ? epoch_loss / positives : 0.0);
    }
  }
  return EmbeddingTable(d, params.seed, graph.ids, std::move(input));
}

EmbeddingTable train_embeddings(const SemanticGraph& graph, const EmbedParams& params,
                                EmbedReport* report) {
  if (graph.node_count() == 0) {
    throw Error(ErrorKind::kEmptyGraph, "cannot embed an empty graph");
  }
  return train_embeddings(graph.adjacency(), params, report);
}

}  // namespace lbd
