#include "lbd/topic_network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>

#include "lbd/error.hpp"
#include "lbd/random.hpp"

namespace lbd {

std::vector<std::vector<double>> topic_centroids(const TopicModel& model,
                                                 const EmbeddingTable& table) {
  std::vector<std::span<const double>> token_vectors;
  token_vectors.reserve(model.vocabulary.size());
  for (const auto& token : model.vocabulary) {
    if (!table.contains(token)) throw Error(ErrorKind::kMissingEmbedding, token);
    token_vectors.push_back(table.vector_of(token));
  }
  std::vector<std::vector<double>> centroids(model.topics,
                                             std::vector<double>(table.dim(), 0.0));
  for (int k = 0; k < model.topics; ++k) {
    const auto dist = model.distribution(k);
    auto& c = centroids[k];
    for (std::size_t t = 0; t < dist.size(); ++t) {
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += dist[t] * token_vectors[t][i];
    }
  }
  return centroids;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

TopicNetwork::TopicNetwork(std::vector<NetworkPoint> points, int k) : knn_k_(k) {
  if (k < 1) throw Error(ErrorKind::kInvalidArgument, "knn k must be >= 1");
  if (points.size() < 2 || static_cast<std::size_t>(k) >= points.size()) {
    throw Error(ErrorKind::kTooFewPoints, "knn k=" + std::to_string(k) + " needs more than " +
                                              std::to_string(k) + " points, got " +
                                              std::to_string(points.size()));
  }
  std::sort(points.begin(), points.end(),
            [](const NetworkPoint& a, const NetworkPoint& b) { return a.id < b.id; });
  const std::size_t n = points.size();
  const std::size_t dim = points[0].vec.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].vec.size() != dim) {
      throw Error(ErrorKind::kInvalidArgument, "network points differ in dimension");
    }
    if (!index_.emplace(points[i].id, static_cast<std::uint32_t>(i)).second) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate network node " + points[i].id);
    }
    ids_.push_back(points[i].id);
    vectors_.push_back(std::move(points[i].vec));
  }

  std::map<std::pair<std::uint32_t, std::uint32_t>, double> edge_map;
  std::vector<std::pair<double, std::uint32_t>> candidates;
  for (std::uint32_t i = 0; i < n; ++i) {
    candidates.clear();
    for (std::uint32_t j = 0; j < n; ++j) {
      if (j != i) candidates.emplace_back(euclidean_distance(vectors_[i], vectors_[j]), j);
    }
    // Index order equals id order, so pair comparison breaks ties by id.
    std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end());
    for (int r = 0; r < k; ++r) {
      const auto [dist, j] = candidates[r];
      edge_map.emplace(std::minmax(i, j), dist);
    }
  }
  links_.resize(n);
  for (const auto& [ends, weight] : edge_map) {
    edges_.push_back({ends.first, ends.second, weight});
    links_[ends.first].push_back({ends.second, weight});
    links_[ends.second].push_back({ends.first, weight});
  }
  for (auto& list : links_) {
    std::sort(list.begin(), list.end(),
              [](const Link& a, const Link& b) { return a.node < b.node; });
  }
}

bool TopicNetwork::contains(std::string_view id) const {
  return index_.contains(std::string(id));
}

std::uint32_t TopicNetwork::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw Error(ErrorKind::kNodeNotFound, std::string(id));
  return it->second;
}

TopicNetwork build_knn(std::vector<NetworkPoint> points, int k) {
  return TopicNetwork(std::move(points), k);
}

std::vector<std::string> network_path(const TopicNetwork& net, std::string_view src,
                                      std::string_view dst) {
  const std::uint32_t from = net.index_of(src);
  const std::uint32_t to = net.index_of(dst);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  const std::size_t n = net.size();
  std::vector<double> dist(n, kInf);
  std::vector<std::uint32_t> pred(n, kNone);
  std::vector<bool> done(n, false);
  using Entry = std::pair<double, std::uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[from] = 0.0;
  queue.emplace(0.0, from);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (done[u]) continue;
    done[u] = true;
    if (u == to) break;
    for (const auto& link : net.links(u)) {
      if (done[link.node]) continue;
      const double candidate = d + link.weight;
      if (candidate < dist[link.node] ||
          (candidate == dist[link.node] && u < pred[link.node])) {
        const bool improved = candidate < dist[link.node];
        dist[link.node] = candidate;
        pred[link.node] = u;
        if (improved) queue.emplace(candidate, link.node);
      }
    }
  }
  if (!done[to]) {
    throw Error(ErrorKind::kNoPath, std::string(src) + " -> " + std::string(dst));
  }
  std::vector<std::string> path;
  for (std::uint32_t v = to;; v = pred[v]) {
    path.push_back(net.ids()[v]);
    if (v == from) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

bool has_repeated_edge(std::span<const std::string> path) {
  std::map<std::pair<std::string_view, std::string_view>, int> seen;
  for (std::size_t i = 1; i < path.size(); ++i) {
    std::string_view a = path[i - 1];
    std::string_view b = path[i];
    if (b < a) std::swap(a, b);
    if (++seen[{a, b}] > 1) return true;
  }
  return false;
}

ViaPath via_path(const TopicNetwork& net, std::string_view src, std::string_view via,
                 std::string_view dst) {
  net.index_of(src);
  net.index_of(via);
  net.index_of(dst);
  if (via == src || via == dst) {
    throw Error(ErrorKind::kInvalidArgument, "via node must differ from source and target");
  }
  ViaPath out;
  out.nodes = network_path(net, src, via);
  const auto second = network_path(net, via, dst);
  out.nodes.insert(out.nodes.end(), second.begin() + 1, second.end());
  out.valid = !has_repeated_edge(out.nodes);
  return out;
}

// ---------------------------------------------------------------------------
// PCA

namespace {

void normalize(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  }
}

void fix_sign(std::vector<double>& v) {
  double largest = 0.0;
  for (double x : v) largest = std::max(largest, std::fabs(x));
  for (double x : v) {
    if (std::fabs(x) > 1e-12 * largest) {
      if (x < 0.0) {
        for (double& y : v) y = -y;
      }
      return;
    }
  }
}

std::vector<double> multiply(std::span<const double> m, std::size_t n,
                             const std::vector<double>& v) {
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += m[i * n + j] * v[j];
    out[i] = sum;
  }
  return out;
}

double rayleigh(std::span<const double> m, std::size_t n, const std::vector<double>& v) {
  const auto mv = multiply(m, n, v);
  return std::inner_product(v.begin(), v.end(), mv.begin(), 0.0);
}

void remove_component(std::vector<double>& v, const std::vector<double>& basis) {
  const double proj = std::inner_product(v.begin(), v.end(), basis.begin(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * basis[i];
}

Eigenpair power_iterate(std::span<const double> m, std::size_t n, Rng& rng,
                        const PowerIterationOptions& options,
                        const std::vector<double>* orthogonal_to) {
  Eigenpair pair;
  pair.vector.resize(n);
  for (double& x : pair.vector) x = rng.uniform_real(-1.0, 1.0);
  if (orthogonal_to) remove_component(pair.vector, *orthogonal_to);
  normalize(pair.vector);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    auto next = multiply(m, n, pair.vector);
    if (orthogonal_to) remove_component(next, *orthogonal_to);
    double norm = 0.0;
    for (double x : next) norm += x * x;
    if (norm == 0.0) break;
    normalize(next);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      change = std::max(change, std::fabs(next[i] - pair.vector[i]));
    }
    pair.vector = std::move(next);
    if (change < options.tolerance) break;
  }
  fix_sign(pair.vector);
  pair.value = rayleigh(m, n, pair.vector);
  return pair;
}

}  // namespace

std::array<Eigenpair, 2> top_two_eigenpairs(std::span<const double> matrix, std::size_t n,
                                            const PowerIterationOptions& options) {
  if (n < 2 || matrix.size() != n * n) {
    throw Error(ErrorKind::kInvalidArgument, "eigenproblem needs an n x n matrix with n >= 2");
  }
  Rng rng(options.seed);
  std::array<Eigenpair, 2> pairs;
  pairs[0] = power_iterate(matrix, n, rng, options, nullptr);
  std::vector<double> deflated(matrix.begin(), matrix.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      deflated[i * n + j] -= pairs[0].value * pairs[0].vector[i] * pairs[0].vector[j];
    }
  }
  pairs[1] = power_iterate(deflated, n, rng, options, &pairs[0].vector);
  pairs[1].value = rayleigh(matrix, n, pairs[1].vector);
  return pairs;
}

Layout layout_2d(std::span<const std::vector<double>> points, const LayoutOptions& options) {
  const std::size_t count = points.size();
  if (count < 2) throw Error(ErrorKind::kTooFewPoints, "layout needs at least 2 nodes");
  const std::size_t dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) throw Error(ErrorKind::kInvalidArgument, "layout dimension mismatch");
  }
  Layout layout;
  layout.coords.assign(count, {0.0, 0.0});
  layout.outliers.assign(count, false);

  std::vector<double> mean(dim, 0.0);
  for (const auto& p : points) {
    for (std::size_t i = 0; i < dim; ++i) mean[i] += p[i];
  }
  for (double& m : mean) m /= static_cast<double>(count);
  std::vector<std::vector<double>> centered(count, std::vector<double>(dim));
  for (std::size_t r = 0; r < count; ++r) {
    for (std::size_t i = 0; i < dim; ++i) centered[r][i] = points[r][i] - mean[i];
  }

  std::vector<double> cov(dim * dim, 0.0);
  for (const auto& row : centered) {
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = i; j < dim; ++j) cov[i * dim + j] += row[i] * row[j];
    }
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      cov[i * dim + j] /= static_cast<double>(count - 1);
      cov[j * dim + i] = cov[i * dim + j];
    }
    trace += cov[i * dim + i];
  }

  if (dim < 2 || !(trace > 0.0)) {
    layout.degenerate = true;
    if (dim == 1 && trace > 0.0) {
      for (std::size_t r = 0; r < count; ++r) layout.coords[r][0] = centered[r][0];
    }
  } else {
    layout.axes = top_two_eigenpairs(cov, dim, options.power);
    const double zero = 1e-12 * trace;
    for (int axis = 0; axis < 2; ++axis) {
      if (layout.axes[axis].value <= zero) {
        layout.degenerate = true;
        continue;
      }
      for (std::size_t r = 0; r < count; ++r) {
        layout.coords[r][axis] = std::inner_product(
            centered[r].begin(), centered[r].end(), layout.axes[axis].vector.begin(), 0.0);
      }
    }
  }

  std::array<double, 2> centroid{0.0, 0.0};
  for (const auto& c : layout.coords) {
    centroid[0] += c[0];
    centroid[1] += c[1];
  }
  centroid[0] /= static_cast<double>(count);
  centroid[1] /= static_cast<double>(count);
  std::vector<double> distances(count);
  double mean_distance = 0.0;
  for (std::size_t r = 0; r < count; ++r) {
    distances[r] = std::hypot(layout.coords[r][0] - centroid[0], layout.coords[r][1] - centroid[1]);
    mean_distance += distances[r];
  }
  mean_distance /= static_cast<double>(count);
  double variance = 0.0;
  for (double d : distances) variance += (d - mean_distance) * (d - mean_distance);
  const double stddev = std::sqrt(variance / static_cast<double>(count));
  for (std::size_t r = 0; r < count; ++r) {
    layout.outliers[r] = distances[r] > mean_distance + options.outlier_sigma * stddev;
  }
  return layout;
}

}  // namespace lbd
