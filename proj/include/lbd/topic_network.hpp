#ifndef LBD_TOPIC_NETWORK_HPP_
#define LBD_TOPIC_NETWORK_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lbd/embed.hpp"
#include "lbd/lda.hpp"

namespace lbd {

// c_k = sum_t p_k(t) * vector_of(t) over the whole topic distribution.
std::vector<std::vector<double>> topic_centroids(const TopicModel& model,
                                                 const EmbeddingTable& table);

struct NetworkPoint {
  std::string id;
  std::vector<double> vec;
};

struct NetworkEdge {
  std::uint32_t a;  // a < b, indices into TopicNetwork::ids()
  std::uint32_t b;
  double weight;

  bool operator==(const NetworkEdge&) const = default;
};

// Undirected union of each node's k nearest neighbors (Euclidean distance,
// ties by id). Nodes are kept in id order.
class TopicNetwork {
 public:
  struct Link {
    std::uint32_t node;
    double weight;
  };

  TopicNetwork() = default;
  TopicNetwork(std::vector<NetworkPoint> points, int k);

  int knn_k() const { return knn_k_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::vector<double>>& vectors() const { return vectors_; }
  const std::vector<NetworkEdge>& edges() const { return edges_; }
  std::span<const Link> links(std::uint32_t index) const { return links_[index]; }

  bool contains(std::string_view id) const;
  // Throws NodeNotFound.
  std::uint32_t index_of(std::string_view id) const;

 private:
  int knn_k_ = 0;
  std::vector<std::string> ids_;
  std::vector<std::vector<double>> vectors_;
  std::vector<NetworkEdge> edges_;
  std::vector<std::vector<Link>> links_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

double euclidean_distance(std::span<const double> a, std::span<const double> b);

// Throws TooFewPoints unless 1 <= k < number of points.
TopicNetwork build_knn(std::vector<NetworkPoint> points, int k);

// Minimum total edge weight path (Dijkstra). Equal-cost alternatives resolve
// to the lexicographically smaller predecessor.
std::vector<std::string> network_path(const TopicNetwork& net, std::string_view src,
                                      std::string_view dst);

struct ViaPath {
  std::vector<std::string> nodes;
  // False when some undirected edge occurs more than once.
  bool valid = true;
};

bool has_repeated_edge(std::span<const std::string> path);

// network_path(src, via) followed by network_path(via, dst) without the
// duplicated via node.
ViaPath via_path(const TopicNetwork& net, std::string_view src, std::string_view via,
                 std::string_view dst);

struct Eigenpair {
  double value = 0.0;
  std::vector<double> vector;
};

struct PowerIterationOptions {
  std::uint64_t seed = 0x5eed;
  double tolerance = 1e-10;
  int max_iterations = 10000;
};

// Two leading eigenpairs of a symmetric positive semi-definite matrix
// (row-major, n x n) by power iteration with deflation. Each eigenvector is
// unit length with its first nonzero component positive.
std::array<Eigenpair, 2> top_two_eigenpairs(std::span<const double> matrix, std::size_t n,
                                            const PowerIterationOptions& options = {});

struct LayoutOptions {
  PowerIterationOptions power;
  // Nodes farther than mean + outlier_sigma * stddev from the layout
  // centroid are flagged.
  double outlier_sigma = 2.0;
};

struct Layout {
  std::vector<std::array<double, 2>> coords;
  std::vector<bool> outliers;
  // Covariance rank below 2; the missing axes are zero.
  bool degenerate = false;
  std::array<Eigenpair, 2> axes;
};

// PCA projection of the points onto the top two covariance eigenvectors.
Layout layout_2d(std::span<const std::vector<double>> points, const LayoutOptions& options = {});

}  // namespace lbd

#endif  // LBD_TOPIC_NETWORK_HPP_
