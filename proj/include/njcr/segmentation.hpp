#ifndef NJCR_SEGMENTATION_HPP
#define NJCR_SEGMENTATION_HPP

#include "njcr/core.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace njcr {

struct GraphEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;
};

/// Weighted undirected graph with symmetric adjacency lists. Each undirected
/// edge is stored once in edges() and twice in the adjacency lists.
class PixelGraph {
 public:
  PixelGraph() = default;
  PixelGraph(std::size_t node_count, std::vector<GraphEdge> edges);

  std::size_t node_count() const { return node_count_; }
  std::span<const GraphEdge> edges() const { return edges_; }
  double degree(std::size_t node) const { return degree_[node]; }
  std::span<const double> degrees() const { return degree_; }

  /// (neighbor, weight) pairs of a node.
  std::span<const std::pair<std::size_t, double>> neighbors(std::size_t node) const {
    return {adjacency_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
  }
  /// Weight of edge (i, j), 0 when the nodes are not adjacent.
  double weight(std::size_t i, std::size_t j) const;

 private:
  std::size_t node_count_ = 0;
  std::vector<GraphEdge> edges_;
  std::vector<double> degree_;
  std::vector<std::size_t> offsets_;
  std::vector<std::pair<std::size_t, double>> adjacency_;
};

/// Grid graph over spatially adjacent pixels (4- or 8-connectivity) with
/// w_ij = exp(-||x_i - x_j||^2 / (2 sigma_g^2)).
PixelGraph build_graph(const HsiCube& cube, int connectivity, double sigma_g);
PixelGraph build_graph(const PixelMatrix& pixels, std::size_t width, std::size_t height,
                       int connectivity, double sigma_g);

/// Median spectral distance between spatially adjacent pixels, ignoring exact
/// duplicates; 1.0 when every adjacent pair is identical.
double median_adjacent_distance(const PixelMatrix& pixels, std::size_t width, std::size_t height,
                                int connectivity);

/// Total weight of edges with exactly one endpoint in part_a.
double cut_value(const PixelGraph& graph, std::span<const std::size_t> part_a);
/// Sum of degrees over part_a, i.e. cut(A, V).
double assoc_value(const PixelGraph& graph, std::span<const std::size_t> part_a);
/// cut/assoc(A) + cut/assoc(B), +infinity when either side has zero association.
double ncut_value(const PixelGraph& graph, std::span<const std::size_t> part_a);

struct SegmentationOptions {
  std::size_t target_count = 100;
  double sigma_g = 0.0;           // <= 0 selects the median adjacent distance
  std::uint64_t seed = 0;
  int connectivity = 4;
  std::size_t pca_components = 10;  // 0 keeps the full spectral space
  std::size_t lanczos_steps = 120;
  std::size_t dense_limit = 400;    // subgraphs up to this size use a dense eigensolver
};

/// Recursive two-way normalized-cut partitioning into target_count spatially
/// connected superpixels.
SuperpixelMap segment(const HsiCube& cube, const SegmentationOptions& options);

/// Projection of the pixels onto their top principal components (components x N).
PixelMatrix pca_reduce(const PixelMatrix& pixels, std::size_t components);

/// Second generalized eigenvector of (D - W) y = lambda D y restricted to a
/// connected graph, used for the two-way relaxation.
Eigen::VectorXd fiedler_vector(const PixelGraph& graph, std::uint64_t seed,
                               std::size_t lanczos_steps = 120, std::size_t dense_limit = 400);

/// Best threshold split of `order` (ascending embedding order) by ncut; returns
/// the prefix length forming part A.
std::size_t sweep_split(const PixelGraph& graph, std::span<const std::size_t> order);

/// Every label's pixel set is one connected component under the connectivity.
bool labels_connected(const SuperpixelMap& map, int connectivity);

/// SVG drawing of superpixel boundaries (one unit per pixel).
std::string superpixel_svg(const SuperpixelMap& map, double scale = 4.0);

}  // namespace njcr

#endif  // NJCR_SEGMENTATION_HPP
