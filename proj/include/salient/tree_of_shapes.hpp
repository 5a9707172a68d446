#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "salient/image.hpp"

namespace salient {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

/// Inclusion tree of the shapes of an image.
///
/// Nodes are numbered so that a parent always precedes its children; node 0
/// is the root and `parent[0] == 0`. Siblings are ordered by the raster index
/// of their first pixel, which makes the numbering independent of how the
/// tree was built.
struct ShapeTree {
  int width = 0;
  int height = 0;
  std::vector<NodeId> parent;
  std::vector<double> level;         ///< gray level at which the shape appears
  std::vector<NodeId> node_of_pixel; ///< smallest shape containing each pixel

  std::size_t size() const { return parent.size(); }
  static constexpr NodeId root() { return 0; }
  bool is_root(NodeId n) const { return n == 0; }

  /// Children lists, each in increasing node order.
  std::vector<std::vector<NodeId>> children() const;

  /// Pixel indices of each shape (its whole subtree), mostly for tests.
  std::vector<std::vector<std::uint32_t>> pixel_sets() const;
};

/// Per-node geometry: area in pixels, contour length in 1-faces, sum of
/// gray levels, sum of the gradient field over the contour.
struct NodeInfo {
  std::vector<std::int64_t> area;
  std::vector<std::int64_t> length;
  std::vector<double> sum;
  std::vector<double> grad_sum;
};

/// For each 1-face e, the shapes whose contour passes through e form at most
/// two parent chains ending just below `vanish(e)`: one starting at
/// `appear(e)` and, when e separates two sibling branches, a second one
/// starting at `appear_alt(e)`. `vanish` is `kNoNode` on the outer ring,
/// where the chain runs up to and including the root.
struct BoundaryMaps {
  KhalimskyGrid grid;
  std::vector<NodeId> appear;
  std::vector<NodeId> appear_alt;
  std::vector<NodeId> vanish;
};

struct RegionDecomposition {
  std::vector<std::int64_t> area;
  std::vector<double> sum;
};

struct TreeOfShapes {
  ShapeTree tree;
  NodeInfo info;
  BoundaryMaps maps;
};

/// Value of every face of the Khalimsky grid under the self-dual
/// interpolation used for the tree: 1-faces take the mean of their pixels,
/// 0-faces the median of theirs.
std::vector<double> interpolate_khalimsky(const GrayImage& img);

/// Builds the tree of shapes of `img`. The image border should be constant
/// (see `add_median_frame`) so that the root is the whole domain.
TreeOfShapes build_tree(const GrayImage& img, const GradientField& grad);

/// Recomputes area, contour, sums and boundary maps for an existing tree.
void compute_node_info(const GrayImage& img, const GradientField& grad, const ShapeTree& tree,
                       NodeInfo& info, BoundaryMaps& maps);

RegionDecomposition region_decomposition(const ShapeTree& tree, const NodeInfo& info);

/// Paints each pixel with the value of its smallest containing shape.
GrayImage reconstruct(const ShapeTree& tree, std::span<const double> node_values);

/// One line per node: `node parent gray A L S_f S_grad`.
void dump_tree(std::ostream& out, const ShapeTree& tree, const NodeInfo& info);

}  // namespace salient
