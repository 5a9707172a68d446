#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "salient/energy.hpp"
#include "salient/image.hpp"
#include "salient/tree_of_shapes.hpp"

namespace salient {

/// Min-tree of the shape space: the graph whose vertices are the nodes of a
/// ShapeTree and whose edges are its parent links, weighted per node.
///
/// Nodes of equal weight that are connected form one plateau; its canonical
/// element is the member with the smallest index, and every other member
/// points to it.
struct ShapeSpaceMinTree {
  std::vector<NodeId> parent;  ///< parent[root] == root
  std::vector<double> level;   ///< weight of each node
  std::vector<NodeId> sorted;  ///< processing order, increasing weight
  NodeId root = 0;

  std::size_t size() const { return parent.size(); }
  bool canonical(NodeId n) const {
    const NodeId p = parent[static_cast<std::size_t>(n)];
    return p == n || level[static_cast<std::size_t>(p)] != level[static_cast<std::size_t>(n)];
  }
};

ShapeSpaceMinTree build_shape_space_min_tree(const ShapeTree& tree, std::span<const double> weights);

struct ExtinctionValues {
  std::vector<double> value;   ///< zero except on minima
  std::vector<NodeId> minima;  ///< canonical nodes of the regional minima
};

ExtinctionValues compute_extinction(const ShapeSpaceMinTree& min_tree);

/// Values on the 0- and 1-faces of the Khalimsky grid; 2-faces hold 0.
struct SaliencyMap {
  KhalimskyGrid grid;
  std::vector<double> values;

  double max() const;
  double at(int kx, int ky) const { return values[grid.index(kx, ky)]; }
};

SaliencyMap compute_saliency(const ShapeTree& tree, const BoundaryMaps& maps,
                             std::span<const double> extinction);

void save_saliency(const std::filesystem::path& path, const SaliencyMap& map);
SaliencyMap load_saliency(const std::filesystem::path& path);

/// 16-bit rendering of the map over the full grid. `rank` spreads the
/// distinct values evenly instead of scaling linearly.
std::vector<std::uint16_t> saliency_display(const SaliencyMap& map, bool inverted, bool rank);
void write_saliency_png(const std::filesystem::path& path, const SaliencyMap& map,
                        bool inverted = false, bool rank = false);

/// Pixels joined across every 1-face whose saliency is at most `threshold`.
/// Labels follow the raster order of each region's first pixel.
LabelImage threshold_partition(const SaliencyMap& map, double threshold);

/// Removes every shape with fewer than `min_area` pixels and recomputes the
/// node information of what remains.
TreeOfShapes grain_filter(const GrayImage& img, const GradientField& grad,
                          const TreeOfShapes& tos, std::int64_t min_area);

/// Each region painted with the mean of the image over it. The result keeps
/// the frame width and bit depth of `img`.
GrayImage render_simplified(const GrayImage& img, const MergeState& state);
GrayImage render_selection(const GrayImage& img, const ShapeTree& tree,
                           std::span<const std::uint8_t> keep);
GrayImage render_partition(const GrayImage& img, const LabelImage& labels);

}  // namespace salient
