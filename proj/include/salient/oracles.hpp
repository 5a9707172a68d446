#pragma once

// Brute-force reference implementations used by the test and acceptance
// suites. They follow the definitions directly and are only meant for small
// inputs.

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "salient/image.hpp"
#include "salient/tree_of_shapes.hpp"

namespace salient::oracle {

using PixelSet = std::vector<std::uint32_t>;  // sorted raster indices

/// Every hole-filled 4-connected component of every upper and lower level
/// set of the interpolated image, restricted to pixels. Images up to 16x16.
std::set<PixelSet> tree_of_shapes(const GrayImage& img);

/// Extinction values of the minima of a node-weighted tree, obtained by
/// flooding it level by level. `parent[0] == 0` is the root. At most 50 nodes.
std::vector<double> flood_extinction(std::span<const NodeId> parent,
                                     std::span<const double> weights);

struct OptimalCut {
  double energy = 0.0;
  std::vector<std::uint8_t> keep;  ///< per node; the root is always kept
};

/// Exhaustive search over all prunings of the tree for the minimum of the
/// piecewise-constant Mumford-Shah energy. At most 18 nodes.
OptimalCut optimal_cut(const GrayImage& img, const ShapeTree& tree, double lambda_s);

/// Energy of the partition induced by keeping the flagged nodes, evaluated
/// pixel by pixel.
double partition_energy(const GrayImage& img, const ShapeTree& tree,
                        std::span<const std::uint8_t> keep, double lambda_s);

}  // namespace salient::oracle
