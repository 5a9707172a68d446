#pragma once

#include <cstdint>
#include <vector>

#include "salient/energy.hpp"
#include "salient/hierarchy.hpp"
#include "salient/image.hpp"
#include "salient/tree_of_shapes.hpp"

namespace salient {

/// An image with its tree of shapes, after the grain filter, and everything
/// the optimisation stages read.
struct PreparedImage {
  GrayImage image;
  GradientField gradient;
  TreeOfShapes tos;
  RegionDecomposition decomp;
  std::vector<NodeId> order;
};

PreparedImage prepare_image(GrayImage image, GradientField gradient, std::int64_t min_area);
PreparedImage prepare_image(GrayImage image, std::int64_t min_area);

struct SaliencyResult {
  LambdaAttribute attribute;
  ShapeSpaceMinTree min_tree;
  ExtinctionValues extinction;
  SaliencyMap map;
};

SaliencyResult saliency_from(const PreparedImage& prep);

/// Fixed-lambda greedy selection in gradient order.
Simplification simplify_from(const PreparedImage& prep, double lambda_s);

/// 4-connected regions of a merge state on the unframed image.
LabelImage region_labels(const PreparedImage& prep, const MergeState& state);

}  // namespace salient
