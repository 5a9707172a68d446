#include "salient/pipeline.hpp"

namespace salient {

PreparedImage prepare_image(GrayImage image, GradientField gradient, std::int64_t min_area) {
  PreparedImage prep{std::move(image), std::move(gradient), {}, {}, {}};
  prep.tos = build_tree(prep.image, prep.gradient);
  if (min_area > 1) prep.tos = grain_filter(prep.image, prep.gradient, prep.tos, min_area);
  prep.decomp = region_decomposition(prep.tos.tree, prep.tos.info);
  prep.order = gradient_order(prep.tos.tree, prep.tos.info);
  return prep;
}

PreparedImage prepare_image(GrayImage image, std::int64_t min_area) {
  GradientField gradient = compute_gradient(image);
  return prepare_image(std::move(image), std::move(gradient), min_area);
}

SaliencyResult saliency_from(const PreparedImage& prep) {
  const ShapeTree& tree = prep.tos.tree;
  SaliencyResult r;
  r.attribute = compute_lambda_attribute(tree, prep.tos.info, prep.decomp, prep.order);
  r.min_tree = build_shape_space_min_tree(tree, r.attribute.inverted);
  r.extinction = compute_extinction(r.min_tree);
  r.map = compute_saliency(tree, prep.tos.maps, r.extinction.value);
  return r;
}

Simplification simplify_from(const PreparedImage& prep, double lambda_s) {
  return simplify_fixed_lambda(prep.tos.tree, prep.decomp, EnergyParams{lambda_s}, prep.order);
}

LabelImage region_labels(const PreparedImage& prep, const MergeState& state) {
  const ShapeTree& tree = prep.tos.tree;
  std::vector<std::uint32_t> ids(tree.node_of_pixel.size());
  for (std::size_t p = 0; p < ids.size(); ++p)
    ids[p] = static_cast<std::uint32_t>(state.owner(tree.node_of_pixel[p]));
  const LabelImage full = connected_labels(tree.width, tree.height, ids);
  return crop_frame(full, prep.image.frame());
}

}  // namespace salient
