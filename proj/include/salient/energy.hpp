#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "salient/image.hpp"
#include "salient/tree_of_shapes.hpp"

namespace salient {

struct EnergyParams {
  double lambda_s = 0.0;  ///< price of one 1-face of contour

  void validate() const;
};

/// Data part of merging two regions: the increase of the summed squared
/// error, A1*A2/(A1+A2) * (m1 - m2)^2. Zero when either region is empty.
double merge_data_cost(double area1, double sum1, double area2, double sum2);

/// Energy variation of a merge written with the region sums,
/// S1^2/A1 + S2^2/A2 - (S1+S2)^2/(A1+A2) - lambda*L.
double merge_variation(double area1, double sum1, double area2, double sum2,
                       double contour, double lambda_s);

/// A pruning of the tree in progress. Removing a node merges its region into
/// the region of its current parent; its children are re-parented.
class MergeState {
 public:
  /// With `track_adjacency`, the number of 1-faces between neighbouring
  /// regions is kept up to date so that exact energy variations are known.
  MergeState(const ShapeTree& tree, const RegionDecomposition& decomp, bool track_adjacency = true);

  const ShapeTree& tree() const { return *tree_; }
  bool live(NodeId n) const { return live_[static_cast<std::size_t>(n)] != 0; }
  std::size_t live_count() const { return live_count_; }
  std::vector<NodeId> live_nodes() const;

  /// Live node whose region currently holds the pixels of `n`'s region.
  NodeId owner(NodeId n) const;
  /// Current parent of a live non-root node.
  NodeId parent(NodeId n) const { return owner(tree_->parent[static_cast<std::size_t>(n)]); }

  double area(NodeId n) const { return area_[static_cast<std::size_t>(n)]; }
  double sum(NodeId n) const { return sum_[static_cast<std::size_t>(n)]; }
  bool tracks_adjacency() const { return !adjacency_.empty(); }
  /// 1-faces currently separating the regions of `a` and `b`.
  std::int64_t shared_faces(NodeId a, NodeId b) const;
  /// Outer boundary plus every 1-face between two different regions.
  std::int64_t contour_faces() const { return contour_faces_; }

  void merge(NodeId n);

 private:
  const ShapeTree* tree_;
  std::vector<std::uint8_t> live_;
  mutable std::vector<NodeId> forward_;
  std::vector<double> area_;
  std::vector<double> sum_;
  std::vector<std::unordered_map<NodeId, std::int64_t>> adjacency_;
  std::int64_t contour_faces_ = 0;
  std::size_t live_count_ = 0;
};

/// Energy of the current partition computed from scratch: summed squared
/// deviation from the region means plus lambda times the contour faces.
double total_energy(const GrayImage& img, const MergeState& state, const EnergyParams& params);

/// Exact change of `total_energy` if `n` were merged into its current
/// parent. Requires adjacency tracking.
double delta_energy(NodeId n, const MergeState& state, const EnergyParams& params);

/// Non-root nodes by increasing mean gradient along their contour, ties by
/// node index.
std::vector<NodeId> gradient_order(const ShapeTree& tree, const NodeInfo& info);

struct LambdaAttribute {
  std::vector<double> initial;   ///< value from the pristine regions
  std::vector<double> value;     ///< final value
  std::vector<double> inverted;  ///< max(value) - value; 0 at the root
};

LambdaAttribute compute_lambda_attribute(const ShapeTree& tree, const NodeInfo& info,
                                         const RegionDecomposition& decomp,
                                         std::span<const NodeId> order);

/// Called after every removal with the node, the predicted energy change and
/// the new state.
using MergeObserver = std::function<void(NodeId, double, const MergeState&)>;

struct Simplification {
  MergeState state;
  std::vector<NodeId> selected;  ///< surviving nodes, root included
  std::size_t removals = 0;
};

/// Greedy removal in a fixed order, sweeping until no removal decreases
/// the energy.
Simplification simplify_fixed_lambda(const ShapeTree& tree, const RegionDecomposition& decomp,
                                     const EnergyParams& params, std::span<const NodeId> order,
                                     const MergeObserver& observer = {});

/// Quadratic reference: always removes the node with the largest energy
/// decrease.
Simplification baseline_largest_decrease(const ShapeTree& tree, const RegionDecomposition& decomp,
                                         const EnergyParams& params,
                                         const MergeObserver& observer = {});

}  // namespace salient
