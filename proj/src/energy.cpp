#include "salient/energy.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

namespace salient {

void EnergyParams::validate() const {
  if (!std::isfinite(lambda_s) || lambda_s < 0.0) throw InputError("lambda must be finite and non-negative");
}

double merge_data_cost(double area1, double sum1, double area2, double sum2) {
  if (area1 <= 0.0 || area2 <= 0.0) return 0.0;
  const double d = sum1 / area1 - sum2 / area2;
  return area1 * area2 / (area1 + area2) * d * d;
}

double merge_variation(double area1, double sum1, double area2, double sum2,
                       double contour, double lambda_s) {
  auto energy = [](double s, double a) { return a > 0.0 ? s * s / a : 0.0; };
  return energy(sum1, area1) + energy(sum2, area2) - energy(sum1 + sum2, area1 + area2) -
         lambda_s * contour;
}

MergeState::MergeState(const ShapeTree& tree, const RegionDecomposition& decomp, bool track_adjacency)
    : tree_(&tree),
      live_(tree.size(), 1),
      forward_(tree.size()),
      area_(decomp.area.begin(), decomp.area.end()),
      sum_(decomp.sum),
      live_count_(tree.size()) {
  for (std::size_t n = 0; n < tree.size(); ++n) forward_[n] = static_cast<NodeId>(n);
  contour_faces_ = 2 * static_cast<std::int64_t>(tree.width + tree.height);
  if (!track_adjacency) return;
  adjacency_.resize(tree.size());
  auto link = [&](std::size_t p, std::size_t q) {
    const NodeId a = tree.node_of_pixel[p];
    const NodeId b = tree.node_of_pixel[q];
    if (a == b) return;
    ++adjacency_[static_cast<std::size_t>(a)][b];
    ++adjacency_[static_cast<std::size_t>(b)][a];
    ++contour_faces_;
  };
  const auto w = static_cast<std::size_t>(tree.width);
  const auto h = static_cast<std::size_t>(tree.height);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      if (x + 1 < w) link(p, p + 1);
      if (y + 1 < h) link(p, p + w);
    }
}

std::vector<NodeId> MergeState::live_nodes() const {
  std::vector<NodeId> out;
  out.reserve(live_count_);
  for (std::size_t n = 0; n < live_.size(); ++n)
    if (live_[n]) out.push_back(static_cast<NodeId>(n));
  return out;
}

NodeId MergeState::owner(NodeId n) const {
  NodeId r = n;
  while (forward_[static_cast<std::size_t>(r)] != r) r = forward_[static_cast<std::size_t>(r)];
  while (forward_[static_cast<std::size_t>(n)] != r) {
    const NodeId next = forward_[static_cast<std::size_t>(n)];
    forward_[static_cast<std::size_t>(n)] = r;
    n = next;
  }
  return r;
}

std::int64_t MergeState::shared_faces(NodeId a, NodeId b) const {
  if (adjacency_.empty()) throw InvariantError("adjacency is not tracked");
  const auto& adj = adjacency_[static_cast<std::size_t>(a)];
  const auto it = adj.find(b);
  return it == adj.end() ? 0 : it->second;
}

void MergeState::merge(NodeId n) {
  if (n == ShapeTree::root() || n < 0 || static_cast<std::size_t>(n) >= live_.size() || !live(n))
    throw InvariantError("only live non-root nodes can be merged");
  const NodeId p = parent(n);
  const auto ni = static_cast<std::size_t>(n);
  const auto pi = static_cast<std::size_t>(p);
  area_[pi] += area_[ni];
  sum_[pi] += sum_[ni];
  live_[ni] = 0;
  forward_[ni] = p;
  --live_count_;
  if (adjacency_.empty()) return;
  auto adj = std::move(adjacency_[ni]);
  adjacency_[ni] = {};
  for (const auto& [other, faces] : adj) {
    auto& back = adjacency_[static_cast<std::size_t>(other)];
    back.erase(n);
    if (other == p) {
      contour_faces_ -= faces;
      continue;
    }
    adjacency_[pi][other] += faces;
    back[p] += faces;
  }
}

double total_energy(const GrayImage& img, const MergeState& state, const EnergyParams& params) {
  const ShapeTree& tree = state.tree();
  if (img.width() != tree.width || img.height() != tree.height)
    throw InvariantError("image and tree sizes differ");
  const std::size_t n = tree.size();
  std::vector<NodeId> owner(img.size());
  std::vector<long double> sum(n, 0.0L);
  std::vector<std::int64_t> count(n, 0);
  for (std::size_t p = 0; p < img.size(); ++p) {
    owner[p] = state.owner(tree.node_of_pixel[p]);
    sum[static_cast<std::size_t>(owner[p])] += img[p];
    ++count[static_cast<std::size_t>(owner[p])];
  }
  long double data = 0.0L;
  for (std::size_t p = 0; p < img.size(); ++p) {
    const auto r = static_cast<std::size_t>(owner[p]);
    const long double d = img[p] - sum[r] / static_cast<long double>(count[r]);
    data += d * d;
  }
  std::int64_t faces = 2 * static_cast<std::int64_t>(img.width() + img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const NodeId a = owner[img.index(x, y)];
      if (x + 1 < img.width() && owner[img.index(x + 1, y)] != a) ++faces;
      if (y + 1 < img.height() && owner[img.index(x, y + 1)] != a) ++faces;
    }
  return static_cast<double>(data + static_cast<long double>(params.lambda_s) * faces);
}

double delta_energy(NodeId n, const MergeState& state, const EnergyParams& params) {
  if (n == ShapeTree::root() || !state.live(n)) throw InvariantError("delta_energy needs a live non-root node");
  const NodeId p = state.parent(n);
  return merge_data_cost(state.area(n), state.sum(n), state.area(p), state.sum(p)) -
         params.lambda_s * static_cast<double>(state.shared_faces(n, p));
}

std::vector<NodeId> gradient_order(const ShapeTree& tree, const NodeInfo& info) {
  std::vector<double> key(tree.size());
  for (std::size_t n = 0; n < tree.size(); ++n)
    key[n] = info.grad_sum[n] / static_cast<double>(info.length[n]);
  std::vector<NodeId> order;
  order.reserve(tree.size());
  for (std::size_t n = 1; n < tree.size(); ++n) order.push_back(static_cast<NodeId>(n));
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return std::tie(key[static_cast<std::size_t>(a)], a) < std::tie(key[static_cast<std::size_t>(b)], b);
  });
  return order;
}

LambdaAttribute compute_lambda_attribute(const ShapeTree& tree, const NodeInfo& info,
                                         const RegionDecomposition& decomp,
                                         std::span<const NodeId> order) {
  const std::size_t n = tree.size();
  LambdaAttribute attr;
  attr.initial.assign(n, 0.0);
  MergeState state(tree, decomp, false);
  auto transition = [&](NodeId t) {
    const NodeId p = state.parent(t);
    return merge_data_cost(state.area(t), state.sum(t), state.area(p), state.sum(p)) /
           static_cast<double>(info.length[static_cast<std::size_t>(t)]);
  };
  for (std::size_t t = 1; t < n; ++t) attr.initial[t] = transition(static_cast<NodeId>(t));
  attr.value = attr.initial;
  for (const NodeId t : order) {
    auto& v = attr.value[static_cast<std::size_t>(t)];
    v = std::max(v, transition(t));
    state.merge(t);
  }
  attr.inverted.assign(n, 0.0);
  if (n > 1) {
    const double top = *std::max_element(attr.value.begin() + 1, attr.value.end());
    for (std::size_t t = 1; t < n; ++t) attr.inverted[t] = top - attr.value[t];
  }
  return attr;
}

namespace {

// Regions without pixels are removed first: this leaves the partition and
// the energy untouched but lets their children meet a real parent region.
std::size_t collapse_empty(MergeState& state, std::vector<std::vector<NodeId>>* kids) {
  std::size_t removed = 0;
  for (std::size_t i = state.tree().size(); i-- > 1;) {
    const auto n = static_cast<NodeId>(i);
    if (state.area(n) > 0.0) continue;
    const NodeId p = state.parent(n);
    state.merge(n);
    ++removed;
    if (kids) {
      auto& from = (*kids)[i];
      auto& to = (*kids)[static_cast<std::size_t>(p)];
      to.insert(to.end(), from.begin(), from.end());
      from.clear();
    }
  }
  return removed;
}

Simplification finish(MergeState&& state, std::size_t removals) {
  Simplification out{std::move(state), {}, removals};
  out.selected = out.state.live_nodes();
  return out;
}

}  // namespace

Simplification simplify_fixed_lambda(const ShapeTree& tree, const RegionDecomposition& decomp,
                                     const EnergyParams& params, std::span<const NodeId> order,
                                     const MergeObserver& observer) {
  params.validate();
  MergeState state(tree, decomp);
  std::size_t removals = collapse_empty(state, nullptr);
  for (bool changed = true; changed;) {
    changed = false;
    for (const NodeId t : order) {
      if (!state.live(t)) continue;
      const double d = delta_energy(t, state, params);
      if (d >= 0.0) continue;
      state.merge(t);
      if (observer) observer(t, d, state);
      ++removals;
      changed = true;
    }
  }
  return finish(std::move(state), removals);
}

Simplification baseline_largest_decrease(const ShapeTree& tree, const RegionDecomposition& decomp,
                                         const EnergyParams& params,
                                         const MergeObserver& observer) {
  params.validate();
  const std::size_t n = tree.size();
  MergeState state(tree, decomp);
  std::vector<std::vector<NodeId>> kids = tree.children();
  std::size_t removals = collapse_empty(state, &kids);

  using Entry = std::tuple<double, NodeId, std::uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  std::vector<std::uint32_t> version(n, 0);
  auto refresh = [&](NodeId t) {
    const auto ti = static_cast<std::size_t>(t);
    ++version[ti];
    const double d = delta_energy(t, state, params);
    if (d < 0.0) heap.emplace(d, t, version[ti]);
  };
  for (std::size_t t = 1; t < n; ++t)
    if (state.live(static_cast<NodeId>(t))) refresh(static_cast<NodeId>(t));

  while (!heap.empty()) {
    const auto [d, t, ver] = heap.top();
    heap.pop();
    if (!state.live(t) || ver != version[static_cast<std::size_t>(t)]) continue;
    const NodeId p = state.parent(t);
    state.merge(t);
    ++removals;
    if (observer) observer(t, d, state);
    auto& mine = kids[static_cast<std::size_t>(t)];
    auto& theirs = kids[static_cast<std::size_t>(p)];
    theirs.insert(theirs.end(), mine.begin(), mine.end());
    mine.clear();
    mine.shrink_to_fit();
    std::erase_if(theirs, [&](NodeId c) { return !state.live(c); });
    if (p != ShapeTree::root()) refresh(p);
    for (const NodeId c : theirs) refresh(c);
  }
  return finish(std::move(state), removals);
}

}  // namespace salient
