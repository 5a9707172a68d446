#include "salient/tree_of_shapes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>
#include <ostream>
#include <set>

namespace salient {

std::vector<std::vector<NodeId>> ShapeTree::children() const {
  std::vector<std::vector<NodeId>> ch(size());
  for (std::size_t n = 1; n < size(); ++n) ch[static_cast<std::size_t>(parent[n])].push_back(static_cast<NodeId>(n));
  return ch;
}

std::vector<std::vector<std::uint32_t>> ShapeTree::pixel_sets() const {
  std::vector<std::vector<std::uint32_t>> sets(size());
  for (std::size_t p = 0; p < node_of_pixel.size(); ++p) {
    NodeId n = node_of_pixel[p];
    while (true) {
      sets[static_cast<std::size_t>(n)].push_back(static_cast<std::uint32_t>(p));
      if (n == root()) break;
      n = parent[static_cast<std::size_t>(n)];
    }
  }
  return sets;
}

namespace {

double median_of(std::array<double, 4> v, int count) {
  std::sort(v.begin(), v.begin() + count);
  if (count % 2 == 1) return v[static_cast<std::size_t>(count / 2)];
  return 0.5 * (v[static_cast<std::size_t>(count / 2 - 1)] + v[static_cast<std::size_t>(count / 2)]);
}

}  // namespace

std::vector<double> interpolate_khalimsky(const GrayImage& img) {
  const KhalimskyGrid g(img.width(), img.height());
  std::vector<double> out(g.size());
  for (int ky = 0; ky < g.kheight(); ++ky) {
    for (int kx = 0; kx < g.kwidth(); ++kx) {
      // Pixels touching this face: x in {kx/2 - 1, kx/2} for even kx, one
      // pixel for odd kx; same for y.
      const int x0 = (kx % 2 == 1) ? (kx - 1) / 2 : kx / 2 - 1;
      const int x1 = (kx % 2 == 1) ? x0 : kx / 2;
      const int y0 = (ky % 2 == 1) ? (ky - 1) / 2 : ky / 2 - 1;
      const int y1 = (ky % 2 == 1) ? y0 : ky / 2;
      std::array<double, 4> v{};
      int count = 0;
      for (int y = y0; y <= y1; ++y) {
        if (y < 0 || y >= img.height()) continue;
        for (int x = x0; x <= x1; ++x) {
          if (x < 0 || x >= img.width()) continue;
          v[static_cast<std::size_t>(count++)] = img(x, y);
        }
      }
      out[g.index(kx, ky)] = median_of(v, count);
    }
  }
  return out;
}

namespace {

// Hierarchical queue over level ranks. Empty levels are skipped by looking up
// the closest non-empty one on either side.
class LevelQueue {
 public:
  LevelQueue(std::span<const double> levels, std::size_t capacity_hint)
      : levels_(levels), buckets_(levels.size()), heads_(levels.size(), 0) {
    (void)capacity_hint;
  }

  void push(std::int32_t rank, std::int32_t face) {
    auto& b = buckets_[static_cast<std::size_t>(rank)];
    if (b.size() == heads_[static_cast<std::size_t>(rank)]) active_.insert(rank);
    b.push_back(face);
  }

  // Pops a face at `current`, moving `current` to the nearest non-empty
  // level first when needed.
  std::int32_t pop(std::int32_t& current) {
    if (empty_at(current)) {
      auto up = active_.lower_bound(current);
      if (up == active_.end()) {
        current = *std::prev(up);
      } else if (up == active_.begin()) {
        current = *up;
      } else {
        const auto down = std::prev(up);
        const double du = levels_[static_cast<std::size_t>(*up)] - levels_[static_cast<std::size_t>(current)];
        const double dd = levels_[static_cast<std::size_t>(current)] - levels_[static_cast<std::size_t>(*down)];
        current = dd < du ? *down : *up;
      }
    }
    const auto r = static_cast<std::size_t>(current);
    const std::int32_t face = buckets_[r][heads_[r]++];
    if (heads_[r] == buckets_[r].size()) {
      active_.erase(current);
      buckets_[r].clear();
      buckets_[r].shrink_to_fit();
      heads_[r] = 0;
    }
    return face;
  }

 private:
  bool empty_at(std::int32_t rank) const {
    const auto r = static_cast<std::size_t>(rank);
    return heads_[r] == buckets_[r].size();
  }

  std::span<const double> levels_;
  std::vector<std::vector<std::int32_t>> buckets_;
  std::vector<std::size_t> heads_;
  std::set<std::int32_t> active_;
};

std::int32_t find_root(std::vector<std::int32_t>& zpar, std::int32_t x) {
  while (zpar[static_cast<std::size_t>(x)] != x) {
    const auto xi = static_cast<std::size_t>(x);
    zpar[xi] = zpar[static_cast<std::size_t>(zpar[xi])];
    x = zpar[xi];
  }
  return x;
}

// Tree of shapes computed on a refinement of the Khalimsky grid. Every
// Khalimsky face sits at odd coordinates of the refined grid; the faces in
// between carry the [min, max] span of their odd neighbours, so the level
// seen by the propagation never jumps over an intermediate value.
struct FaceTree {
  int width = 0;                     // refined grid width
  std::vector<std::int32_t> order;   // parents before children
  std::vector<std::int32_t> parent;  // canonicalized
  std::vector<std::int32_t> rank;    // level rank of each face

  std::int32_t refined(std::size_t kx, std::size_t ky) const {
    return static_cast<std::int32_t>((2 * ky + 1) * static_cast<std::size_t>(width) + 2 * kx + 1);
  }
  bool canonical(std::int32_t p) const {
    const auto pi = static_cast<std::size_t>(p);
    return parent[pi] == p || rank[static_cast<std::size_t>(parent[pi])] != rank[pi];
  }
  std::int32_t node(std::int32_t p) const {
    return canonical(p) ? p : parent[static_cast<std::size_t>(p)];
  }
};

FaceTree build_face_tree(const KhalimskyGrid& g, std::span<const double> values,
                         std::vector<double>& levels) {
  std::vector<std::int32_t> krank(values.size());
  // Interpolated integer images only hold half-integers, which a counting
  // pass ranks in linear time.
  constexpr double kMaxHalfSteps = 2.0 * 65535.0;
  const bool half_integers = std::all_of(values.begin(), values.end(), [](double v) {
    const double h = 2.0 * v;
    return h >= 0.0 && h <= kMaxHalfSteps && h == std::floor(h);
  });
  levels.clear();
  if (half_integers) {
    std::vector<std::int32_t> rank_of(static_cast<std::size_t>(kMaxHalfSteps) + 1, -1);
    for (const double v : values) rank_of[static_cast<std::size_t>(2.0 * v)] = 0;
    for (std::size_t h = 0; h < rank_of.size(); ++h)
      if (rank_of[h] == 0) {
        rank_of[h] = static_cast<std::int32_t>(levels.size());
        levels.push_back(0.5 * static_cast<double>(h));
      }
    for (std::size_t i = 0; i < values.size(); ++i) krank[i] = rank_of[static_cast<std::size_t>(2.0 * values[i])];
  } else {
    levels.assign(values.begin(), values.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (std::size_t i = 0; i < values.size(); ++i)
      krank[i] = static_cast<std::int32_t>(
          std::lower_bound(levels.begin(), levels.end(), values[i]) - levels.begin());
  }

  const int kw = g.kwidth();
  const int kh = g.kheight();
  const int rw = 2 * kw + 1;
  const int rh = 2 * kh + 1;
  const std::size_t n = static_cast<std::size_t>(rw) * static_cast<std::size_t>(rh);

  // Rank span of the odd neighbours of each refined face.
  std::vector<std::int32_t> lo(n, INT32_MAX), hi(n, -1);
  for (int y = 0; y < rh; ++y)
    for (int x = 0; x < rw; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(rw) + static_cast<std::size_t>(x);
      for (int oy = y - 1; oy <= y + 1; ++oy) {
        if (oy % 2 == 0 || oy < 1 || oy > rh - 2) continue;
        for (int ox = x - 1; ox <= x + 1; ++ox) {
          if (ox % 2 == 0 || ox < 1 || ox > rw - 2) continue;
          const std::int32_t r = krank[g.index((ox - 1) / 2, (oy - 1) / 2)];
          lo[i] = std::min(lo[i], r);
          hi[i] = std::max(hi[i], r);
        }
      }
    }

  FaceTree ft;
  ft.width = rw;
  ft.rank.assign(n, -1);
  ft.order.reserve(n);
  LevelQueue queue(levels, n);
  std::int32_t current = lo[0];
  queue.push(current, 0);
  ft.rank[0] = current;
  while (ft.order.size() < n) {
    const std::int32_t h = queue.pop(current);
    ft.order.push_back(h);
    const int x = h % rw;
    const int y = h / rw;
    const std::array<std::array<int, 2>, 4> nbrs{{{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}}};
    for (const auto& [nx, ny] : nbrs) {
      if (nx < 0 || ny < 0 || nx >= rw || ny >= rh) continue;
      const auto q = ny * rw + nx;
      const auto qi = static_cast<std::size_t>(q);
      if (ft.rank[qi] >= 0) continue;
      ft.rank[qi] = std::clamp(current, lo[qi], hi[qi]);
      queue.push(ft.rank[qi], q);
    }
  }

  lo = {};
  hi = {};

  // Union by depth on the sets; `top` remembers which face each set's root
  // stands for, which is the last face that joined it.
  ft.parent.assign(n, -1);
  std::vector<std::int32_t> zpar(n, -1);
  std::vector<std::int32_t> top(n);
  std::vector<std::uint8_t> depth(n, 0);
  for (std::size_t i = n; i-- > 0;) {
    const std::int32_t p = ft.order[i];
    const auto pi = static_cast<std::size_t>(p);
    ft.parent[pi] = p;
    zpar[pi] = p;
    top[pi] = p;
    std::int32_t zp = p;
    const int x = p % rw;
    const int y = p / rw;
    const std::array<std::array<int, 2>, 4> nbrs{{{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}}};
    for (const auto& [nx, ny] : nbrs) {
      if (nx < 0 || ny < 0 || nx >= rw || ny >= rh) continue;
      const auto q = ny * rw + nx;
      if (zpar[static_cast<std::size_t>(q)] < 0) continue;
      const std::int32_t r = find_root(zpar, q);
      if (r == zp) continue;
      const auto ri = static_cast<std::size_t>(r);
      const auto zi = static_cast<std::size_t>(zp);
      ft.parent[static_cast<std::size_t>(top[ri])] = p;
      if (depth[zi] < depth[ri]) {
        zpar[zi] = r;
        top[ri] = p;
        zp = r;
      } else {
        zpar[ri] = zp;
        if (depth[zi] == depth[ri]) ++depth[zi];
      }
    }
  }

  for (const std::int32_t p : ft.order) {
    const auto pi = static_cast<std::size_t>(p);
    const std::int32_t q = ft.parent[pi];
    const std::int32_t qq = ft.parent[static_cast<std::size_t>(q)];
    if (ft.rank[static_cast<std::size_t>(qq)] == ft.rank[static_cast<std::size_t>(q)]) ft.parent[pi] = qq;
  }
  return ft;
}

}  // namespace

TreeOfShapes build_tree(const GrayImage& img, const GradientField& grad) {
  const KhalimskyGrid g(img.width(), img.height());
  if (!(grad.grid == g)) throw InputError("gradient field does not match the image grid");
  const std::vector<double> values = interpolate_khalimsky(img);
  std::vector<double> levels;
  const FaceTree ft = build_face_tree(g, values, levels);
  const std::size_t n = ft.order.size();

  // Pixel area of every face-level shape.
  std::vector<std::int32_t> area(n, 0);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const std::int32_t f = ft.refined(static_cast<std::size_t>(KhalimskyGrid::pixel_to_face(x)),
                                        static_cast<std::size_t>(KhalimskyGrid::pixel_to_face(y)));
      ++area[static_cast<std::size_t>(ft.node(f))];
    }
  for (std::size_t i = n; i-- > 1;) {
    const std::int32_t p = ft.order[i];
    if (ft.canonical(p)) area[static_cast<std::size_t>(ft.parent[static_cast<std::size_t>(p)])] += area[static_cast<std::size_t>(p)];
  }

  // Face-level shapes with identical pixel sets form parent chains of equal
  // area; each chain becomes one node, represented by its deepest member.
  std::vector<std::int32_t> chain(n, -1);
  std::vector<std::int32_t> chain_parent;
  std::vector<std::int32_t> chain_rep;
  for (const std::int32_t p : ft.order) {
    if (!ft.canonical(p)) continue;
    const auto pi = static_cast<std::size_t>(p);
    const std::int32_t q = ft.parent[pi];
    if (q == p) {
      chain[pi] = 0;
      chain_parent.push_back(0);
      chain_rep.push_back(p);
      continue;
    }
    const auto qi = static_cast<std::size_t>(q);
    if (area[pi] == 0 || area[pi] == area[qi]) {
      chain[pi] = chain[qi];
      if (area[pi] != 0) chain_rep[static_cast<std::size_t>(chain[pi])] = p;
    } else {
      chain[pi] = static_cast<std::int32_t>(chain_parent.size());
      chain_parent.push_back(chain[qi]);
      chain_rep.push_back(p);
    }
  }
  const std::size_t chains = chain_parent.size();

  std::vector<std::int32_t> chain_of_pixel(img.size());
  std::vector<std::uint32_t> min_pixel(chains, UINT32_MAX);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const std::int32_t f = ft.refined(static_cast<std::size_t>(KhalimskyGrid::pixel_to_face(x)),
                                        static_cast<std::size_t>(KhalimskyGrid::pixel_to_face(y)));
      const std::size_t pix = img.index(x, y);
      const std::int32_t c = chain[static_cast<std::size_t>(ft.node(f))];
      chain_of_pixel[pix] = c;
      auto& m = min_pixel[static_cast<std::size_t>(c)];
      m = std::min(m, static_cast<std::uint32_t>(pix));
    }
  for (std::size_t c = chains; c-- > 1;) {
    auto& m = min_pixel[static_cast<std::size_t>(chain_parent[c])];
    m = std::min(m, min_pixel[c]);
  }

  // Canonical numbering: breadth-first, siblings by first pixel.
  std::vector<std::vector<std::int32_t>> kids(chains);
  for (std::size_t c = 1; c < chains; ++c) kids[static_cast<std::size_t>(chain_parent[c])].push_back(static_cast<std::int32_t>(c));
  std::vector<NodeId> new_id(chains, kNoNode);
  std::vector<std::int32_t> bfs{0};
  bfs.reserve(chains);
  new_id[0] = 0;
  for (std::size_t i = 0; i < bfs.size(); ++i) {
    auto& k = kids[static_cast<std::size_t>(bfs[i])];
    std::sort(k.begin(), k.end(), [&](std::int32_t a, std::int32_t b) {
      return min_pixel[static_cast<std::size_t>(a)] < min_pixel[static_cast<std::size_t>(b)];
    });
    for (const std::int32_t c : k) {
      new_id[static_cast<std::size_t>(c)] = static_cast<NodeId>(bfs.size());
      bfs.push_back(c);
    }
  }

  TreeOfShapes out;
  ShapeTree& tree = out.tree;
  tree.width = img.width();
  tree.height = img.height();
  tree.parent.resize(chains);
  tree.level.resize(chains);
  for (std::size_t c = 0; c < chains; ++c) {
    const auto id = static_cast<std::size_t>(new_id[c]);
    tree.parent[id] = new_id[static_cast<std::size_t>(chain_parent[c])];
    tree.level[id] = levels[static_cast<std::size_t>(ft.rank[static_cast<std::size_t>(chain_rep[c])])];
  }
  tree.node_of_pixel.resize(img.size());
  for (std::size_t p = 0; p < img.size(); ++p)
    tree.node_of_pixel[p] = new_id[static_cast<std::size_t>(chain_of_pixel[p])];

  compute_node_info(img, grad, tree, out.info, out.maps);
  return out;
}

void compute_node_info(const GrayImage& img, const GradientField& grad, const ShapeTree& tree,
                       NodeInfo& info, BoundaryMaps& maps) {
  const std::size_t nodes = tree.size();
  info.area.assign(nodes, 0);
  info.sum.assign(nodes, 0.0);
  info.length.assign(nodes, 0);
  info.grad_sum.assign(nodes, 0.0);
  for (std::size_t p = 0; p < img.size(); ++p) {
    const auto n = static_cast<std::size_t>(tree.node_of_pixel[p]);
    ++info.area[n];
    info.sum[n] += img[p];
  }
  for (std::size_t n = nodes; n-- > 1;) {
    const auto par = static_cast<std::size_t>(tree.parent[n]);
    info.area[par] += info.area[n];
    info.sum[par] += info.sum[n];
  }

  const KhalimskyGrid g(img.width(), img.height());
  maps.grid = g;
  maps.appear.assign(g.size(), kNoNode);
  maps.appear_alt.assign(g.size(), kNoNode);
  maps.vanish.assign(g.size(), kNoNode);

  auto node_at = [&](int x, int y) -> NodeId {
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return kNoNode;
    return tree.node_of_pixel[img.index(x, y)];
  };
  // Climbs both sides to their common ancestor; every node passed on the way
  // has the face on its contour.
  auto mark = [&](std::size_t face, NodeId a, NodeId b, double gv) {
    if (b == kNoNode) std::swap(a, b);
    if (a == kNoNode) {
      maps.appear[face] = b;
      while (true) {
        ++info.length[static_cast<std::size_t>(b)];
        info.grad_sum[static_cast<std::size_t>(b)] += gv;
        if (b == ShapeTree::root()) break;
        b = tree.parent[static_cast<std::size_t>(b)];
      }
      return;
    }
    const NodeId a0 = a;
    const NodeId b0 = b;
    while (a != b) {
      NodeId& deeper = a > b ? a : b;
      ++info.length[static_cast<std::size_t>(deeper)];
      info.grad_sum[static_cast<std::size_t>(deeper)] += gv;
      deeper = tree.parent[static_cast<std::size_t>(deeper)];
    }
    maps.vanish[face] = a;
    if (a0 == a) {
      maps.appear[face] = b0;
    } else if (b0 == a) {
      maps.appear[face] = a0;
    } else {
      const bool a_first = info.area[static_cast<std::size_t>(a0)] < info.area[static_cast<std::size_t>(b0)] ||
                           (info.area[static_cast<std::size_t>(a0)] == info.area[static_cast<std::size_t>(b0)] && a0 < b0);
      maps.appear[face] = a_first ? a0 : b0;
      maps.appear_alt[face] = a_first ? b0 : a0;
    }
  };

  for (int ky = 0; ky < g.kheight(); ++ky) {
    for (int kx = 0; kx < g.kwidth(); ++kx) {
      if (KhalimskyGrid::kind(kx, ky) != FaceKind::Edge) continue;
      const std::size_t face = g.index(kx, ky);
      NodeId a, b;
      if (kx % 2 == 0) {
        const int y = KhalimskyGrid::face_to_pixel(ky);
        a = node_at(kx / 2 - 1, y);
        b = node_at(kx / 2, y);
      } else {
        const int x = KhalimskyGrid::face_to_pixel(kx);
        a = node_at(x, ky / 2 - 1);
        b = node_at(x, ky / 2);
      }
      mark(face, a, b, grad.values[face]);
    }
  }
}

RegionDecomposition region_decomposition(const ShapeTree& tree, const NodeInfo& info) {
  RegionDecomposition d{info.area, info.sum};
  for (std::size_t n = 1; n < tree.size(); ++n) {
    const auto par = static_cast<std::size_t>(tree.parent[n]);
    d.area[par] -= info.area[n];
    d.sum[par] -= info.sum[n];
  }
  return d;
}

GrayImage reconstruct(const ShapeTree& tree, std::span<const double> node_values) {
  if (node_values.size() != tree.size()) throw InputError("one value per node is required");
  GrayImage out(tree.width, tree.height);
  for (std::size_t p = 0; p < out.size(); ++p)
    out[p] = node_values[static_cast<std::size_t>(tree.node_of_pixel[p])];
  return out;
}

void dump_tree(std::ostream& out, const ShapeTree& tree, const NodeInfo& info) {
  for (std::size_t n = 0; n < tree.size(); ++n) {
    out << n << ' ' << tree.parent[n] << ' ' << tree.level[n] << ' ' << info.area[n] << ' '
        << info.length[n] << ' ' << info.sum[n] << ' ' << info.grad_sum[n] << '\n';
  }
}

}  // namespace salient
