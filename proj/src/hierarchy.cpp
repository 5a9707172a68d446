#include "salient/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

#include "salient/binary_io.hpp"

namespace salient {

namespace {

template <typename Index>
Index find_root(std::vector<Index>& zpar, Index x) {
  while (zpar[static_cast<std::size_t>(x)] != x) {
    const auto xi = static_cast<std::size_t>(x);
    zpar[xi] = zpar[static_cast<std::size_t>(zpar[xi])];
    x = zpar[xi];
  }
  return x;
}

}  // namespace

ShapeSpaceMinTree build_shape_space_min_tree(const ShapeTree& tree, std::span<const double> weights) {
  const std::size_t n = tree.size();
  if (weights.size() != n) throw InputError("one weight per node is required");
  for (const double w : weights)
    if (!std::isfinite(w)) throw InputError("weights must be finite");

  ShapeSpaceMinTree mt;
  mt.level.assign(weights.begin(), weights.end());
  mt.sorted.resize(n);
  std::iota(mt.sorted.begin(), mt.sorted.end(), NodeId{0});
  // Within a plateau the smallest index comes last and becomes canonical.
  std::sort(mt.sorted.begin(), mt.sorted.end(), [&](NodeId a, NodeId b) {
    const double wa = weights[static_cast<std::size_t>(a)];
    const double wb = weights[static_cast<std::size_t>(b)];
    return wa < wb || (wa == wb && a > b);
  });

  const auto children = tree.children();
  mt.parent.assign(n, kNoNode);
  std::vector<NodeId> zpar(n, kNoNode);
  auto attach = [&](NodeId p, NodeId q) {
    if (zpar[static_cast<std::size_t>(q)] == kNoNode) return;
    const NodeId r = find_root(zpar, q);
    if (r == p) return;
    mt.parent[static_cast<std::size_t>(r)] = p;
    zpar[static_cast<std::size_t>(r)] = p;
  };
  for (const NodeId p : mt.sorted) {
    const auto pi = static_cast<std::size_t>(p);
    mt.parent[pi] = p;
    zpar[pi] = p;
    if (p != ShapeTree::root()) attach(p, tree.parent[pi]);
    for (const NodeId c : children[pi]) attach(p, c);
  }
  for (auto it = mt.sorted.rbegin(); it != mt.sorted.rend(); ++it) {
    const auto pi = static_cast<std::size_t>(*it);
    const auto q = static_cast<std::size_t>(mt.parent[pi]);
    const auto qq = static_cast<std::size_t>(mt.parent[q]);
    if (mt.level[qq] == mt.level[q]) mt.parent[pi] = static_cast<NodeId>(qq);
  }
  mt.root = n ? mt.sorted.back() : kNoNode;
  return mt;
}

ExtinctionValues compute_extinction(const ShapeSpaceMinTree& mt) {
  const std::size_t n = mt.size();
  ExtinctionValues out;
  out.value.assign(n, 0.0);
  if (n == 0) return out;

  std::vector<std::uint8_t> has_lower(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<NodeId>(i);
    if (c != mt.root && mt.canonical(c)) has_lower[static_cast<std::size_t>(mt.parent[i])] = 1;
  }
  auto before = [&](NodeId a, NodeId b) {
    return std::tie(mt.level[static_cast<std::size_t>(a)], a) < std::tie(mt.level[static_cast<std::size_t>(b)], b);
  };

  // Smallest minimum below every component.
  std::vector<NodeId> smallest(n, kNoNode);
  for (const NodeId c : mt.sorted) {
    const auto ci = static_cast<std::size_t>(c);
    if (!mt.canonical(c)) continue;
    if (!has_lower[ci]) {
      smallest[ci] = c;
      out.minima.push_back(c);
    }
    if (c == mt.root) continue;
    NodeId& up = smallest[static_cast<std::size_t>(mt.parent[ci])];
    if (up == kNoNode || before(smallest[ci], up)) up = smallest[ci];
  }

  for (const NodeId m : out.minima) {
    NodeId a = m;
    while (a != mt.root && smallest[static_cast<std::size_t>(mt.parent[static_cast<std::size_t>(a)])] == m)
      a = mt.parent[static_cast<std::size_t>(a)];
    const NodeId stop = a == mt.root ? a : mt.parent[static_cast<std::size_t>(a)];
    out.value[static_cast<std::size_t>(m)] = mt.level[static_cast<std::size_t>(stop)] - mt.level[static_cast<std::size_t>(m)];
  }
  return out;
}

double SaliencyMap::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

SaliencyMap compute_saliency(const ShapeTree& tree, const BoundaryMaps& maps,
                             std::span<const double> extinction) {
  if (extinction.size() != tree.size()) throw InputError("one extinction value per node is required");
  const KhalimskyGrid& g = maps.grid;
  SaliencyMap map{g, std::vector<double>(g.size(), 0.0)};
  for (int ky = 0; ky < g.kheight(); ++ky) {
    for (int kx = 0; kx < g.kwidth(); ++kx) {
      if (KhalimskyGrid::kind(kx, ky) != FaceKind::Edge) continue;
      const std::size_t f = g.index(kx, ky);
      const NodeId vanish = maps.vanish[f];
      double best = 0.0;
      for (NodeId n : {maps.appear[f], maps.appear_alt[f]}) {
        while (n != kNoNode && n != vanish) {
          best = std::max(best, extinction[static_cast<std::size_t>(n)]);
          if (n == ShapeTree::root()) break;
          n = tree.parent[static_cast<std::size_t>(n)];
        }
      }
      map.values[f] = best;
    }
  }
  for (int ky = 0; ky < g.kheight(); ky += 2) {
    for (int kx = 0; kx < g.kwidth(); kx += 2) {
      double best = 0.0;
      if (kx > 0) best = std::max(best, map.at(kx - 1, ky));
      if (kx + 1 < g.kwidth()) best = std::max(best, map.at(kx + 1, ky));
      if (ky > 0) best = std::max(best, map.at(kx, ky - 1));
      if (ky + 1 < g.kheight()) best = std::max(best, map.at(kx, ky + 1));
      map.values[g.index(kx, ky)] = best;
    }
  }
  return map;
}

void save_saliency(const std::filesystem::path& path, const SaliencyMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "SALIENCY " << map.grid.kwidth() << ' ' << map.grid.kheight() << '\n';
  char buf[8];
  for (const double v : map.values) {
    detail::put_f64_le(buf, v);
    out.write(buf, 8);
  }
}

SaliencyMap load_saliency(const std::filesystem::path& path) {
  const std::string data = detail::read_file(path);
  const std::size_t eol = data.find('\n');
  if (eol == std::string::npos) throw InputError("malformed saliency header");
  std::istringstream header(data.substr(0, eol));
  std::string tag, rest;
  long kw = 0, kh = 0;
  header >> tag >> kw >> kh;
  if (!header || (header >> rest) || tag != "SALIENCY" || kw < 3 || kh < 3 || kw % 2 == 0 ||
      kh % 2 == 0)
    throw InputError("malformed saliency header");
  SaliencyMap map{KhalimskyGrid(static_cast<int>(kw / 2), static_cast<int>(kh / 2)), {}};
  if (data.size() - eol - 1 != map.grid.size() * 8) throw InputError("size mismatch");
  map.values.resize(map.grid.size());
  const char* pos = data.data() + eol + 1;
  for (double& v : map.values) {
    v = detail::get_f64_le(pos);
    pos += 8;
    if (!std::isfinite(v) || v < 0.0) throw InputError("invalid saliency value");
  }
  return map;
}

std::vector<std::uint16_t> saliency_display(const SaliencyMap& map, bool inverted, bool rank) {
  std::vector<std::uint16_t> out(map.values.size(), 0);
  if (rank) {
    std::vector<double> distinct = map.values;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const double top = static_cast<double>(distinct.size() > 1 ? distinct.size() - 1 : 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto r = std::lower_bound(distinct.begin(), distinct.end(), map.values[i]) - distinct.begin();
      out[i] = static_cast<std::uint16_t>(std::lround(65535.0 * static_cast<double>(r) / top));
    }
  } else {
    const double top = map.max();
    if (top > 0.0)
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint16_t>(std::lround(65535.0 * map.values[i] / top));
  }
  if (inverted)
    for (auto& v : out) v = static_cast<std::uint16_t>(65535 - v);
  return out;
}

void write_saliency_png(const std::filesystem::path& path, const SaliencyMap& map, bool inverted,
                        bool rank) {
  const auto pixels = saliency_display(map, inverted, rank);
  write_png_gray16(path, map.grid.kwidth(), map.grid.kheight(), pixels);
}

LabelImage threshold_partition(const SaliencyMap& map, double threshold) {
  const KhalimskyGrid& g = map.grid;
  const int w = g.width;
  const int h = g.height;
  std::vector<std::uint32_t> zpar(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  std::iota(zpar.begin(), zpar.end(), 0u);
  auto join = [&](std::uint32_t a, std::uint32_t b) {
    a = find_root(zpar, a);
    b = find_root(zpar, b);
    if (a != b) zpar[std::max(a, b)] = std::min(a, b);
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto p = static_cast<std::uint32_t>(y * w + x);
      if (x + 1 < w && map.at(2 * x + 2, 2 * y + 1) <= threshold) join(p, p + 1);
      if (y + 1 < h && map.at(2 * x + 1, 2 * y + 2) <= threshold) join(p, p + static_cast<std::uint32_t>(w));
    }
  LabelImage out{w, h, std::vector<std::uint32_t>(zpar.size())};
  std::vector<std::uint32_t> label(zpar.size(), UINT32_MAX);
  std::uint32_t next = 0;
  for (std::uint32_t p = 0; p < zpar.size(); ++p) {
    const std::uint32_t r = find_root(zpar, p);
    if (label[r] == UINT32_MAX) label[r] = next++;
    out.labels[p] = label[r];
  }
  return out;
}

TreeOfShapes grain_filter(const GrayImage& img, const GradientField& grad,
                          const TreeOfShapes& tos, std::int64_t min_area) {
  if (min_area < 0) throw InputError("minimum area must be non-negative");
  const ShapeTree& src = tos.tree;
  std::vector<NodeId> new_id(src.size(), kNoNode);
  TreeOfShapes out;
  ShapeTree& tree = out.tree;
  tree.width = src.width;
  tree.height = src.height;
  for (std::size_t n = 0; n < src.size(); ++n) {
    if (n != 0 && tos.info.area[n] < min_area) continue;
    new_id[n] = static_cast<NodeId>(tree.parent.size());
    tree.parent.push_back(n == 0 ? 0 : new_id[static_cast<std::size_t>(src.parent[n])]);
    tree.level.push_back(src.level[n]);
  }
  // Areas shrink downwards, so a removed node takes its subtree with it and
  // the closest kept ancestor of a pixel is found by climbing.
  tree.node_of_pixel.resize(src.node_of_pixel.size());
  for (std::size_t p = 0; p < src.node_of_pixel.size(); ++p) {
    NodeId n = src.node_of_pixel[p];
    while (new_id[static_cast<std::size_t>(n)] == kNoNode) n = src.parent[static_cast<std::size_t>(n)];
    tree.node_of_pixel[p] = new_id[static_cast<std::size_t>(n)];
  }
  compute_node_info(img, grad, tree, out.info, out.maps);
  return out;
}

GrayImage render_simplified(const GrayImage& img, const MergeState& state) {
  const ShapeTree& tree = state.tree();
  GrayImage out(img.width(), img.height());
  for (std::size_t p = 0; p < img.size(); ++p) {
    const NodeId r = state.owner(tree.node_of_pixel[p]);
    out[p] = state.sum(r) / state.area(r);
  }
  out.set_frame(img.frame());
  out.set_max_value(img.max_value());
  return out;
}

GrayImage render_selection(const GrayImage& img, const ShapeTree& tree,
                           std::span<const std::uint8_t> keep) {
  if (keep.size() != tree.size()) throw InputError("one flag per node is required");
  std::vector<NodeId> owner(tree.size());
  for (std::size_t n = 0; n < tree.size(); ++n)
    owner[n] = (n == 0 || keep[n]) ? static_cast<NodeId>(n) : owner[static_cast<std::size_t>(tree.parent[n])];
  LabelImage labels{img.width(), img.height(), std::vector<std::uint32_t>(img.size())};
  for (std::size_t p = 0; p < img.size(); ++p)
    labels.labels[p] = static_cast<std::uint32_t>(owner[static_cast<std::size_t>(tree.node_of_pixel[p])]);
  return render_partition(img, labels);
}

GrayImage render_partition(const GrayImage& img, const LabelImage& labels) {
  if (labels.width != img.width() || labels.height != img.height())
    throw InputError("label image and image sizes differ");
  const std::uint32_t top = labels.labels.empty() ? 0 : *std::max_element(labels.labels.begin(), labels.labels.end());
  std::vector<double> sum(static_cast<std::size_t>(top) + 1, 0.0);
  std::vector<double> count(sum.size(), 0.0);
  for (std::size_t p = 0; p < img.size(); ++p) {
    sum[labels.labels[p]] += img[p];
    count[labels.labels[p]] += 1.0;
  }
  GrayImage out(img.width(), img.height());
  for (std::size_t p = 0; p < img.size(); ++p) out[p] = sum[labels.labels[p]] / count[labels.labels[p]];
  out.set_frame(img.frame());
  out.set_max_value(img.max_value());
  return out;
}

}  // namespace salient
