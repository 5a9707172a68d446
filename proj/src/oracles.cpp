#include "salient/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace salient::oracle {

namespace {

struct Grid {
  int kw, kh;
  std::vector<double> v;
};

Grid interpolate(const GrayImage& img) {
  Grid g{2 * img.width() + 1, 2 * img.height() + 1, {}};
  g.v.resize(static_cast<std::size_t>(g.kw * g.kh));
  for (int ky = 0; ky < g.kh; ++ky) {
    for (int kx = 0; kx < g.kw; ++kx) {
      // Pixels (odd, odd) whose closure contains the face.
      std::vector<double> around;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int px = kx + dx, py = ky + dy;
          if (px < 0 || py < 0 || px >= g.kw || py >= g.kh) continue;
          if (px % 2 == 0 || py % 2 == 0) continue;
          around.push_back(img(px / 2, py / 2));
        }
      std::sort(around.begin(), around.end());
      const std::size_t m = around.size();
      g.v[static_cast<std::size_t>(ky * g.kw + kx)] =
          m % 2 == 1 ? around[m / 2] : 0.5 * (around[m / 2 - 1] + around[m / 2]);
    }
  }
  return g;
}

// Labels 4-connected components of `in` on the grid; returns label per face
// (-1 outside `in`).
std::vector<int> components(const Grid& g, const std::vector<char>& in, int& count) {
  std::vector<int> label(in.size(), -1);
  count = 0;
  std::vector<int> stack;
  for (int s = 0; s < static_cast<int>(in.size()); ++s) {
    if (!in[static_cast<std::size_t>(s)] || label[static_cast<std::size_t>(s)] >= 0) continue;
    label[static_cast<std::size_t>(s)] = count;
    stack.push_back(s);
    while (!stack.empty()) {
      const int f = stack.back();
      stack.pop_back();
      const int x = f % g.kw, y = f / g.kw;
      const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[1] < 0 || q[0] >= g.kw || q[1] >= g.kh) continue;
        const int j = q[1] * g.kw + q[0];
        if (in[static_cast<std::size_t>(j)] && label[static_cast<std::size_t>(j)] < 0) {
          label[static_cast<std::size_t>(j)] = count;
          stack.push_back(j);
        }
      }
    }
    ++count;
  }
  return label;
}

// Complement faces reachable from outside the grid.
std::vector<char> exterior_of(const Grid& g, const std::vector<char>& set) {
  std::vector<char> ext(set.size(), 0);
  std::vector<int> stack;
  for (int y = 0; y < g.kh; ++y)
    for (int x = 0; x < g.kw; ++x) {
      if (x != 0 && y != 0 && x != g.kw - 1 && y != g.kh - 1) continue;
      const int f = y * g.kw + x;
      if (!set[static_cast<std::size_t>(f)] && !ext[static_cast<std::size_t>(f)]) {
        ext[static_cast<std::size_t>(f)] = 1;
        stack.push_back(f);
      }
    }
  while (!stack.empty()) {
    const int f = stack.back();
    stack.pop_back();
    const int x = f % g.kw, y = f / g.kw;
    const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
    for (const auto& q : nb) {
      if (q[0] < 0 || q[1] < 0 || q[0] >= g.kw || q[1] >= g.kh) continue;
      const int j = q[1] * g.kw + q[0];
      if (!set[static_cast<std::size_t>(j)] && !ext[static_cast<std::size_t>(j)]) {
        ext[static_cast<std::size_t>(j)] = 1;
        stack.push_back(j);
      }
    }
  }
  return ext;
}

}  // namespace

std::set<PixelSet> tree_of_shapes(const GrayImage& img) {
  if (img.width() > 16 || img.height() > 16) throw std::invalid_argument("oracle limited to 16x16");
  const Grid g = interpolate(img);
  std::vector<double> levels = g.v;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::set<PixelSet> family;
  for (const double lambda : levels) {
    for (int upper = 0; upper < 2; ++upper) {
      std::vector<char> in(g.v.size());
      for (std::size_t i = 0; i < g.v.size(); ++i) in[i] = upper ? g.v[i] >= lambda : g.v[i] <= lambda;
      int count = 0;
      const std::vector<int> label = components(g, in, count);
      for (int c = 0; c < count; ++c) {
        std::vector<char> comp(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) comp[i] = label[i] == c;
        const std::vector<char> ext = exterior_of(g, comp);
        PixelSet pixels;
        for (int y = 0; y < img.height(); ++y)
          for (int x = 0; x < img.width(); ++x) {
            const int f = (2 * y + 1) * g.kw + (2 * x + 1);
            if (!ext[static_cast<std::size_t>(f)]) pixels.push_back(static_cast<std::uint32_t>(img.index(x, y)));
          }
        if (!pixels.empty()) family.insert(std::move(pixels));
      }
    }
  }
  return family;
}

std::vector<double> flood_extinction(std::span<const NodeId> parent, std::span<const double> weights) {
  const std::size_t n = parent.size();
  if (n > 50) throw std::invalid_argument("oracle limited to 50 nodes");
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 1; i < n; ++i) {
    adj[i].push_back(static_cast<std::size_t>(parent[i]));
    adj[static_cast<std::size_t>(parent[i])].push_back(i);
  }
  auto flood = [&](std::size_t seed, auto&& admit) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{seed}, members;
    seen[seed] = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      members.push_back(u);
      for (std::size_t v : adj[u])
        if (!seen[v] && admit(v)) {
          seen[v] = 1;
          stack.push_back(v);
        }
    }
    return members;
  };

  // Minima: equal-weight plateaus without a lower neighbour, identified by
  // their smallest node.
  std::vector<std::size_t> minima;
  std::vector<char> visited(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (visited[i]) continue;
    const auto plateau = flood(i, [&](std::size_t v) { return weights[v] == weights[i]; });
    bool is_min = true;
    std::size_t rep = i;
    for (std::size_t u : plateau) {
      visited[u] = 1;
      rep = std::min(rep, u);
      for (std::size_t v : adj[u])
        if (weights[v] < weights[i]) is_min = false;
    }
    if (is_min) minima.push_back(rep);
  }
  auto precedes = [&](std::size_t a, std::size_t b) {
    return weights[a] < weights[b] || (weights[a] == weights[b] && a < b);
  };

  std::vector<double> levels(weights.begin(), weights.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const double top = levels.back();

  std::vector<double> extinction(n, 0.0);
  for (std::size_t m : minima) {
    double merge_level = top;
    for (double t : levels) {
      if (t < weights[m]) continue;
      const auto comp = flood(m, [&](std::size_t v) { return weights[v] <= t; });
      const bool absorbed = std::any_of(minima.begin(), minima.end(), [&](std::size_t other) {
        return other != m && precedes(other, m) && std::find(comp.begin(), comp.end(), other) != comp.end();
      });
      if (absorbed) {
        merge_level = t;
        break;
      }
    }
    extinction[m] = merge_level - weights[m];
  }
  return extinction;
}

double partition_energy(const GrayImage& img, const ShapeTree& tree, std::span<const std::uint8_t> keep,
                        double lambda_s) {
  std::vector<NodeId> owner(tree.size());
  for (std::size_t n = 0; n < tree.size(); ++n)
    owner[n] = (n == 0 || keep[n]) ? static_cast<NodeId>(n) : owner[static_cast<std::size_t>(tree.parent[n])];
  std::vector<NodeId> label(img.size());
  for (std::size_t p = 0; p < img.size(); ++p)
    label[p] = owner[static_cast<std::size_t>(tree.node_of_pixel[p])];

  std::map<NodeId, std::pair<long double, long double>> stats;
  for (std::size_t p = 0; p < img.size(); ++p) {
    auto& s = stats[label[p]];
    s.first += img[p];
    s.second += 1;
  }
  long double data = 0;
  for (std::size_t p = 0; p < img.size(); ++p) {
    const auto& s = stats[label[p]];
    const long double d = static_cast<long double>(img[p]) - s.first / s.second;
    data += d * d;
  }
  long double contour = 2.0L * (img.width() + img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (x + 1 < img.width() && label[img.index(x, y)] != label[img.index(x + 1, y)]) contour += 1;
      if (y + 1 < img.height() && label[img.index(x, y)] != label[img.index(x, y + 1)]) contour += 1;
    }
  return static_cast<double>(data + static_cast<long double>(lambda_s) * contour);
}

OptimalCut optimal_cut(const GrayImage& img, const ShapeTree& tree, double lambda_s) {
  const std::size_t n = tree.size();
  if (n > 18) throw std::invalid_argument("oracle limited to 18 nodes");
  std::vector<double> area(n, 0), sum(n, 0), sq(n, 0);
  for (std::size_t p = 0; p < img.size(); ++p) {
    const auto k = static_cast<std::size_t>(tree.node_of_pixel[p]);
    area[k] += 1;
    sum[k] += img[p];
    sq[k] += img[p] * img[p];
  }
  // Faces between the proper regions of two nodes.
  std::map<std::pair<std::size_t, std::size_t>, double> shared;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const auto a = static_cast<std::size_t>(tree.node_of_pixel[img.index(x, y)]);
      auto add = [&](std::size_t b) {
        if (a != b) shared[{std::min(a, b), std::max(a, b)}] += 1;
      };
      if (x + 1 < img.width()) add(static_cast<std::size_t>(tree.node_of_pixel[img.index(x + 1, y)]));
      if (y + 1 < img.height()) add(static_cast<std::size_t>(tree.node_of_pixel[img.index(x, y + 1)]));
    }
  const double outer = 2.0 * (img.width() + img.height());

  OptimalCut best{std::numeric_limits<double>::infinity(), {}};
  std::vector<std::size_t> owner(n);
  std::vector<double> ra(n), rs(n), rq(n);
  const std::uint32_t subsets = 1u << (n - 1);
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    std::fill(ra.begin(), ra.end(), 0.0);
    std::fill(rs.begin(), rs.end(), 0.0);
    std::fill(rq.begin(), rq.end(), 0.0);
    owner[0] = 0;
    for (std::size_t k = 1; k < n; ++k)
      owner[k] = (mask >> (k - 1)) & 1u ? k : owner[static_cast<std::size_t>(tree.parent[k])];
    for (std::size_t k = 0; k < n; ++k) {
      ra[owner[k]] += area[k];
      rs[owner[k]] += sum[k];
      rq[owner[k]] += sq[k];
    }
    double e = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (ra[k] > 0) e += rq[k] - rs[k] * rs[k] / ra[k];
    double contour = outer;
    for (const auto& [key, count] : shared)
      if (owner[key.first] != owner[key.second]) contour += count;
    e += lambda_s * contour;
    if (e < best.energy) {
      best.energy = e;
      best.keep.assign(n, 0);
      best.keep[0] = 1;
      for (std::size_t k = 1; k < n; ++k) best.keep[k] = (mask >> (k - 1)) & 1u;
    }
  }
  best.energy = partition_energy(img, tree, best.keep, lambda_s);
  return best;
}

}  // namespace salient::oracle
