#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "salient/energy.hpp"
#include "test_support.hpp"

using namespace salient;
using salient::testing::from_rows;
using salient::testing::random_image;

namespace {

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

GrayImage nested_square() {
  return from_rows({{0, 0, 0, 0, 0},
                    {0, 2, 2, 2, 0},
                    {0, 2, 1, 2, 0},
                    {0, 2, 2, 2, 0},
                    {0, 0, 0, 0, 0}});
}

// Hand-made two-node tree whose child region has 2 pixels of 10 and whose
// root region has 2 pixels of 20, with a declared contour of 4.
struct TwoNode {
  ShapeTree tree;
  NodeInfo info;
  RegionDecomposition decomp;
  TwoNode() {
    tree.width = 4;
    tree.height = 1;
    tree.parent = {0, 0};
    tree.level = {20, 10};
    tree.node_of_pixel = {0, 0, 1, 1};
    info.area = {4, 2};
    info.sum = {60, 20};
    info.length = {10, 4};
    info.grad_sum = {0, 0};
    decomp = region_decomposition(tree, info);
  }
};

}  // namespace

TEST_SUITE_BEGIN("energy");

TEST_CASE("merge formulas") {
  CHECK(merge_variation(2, 20, 2, 40, 4, 30) == doctest::Approx(-20));
  CHECK(merge_variation(2, 20, 2, 40, 4, 20) == doctest::Approx(20));
  CHECK(merge_data_cost(2, 20, 2, 40) == doctest::Approx(100));
  CHECK(merge_data_cost(0, 0, 5, 7) == 0.0);
  CHECK(merge_data_cost(3, 15, 4, 20) == 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 255);
  for (int i = 0; i < 100; ++i) {
    const double a1 = 1 + i % 7, a2 = 1 + i % 5;
    const double s1 = a1 * u(rng), s2 = a2 * u(rng);
    CHECK(merge_data_cost(a1, s1, a2, s2) == doctest::Approx(merge_variation(a1, s1, a2, s2, 0, 0)));
  }
  CHECK_THROWS_AS(EnergyParams{-1}.validate(), InputError);
  CHECK_THROWS_AS(EnergyParams{NAN}.validate(), InputError);
}

TEST_CASE("total energy of a two-pixel image") {
  const GrayImage img = from_rows({{0, 10}});
  const auto t = build_tree(img, compute_gradient(img));
  REQUIRE(t.tree.size() == 2);
  MergeState state(t.tree, region_decomposition(t.tree, t.info));
  CHECK(total_energy(img, state, {1.0}) == doctest::Approx(7));
  CHECK(state.contour_faces() == 7);
  CHECK(delta_energy(1, state, {1.0}) == doctest::Approx(49));
  state.merge(1);
  CHECK(total_energy(img, state, {1.0}) == doctest::Approx(56));
  CHECK(state.contour_faces() == 6);
  CHECK(state.live_nodes() == std::vector<NodeId>{0});
}

TEST_CASE("constant image costs nothing without contour price") {
  GrayImage img(4, 3, 9.0);
  const auto t = build_tree(img, compute_gradient(img));
  MergeState state(t.tree, region_decomposition(t.tree, t.info));
  CHECK(total_energy(img, state, {0.0}) == 0.0);
}

TEST_CASE("merge errors") {
  const GrayImage img = nested_square();
  const auto t = build_tree(img, compute_gradient(img));
  MergeState state(t.tree, region_decomposition(t.tree, t.info));
  CHECK_THROWS_AS(state.merge(0), InvariantError);
  CHECK_THROWS_AS(delta_energy(0, state, {}), InvariantError);
  state.merge(2);
  CHECK_THROWS_AS(state.merge(2), InvariantError);
  CHECK_THROWS_AS(delta_energy(2, state, {}), InvariantError);
  CHECK(state.owner(2) == 1);
  MergeState light(t.tree, region_decomposition(t.tree, t.info), false);
  CHECK_THROWS_AS(delta_energy(1, light, {}), InvariantError);
}

TEST_CASE("equal means cost only the contour") {
  // Diagonal pairs around a flat ring; several regions share the mean 5.
  const GrayImage img = from_rows({{5, 5, 5, 5},
                                   {5, 0, 10, 5},
                                   {5, 10, 0, 5},
                                   {5, 5, 5, 5}});
  const auto t = build_tree(img, compute_gradient(img));
  MergeState state(t.tree, region_decomposition(t.tree, t.info));
  for (std::size_t n = 1; n < t.tree.size(); ++n) {
    const auto id = static_cast<NodeId>(n);
    const NodeId p = state.parent(id);
    if (std::abs(state.sum(id) / state.area(id) - state.sum(p) / state.area(p)) > 0) continue;
    CHECK(delta_energy(id, state, {3.0}) == doctest::Approx(-3.0 * state.shared_faces(id, p)));
  }
}

TEST_CASE("incremental variation matches recomputation") {
  std::mt19937_64 rng(99);
  int steps = 0;
  for (int iter = 0; iter < 30; ++iter) {
    GrayImage img;
    const auto t = salient::testing::framed_tree(random_image(rng, 3 + iter % 8, 3 + iter % 6, 2 + iter % 9), &img);
    const EnergyParams params{static_cast<double>(iter % 4) * 50.0};
    MergeState state(t.tree, region_decomposition(t.tree, t.info));
    std::vector<NodeId> nodes;
    for (std::size_t n = 1; n < t.tree.size(); ++n) nodes.push_back(static_cast<NodeId>(n));
    std::shuffle(nodes.begin(), nodes.end(), rng);
    double before = total_energy(img, state, params);
    for (const NodeId n : nodes) {
      const double predicted = delta_energy(n, state, params);
      state.merge(n);
      const double after = total_energy(img, state, params);
      REQUIRE(close(after - before, predicted));
      CHECK(state.contour_faces() * params.lambda_s <= after + 1e-6);
      before = after;
      ++steps;
    }
    CHECK(state.live_count() == 1);
  }
  CHECK(steps > 300);
}

TEST_CASE("gradient order") {
  SUBCASE("ties fall back to node index") {
    const GrayImage img = from_rows({{0, 0, 0, 0, 0, 0, 0},
                                     {0, 9, 0, 9, 0, 9, 0},
                                     {0, 0, 0, 0, 0, 0, 0}});
    const auto t = build_tree(img, compute_gradient(img));
    CHECK(gradient_order(t.tree, t.info) == std::vector<NodeId>{1, 2, 3});
  }
  SUBCASE("sorted by mean contour gradient") {
    const GrayImage img = nested_square();
    GradientField g = compute_gradient(img);
    for (int ky = 0; ky < g.grid.kheight(); ++ky)
      for (int kx = 0; kx < g.grid.kwidth(); ++kx)
        g.values[g.grid.index(kx, ky)] = ((kx / 2 + ky / 2) % 2) ? 6.0 : 1.0;
    const auto t = build_tree(img, g);
    // Mean over each contour, enumerated face by face.
    std::vector<std::pair<double, NodeId>> expect;
    const auto sets = t.tree.pixel_sets();
    for (std::size_t n = 1; n < t.tree.size(); ++n) {
      std::vector<char> in(img.size(), 0);
      for (auto p : sets[n]) in[p] = 1;
      double s = 0;
      int l = 0;
      for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) {
          if (!in[img.index(x, y)]) continue;
          const int d[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
          for (const auto& v : d) {
            const int nx = x + v[0], ny = y + v[1];
            if (nx >= 0 && ny >= 0 && nx < 5 && ny < 5 && in[img.index(nx, ny)]) continue;
            s += g.at(2 * x + 1 + v[0], 2 * y + 1 + v[1]);
            ++l;
          }
        }
      expect.emplace_back(s / l, static_cast<NodeId>(n));
    }
    std::sort(expect.begin(), expect.end());
    std::vector<NodeId> ids;
    for (const auto& e : expect) ids.push_back(e.second);
    CHECK(gradient_order(t.tree, t.info) == ids);
  }
}

TEST_CASE("lambda attribute") {
  SUBCASE("root only") {
    GrayImage img(3, 3, 1.0);
    const auto t = build_tree(img, compute_gradient(img));
    const auto a = compute_lambda_attribute(t.tree, t.info, region_decomposition(t.tree, t.info), {});
    CHECK(a.value.size() == 1);
    CHECK(a.inverted == std::vector<double>{0.0});
  }
  SUBCASE("two regions of two pixels") {
    const TwoNode tn;
    const std::vector<NodeId> order{1};
    const auto a = compute_lambda_attribute(tn.tree, tn.info, tn.decomp, order);
    CHECK(a.initial[1] == doctest::Approx(25));
    CHECK(a.value[1] == doctest::Approx(25));
    CHECK(a.inverted[1] == 0.0);
  }
  SUBCASE("random images") {
    std::mt19937_64 rng(4);
    for (int iter = 0; iter < 30; ++iter) {
      GrayImage img;
      const auto t = salient::testing::framed_tree(random_image(rng, 8, 7, 2 + iter % 20), &img);
      const auto d = region_decomposition(t.tree, t.info);
      const auto order = gradient_order(t.tree, t.info);
      const auto a = compute_lambda_attribute(t.tree, t.info, d, order);
      const double top = *std::max_element(a.value.begin(), a.value.end());
      for (std::size_t n = 1; n < t.tree.size(); ++n) {
        CHECK(a.initial[n] >= 0.0);
        CHECK(a.value[n] >= a.initial[n]);
        CHECK(a.inverted[n] == doctest::Approx(top - a.value[n]));
      }
      CHECK(*std::min_element(a.inverted.begin(), a.inverted.end()) == 0.0);
    }
  }
}

TEST_CASE("fixed lambda simplification") {
  const GrayImage img = nested_square();
  const auto t = build_tree(img, compute_gradient(img));
  const auto d = region_decomposition(t.tree, t.info);
  const auto order = gradient_order(t.tree, t.info);

  SUBCASE("no contour price keeps distinct regions") {
    const auto s = simplify_fixed_lambda(t.tree, d, {0.0}, order);
    CHECK(s.selected == std::vector<NodeId>{0, 1, 2});
    CHECK(s.removals == 0);
  }
  SUBCASE("huge price flattens") {
    const auto s = simplify_fixed_lambda(t.tree, d, {1e6}, order);
    CHECK(s.selected == std::vector<NodeId>{0});
  }
  SUBCASE("price between the two transitions removes the center") {
    // Center: 8/9 / 4 = 0.22; ring: (8*16/24)*4 / 12 = 1.78.
    const auto a = compute_lambda_attribute(t.tree, t.info, d, order);
    CHECK(a.initial[2] == doctest::Approx(8.0 / 9.0 / 4.0));
    CHECK(a.initial[1] == doctest::Approx(8.0 * 16.0 / 24.0 * 4.0 / 12.0));
    const auto s = simplify_fixed_lambda(t.tree, d, {1.0}, order);
    CHECK(s.selected == std::vector<NodeId>{0, 1});
  }
}

TEST_CASE("every greedy removal lowers the energy") {
  std::mt19937_64 rng(8);
  int checked = 0;
  for (int iter = 0; iter < 20; ++iter) {
    GrayImage img;
    const auto t = salient::testing::framed_tree(random_image(rng, 9, 8, 3 + iter % 30), &img);
    const auto d = region_decomposition(t.tree, t.info);
    const EnergyParams params{500.0 + 2000.0 * (iter % 5)};
    MergeState fresh(t.tree, d);
    double last = total_energy(img, fresh, params);
    auto watch = [&](NodeId, double delta, const MergeState& after) {
      const double now = total_energy(img, after, params);
      CHECK(close(now - last, delta));
      if (delta != 0.0) CHECK(now < last);
      last = now;
      ++checked;
    };
    const auto order = gradient_order(t.tree, t.info);
    const auto s = simplify_fixed_lambda(t.tree, d, params, order, watch);
    // Fixpoint: nothing left with a negative variation.
    for (const NodeId n : s.selected)
      if (n != 0) CHECK(delta_energy(n, s.state, params) >= 0.0);
    last = total_energy(img, fresh, params);
    const auto b = baseline_largest_decrease(t.tree, d, params, watch);
    for (const NodeId n : b.selected)
      if (n != 0) CHECK(delta_energy(n, b.state, params) >= 0.0);
  }
  CHECK(checked > 100);
}

TEST_CASE("baseline") {
  SUBCASE("no contour price keeps everything") {
    const GrayImage img = nested_square();
    const auto t = build_tree(img, compute_gradient(img));
    const auto b = baseline_largest_decrease(t.tree, region_decomposition(t.tree, t.info), {0.0});
    CHECK(b.selected == std::vector<NodeId>{0, 1, 2});
  }
  SUBCASE("shapes without contrast all go") {
    std::mt19937_64 rng(2);
    GrayImage img;
    const auto t = salient::testing::framed_tree(random_image(rng, 10, 10, 6), &img);
    REQUIRE(t.tree.size() > 5);
    // Same regions, but every pixel at the same gray level.
    GrayImage flat(img.width(), img.height(), 7.0);
    RegionDecomposition d = region_decomposition(t.tree, t.info);
    for (std::size_t n = 0; n < d.sum.size(); ++n) d.sum[n] = 7.0 * static_cast<double>(d.area[n]);
    const EnergyParams params{2.0};
    const auto b = baseline_largest_decrease(t.tree, d, params);
    CHECK(b.selected == std::vector<NodeId>{0});
    CHECK(total_energy(flat, b.state, params) == doctest::Approx(2.0 * 2 * (img.width() + img.height())));
  }
}

TEST_SUITE_END();
