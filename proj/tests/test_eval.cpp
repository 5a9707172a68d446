#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "salient/eval.hpp"

using namespace salient;

namespace {

LabelImage labels_from(int w, int h, std::vector<std::uint32_t> labels) {
  return LabelImage{w, h, std::move(labels)};
}

GroundTruth truth_from(int w, int h, std::vector<std::uint8_t> mask) {
  GroundTruth gt{w, h, {}};
  gt.objects.push_back(std::move(mask));
  return gt;
}

}  // namespace

TEST_CASE("f-measure basics") {
  const std::vector<std::uint8_t> gt{1, 1, 1, 1, 0, 0};
  const FScore same = f_measure(gt, gt);
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);
  CHECK(same.f == 1.0);

  const FScore none = f_measure(std::vector<std::uint8_t>{0, 0, 0, 0, 1, 1}, gt);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f == 0.0);

  const FScore half = f_measure(std::vector<std::uint8_t>{1, 1, 0, 0, 0, 0}, gt);
  CHECK(half.precision == 1.0);
  CHECK(half.recall == 0.5);
  CHECK(half.f == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_WITH_AS(f_measure(gt, std::vector<std::uint8_t>(6, 0)), "empty ground truth", InputError);
  CHECK_THROWS_AS(f_measure(gt, std::vector<std::uint8_t>(5, 1)), InputError);
}

TEST_CASE("single-segment coverage") {
  // 4x2: object is the left 2x2 block.
  const GroundTruth gt = truth_from(4, 2, {1, 1, 0, 0, 1, 1, 0, 0});
  const auto exact = single_segment_coverage(labels_from(4, 2, {0, 0, 1, 1, 0, 0, 1, 1}), gt);
  REQUIRE(exact.objects.size() == 1);
  CHECK(exact.objects[0].score.f == 1.0);
  CHECK(exact.objects[0].fragments == 1);

  std::vector<std::uint32_t> singletons(8);
  std::iota(singletons.begin(), singletons.end(), 0u);
  const auto fine = single_segment_coverage(labels_from(4, 2, singletons), gt);
  CHECK(fine.objects[0].score.f == doctest::Approx(2.0 / (4 + 1)));
}

TEST_CASE("fragmented coverage") {
  const GroundTruth gt = truth_from(4, 2, {1, 1, 0, 0, 1, 1, 0, 0});

  const auto whole = fragmented_coverage(labels_from(4, 2, {0, 0, 1, 1, 0, 0, 1, 1}), gt);
  CHECK(whole.objects[0].score.f == 1.0);
  CHECK(whole.objects[0].fragments == 1);

  const auto split = fragmented_coverage(labels_from(4, 2, {0, 1, 3, 3, 2, 2, 3, 3}), gt);
  CHECK(split.objects[0].score.f == 1.0);
  CHECK(split.objects[0].fragments == 3);
  CHECK(split.mean_fragments() == 3.0);

  // Region 1 straddles the object: 2 of its 3 pixels are inside.
  const LabelImage straddle = labels_from(4, 2, {0, 1, 1, 2, 0, 1, 2, 2});
  const auto strict = fragmented_coverage(straddle, gt, 1.0);
  CHECK(strict.objects[0].score.precision == 1.0);
  CHECK(strict.objects[0].fragments == 1);
  double last_recall = 0.0;
  for (double ratio : {1.0, 0.8, 0.6, 0.5, 0.3}) {
    const auto r = fragmented_coverage(straddle, gt, ratio);
    CHECK(r.objects[0].score.recall >= last_recall);
    last_recall = r.objects[0].score.recall;
  }
  CHECK(last_recall == 1.0);

  // No region is mostly inside: falls back to the best single region.
  const GroundTruth dot = truth_from(4, 2, {0, 1, 0, 0, 0, 0, 0, 0});
  const auto fallback = fragmented_coverage(labels_from(4, 2, {0, 0, 0, 0, 1, 1, 1, 1}), dot);
  CHECK(fallback.objects[0].fragments == 1);
  CHECK(fallback.objects[0].score.recall == 1.0);
}

TEST_CASE("coverage csv") {
  const GroundTruth gt = truth_from(2, 1, {1, 0});
  const auto rep = single_segment_coverage(labels_from(2, 1, {0, 1}), gt);
  std::vector<CoverageRow> rows{{"a.png", 0, "single", rep.objects[0], 0.5, 10}};
  std::ostringstream out;
  write_coverage_csv(out, rows);
  const std::string text = out.str();
  CHECK(text.starts_with("image,object,test,F,precision,recall,fragments,threshold,min_area\n"));
  CHECK(text.find("a.png,0,single,") != std::string::npos);
}

TEST_CASE("generators are deterministic") {
  CHECK(uniform_noise(16, 9, 4) == uniform_noise(16, 9, 4));
  CHECK_FALSE(uniform_noise(16, 9, 4) == uniform_noise(16, 9, 5));
  CHECK(natural_image(20, 20, 2) == natural_image(20, 20, 2));

  const Scene a = two_object_scene(60, 45, 9, 10.0);
  const Scene b = two_object_scene(60, 45, 9, 10.0);
  CHECK(a.image == b.image);
  REQUIRE(a.truth.objects.size() == 2);
  CHECK(a.truth.objects == b.truth.objects);
  a.truth.validate();
  for (std::size_t p = 0; p < a.image.size(); ++p) {
    CHECK_FALSE((a.truth.objects[0][p] && a.truth.objects[1][p]));
    CHECK(a.image[p] >= 0.0);
    CHECK(a.image[p] <= 255.0);
  }

  const Scene poly = polygon_scene(120, 90, 1, 8.0, 1.5);
  CHECK(poly.truth.objects.size() == 3);
}

TEST_CASE("power-law exponent fit") {
  const std::vector<double> x{10, 20, 40, 80, 160};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 1.5));
  CHECK(fit_exponent(x, y) == doctest::Approx(1.5));
  std::vector<double> flat(x.size(), 2.0);
  CHECK(fit_exponent(x, flat) == doctest::Approx(0.0));
}

TEST_CASE("bench harness smoke run") {
  BenchOptions opt;
  opt.sizes = {64, 72};
  opt.trials = 1;
  opt.baseline_max_size = 64;
  const auto rows = bench_runtime(opt);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.nodes > 0);
    CHECK(r.tree >= 0.0);
    CHECK(r.pipeline >= r.ordered);
    CHECK((r.size == 64) == (r.baseline >= 0.0));
  }
  opt.sizes = {32};
  CHECK_THROWS_AS(bench_runtime(opt), InputError);
  std::ostringstream out;
  write_bench_csv(out, rows);
  CHECK(out.str().starts_with("image,size,nodes,tree_s,ordered_s,pipeline_s,baseline_s,ratio\n"));
}
