#include "salient/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "salient/pipeline.hpp"

namespace salient {

FScore f_measure(std::span<const std::uint8_t> segment, std::span<const std::uint8_t> truth) {
  if (segment.size() != truth.size()) throw InputError("segment and ground truth sizes differ");
  std::size_t seg = 0, gt = 0, both = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    seg += segment[i] != 0;
    gt += truth[i] != 0;
    both += segment[i] != 0 && truth[i] != 0;
  }
  if (gt == 0) throw InputError("empty ground truth");
  FScore s;
  s.precision = seg ? static_cast<double>(both) / static_cast<double>(seg) : 0.0;
  s.recall = static_cast<double>(both) / static_cast<double>(gt);
  if (s.precision + s.recall > 0.0) s.f = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

double CoverageReport::mean_f() const {
  double s = 0.0;
  for (const auto& o : objects) s += o.score.f;
  return objects.empty() ? 0.0 : s / static_cast<double>(objects.size());
}

double CoverageReport::mean_fragments() const {
  double s = 0.0;
  for (const auto& o : objects) s += o.fragments;
  return objects.empty() ? 0.0 : s / static_cast<double>(objects.size());
}

namespace {

struct RegionStats {
  std::vector<std::size_t> size;
  std::vector<std::size_t> inside;
};

RegionStats region_stats(const LabelImage& partition, std::span<const std::uint8_t> mask) {
  const std::uint32_t top = *std::max_element(partition.labels.begin(), partition.labels.end());
  RegionStats st{std::vector<std::size_t>(top + 1u, 0), std::vector<std::size_t>(top + 1u, 0)};
  for (std::size_t p = 0; p < mask.size(); ++p) {
    ++st.size[partition.labels[p]];
    st.inside[partition.labels[p]] += mask[p] != 0;
  }
  return st;
}

void check_inputs(const LabelImage& partition, const GroundTruth& truth) {
  truth.validate();
  if (partition.width != truth.width || partition.height != truth.height)
    throw InputError("partition and ground truth sizes differ");
}

std::uint32_t best_region(const RegionStats& st, std::size_t truth_size) {
  std::uint32_t best = 0;
  double best_f = -1.0;
  for (std::uint32_t r = 0; r < st.size.size(); ++r) {
    if (st.size[r] == 0) continue;
    // 2PR/(P+R) with P = i/|r| and R = i/|gt|.
    const double f = 2.0 * static_cast<double>(st.inside[r]) / static_cast<double>(st.size[r] + truth_size);
    if (f > best_f) {
      best_f = f;
      best = r;
    }
  }
  return best;
}

ObjectCoverage score_union(const LabelImage& partition, std::span<const std::uint8_t> mask,
                           const std::vector<std::uint8_t>& chosen) {
  std::vector<std::uint8_t> seg(mask.size());
  for (std::size_t p = 0; p < mask.size(); ++p) seg[p] = chosen[partition.labels[p]];
  return {f_measure(seg, mask), static_cast<int>(std::count(chosen.begin(), chosen.end(), 1))};
}

}  // namespace

CoverageReport single_segment_coverage(const LabelImage& partition, const GroundTruth& truth) {
  check_inputs(partition, truth);
  CoverageReport report;
  for (const auto& mask : truth.objects) {
    const RegionStats st = region_stats(partition, mask);
    const auto gt = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
    std::vector<std::uint8_t> chosen(st.size.size(), 0);
    chosen[best_region(st, gt)] = 1;
    report.objects.push_back(score_union(partition, mask, chosen));
  }
  return report;
}

CoverageReport fragmented_coverage(const LabelImage& partition, const GroundTruth& truth,
                                   double overlap_ratio) {
  check_inputs(partition, truth);
  if (!(overlap_ratio > 0.0 && overlap_ratio <= 1.0)) throw InputError("overlap ratio must lie in (0, 1]");
  CoverageReport report;
  for (const auto& mask : truth.objects) {
    const RegionStats st = region_stats(partition, mask);
    std::vector<std::uint8_t> chosen(st.size.size(), 0);
    bool any = false;
    for (std::size_t r = 0; r < st.size.size(); ++r) {
      if (st.size[r] == 0) continue;
      if (static_cast<double>(st.inside[r]) >= overlap_ratio * static_cast<double>(st.size[r])) {
        chosen[r] = 1;
        any = true;
      }
    }
    if (!any) chosen[best_region(st, static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)))] = 1;
    report.objects.push_back(score_union(partition, mask, chosen));
  }
  return report;
}

void write_coverage_csv(std::ostream& out, std::span<const CoverageRow> rows) {
  out << "image,object,test,F,precision,recall,fragments,threshold,min_area\n";
  for (const auto& r : rows) {
    out << r.image << ',' << r.object << ',' << r.test << ',' << r.coverage.score.f << ','
        << r.coverage.score.precision << ',' << r.coverage.score.recall << ',' << r.coverage.fragments
        << ',' << r.threshold << ',' << r.min_area << '\n';
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

std::vector<BenchRow> bench_runtime(const BenchOptions& options) {
  if (options.trials < 1) throw InputError("at least one trial is required");
  std::vector<BenchRow> rows;
  for (const char* kind : {"noise", "natural"}) {
    for (const int size : options.sizes) {
      if (size < 64) throw InputError("bench sizes start at 64");
      const std::uint64_t seed = options.seed + static_cast<std::uint64_t>(size);
      const GrayImage raw = std::string(kind) == "noise" ? uniform_noise(size, size, seed)
                                                        : natural_image(size, size, seed);
      BenchRow row{kind, size, 0, 0.0, 0.0, 0.0, -1.0};
      std::vector<double> tree_t, ordered_t, pipeline_t, baseline_t;
      for (int trial = 0; trial < options.trials; ++trial) {
        auto start = Clock::now();
        const GrayImage img = add_median_frame(raw);
        const GradientField grad = compute_gradient(img);
        const TreeOfShapes tos = build_tree(img, grad);
        const RegionDecomposition decomp = region_decomposition(tos.tree, tos.info);
        tree_t.push_back(seconds_since(start));

        auto mid = Clock::now();
        const auto order = gradient_order(tos.tree, tos.info);
        const auto attr = compute_lambda_attribute(tos.tree, tos.info, decomp, order);
        ordered_t.push_back(seconds_since(mid));
        const auto mt = build_shape_space_min_tree(tos.tree, attr.inverted);
        const auto ext = compute_extinction(mt);
        const auto map = compute_saliency(tos.tree, tos.maps, ext.value);
        pipeline_t.push_back(seconds_since(start));
        row.nodes = tos.tree.size();

        if (size <= options.baseline_max_size) {
          mid = Clock::now();
          const auto b = baseline_largest_decrease(tos.tree, decomp, EnergyParams{options.lambda_s});
          baseline_t.push_back(seconds_since(mid));
        }
      }
      row.tree = median(tree_t);
      row.ordered = median(ordered_t);
      row.pipeline = median(pipeline_t);
      if (!baseline_t.empty()) row.baseline = median(baseline_t);
      rows.push_back(row);
    }
  }
  return rows;
}

double fit_exponent(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("need at least two points to fit");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows) {
  out << "image,size,nodes,tree_s,ordered_s,pipeline_s,baseline_s,ratio\n";
  for (const auto& r : rows) {
    out << r.image << ',' << r.size << ',' << r.nodes << ',' << r.tree << ',' << r.ordered << ','
        << r.pipeline << ',';
    if (r.baseline >= 0.0)
      out << r.baseline << ',' << r.baseline / r.ordered;
    else
      out << ',';
    out << '\n';
  }
}

}  // namespace salient
