#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "salient/image.hpp"
#include "salient/synthetic.hpp"

namespace salient {

struct FScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// Scores a binary segment against a binary ground truth of the same size.
FScore f_measure(std::span<const std::uint8_t> segment, std::span<const std::uint8_t> truth);

struct ObjectCoverage {
  FScore score;
  int fragments = 0;
};

struct CoverageReport {
  std::vector<ObjectCoverage> objects;

  double mean_f() const;
  double mean_fragments() const;
};

/// Best single region per object.
CoverageReport single_segment_coverage(const LabelImage& partition, const GroundTruth& truth);

/// Union of the regions lying mostly inside each object: those with at
/// least `overlap_ratio` of their pixels in it. When no region qualifies the
/// best single region is used.
CoverageReport fragmented_coverage(const LabelImage& partition, const GroundTruth& truth,
                                   double overlap_ratio = 0.5);

struct CoverageRow {
  std::string image;
  int object = 0;
  std::string test;
  ObjectCoverage coverage;
  double threshold = 0.0;
  std::int64_t min_area = 0;
};

void write_coverage_csv(std::ostream& out, std::span<const CoverageRow> rows);

struct BenchOptions {
  std::vector<int> sizes{64, 128, 256, 512};
  int trials = 3;
  double lambda_s = 8000.0;
  std::uint64_t seed = 1;
  int baseline_max_size = 512;  ///< larger images skip the baseline
};

/// Median wall-clock seconds of each stage for one image.
struct BenchRow {
  std::string image;  ///< "noise" or "natural"
  int size = 0;
  std::size_t nodes = 0;
  double tree = 0.0;      ///< framing and tree construction
  double ordered = 0.0;   ///< gradient order and attribute computation
  double pipeline = 0.0;  ///< tree through saliency map
  double baseline = -1.0; ///< largest-decrease removal on the same tree
};

std::vector<BenchRow> bench_runtime(const BenchOptions& options);

/// Least-squares slope of log(y) against log(x).
double fit_exponent(std::span<const double> x, std::span<const double> y);

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows);

}  // namespace salient
