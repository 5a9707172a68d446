#include "salient/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "salient/eval.hpp"
#include "salient/hierarchy.hpp"
#include "salient/pipeline.hpp"

namespace salient {
namespace {

namespace fs = std::filesystem;

struct CommonConfig {
  std::string config;
  std::string gradient;
  std::string border = "median-frame";
};

BorderPolicy border_policy(const CommonConfig& common) {
  return common.border == "none" ? BorderPolicy::None : BorderPolicy::MedianFrame;
}

PreparedImage prepare(const fs::path& input, const CommonConfig& common, std::int64_t min_area) {
  GrayImage image = load_image(input, border_policy(common));
  if (common.gradient.empty()) return prepare_image(std::move(image), min_area);
  GradientField grad = load_external_gradient(common.gradient, KhalimskyGrid(image.width(), image.height()));
  return prepare_image(std::move(image), std::move(grad), min_area);
}

// Multiplying by an odd constant is a bijection modulo 2^24, so labels below
// 2^24 get pairwise distinct colors.
std::vector<std::uint8_t> label_colors(const LabelImage& labels) {
  std::vector<std::uint8_t> rgb(labels.labels.size() * 3);
  for (std::size_t p = 0; p < labels.labels.size(); ++p) {
    const std::uint32_t c = (labels.labels[p] * 0x9E3779u + 0x3C6EF3u) & 0xFFFFFFu;
    rgb[3 * p] = static_cast<std::uint8_t>(c >> 16);
    rgb[3 * p + 1] = static_cast<std::uint8_t>(c >> 8);
    rgb[3 * p + 2] = static_cast<std::uint8_t>(c);
  }
  return rgb;
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write " + path);
  file << text;
}

// Runs `work(i)` for every i in [0, count) on a few threads. The first
// exception in index order is rethrown.
template <typename Work>
void parallel_for(std::size_t count, unsigned threads, Work work) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct EvalItem {
  std::string image;
  std::vector<std::string> masks;
};

std::vector<EvalItem> read_eval_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("unreadable file: " + path);
  std::vector<EvalItem> items;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    EvalItem item;
    if (!(fields >> item.image)) continue;
    for (std::string m; fields >> m;) item.masks.push_back(m);
    if (item.masks.empty()) throw InputError("no mask listed for " + item.image);
    items.push_back(std::move(item));
  }
  return items;
}

double pick_threshold(const SaliencyMap& map, const std::optional<double>& absolute, double fraction) {
  return absolute ? *absolute : fraction * map.max();
}

// key=value lines; flags on the command line win.
void append_config(const std::string& path, const CLI::App& app, const CLI::App* sub,
                   const std::vector<std::string>& given, std::vector<std::string>& args) {
  std::ifstream in(path);
  if (!in) throw InputError("unreadable file: " + path);
  for (std::string line; std::getline(in, line);) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("malformed config line: " + line);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    if (key == "config") throw InputError("config files cannot include other config files");
    const bool known_here = app.get_option_no_throw(flag) || (sub && sub->get_option_no_throw(flag));
    bool known_elsewhere = false;
    for (const CLI::App* other : app.get_subcommands({}))
      known_elsewhere = known_elsewhere || other->get_option_no_throw(flag) != nullptr;
    if (!known_here) {
      if (known_elsewhere) continue;
      throw InputError("unknown config key: " + key);
    }
    const bool on_command_line = std::any_of(given.begin(), given.end(), [&](const std::string& a) {
      return a == flag || a.starts_with(flag + "=");
    });
    if (!on_command_line) args.push_back(flag + "=" + value);
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical simplification and segmentation from salient level lines", "salient"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string("salient ") + kPipelineVersion + " (saliency format " +
                                        kSaliencyFormat + ", gradient format " + kGradientFormat + ")");

  CommonConfig common;
  app.add_option("--config", common.config, "key=value file; command-line flags take precedence");
  app.add_option("--gradient", common.gradient, "external gradient file (GRAD1F) instead of |f(p)-f(q)|");
  app.add_option("--border", common.border, "border policy")
      ->check(CLI::IsMember({"median-frame", "none"}));

  std::string input, output;
  double lambda_s = 8000.0;
  std::int64_t min_area = 10;

  auto* simplify = app.add_subcommand("simplify", "fixed-lambda selection; writes the mean-rendered image");
  simplify->add_option("input", input, "input image (PGM or PNG)")->required();
  simplify->add_option("--output", output, "output image (PGM or PNG)")->required();
  simplify->add_option("--lambda", lambda_s, "price of one unit of contour")->check(CLI::NonNegativeNumber);
  simplify->add_option("--min-area", min_area, "grain filter size in pixels")->check(CLI::NonNegativeNumber);

  std::string display;
  bool inverted = false;
  bool rank = false;
  auto* saliency = app.add_subcommand("saliency", "saliency map file and its display image");
  saliency->add_option("input", input, "input image (PGM or PNG)")->required();
  saliency->add_option("--output", output, "saliency file")->required();
  saliency->add_option("--display", display, "display PNG (default: output with .png)");
  saliency->add_option("--min-area", min_area, "grain filter size in pixels")->check(CLI::NonNegativeNumber);
  saliency->add_flag("--inverted", inverted, "dark contours on a white background");
  saliency->add_flag("--rank", rank, "spread distinct values evenly instead of linearly");

  std::optional<double> threshold;
  double fraction = 0.05;
  std::string labels_path;
  int frame = 1;
  auto* segment = app.add_subcommand("segment", "thresholds a saliency file into regions");
  segment->add_option("input", input, "saliency file")->required();
  segment->add_option("--output", output, "colored label PNG")->required();
  segment->add_option("--labels", labels_path, "raw label PGM (default: output with .pgm)");
  auto* abs_opt = segment->add_option("--threshold", threshold, "absolute saliency threshold");
  segment->add_option("--threshold-fraction", fraction, "threshold as a fraction of the map maximum")
      ->excludes(abs_opt)
      ->check(CLI::NonNegativeNumber);
  segment->add_option("--frame", frame, "frame width to strip (0 for maps built with --border none)")
      ->check(CLI::NonNegativeNumber);

  std::vector<std::string> images, masks;
  std::string list_path;
  double overlap = 0.5;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  auto* eval = app.add_subcommand("eval", "coverage tests against ground-truth masks");
  eval->add_option("--image", images, "input image (use with --mask)");
  eval->add_option("--mask", masks, "object mask of --image, repeatable");
  eval->add_option("--list", list_path, "lines of 'image mask [mask...]'");
  eval->add_option("--output", output, "CSV report (default: stdout)");
  eval->add_option("--min-area", min_area, "grain filter size in pixels")->check(CLI::NonNegativeNumber);
  auto* eval_abs = eval->add_option("--threshold", threshold, "absolute saliency threshold");
  eval->add_option("--threshold-fraction", fraction, "threshold as a fraction of the map maximum")
      ->excludes(eval_abs)
      ->check(CLI::NonNegativeNumber);
  eval->add_option("--overlap", overlap, "minimum inside share of a fragment")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--threads", threads, "images processed concurrently")->check(CLI::PositiveNumber);

  BenchOptions bench_opt;
  auto* bench = app.add_subcommand("bench", "runtime table on generated images");
  bench->add_option("--output", output, "CSV table (default: stdout)");
  bench->add_option("--sizes", bench_opt.sizes, "image sides, at least 64")->delimiter(',');
  bench->add_option("--trials", bench_opt.trials, "repetitions per image")->check(CLI::PositiveNumber);
  bench->add_option("--lambda", bench_opt.lambda_s, "lambda for the baseline")->check(CLI::NonNegativeNumber);
  bench->add_option("--seed", bench_opt.seed, "generator seed");
  bench->add_option("--baseline-max-size", bench_opt.baseline_max_size, "skip the baseline above this side");

  auto* stats = app.add_subcommand("tree-stats", "debug listing of the tree of shapes");
  stats->add_option("input", input, "input image (PGM or PNG)")->required();
  stats->add_option("--output", output, "listing file (default: stdout)");
  stats->add_option("--min-area", min_area, "grain filter size in pixels")->check(CLI::NonNegativeNumber);

  std::vector<std::string> given(argv + 1, argv + argc);
  std::vector<std::string> args = given;
  try {
    std::string config_path;
    for (std::size_t i = 0; i < given.size(); ++i) {
      if (given[i] == "--config" && i + 1 < given.size()) config_path = given[i + 1];
      if (given[i].starts_with("--config=")) config_path = given[i].substr(9);
    }
    if (!config_path.empty()) {
      const CLI::App* sub = nullptr;
      for (const std::string& a : given)
        if (!sub) sub = app.get_subcommand_no_throw(a);
      append_config(config_path, app, sub, given, args);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!common.gradient.empty() && (eval->parsed() || bench->parsed()))
      throw InputError("--gradient applies to single-image subcommands");

    if (simplify->parsed()) {
      const PreparedImage prep = prepare(input, common, min_area);
      const Simplification s = simplify_from(prep, lambda_s);
      save_image(output, crop_frame(render_simplified(prep.image, s.state)));
      out << "shapes " << prep.tos.tree.size() << " kept " << s.selected.size() << " regions "
          << region_labels(prep, s.state).region_count() << '\n';
    } else if (saliency->parsed()) {
      const PreparedImage prep = prepare(input, common, min_area);
      const SaliencyResult r = saliency_from(prep);
      save_saliency(output, r.map);
      const fs::path png = display.empty() ? fs::path(output).replace_extension(".png") : fs::path(display);
      write_saliency_png(png, r.map, inverted, rank);
      out << "shapes " << prep.tos.tree.size() << " minima " << r.extinction.minima.size() << " max "
          << r.map.max() << '\n';
    } else if (segment->parsed()) {
      const SaliencyMap map = load_saliency(input);
      const double t = pick_threshold(map, threshold, fraction);
      const LabelImage labels = crop_frame(threshold_partition(map, t), frame);
      write_png_rgb(output, labels.width, labels.height, label_colors(labels));
      const fs::path raw = labels_path.empty() ? fs::path(output).replace_extension(".pgm") : fs::path(labels_path);
      write_pgm_labels(raw, labels);
      out << "threshold " << t << " regions " << labels.region_count() << '\n';
    } else if (eval->parsed()) {
      std::vector<EvalItem> items;
      if (!list_path.empty()) items = read_eval_list(list_path);
      if (images.size() > 1) throw InputError("use --list for several images");
      if (images.size() == 1) items.push_back({images[0], masks});
      else if (!masks.empty()) throw InputError("--mask needs --image");
      if (items.empty()) throw InputError("nothing to evaluate: give --image/--mask or --list");
      for (const auto& item : items)
        if (item.masks.empty()) throw InputError("no mask given for " + item.image);

      std::vector<std::vector<CoverageRow>> per_image(items.size());
      parallel_for(items.size(), threads, [&](std::size_t i) {
        const EvalItem& item = items[i];
        const PreparedImage prep = prepare(item.image, common, min_area);
        const GrayImage plain = crop_frame(prep.image);
        GroundTruth truth{plain.width(), plain.height(), {}};
        for (const auto& m : item.masks) {
          int w = 0;
          int h = 0;
          truth.objects.push_back(load_mask(m, w, h));
          if (w != truth.width || h != truth.height) throw InputError("size mismatch: " + m);
        }
        const SaliencyResult r = saliency_from(prep);
        const double t = pick_threshold(r.map, threshold, fraction);
        const LabelImage part = crop_frame(threshold_partition(r.map, t), prep.image.frame());
        const CoverageReport single = single_segment_coverage(part, truth);
        const CoverageReport frag = fragmented_coverage(part, truth, overlap);
        for (std::size_t k = 0; k < truth.objects.size(); ++k) {
          per_image[i].push_back({item.image, static_cast<int>(k), "single", single.objects[k], t, min_area});
          per_image[i].push_back({item.image, static_cast<int>(k), "fragmented", frag.objects[k], t, min_area});
        }
      });
      std::vector<CoverageRow> rows;
      for (auto& v : per_image) rows.insert(rows.end(), v.begin(), v.end());
      std::ostringstream csv;
      write_coverage_csv(csv, rows);
      write_text(output, csv.str(), out);
    } else if (bench->parsed()) {
      const std::vector<BenchRow> rows = bench_runtime(bench_opt);
      std::ostringstream csv;
      write_bench_csv(csv, rows);
      write_text(output, csv.str(), out);
    } else if (stats->parsed()) {
      const PreparedImage prep = prepare(input, common, min_area);
      std::ostringstream listing;
      dump_tree(listing, prep.tos.tree, prep.tos.info);
      write_text(output, listing.str(), out);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(argc, argv, out, err);
}

}  // namespace salient
