#include "salient/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace salient {

void GroundTruth::validate() const {
  if (objects.empty()) throw InputError("ground truth has no object");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  for (const auto& mask : objects) {
    if (mask.size() != n) throw InputError("ground truth mask size mismatch");
    if (std::find(mask.begin(), mask.end(), 1) == mask.end()) throw InputError("empty ground truth object");
  }
}

namespace {

struct Polygon {
  std::vector<double> xs, ys;

  // Crossing-number test at a pixel center.
  bool contains(double x, double y) const {
    bool in = false;
    for (std::size_t i = 0, j = xs.size() - 1; i < xs.size(); j = i++) {
      if ((ys[i] > y) != (ys[j] > y) && x < (xs[j] - xs[i]) * (y - ys[i]) / (ys[j] - ys[i]) + xs[i])
        in = !in;
    }
    return in;
  }
};

Polygon regular_polygon(double cx, double cy, double radius, int sides, double angle) {
  Polygon p;
  for (int k = 0; k < sides; ++k) {
    const double a = angle + 2.0 * std::numbers::pi * k / sides;
    p.xs.push_back(cx + radius * std::cos(a));
    p.ys.push_back(cy + radius * std::sin(a));
  }
  return p;
}

std::vector<double> gaussian_blur(const std::vector<double>& v, int w, int h, double sigma) {
  if (sigma <= 0.0) return v;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double total = 0.0;
  for (int i = -r; i <= r; ++i) total += k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& x : k) x /= total;
  auto at = [](int i, int n) { return std::clamp(i, 0, n - 1); };
  std::vector<double> tmp(v.size()), out(v.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[static_cast<std::size_t>(i + r)] * v[static_cast<std::size_t>(y * w + at(x + i, w))];
      tmp[static_cast<std::size_t>(y * w + x)] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[static_cast<std::size_t>(i + r)] * tmp[static_cast<std::size_t>(at(y + i, h) * w + x)];
      out[static_cast<std::size_t>(y * w + x)] = s;
    }
  return out;
}

GrayImage quantize(const std::vector<double>& v, int w, int h, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sigma);
  GrayImage img(w, h);
  for (std::size_t i = 0; i < v.size(); ++i)
    img[i] = std::clamp(std::round(v[i] + (sigma > 0.0 ? noise(rng) : 0.0)), 0.0, 255.0);
  return img;
}

}  // namespace

GrayImage uniform_noise(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 255);
  GrayImage img(width, height);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = pick(rng);
  return img;
}

GrayImage natural_image(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), -1.0);
  const double rmax = 0.25 * std::min(width, height);
  const double rmin = 1.5;
  std::size_t unpainted = v.size();
  // Leaves fall front to back; each pixel keeps the first one that covers it.
  for (int leaf = 0; leaf < 200000 && unpainted > 0; ++leaf) {
    // Radius density ~ 1/r^3, the usual scale-invariant choice.
    const double r = 1.0 / std::sqrt(1.0 / (rmin * rmin) - u(rng) * (1.0 / (rmin * rmin) - 1.0 / (rmax * rmax)));
    const double cx = u(rng) * width, cy = u(rng) * height, gray = 255.0 * u(rng);
    const int x0 = std::max(0, static_cast<int>(cx - r)), x1 = std::min(width - 1, static_cast<int>(cx + r));
    const int y0 = std::max(0, static_cast<int>(cy - r)), y1 = std::min(height - 1, static_cast<int>(cy + r));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        auto& p = v[static_cast<std::size_t>(y * width + x)];
        if (p >= 0.0) continue;
        const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        if (dx * dx + dy * dy > r * r) continue;
        p = gray;
        --unpainted;
      }
  }
  for (auto& p : v)
    if (p < 0.0) p = 128.0;
  return quantize(gaussian_blur(v, width, height, 0.7), width, height, 2.0, rng);
}

Scene two_object_scene(int width, int height, std::uint64_t seed, double noise_sigma) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double bg = 40.0 + 175.0 * u(rng);
  const double side = std::min(width, height);
  Scene s;
  s.truth.width = width;
  s.truth.height = height;
  std::vector<double> v(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), bg);

  struct Placed { double cx, cy, r; };
  std::vector<Placed> placed;
  while (placed.size() < 2) {
    const double r = side * (0.12 + 0.1 * u(rng));
    const double cx = r + 2 + u(rng) * (width - 2 * r - 4);
    const double cy = r + 2 + u(rng) * (height - 2 * r - 4);
    bool clear = true;
    for (const auto& p : placed)
      if (std::hypot(p.cx - cx, p.cy - cy) < p.r + r + 4) clear = false;
    if (!clear) continue;
    placed.push_back({cx, cy, r});

    // Contrast of at least 50 gray levels against the background.
    double gray;
    do gray = 255.0 * u(rng);
    while (std::abs(gray - bg) < 50.0);
    const int sides = std::uniform_int_distribution<int>(2, 6)(rng);  // 2 means a disk
    const Polygon poly = regular_polygon(cx, cy, r, sides, 2.0 * std::numbers::pi * u(rng));
    std::vector<std::uint8_t> mask(v.size(), 0);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        const bool in = sides == 2 ? std::hypot(px - cx, py - cy) <= r : poly.contains(px, py);
        if (!in) continue;
        mask[static_cast<std::size_t>(y * width + x)] = 1;
        v[static_cast<std::size_t>(y * width + x)] = gray;
      }
    s.truth.objects.push_back(std::move(mask));
  }
  s.image = quantize(v, width, height, noise_sigma, rng);
  return s;
}

Scene polygon_scene(int width, int height, std::uint64_t seed, double noise_sigma,
                    double blur_sigma) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double side = std::min(width, height);
  Scene s;
  s.truth.width = width;
  s.truth.height = height;
  std::vector<double> v(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 60.0);
  const struct { double fx, fy; int sides; double gray; } shapes[] = {
      {0.22, 0.3, 3, 200.0}, {0.5, 0.68, 5, 150.0}, {0.78, 0.3, 4, 230.0}};
  for (const auto& sh : shapes) {
    const double r = side * (0.16 + 0.01 * u(rng));
    const Polygon poly = regular_polygon(sh.fx * width + 2 * u(rng), sh.fy * height + 2 * u(rng), r, sh.sides,
                                         -std::numbers::pi / 2 + (sh.sides == 4 ? std::numbers::pi / 4 : 0.0) + 0.1 * u(rng));
    std::vector<std::uint8_t> mask(v.size(), 0);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        if (!poly.contains(x + 0.5, y + 0.5)) continue;
        mask[static_cast<std::size_t>(y * width + x)] = 1;
        v[static_cast<std::size_t>(y * width + x)] = sh.gray;
      }
    s.truth.objects.push_back(std::move(mask));
  }
  s.image = quantize(gaussian_blur(v, width, height, blur_sigma), width, height, noise_sigma, rng);
  return s;
}

}  // namespace salient
