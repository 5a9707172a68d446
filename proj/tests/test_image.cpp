#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "salient/binary_io.hpp"
#include "salient/image.hpp"
#include "test_support.hpp"

using namespace salient;
using salient::testing::from_rows;
using salient::testing::random_image;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "salient_image_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

std::string gradient_file(int w, int h, double fill) {
  const KhalimskyGrid g(w, h);
  std::string s = "GRAD1F " + std::to_string(g.kwidth()) + " " + std::to_string(g.kheight()) + "\n";
  char buf[8];
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    detail::put_f64_le(buf, fill);
    s.append(buf, 8);
  }
  return s;
}

}  // namespace

TEST_CASE("median frame of a single pixel") {
  GrayImage one(1, 1, 7.0);
  const GrayImage framed = add_median_frame(one);
  REQUIRE(framed.width() == 3);
  REQUIRE(framed.height() == 3);
  CHECK(framed.frame() == 1);
  for (std::size_t i = 0; i < framed.size(); ++i) CHECK(framed[i] == 7.0);
  CHECK(crop_frame(framed) == one);
}

TEST_CASE("median frame takes the lower median of the border") {
  const GrayImage img = from_rows({{0, 0}, {255, 255}});
  CHECK(border_median(img) == 0.0);
  const GrayImage framed = add_median_frame(img);
  CHECK(framed(0, 0) == 0.0);
  CHECK(framed(3, 3) == 0.0);
  CHECK(framed(1, 2) == 255.0);
  CHECK(framed.is_frame(0, 1));
  CHECK_FALSE(framed.is_frame(1, 1));
}

TEST_CASE("gradient is the absolute difference across interior 1-faces") {
  const GrayImage img = from_rows({{10, 30}, {15, 15}});
  const GradientField g = compute_gradient(img);
  CHECK(g.grid.kwidth() == 5);
  CHECK(g.at(2, 1) == 20.0);  // between (0,0) and (1,0)
  CHECK(g.at(1, 2) == 5.0);   // between (0,0) and (0,1)
  CHECK(g.at(3, 2) == 15.0);
  CHECK(g.at(2, 3) == 0.0);
  CHECK(g.at(0, 1) == 0.0);   // outer ring
  CHECK(g.at(1, 0) == 0.0);
  CHECK(g.at(1, 1) == 0.0);   // pixel
  CHECK(g.at(2, 2) == 0.0);   // point
}

TEST_CASE("gradient commutes with shifts and scales by |a|") {
  std::mt19937_64 rng(3);
  for (int it = 0; it < 20; ++it) {
    const GrayImage img = random_image(rng, 7, 5, 30);
    GrayImage moved = img;
    for (std::size_t i = 0; i < moved.size(); ++i) moved[i] = -3.0 * img[i] + 11.0;
    const GradientField a = compute_gradient(img);
    const GradientField b = compute_gradient(moved);
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(b.values[i] == doctest::Approx(3.0 * a.values[i]));
  }
}

TEST_CASE("gradient file round trip") {
  std::mt19937_64 rng(5);
  const GrayImage img = random_image(rng, 6, 4, 200);
  const GradientField g = compute_gradient(img);
  const auto path = scratch("round.grad");
  save_gradient(path, g);
  const GradientField back = load_external_gradient(path, g.grid);
  CHECK(back.grid == g.grid);
  CHECK(back.values == g.values);
}

TEST_CASE("unframed gradient is embedded in a framed grid") {
  std::mt19937_64 rng(6);
  const GrayImage raw = random_image(rng, 5, 3, 100);
  const GradientField g = compute_gradient(raw);
  const auto path = scratch("unframed.grad");
  save_gradient(path, g);
  const KhalimskyGrid framed(7, 5);
  const GradientField back = load_external_gradient(path, framed);
  CHECK(back.grid == framed);
  for (int ky = 0; ky < framed.kheight(); ++ky)
    for (int kx = 0; kx < framed.kwidth(); ++kx) {
      const bool inside = kx >= 2 && ky >= 2 && kx <= framed.kwidth() - 3 && ky <= framed.kheight() - 3;
      const double expect = inside ? g.at(kx - 2, ky - 2) : 0.0;
      CHECK(back.at(kx, ky) == expect);
    }
}

TEST_CASE("gradient file errors") {
  const KhalimskyGrid grid(3, 2);
  CHECK_THROWS_WITH_AS(load_external_gradient(scratch("missing.grad"), grid),
                       doctest::Contains("unreadable"), InputError);

  const auto neg = scratch("neg.grad");
  write_bytes(neg, gradient_file(3, 2, -1.0));
  CHECK_THROWS_WITH_AS(load_external_gradient(neg, grid), "negative entries", InputError);

  const auto other = scratch("other.grad");
  write_bytes(other, gradient_file(4, 4, 1.0));
  CHECK_THROWS_WITH_AS(load_external_gradient(other, grid), "size mismatch", InputError);

  const auto cut = scratch("cut.grad");
  write_bytes(cut, gradient_file(3, 2, 1.0).substr(0, 40));
  CHECK_THROWS_WITH_AS(load_external_gradient(cut, grid), "size mismatch", InputError);

  const auto junk = scratch("junk.grad");
  write_bytes(junk, "GRADIENT 7 5\n");
  CHECK_THROWS_AS(load_external_gradient(junk, grid), InputError);
}

TEST_CASE("image loading errors") {
  CHECK_THROWS_WITH_AS(load_image(scratch("nope.pgm")), doctest::Contains("unreadable"), InputError);
  const auto bmp = scratch("fake.bmp");
  write_bytes(bmp, "BM this is not an image");
  CHECK_THROWS_WITH_AS(load_image(bmp), doctest::Contains("unsupported format"), InputError);
  const auto zero = scratch("zero.pgm");
  write_bytes(zero, "P5\n0 4\n255\n");
  CHECK_THROWS_AS(load_image(zero), InputError);
  const auto shortp = scratch("short.pgm");
  write_bytes(shortp, "P5\n4 4\n255\nabc");
  CHECK_THROWS_AS(load_image(shortp), InputError);
}

TEST_CASE("PGM and PNG round trips") {
  std::mt19937_64 rng(8);
  const GrayImage img = random_image(rng, 9, 6, 256);

  const auto pgm = scratch("rt.pgm");
  write_pgm(pgm, img);
  CHECK(load_image(pgm, BorderPolicy::None) == img);

  const auto png = scratch("rt.png");
  save_image(png, img);
  CHECK(load_image(png, BorderPolicy::None) == img);

  const GrayImage framed = load_image(png);
  CHECK(framed.frame() == 1);
  CHECK(framed.width() == 11);
  CHECK(crop_frame(framed) == img);

  GrayImage deep(3, 2, std::vector<double>{0, 1000, 65535, 7, 300, 40000});
  deep.set_max_value(65535);
  const auto pgm16 = scratch("rt16.pgm");
  write_pgm(pgm16, deep);
  const GrayImage back = load_image(pgm16, BorderPolicy::None);
  CHECK(back == deep);
  CHECK(back.max_value() == 65535);
}

TEST_CASE("masks and connected labels") {
  GrayImage m = from_rows({{0, 255, 0}, {0, 255, 255}});
  const auto path = scratch("mask.pgm");
  write_pgm(path, m);
  int w = 0;
  int h = 0;
  const auto mask = load_mask(path, w, h);
  CHECK(w == 3);
  CHECK(h == 2);
  CHECK(mask == std::vector<std::uint8_t>{0, 1, 0, 0, 1, 1});

  const std::vector<std::uint32_t> ids{5, 5, 9, 9, 5, 9, 5, 9, 9};
  const LabelImage lab = connected_labels(3, 3, ids);
  CHECK(lab.region_count() == 4);
  CHECK(lab(0, 0) == 0);
  CHECK(lab(2, 0) == 1);
  CHECK(lab(1, 1) == 0);
  CHECK(lab(0, 1) == 2);
  CHECK(lab(0, 2) == 3);
  CHECK(lab(1, 2) == 1);
}
