#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace salient {

/// Bad user input: unreadable or malformed files, invalid parameters.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A structural invariant of the pipeline was violated.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Scalar image stored row-major as 64-bit reals.
///
/// `frame()` is the width of a synthetic border added by `add_median_frame`
/// (0 when the image is used as-is). `max_value()` records the source bit
/// depth so that rendered outputs can be written back at the same depth.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double operator()(int x, int y) const { return values_[index(x, y)]; }
  double& operator()(int x, int y) { return values_[index(x, y)]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  int frame() const { return frame_; }
  void set_frame(int frame) { frame_ = frame; }
  int max_value() const { return max_value_; }
  void set_max_value(int max_value) { max_value_ = max_value; }

  /// True when pixel (x, y) lies in the synthetic frame.
  bool is_frame(int x, int y) const {
    return x < frame_ || y < frame_ || x >= width_ - frame_ ||
           y >= height_ - frame_;
  }

  friend bool operator==(const GrayImage& a, const GrayImage& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ &&
           a.values_ == b.values_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int frame_ = 0;
  int max_value_ = 255;
  std::vector<double> values_;
};

enum class FaceKind : std::uint8_t { Point = 0, Edge = 1, Pixel = 2 };

/// Khalimsky cell complex over a width x height pixel domain.
///
/// Faces live on a (2w+1) x (2h+1) grid. Pixel (i, j) is the 2-face
/// (2i+1, 2j+1); 1-faces have exactly one odd coordinate; 0-faces have none.
struct KhalimskyGrid {
  int width = 0;
  int height = 0;

  KhalimskyGrid() = default;
  KhalimskyGrid(int w, int h) : width(w), height(h) {}

  int kwidth() const { return 2 * width + 1; }
  int kheight() const { return 2 * height + 1; }
  std::size_t size() const {
    return static_cast<std::size_t>(kwidth()) * static_cast<std::size_t>(kheight());
  }
  std::size_t index(int kx, int ky) const {
    return static_cast<std::size_t>(ky) * static_cast<std::size_t>(kwidth()) +
           static_cast<std::size_t>(kx);
  }

  static FaceKind kind(int kx, int ky) {
    return static_cast<FaceKind>((kx & 1) + (ky & 1));
  }

  static int pixel_to_face(int p) { return 2 * p + 1; }
  static int face_to_pixel(int k) { return (k - 1) / 2; }

  /// True for 1-faces on the outer ring, which touch a single pixel.
  bool is_outer_edge(int kx, int ky) const {
    return kind(kx, ky) == FaceKind::Edge &&
           (kx == 0 || ky == 0 || kx == kwidth() - 1 || ky == kheight() - 1);
  }

  /// Number of 1-faces in the grid.
  std::size_t edge_count() const {
    const auto w = static_cast<std::size_t>(width);
    const auto h = static_cast<std::size_t>(height);
    return (w + 1) * h + w * (h + 1);
  }

  friend bool operator==(const KhalimskyGrid&, const KhalimskyGrid&) = default;
};

/// Non-negative scalar per 1-face; other faces are stored as 0.
struct GradientField {
  KhalimskyGrid grid;
  std::vector<double> values;

  double at(int kx, int ky) const { return values[grid.index(kx, ky)]; }
};

/// One label per pixel.
struct LabelImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> labels;

  std::uint32_t operator()(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
  std::uint32_t region_count() const;
};

enum class BorderPolicy { MedianFrame, None };

/// Reads a binary PGM (P5, maxval <= 65535) or an 8-bit grayscale PNG.
GrayImage load_image(const std::filesystem::path& path,
                     BorderPolicy border = BorderPolicy::MedianFrame);

/// Lower median of the border pixels (sorted index floor((n-1)/2)).
double border_median(const GrayImage& img);

/// Surrounds the image with a one-pixel frame valued at `border_median`.
GrayImage add_median_frame(const GrayImage& img);

/// Removes the synthetic frame, if any.
GrayImage crop_frame(const GrayImage& img);
LabelImage crop_frame(const LabelImage& labels, int frame);

/// |f(p) - f(q)| on interior 1-faces; 0 on the outer ring.
GradientField compute_gradient(const GrayImage& img);

/// Reads a `GRAD1F` field. A field sized for the unframed grid is accepted
/// when `grid` carries a one-pixel frame; frame 1-faces are then set to 0.
GradientField load_external_gradient(const std::filesystem::path& path,
                                     const KhalimskyGrid& grid);
void save_gradient(const std::filesystem::path& path, const GradientField& grad);

void write_pgm(const std::filesystem::path& path, const GrayImage& img);
void write_pgm_labels(const std::filesystem::path& path, const LabelImage& labels);
void write_png_gray8(const std::filesystem::path& path, int width, int height,
                     std::span<const std::uint8_t> pixels);
void write_png_gray16(const std::filesystem::path& path, int width, int height,
                      std::span<const std::uint16_t> pixels);
void write_png_rgb(const std::filesystem::path& path, int width, int height,
                   std::span<const std::uint8_t> rgb);

/// Writes `img` rounded and clamped to [0, max_value]; the extension picks
/// PNG (8 or 16 bit) or PGM.
void save_image(const std::filesystem::path& path, const GrayImage& img);

/// Reads a binary mask; any nonzero pixel is set.
std::vector<std::uint8_t> load_mask(const std::filesystem::path& path, int& width,
                                    int& height);

/// 4-connected labelling of pixels that share the same value of `ids`,
/// numbered in raster order of first appearance.
LabelImage connected_labels(int width, int height, std::span<const std::uint32_t> ids);

}  // namespace salient
