#include "salient/image.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "salient/binary_io.hpp"

namespace salient {

GrayImage::GrayImage(int width, int height, double fill)
    : GrayImage(width, height,
                std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                        static_cast<std::size_t>(std::max(height, 0)),
                                    fill)) {}

GrayImage::GrayImage(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width < 1 || height < 1) throw InputError("zero-dimension image");
  if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw InputError("pixel count does not match dimensions");
  for (double v : values_)
    if (!std::isfinite(v)) throw InputError("non-finite pixel value");
}

std::uint32_t LabelImage::region_count() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

namespace {

// Skips whitespace and '#' comments in a PNM header.
void skip_pnm_space(const std::string& data, std::size_t& pos) {
  while (pos < data.size()) {
    if (data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
}

long read_pnm_int(const std::string& data, std::size_t& pos) {
  skip_pnm_space(data, pos);
  std::size_t start = pos;
  while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
  if (start == pos) throw InputError("malformed PGM header");
  return std::stol(data.substr(start, pos - start));
}

GrayImage decode_pgm(const std::string& data) {
  std::size_t pos = 2;
  const long w = read_pnm_int(data, pos);
  const long h = read_pnm_int(data, pos);
  const long maxval = read_pnm_int(data, pos);
  if (w < 1 || h < 1) throw InputError("zero-dimension image");
  if (maxval < 1 || maxval > 65535) throw InputError("unsupported format: PGM maxval");
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
    throw InputError("malformed PGM header");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t bytes = maxval > 255 ? 2 : 1;
  if (data.size() - pos < n * bytes) throw InputError("truncated PGM data");
  std::vector<double> values(n);
  const auto* p = reinterpret_cast<const unsigned char*>(data.data() + pos);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = bytes == 2 ? static_cast<double>((p[2 * i] << 8) | p[2 * i + 1])
                           : static_cast<double>(p[i]);
  }
  GrayImage img(static_cast<int>(w), static_cast<int>(h), std::move(values));
  img.set_max_value(static_cast<int>(maxval));
  return img;
}

GrayImage decode_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw InputError("unsupported format: " + std::string(image.message));
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  const bool wide = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  if (color || alpha || wide) {
    png_image_free(&image);
    throw InputError("unsupported format: only 8-bit grayscale PNG is accepted");
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr))
    throw InputError("unreadable file: " + std::string(image.message));
  if (image.width == 0 || image.height == 0) throw InputError("zero-dimension image");
  std::vector<double> values(buffer.begin(), buffer.end());
  return GrayImage(static_cast<int>(image.width), static_cast<int>(image.height),
                   std::move(values));
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path, BorderPolicy border) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw InputError("unreadable file: " + path.string());
  char magic[8] = {};
  probe.read(magic, sizeof magic);
  probe.close();

  GrayImage img;
  if (magic[0] == 'P' && magic[1] == '5') {
    img = decode_pgm(detail::read_file(path));
  } else if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P' &&
             magic[2] == 'N' && magic[3] == 'G') {
    img = decode_png(path);
  } else {
    throw InputError("unsupported format: " + path.string());
  }
  return border == BorderPolicy::MedianFrame ? add_median_frame(img) : img;
}

double border_median(const GrayImage& img) {
  std::vector<double> border;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (x == 0 || y == 0 || x == img.width() - 1 || y == img.height() - 1)
        border.push_back(img(x, y));
    }
  }
  const std::size_t mid = (border.size() - 1) / 2;
  std::nth_element(border.begin(), border.begin() + static_cast<std::ptrdiff_t>(mid),
                   border.end());
  return border[mid];
}

GrayImage add_median_frame(const GrayImage& img) {
  const double fill = border_median(img);
  GrayImage out(img.width() + 2, img.height() + 2, fill);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out(x + 1, y + 1) = img(x, y);
  out.set_frame(img.frame() + 1);
  out.set_max_value(img.max_value());
  return out;
}

GrayImage crop_frame(const GrayImage& img) {
  const int f = img.frame();
  if (f == 0) return img;
  GrayImage out(img.width() - 2 * f, img.height() - 2 * f);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out(x, y) = img(x + f, y + f);
  out.set_max_value(img.max_value());
  return out;
}

LabelImage crop_frame(const LabelImage& labels, int frame) {
  if (frame == 0) return labels;
  const int w = labels.width - 2 * frame;
  const int h = labels.height - 2 * frame;
  if (w < 1 || h < 1) throw InputError("frame larger than the label image");
  std::vector<std::uint32_t> ids(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      ids[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] =
          labels(x + frame, y + frame);
  // Cropping can only split regions that leave and re-enter through the frame.
  return connected_labels(w, h, ids);
}

GradientField compute_gradient(const GrayImage& img) {
  GradientField grad{KhalimskyGrid(img.width(), img.height()), {}};
  const KhalimskyGrid& g = grad.grid;
  grad.values.assign(g.size(), 0.0);
  for (int ky = 1; ky < g.kheight() - 1; ++ky) {
    for (int kx = 1; kx < g.kwidth() - 1; ++kx) {
      if (KhalimskyGrid::kind(kx, ky) != FaceKind::Edge) continue;
      double a, b;
      if (kx % 2 == 0) {  // vertical edge between left and right pixels
        const int y = KhalimskyGrid::face_to_pixel(ky);
        a = img(kx / 2 - 1, y);
        b = img(kx / 2, y);
      } else {
        const int x = KhalimskyGrid::face_to_pixel(kx);
        a = img(x, ky / 2 - 1);
        b = img(x, ky / 2);
      }
      grad.values[g.index(kx, ky)] = std::abs(a - b);
    }
  }
  return grad;
}

namespace {

GradientField read_gradient_file(const std::filesystem::path& path) {
  const std::string data = detail::read_file(path);
  std::istringstream header(data.substr(0, data.find('\n')));
  std::string tag;
  long kw = 0, kh = 0;
  header >> tag >> kw >> kh;
  if (tag != "GRAD1F" || kw < 3 || kh < 3 || kw % 2 == 0 || kh % 2 == 0)
    throw InputError("malformed gradient header");
  const std::size_t start = data.find('\n') + 1;
  GradientField grad{KhalimskyGrid(static_cast<int>((kw - 1) / 2), static_cast<int>((kh - 1) / 2)),
                     {}};
  const KhalimskyGrid& g = grad.grid;
  grad.values.assign(g.size(), 0.0);
  if (data.size() - start != g.edge_count() * 8) throw InputError("size mismatch");
  std::size_t pos = start;
  for (int ky = 0; ky < g.kheight(); ++ky) {
    for (int kx = 0; kx < g.kwidth(); ++kx) {
      if (KhalimskyGrid::kind(kx, ky) != FaceKind::Edge) continue;
      const double v = detail::get_f64_le(data.data() + pos);
      pos += 8;
      if (!std::isfinite(v)) throw InputError("non-finite entries");
      if (v < 0.0) throw InputError("negative entries");
      grad.values[g.index(kx, ky)] = v;
    }
  }
  return grad;
}

}  // namespace

GradientField load_external_gradient(const std::filesystem::path& path,
                                     const KhalimskyGrid& grid) {
  GradientField raw = read_gradient_file(path);
  if (raw.grid == grid) return raw;
  // Field computed on the unframed image: embed it one pixel inwards.
  if (raw.grid.width + 2 == grid.width && raw.grid.height + 2 == grid.height) {
    GradientField grad{grid, std::vector<double>(grid.size(), 0.0)};
    for (int ky = 0; ky < raw.grid.kheight(); ++ky) {
      for (int kx = 0; kx < raw.grid.kwidth(); ++kx) {
        if (KhalimskyGrid::kind(kx, ky) != FaceKind::Edge) continue;
        if (raw.grid.is_outer_edge(kx, ky)) continue;
        grad.values[grid.index(kx + 2, ky + 2)] = raw.values[raw.grid.index(kx, ky)];
      }
    }
    return grad;
  }
  throw InputError("size mismatch");
}

void save_gradient(const std::filesystem::path& path, const GradientField& grad) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  const KhalimskyGrid& g = grad.grid;
  out << "GRAD1F " << g.kwidth() << ' ' << g.kheight() << '\n';
  char buf[8];
  for (int ky = 0; ky < g.kheight(); ++ky) {
    for (int kx = 0; kx < g.kwidth(); ++kx) {
      if (KhalimskyGrid::kind(kx, ky) != FaceKind::Edge) continue;
      detail::put_f64_le(buf, grad.values[g.index(kx, ky)]);
      out.write(buf, 8);
    }
  }
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  const int maxval = img.max_value();
  out << "P5\n" << img.width() << ' ' << img.height() << '\n' << maxval << '\n';
  for (std::size_t i = 0; i < img.size(); ++i) {
    const long v = std::lround(std::clamp(img[i], 0.0, static_cast<double>(maxval)));
    if (maxval > 255) out.put(static_cast<char>((v >> 8) & 0xff));
    out.put(static_cast<char>(v & 0xff));
  }
}

void write_pgm_labels(const std::filesystem::path& path, const LabelImage& labels) {
  if (labels.region_count() > 65536)
    throw InputError("too many regions for a 16-bit label PGM");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "P5\n" << labels.width << ' ' << labels.height << "\n65535\n";
  for (std::uint32_t v : labels.labels) {
    out.put(static_cast<char>((v >> 8) & 0xff));
    out.put(static_cast<char>(v & 0xff));
  }
}

namespace {

void write_png(const std::filesystem::path& path, int width, int height, png_uint_32 format,
               const void* data) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr))
    throw InputError("cannot write " + path.string() + ": " + image.message);
}

}  // namespace

void write_png_gray8(const std::filesystem::path& path, int width, int height,
                     std::span<const std::uint8_t> pixels) {
  write_png(path, width, height, PNG_FORMAT_GRAY, pixels.data());
}

void write_png_gray16(const std::filesystem::path& path, int width, int height,
                      std::span<const std::uint16_t> pixels) {
  write_png(path, width, height, PNG_FORMAT_LINEAR_Y, pixels.data());
}

void write_png_rgb(const std::filesystem::path& path, int width, int height,
                   std::span<const std::uint8_t> rgb) {
  write_png(path, width, height, PNG_FORMAT_RGB, rgb.data());
}

void save_image(const std::filesystem::path& path, const GrayImage& img) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext != ".png") {
    write_pgm(path, img);
    return;
  }
  const double maxval = img.max_value();
  if (img.max_value() <= 255) {
    std::vector<std::uint8_t> px(img.size());
    for (std::size_t i = 0; i < img.size(); ++i)
      px[i] = static_cast<std::uint8_t>(std::lround(std::clamp(img[i], 0.0, maxval)));
    write_png_gray8(path, img.width(), img.height(), px);
  } else {
    std::vector<std::uint16_t> px(img.size());
    for (std::size_t i = 0; i < img.size(); ++i)
      px[i] = static_cast<std::uint16_t>(std::lround(std::clamp(img[i], 0.0, maxval)));
    write_png_gray16(path, img.width(), img.height(), px);
  }
}

std::vector<std::uint8_t> load_mask(const std::filesystem::path& path, int& width,
                                    int& height) {
  const GrayImage img = load_image(path, BorderPolicy::None);
  width = img.width();
  height = img.height();
  std::vector<std::uint8_t> mask(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) mask[i] = img[i] != 0.0 ? 1 : 0;
  return mask;
}

LabelImage connected_labels(int width, int height, std::span<const std::uint32_t> ids) {
  LabelImage out{width, height, std::vector<std::uint32_t>(ids.size(), UINT32_MAX)};
  std::vector<std::size_t> stack;
  std::uint32_t next = 0;
  for (std::size_t start = 0; start < ids.size(); ++start) {
    if (out.labels[start] != UINT32_MAX) continue;
    out.labels[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(i % static_cast<std::size_t>(width));
      const int y = static_cast<int>(i / static_cast<std::size_t>(width));
      auto visit = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= width || ny >= height) return;
        const std::size_t j =
            static_cast<std::size_t>(ny) * static_cast<std::size_t>(width) + static_cast<std::size_t>(nx);
        if (out.labels[j] == UINT32_MAX && ids[j] == ids[i]) {
          out.labels[j] = next;
          stack.push_back(j);
        }
      };
      visit(x - 1, y);
      visit(x + 1, y);
      visit(x, y - 1);
      visit(x, y + 1);
    }
    ++next;
  }
  return out;
}

}  // namespace salient
