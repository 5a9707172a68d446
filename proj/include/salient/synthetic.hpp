#pragma once

#include <cstdint>
#include <vector>

#include "salient/image.hpp"

namespace salient {

/// Object masks on the pixel domain of an image, one per object.
struct GroundTruth {
  int width = 0;
  int height = 0;
  std::vector<std::vector<std::uint8_t>> objects;

  void validate() const;
};

struct Scene {
  GrayImage image;
  GroundTruth truth;
};

/// Independent uniform 8-bit values.
GrayImage uniform_noise(int width, int height, std::uint64_t seed);

/// Dead-leaves composition of random disks, lightly blurred and noisy:
/// flat regions with a heavy-tailed size distribution.
GrayImage natural_image(int width, int height, std::uint64_t seed);

/// Two non-overlapping objects (disks or convex polygons) on a flat
/// background with additive Gaussian noise.
Scene two_object_scene(int width, int height, std::uint64_t seed, double noise_sigma);

/// A triangle, a pentagon and a square, blurred and noisy.
Scene polygon_scene(int width, int height, std::uint64_t seed, double noise_sigma,
                    double blur_sigma);

}  // namespace salient
