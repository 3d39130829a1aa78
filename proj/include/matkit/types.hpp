#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "matkit/geometry.hpp"

namespace matkit {

enum class ColorSpace { Linear, Display };

// Planar floating-point image. Samples live in [0,1] unless an operation
// documents otherwise; data is stored plane by plane so per-channel kernels
// see contiguous memory.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  ColorSpace color_space = ColorSpace::Linear;
  std::vector<double> data;

  static Image create(int w, int h, int ch, double fill = 0.0,
                      ColorSpace cs = ColorSpace::Linear);

  size_t plane_size() const { return static_cast<size_t>(width) * height; }
  double* plane(int c) { return data.data() + plane_size() * c; }
  const double* plane(int c) const { return data.data() + plane_size() * c; }

  double& at(int x, int y, int c = 0) {
    return data[plane_size() * c + static_cast<size_t>(y) * width + x];
  }
  double at(int x, int y, int c = 0) const {
    return data[plane_size() * c + static_cast<size_t>(y) * width + x];
  }

  // Throws ValidationError unless dimensions, channel count (1 or 3),
  // finiteness and the [0,1] range all hold.
  void validate() const;
};

// Binary region-of-interest mask. Any nonzero entry is inside.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;

  static Mask create(int w, int h, uint8_t fill = 0);

  uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

  size_t count_set() const;
  void validate() const;
};

// Per-pixel scalar depth normalized to [0,1].
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  static DepthMap create(int w, int h, double fill = 0.0);

  double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

  void validate() const;
};

// Tangent-space normal map, +Y up, +Z out, stored in the usual
// n = 2 * pixel - 1 encoding.
struct NormalMap {
  Image encoded;  // 3-channel

  void validate() const;
};

// Decodes one encoded pixel to a unit vector (renormalized). Throws
// ValidationError on a zero-length decode.
Vec3 decode_normal(const std::array<double, 3>& pixel);

// Encodes a unit vector (|v| = 1 within 1e-3) back to [0,1] samples.
std::array<double, 3> encode_normal(const Vec3& v);

// Canonical material: albedo, normal, roughness and height maps at one
// square resolution.
struct MaterialSet {
  Image albedo;     // 3-channel
  NormalMap normal;
  Image roughness;  // 1-channel
  Image height;     // 1-channel

  int resolution() const { return albedo.width; }
  void validate() const;
};

}  // namespace matkit
