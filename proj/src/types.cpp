#include "matkit/types.hpp"

#include <cmath>
#include <string>

namespace matkit {

Image Image::create(int w, int h, int ch, double fill, ColorSpace cs) {
  if (w < 1 || h < 1 || (ch != 1 && ch != 3))
    throw ValidationError("image dims must be >= 1 with 1 or 3 channels");
  Image img;
  img.width = w;
  img.height = h;
  img.channels = ch;
  img.color_space = cs;
  img.data.assign(static_cast<size_t>(w) * h * ch, fill);
  return img;
}

void Image::validate() const {
  if (width < 1 || height < 1)
    throw ValidationError("image dims must be >= 1");
  if (channels != 1 && channels != 3)
    throw ValidationError("image must have 1 or 3 channels");
  if (data.size() != static_cast<size_t>(width) * height * channels)
    throw ValidationError("image data length mismatch");
  for (double v : data) {
    if (!std::isfinite(v))
      throw ValidationError("image contains non-finite samples");
    if (v < 0.0 || v > 1.0)
      throw ValidationError("image sample outside [0,1]: " + std::to_string(v));
  }
}

Mask Mask::create(int w, int h, uint8_t fill) {
  if (w < 1 || h < 1) throw ValidationError("mask dims must be >= 1");
  Mask m;
  m.width = w;
  m.height = h;
  m.data.assign(static_cast<size_t>(w) * h, fill);
  return m;
}

size_t Mask::count_set() const {
  size_t n = 0;
  for (uint8_t v : data) n += v != 0;
  return n;
}

void Mask::validate() const {
  if (width < 1 || height < 1) throw ValidationError("mask dims must be >= 1");
  if (data.size() != static_cast<size_t>(width) * height)
    throw ValidationError("mask data length mismatch");
}

DepthMap DepthMap::create(int w, int h, double fill) {
  if (w < 1 || h < 1) throw ValidationError("depth dims must be >= 1");
  DepthMap d;
  d.width = w;
  d.height = h;
  d.data.assign(static_cast<size_t>(w) * h, fill);
  return d;
}

void DepthMap::validate() const {
  if (width < 1 || height < 1) throw ValidationError("depth dims must be >= 1");
  if (data.size() != static_cast<size_t>(width) * height)
    throw ValidationError("depth data length mismatch");
  for (double v : data) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw ValidationError("depth sample outside [0,1]");
  }
}

void NormalMap::validate() const {
  encoded.validate();
  if (encoded.channels != 3)
    throw ValidationError("normal map must have 3 channels");
  for (int y = 0; y < encoded.height; ++y) {
    for (int x = 0; x < encoded.width; ++x) {
      Vec3 n = decode_normal({encoded.at(x, y, 0), encoded.at(x, y, 1),
                              encoded.at(x, y, 2)});
      if (n.z < -1e-6)
        throw ValidationError("tangent-space normal with negative z");
    }
  }
}

Vec3 decode_normal(const std::array<double, 3>& pixel) {
  Vec3 v{2.0 * pixel[0] - 1.0, 2.0 * pixel[1] - 1.0, 2.0 * pixel[2] - 1.0};
  double len = v.norm();
  if (len < 1e-9) throw ValidationError("normal decodes to zero-length vector");
  return v * (1.0 / len);
}

std::array<double, 3> encode_normal(const Vec3& v) {
  double len = v.norm();
  if (std::abs(len - 1.0) > 1e-3)
    throw ValidationError("encode_normal expects a unit vector");
  Vec3 u = v * (1.0 / len);
  auto clamp01 = [](double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); };
  return {clamp01(0.5 * (u.x + 1.0)), clamp01(0.5 * (u.y + 1.0)),
          clamp01(0.5 * (u.z + 1.0))};
}

void MaterialSet::validate() const {
  albedo.validate();
  normal.validate();
  roughness.validate();
  height.validate();
  if (albedo.channels != 3) throw ValidationError("albedo must have 3 channels");
  if (roughness.channels != 1 || height.channels != 1)
    throw ValidationError("roughness and height must be single-channel");
  int r = albedo.width;
  if (albedo.height != r || normal.encoded.width != r || normal.encoded.height != r ||
      roughness.width != r || roughness.height != r || height.width != r ||
      height.height != r)
    throw ValidationError("material maps must share one square resolution");
}

}  // namespace matkit
