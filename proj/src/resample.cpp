#include "matkit/resample.hpp"

#include <cmath>

#include "matkit/geometry.hpp"

namespace matkit {

double sample_bilinear(const Image& img, double x, double y, int c) {
  auto clampi = [](double v, int hi) {
    if (v < 0) return 0.0;
    if (v > hi) return static_cast<double>(hi);
    return v;
  };
  x = clampi(x, img.width - 1);
  y = clampi(y, img.height - 1);
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  int x1 = x0 + 1 < img.width ? x0 + 1 : x0;
  int y1 = y0 + 1 < img.height ? y0 + 1 : y0;
  double fx = x - x0, fy = y - y0;
  double top = img.at(x0, y0, c) * (1 - fx) + img.at(x1, y0, c) * fx;
  double bot = img.at(x0, y1, c) * (1 - fx) + img.at(x1, y1, c) * fx;
  return top * (1 - fy) + bot * fy;
}

double sample_bilinear_wrap(const Image& img, double x, double y, int c) {
  auto wrap = [](int v, int n) {
    int m = v % n;
    return m < 0 ? m + n : m;
  };
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  double fx = x - x0, fy = y - y0;
  int xa = wrap(x0, img.width), xb = wrap(x0 + 1, img.width);
  int ya = wrap(y0, img.height), yb = wrap(y0 + 1, img.height);
  double top = img.at(xa, ya, c) * (1 - fx) + img.at(xb, ya, c) * fx;
  double bot = img.at(xa, yb, c) * (1 - fx) + img.at(xb, yb, c) * fx;
  return top * (1 - fy) + bot * fy;
}

Image resize_bilinear(const Image& img, int target_w, int target_h) {
  if (target_w < 1 || target_h < 1)
    throw ValidationError("resize target dims must be >= 1");
  if (target_w == img.width && target_h == img.height) return img;

  Image out = Image::create(target_w, target_h, img.channels, 0.0, img.color_space);
  // Corner-aligned: dst 0 -> src 0, dst last -> src last. A single-sample
  // target dimension reads the source center.
  const double sx = target_w > 1
                        ? static_cast<double>(img.width - 1) / (target_w - 1)
                        : 0.0;
  const double sy = target_h > 1
                        ? static_cast<double>(img.height - 1) / (target_h - 1)
                        : 0.0;
  const double ox = target_w > 1 ? 0.0 : (img.width - 1) * 0.5;
  const double oy = target_h > 1 ? 0.0 : (img.height - 1) * 0.5;
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < target_h; ++y)
      for (int x = 0; x < target_w; ++x)
        out.at(x, y, c) = sample_bilinear(img, ox + x * sx, oy + y * sy, c);
  return out;
}

Image downsample_box(const Image& img, int factor) {
  if (factor < 1) throw ValidationError("downsample factor must be >= 1");
  if (img.width % factor != 0 || img.height % factor != 0)
    throw ValidationError("image dims must be divisible by the pooling factor");
  if (factor == 1) return img;

  const int w = img.width / factor, h = img.height / factor;
  Image out = Image::create(w, h, img.channels, 0.0, img.color_space);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx)
            s += img.at(x * factor + dx, y * factor + dy, c);
        out.at(x, y, c) = s * inv;
      }
  return out;
}

Image upsample_nearest(const Image& img, int factor) {
  if (factor < 1) throw ValidationError("upsample factor must be >= 1");
  if (factor == 1) return img;
  Image out = Image::create(img.width * factor, img.height * factor, img.channels,
                            0.0, img.color_space);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x)
        out.at(x, y, c) = img.at(x / factor, y / factor, c);
  return out;
}

}  // namespace matkit
