#include "matkit/align.hpp"

#include <cmath>

#include "matkit/geometry.hpp"
#include "matkit/resample.hpp"

namespace matkit {

namespace {

constexpr double kHalfPi = 1.5707963267948966192313216916398;

// Quarter-turn count when alpha sits within 1e-9 of k*pi/2, else -1.
int quarter_turns(double alpha) {
  double k = std::round(alpha / kHalfPi);
  if (std::abs(alpha - k * kHalfPi) >= 1e-9) return -1;
  long long ki = static_cast<long long>(k) % 4;
  return static_cast<int>(ki < 0 ? ki + 4 : ki);
}

// Source index for output (x, y) under an exact k-quarter-turn, square side n.
void permute_index(int k, int n, int x, int y, int& qx, int& qy) {
  switch (k) {
    case 1: qx = y; qy = n - 1 - x; break;
    case 2: qx = n - 1 - x; qy = n - 1 - y; break;
    case 3: qx = n - 1 - y; qy = x; break;
    default: qx = x; qy = y; break;
  }
}

int wrap(long long v, int n) {
  long long m = v % n;
  return static_cast<int>(m < 0 ? m + n : m);
}

// General path: output(p) = input(R(-alpha) (p - c) + c), periodic extension.
Image rotate_general(const Image& img, double alpha, Sampling sampling) {
  Image out = Image::create(img.width, img.height, img.channels, 0.0, img.color_space);
  const double cx = (img.width - 1) * 0.5;
  const double cy = (img.height - 1) * 0.5;
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double qx = ca * dx + sa * dy + cx;   // R(-alpha)
      const double qy = -sa * dx + ca * dy + cy;
      for (int c = 0; c < img.channels; ++c) {
        double v;
        if (sampling == Sampling::Nearest)
          v = img.at(wrap(std::llround(qx), img.width),
                     wrap(std::llround(qy), img.height), c);
        else
          v = sample_bilinear_wrap(img, qx, qy, c);
        out.at(x, y, c) = v;
      }
    }
  }
  return out;
}

}  // namespace

Image rotate_image(const Image& img, double alpha, Sampling sampling) {
  const int k = quarter_turns(alpha);
  if (k == 0) return img;
  if (k > 0 && img.width == img.height) {
    Image out = Image::create(img.width, img.height, img.channels, 0.0,
                              img.color_space);
    for (int c = 0; c < img.channels; ++c)
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
          int qx, qy;
          permute_index(k, img.width, x, y, qx, qy);
          out.at(x, y, c) = img.at(qx, qy, c);
        }
    return out;
  }
  return rotate_general(img, alpha, sampling);
}

MaterialSet rotate_material_set(const MaterialSet& mat, double alpha,
                                Sampling sampling) {
  MaterialSet out;
  out.albedo = rotate_image(mat.albedo, alpha, sampling);
  out.roughness = rotate_image(mat.roughness, alpha, sampling);
  out.height = rotate_image(mat.height, alpha, sampling);

  const Image& enc = mat.normal.encoded;
  const int k = quarter_turns(alpha);
  if (k >= 0 && enc.width == enc.height) {
    // Permute pixels, then remap the encoded (x, y) channels with the exact
    // quarter-turn affine: rotating n=(nx,ny) by k*pi/2 is linear in the
    // encoding e = (n+1)/2.
    Image rot = Image::create(enc.width, enc.height, 3, 0.0, enc.color_space);
    for (int y = 0; y < enc.height; ++y)
      for (int x = 0; x < enc.width; ++x) {
        int qx, qy;
        permute_index(k, enc.width, x, y, qx, qy);
        const double ex = enc.at(qx, qy, 0);
        const double ey = enc.at(qx, qy, 1);
        double nx, ny;
        switch (k) {
          case 1: nx = 1.0 - ey; ny = ex; break;
          case 2: nx = 1.0 - ex; ny = 1.0 - ey; break;
          case 3: nx = ey; ny = 1.0 - ex; break;
          default: nx = ex; ny = ey; break;
        }
        rot.at(x, y, 0) = nx;
        rot.at(x, y, 1) = ny;
        rot.at(x, y, 2) = enc.at(qx, qy, 2);
      }
    out.normal.encoded = rot;
    return out;
  }

  Image rot = rotate_general(enc, alpha, sampling);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  for (int y = 0; y < rot.height; ++y)
    for (int x = 0; x < rot.width; ++x) {
      Vec3 n = decode_normal({rot.at(x, y, 0), rot.at(x, y, 1), rot.at(x, y, 2)});
      Vec3 r{ca * n.x - sa * n.y, sa * n.x + ca * n.y, n.z};
      auto e = encode_normal(r);
      rot.at(x, y, 0) = e[0];
      rot.at(x, y, 1) = e[1];
      rot.at(x, y, 2) = e[2];
    }
  out.normal.encoded = rot;
  return out;
}

}  // namespace matkit
