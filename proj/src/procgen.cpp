#include "matkit/procgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace matkit {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Sum of plane waves with integer frequencies. The phase index is reduced
// modulo size in integer arithmetic, so wrapping around the edge reproduces
// samples bit for bit: the texture tiles exactly.
void fill_waves(Image& img, int c, Rng& rng, double lo, double hi) {
  const int size = img.width;
  const int waves = 3 + static_cast<int>(rng.below(3));
  std::vector<int> fx(waves), fy(waves);
  std::vector<double> amp(waves), phase(waves);
  for (int k = 0; k < waves; ++k) {
    do {
      fx[k] = static_cast<int>(rng.below(7)) - 3;
      fy[k] = static_cast<int>(rng.below(7)) - 3;
    } while (fx[k] == 0 && fy[k] == 0);
    amp[k] = rng.uniform(0.3, 1.0);
    phase[k] = rng.uniform(0.0, kTwoPi);
  }

  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double v = 0;
      for (int k = 0; k < waves; ++k) {
        long long m = (static_cast<long long>(fx[k]) * x +
                       static_cast<long long>(fy[k]) * y) %
                      size;
        if (m < 0) m += size;
        v += amp[k] * std::sin(kTwoPi * m / size + phase[k]);
      }
      img.at(x, y, c) = v;
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  const double range = vmax - vmin;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double t = range > 1e-12 ? (img.at(x, y, c) - vmin) / range : 0.5;
      img.at(x, y, c) = lo + (hi - lo) * t;
    }
}

}  // namespace

Image make_periodic_texture(int size, int channels, double lo, double hi,
                            Rng& rng) {
  Image img = Image::create(size, size, channels);
  for (int c = 0; c < channels; ++c) fill_waves(img, c, rng, lo, hi);
  return img;
}

MaterialSet make_procedural_material(int size, Rng& rng) {
  MaterialSet mat;
  mat.albedo = make_periodic_texture(size, 3, 0.1, 0.9, rng);
  mat.roughness = Image::create(size, size, 1);
  fill_waves(mat.roughness, 0, rng, 0.2, 0.8);
  mat.height = Image::create(size, size, 1);
  fill_waves(mat.height, 0, rng, 0.0, 1.0);

  // Normals from the height field: wrapped central differences, so the
  // normal map tiles like everything else.
  mat.normal.encoded = Image::create(size, size, 3);
  const double slope = 1.5;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const int xm = (x + size - 1) % size, xp = (x + 1) % size;
      const int ym = (y + size - 1) % size, yp = (y + 1) % size;
      const double dhx = 0.5 * (mat.height.at(xp, y) - mat.height.at(xm, y));
      const double dhy = 0.5 * (mat.height.at(x, yp) - mat.height.at(x, ym));
      const Vec3 n = Vec3{-slope * dhx, -slope * dhy, 1.0}.normalize();
      const auto e = encode_normal(n);
      mat.normal.encoded.at(x, y, 0) = e[0];
      mat.normal.encoded.at(x, y, 1) = e[1];
      mat.normal.encoded.at(x, y, 2) = e[2];
    }
  return mat;
}

}  // namespace matkit
