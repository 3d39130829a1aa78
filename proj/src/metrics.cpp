#include "matkit/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "matkit/align.hpp"
#include "matkit/geometry.hpp"
#include "matkit/resample.hpp"
#include "matkit/simd_kernels.hpp"

namespace matkit {

namespace {

constexpr int kWindow = 11;
constexpr int kHalf = kWindow / 2;
constexpr double kC1 = 0.01 * 0.01;  // (0.01 L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;

const std::array<double, kWindow>& gaussian_window() {
  static const std::array<double, kWindow> g = [] {
    std::array<double, kWindow> w{};
    const double sigma = 1.5;
    double sum = 0;
    for (int i = 0; i < kWindow; ++i) {
      const double d = i - kHalf;
      w[i] = std::exp(-d * d / (2 * sigma * sigma));
      sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
  }();
  return g;
}

// Separable Gaussian filter, valid placements only: output is
// (w - 10) x (h - 10).
std::vector<double> gauss_valid(const std::vector<double>& src, int w, int h) {
  const auto& g = gaussian_window();
  const int ow = w - 2 * kHalf, oh = h - 2 * kHalf;
  std::vector<double> tmp(static_cast<size_t>(ow) * h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int k = 0; k < kWindow; ++k) s += g[k] * src[static_cast<size_t>(y) * w + x + k];
      tmp[static_cast<size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<size_t>(ow) * oh, 0.0);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int k = 0; k < kWindow; ++k) s += g[k] * tmp[static_cast<size_t>(y + k) * ow + x];
      out[static_cast<size_t>(y) * ow + x] = s;
    }
  return out;
}

// Per-window SSIM values for one channel plane.
std::vector<double> ssim_map_channel(const double* a, const double* b, int w, int h) {
  const size_t n = static_cast<size_t>(w) * h;
  std::vector<double> aa(n), bb(n), ab(n);
  const auto& K = simd::kernels();
  K.mul(a, a, aa.data(), n);
  K.mul(b, b, bb.data(), n);
  K.mul(a, b, ab.data(), n);

  std::vector<double> va(a, a + n), vb(b, b + n);
  const std::vector<double> mu_a = gauss_valid(va, w, h);
  const std::vector<double> mu_b = gauss_valid(vb, w, h);
  const std::vector<double> m_aa = gauss_valid(aa, w, h);
  const std::vector<double> m_bb = gauss_valid(bb, w, h);
  const std::vector<double> m_ab = gauss_valid(ab, w, h);

  std::vector<double> out(mu_a.size());
  for (size_t i = 0; i < out.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double sa = m_aa[i] - ma * ma;
    const double sb = m_bb[i] - mb * mb;
    const double cov = m_ab[i] - ma * mb;
    out[i] = ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
             ((ma * ma + mb * mb + kC1) * (sa + sb + kC2));
  }
  return out;
}

void check_pair(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw ValidationError("metric inputs must share dims and channels");
}

double ssim_with_optional_mask(const Image& a, const Image& b, const Mask* mask) {
  check_pair(a, b);
  if (a.width < kWindow || a.height < kWindow)
    throw ValidationError("images smaller than the SSIM window");

  std::vector<uint8_t> keep;
  const int ow = a.width - 2 * kHalf, oh = a.height - 2 * kHalf;
  if (mask) {
    if (mask->width != a.width || mask->height != a.height)
      throw ValidationError("mask dims differ from the images");
    // A window counts only when it lies fully inside the mask.
    keep.assign(static_cast<size_t>(ow) * oh, 1);
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        bool inside = true;
        for (int dy = 0; dy < kWindow && inside; ++dy)
          for (int dx = 0; dx < kWindow; ++dx)
            if (!mask->at(x + dx, y + dy)) {
              inside = false;
              break;
            }
        keep[static_cast<size_t>(y) * ow + x] = inside;
      }
  }

  double total = 0;
  for (int c = 0; c < a.channels; ++c) {
    const std::vector<double> map = ssim_map_channel(a.plane(c), b.plane(c),
                                                     a.width, a.height);
    double s = 0;
    size_t cnt = 0;
    for (size_t i = 0; i < map.size(); ++i) {
      if (mask && !keep[i]) continue;
      s += map[i];
      ++cnt;
    }
    if (cnt == 0) throw ValidationError("mask leaves no complete SSIM window");
    total += s / cnt;
  }
  return total / a.channels;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  return ssim_with_optional_mask(a, b, nullptr);
}

double ssim_masked(const Image& a, const Image& b, const Mask& mask) {
  return ssim_with_optional_mask(a, b, &mask);
}

double mae(const Image& a, const Image& b) {
  check_pair(a, b);
  return simd::kernels().sum_abs_diff(a.data.data(), b.data.data(), a.data.size()) /
         static_cast<double>(a.data.size());
}

double psnr(const Image& a, const Image& b) {
  check_pair(a, b);
  const double mse = simd::kernels().sum_sq_diff(a.data.data(), b.data.data(),
                                                 a.data.size()) /
                     static_cast<double>(a.data.size());
  if (mse == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double seam_ratio(const Image& image) {
  if (image.width < 4 || image.height < 4)
    throw ValidationError("seam ratio needs at least 4 px per side");
  const int w = image.width, h = image.height;
  double boundary = 0, interior = 0;
  size_t nb = 0, ni = 0;
  for (int c = 0; c < image.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      boundary += std::abs(image.at(0, y, c) - image.at(w - 1, y, c));
      ++nb;
      for (int x = 0; x + 1 < w; ++x) {
        interior += std::abs(image.at(x + 1, y, c) - image.at(x, y, c));
        ++ni;
      }
    }
    for (int x = 0; x < w; ++x) {
      boundary += std::abs(image.at(x, 0, c) - image.at(x, h - 1, c));
      ++nb;
      for (int y = 0; y + 1 < h; ++y) {
        interior += std::abs(image.at(x, y + 1, c) - image.at(x, y, c));
        ++ni;
      }
    }
  }
  const double eps = 1e-6;
  return (boundary / nb + eps) / (interior / ni + eps);
}

EvalReport evaluate_pair(const MaterialSet& pred, const MaterialSet& gt,
                         RotationMode mode) {
  MaterialSet p = pred;
  if (pred.resolution() != gt.resolution()) {
    const int r = gt.resolution();
    p.albedo = resize_bilinear(pred.albedo, r, r);
    p.normal.encoded = resize_bilinear(pred.normal.encoded, r, r);
    p.roughness = resize_bilinear(pred.roughness, r, r);
    p.height = resize_bilinear(pred.height, r, r);
  }

  const int turns = mode == RotationMode::Search ? 4 : 1;
  std::vector<MaterialSet> rotated;
  rotated.push_back(p);
  constexpr double kHalfPi = 1.5707963267948966192313216916398;
  for (int k = 1; k < turns; ++k)
    rotated.push_back(rotate_material_set(p, k * kHalfPi, Sampling::Nearest));

  EvalReport report;
  const std::array<const char*, 4> names = {"albedo", "normal", "roughness",
                                            "height"};
  for (int attr = 0; attr < 4; ++attr) {
    auto map_of = [&](const MaterialSet& m) -> const Image& {
      switch (attr) {
        case 0: return m.albedo;
        case 1: return m.normal.encoded;
        case 2: return m.roughness;
        default: return m.height;
      }
    };
    AttributeScore best;
    best.attribute = names[attr];
    best.ssim = -2;
    for (int k = 0; k < turns; ++k) {
      const double s = ssim(map_of(rotated[k]), map_of(gt));
      if (s > best.ssim) {
        best.ssim = s;
        best.rotation_quarter_turns = k;
      }
    }
    const Image& chosen = map_of(rotated[best.rotation_quarter_turns]);
    best.mae = mae(chosen, map_of(gt));
    best.psnr = psnr(chosen, map_of(gt));
    best.seam_ratio = seam_ratio(chosen);
    report.attributes.push_back(best);
  }
  return report;
}

}  // namespace matkit
