#pragma once

#include <string>
#include <vector>

#include "matkit/types.hpp"

namespace matkit {

// Gaussian-windowed structural similarity (window 11, sigma 1.5, unit-range
// constants), channel-averaged over valid window placements.
double ssim(const Image& a, const Image& b);

// Mean of the SSIM map restricted to windows fully inside the mask (mask
// eroded by the window half-width).
double ssim_masked(const Image& a, const Image& b, const Mask& mask);

double mae(const Image& a, const Image& b);
// 10 log10(1/MSE); +infinity for identical inputs.
double psnr(const Image& a, const Image& b);

// Boundary-to-interior mean |difference| ratio, both epsilon-guarded: 1 for
// perfectly tileable content, larger for visible wrap seams.
double seam_ratio(const Image& image);

enum class RotationMode { Fixed, Search };

struct AttributeScore {
  std::string attribute;
  double ssim = 0;
  double mae = 0;
  double psnr = 0;
  double seam_ratio = 0;
  int rotation_quarter_turns = 0;  // chosen alignment in Search mode
};

struct EvalReport {
  std::vector<AttributeScore> attributes;  // albedo, normal, roughness, height
};

// Per-attribute comparison; Search mode evaluates the four quarter-turn
// rotations of pred and keeps the best SSIM per attribute. pred is resampled
// to gt's resolution first when they differ.
EvalReport evaluate_pair(const MaterialSet& pred, const MaterialSet& gt,
                         RotationMode mode);

}  // namespace matkit
