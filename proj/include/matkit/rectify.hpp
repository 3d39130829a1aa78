#pragma once

#include <vector>

#include "matkit/geometry.hpp"
#include "matkit/types.hpp"

namespace matkit {

enum class NormalizeMode { PerAxis, AspectPreserving };

struct RectifyParams {
  double d_shift = 1.0;
  int target_w = 1024;
  int target_h = 1024;
  double s_sample = 0.5;          // intermediate splat grid scale, in (0,1]
  int hole_kernel_k = 5;          // odd, >= 3
  NormalizeMode normalize_mode = NormalizeMode::PerAxis;

  void validate() const;
  // Splat grid dims: round(target * s_sample), at least 2.
  int grid_w() const;
  int grid_h() const;
};

// Principal point at the pixel-grid center, focal length max(w, h).
Intrinsics default_intrinsics(int width, int height);

// Continuous canonical coordinates for every masked source pixel.
struct RemapField {
  int width = 0;   // source dims
  int height = 0;
  std::vector<double> u;  // canonical coords, defined where valid != 0
  std::vector<double> v;
  std::vector<uint8_t> valid;

  size_t idx(int x, int y) const { return static_cast<size_t>(y) * width + x; }
};

// Unprojects masked pixels to x = (u_d - c_x) * (depth + d_shift) / f_x
// (y analogously), rescales them over the masked set to [0,1] and maps onto
// the splat grid so the extremes land on the first/last cell. Throws
// ValidationError on an empty mask, a non-positive denominator guard
// (d_shift = 0 with zero min depth) or zero spatial extent on an axis.
RemapField unproject_remap(const DepthMap& depth, const Mask& mask,
                           const Intrinsics& K, const RectifyParams& params);

// Accumulation grid between splatting and hole filling. Cells with count = 0
// are the holes.
struct SplatCanvas {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> accum;   // planar, like Image
  std::vector<double> count;   // shared across channels

  size_t idx(int x, int y) const { return static_cast<size_t>(y) * width + x; }
};

// Each masked source pixel adds its value to the nearest-integer target cell.
SplatCanvas splat(const Image& image, const Mask& mask, const RemapField& remap,
                  int target_w, int target_h);

// One pass over the original validity map: hit cells keep accum/count, holes
// take the mean of hit cells in their k-by-k neighborhood (clipped at the
// borders), holes with no hit neighbor become 0.
Image fill_holes(const SplatCanvas& canvas, int k);

struct RectifyResult {
  Image texture;        // target_w x target_h
  Mask valid;           // hit-or-filled cells, resampled alongside the texture
  double hole_fraction; // holes / grid cells before filling
};

// unproject_remap -> splat -> fill_holes -> bilinear upsample to the target
// size when the splat grid is smaller.
RectifyResult rectify(const Image& image, const Mask& mask, const DepthMap& depth,
                      const Intrinsics& K, const RectifyParams& params);

struct SweepRow {
  double d_shift;
  double remap_deviation_px;  // mean distance to the constant-depth remap
  double hole_fraction;
};

// One row per d_shift value: how far the remap sits from the flat-depth
// baseline, and the pre-fill hole fraction.
std::vector<SweepRow> sweep_d_shift(const Image& image, const Mask& mask,
                                    const DepthMap& depth, const Intrinsics& K,
                                    const RectifyParams& params,
                                    const std::vector<double>& values);

}  // namespace matkit
