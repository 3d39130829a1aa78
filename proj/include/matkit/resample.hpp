#pragma once

#include "matkit/types.hpp"

namespace matkit {

// Corner-aligned bilinear resize: src = dst * (src_dim - 1) / (dst_dim - 1),
// so corner samples map exactly. A target dimension of 1 samples the source
// center.
Image resize_bilinear(const Image& img, int target_w, int target_h);

// Bilinear sample at a fractional position, clamped to the image border.
double sample_bilinear(const Image& img, double x, double y, int c);

// Bilinear sample with periodic (wrap-around) extension.
double sample_bilinear_wrap(const Image& img, double x, double y, int c);

// Average-pool by an integer factor; both dimensions must be divisible.
Image downsample_box(const Image& img, int factor);

// Nearest-neighbor upsample by an integer factor.
Image upsample_nearest(const Image& img, int factor);

}  // namespace matkit
