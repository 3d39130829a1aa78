#pragma once

#include <string>

#include "matkit/types.hpp"

namespace matkit {

// PNG, 8- or 16-bit, grayscale or RGB (alpha and palette images are
// rejected). Decoded samples are value / (2^bits - 1).
Image load_png(const std::string& path);
// Writes 8-bit (default) or 16-bit samples, round(v * (2^bits - 1)) after
// clamping to [0,1].
void save_png(const std::string& path, const Image& img, int bit_depth = 8);

// PFM, little-endian ("Pf"/"PF", negative scale), rows stored bottom-to-top.
Image load_pfm(const std::string& path);
void save_pfm(const std::string& path, const Image& img);

// Depth from a single-channel image file (PNG or PFM by extension),
// min-max normalized to [0,1]; a constant input maps to all zeros.
DepthMap load_depth(const std::string& path);
void save_depth_pfm(const std::string& path, const DepthMap& depth);

// Mask from a single-channel image: sample > 0.5 is inside.
Mask load_mask(const std::string& path);
void save_mask_png(const std::string& path, const Mask& mask);

// Raw little-endian float32 tensor dump with a one-line text sidecar
// (<path>.shape) holding "channels height width".
struct RawTensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;  // planar
};
void save_raw_f32(const std::string& path, const std::vector<double>& data,
                  int channels, int height, int width);
RawTensor load_raw_f32(const std::string& path);

}  // namespace matkit
