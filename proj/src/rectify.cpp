#include "matkit/rectify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "matkit/resample.hpp"

namespace matkit {

void RectifyParams::validate() const {
  if (d_shift < 0) throw ValidationError("d_shift must be >= 0");
  if (s_sample <= 0 || s_sample > 1)
    throw ValidationError("s_sample must lie in (0, 1]");
  if (hole_kernel_k < 3 || hole_kernel_k % 2 == 0)
    throw ValidationError("hole kernel must be odd and >= 3");
  if (target_w < 2 || target_h < 2)
    throw ValidationError("target dims must be >= 2");
  if (grid_w() < 2 || grid_h() < 2)
    throw ValidationError("s_sample yields a splat grid smaller than 2 cells");
}

int RectifyParams::grid_w() const {
  return static_cast<int>(std::lround(target_w * s_sample));
}

int RectifyParams::grid_h() const {
  return static_cast<int>(std::lround(target_h * s_sample));
}

Intrinsics default_intrinsics(int width, int height) {
  if (width < 1 || height < 1) throw ValidationError("image dims must be >= 1");
  Intrinsics K;
  K.fx = K.fy = static_cast<double>(std::max(width, height));
  K.cx = (width - 1) * 0.5;
  K.cy = (height - 1) * 0.5;
  return K;
}

RemapField unproject_remap(const DepthMap& depth, const Mask& mask,
                           const Intrinsics& K, const RectifyParams& params) {
  params.validate();
  if (depth.width != mask.width || depth.height != mask.height)
    throw ValidationError("depth and mask dims differ");
  if (K.fx <= 0 || K.fy <= 0) throw ValidationError("focal lengths must be > 0");

  RemapField remap;
  remap.width = depth.width;
  remap.height = depth.height;
  const size_t total = static_cast<size_t>(depth.width) * depth.height;
  remap.u.assign(total, 0.0);
  remap.v.assign(total, 0.0);
  remap.valid.assign(total, 0);

  // Unproject masked pixels: x = (u_d - c_x) (depth + d_shift) / f_x and y
  // analogously; with d_shift = 0 a zero-depth pixel would collapse onto the
  // principal axis, hence the guard.
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  size_t n_masked = 0;
  for (int yy = 0; yy < depth.height; ++yy)
    for (int xx = 0; xx < depth.width; ++xx) {
      if (!mask.at(xx, yy)) continue;
      ++n_masked;
      const double d = depth.at(xx, yy) + params.d_shift;
      if (d <= 0) throw ValidationError("d_shift = 0 with zero masked depth");
      const size_t i = remap.idx(xx, yy);
      remap.u[i] = (xx - K.cx) * d / K.fx;
      remap.v[i] = (yy - K.cy) * d / K.fy;
      remap.valid[i] = 1;
      x_min = std::min(x_min, remap.u[i]);
      x_max = std::max(x_max, remap.u[i]);
      y_min = std::min(y_min, remap.v[i]);
      y_max = std::max(y_max, remap.v[i]);
    }
  if (n_masked == 0) throw ValidationError("mask is empty");

  const double ext_x = x_max - x_min, ext_y = y_max - y_min;
  const double sx = params.grid_w() - 1, sy = params.grid_h() - 1;
  double ax, bx, ay, by;  // N(x) = ax * x + bx, same for y
  if (params.normalize_mode == NormalizeMode::PerAxis) {
    if (ext_x <= 0 || ext_y <= 0)
      throw ValidationError("masked pixels project to a line (zero extent)");
    ax = 1.0 / ext_x;
    bx = -x_min / ext_x;
    ay = 1.0 / ext_y;
    by = -y_min / ext_y;
  } else {
    // Both axes share the larger extent; the shorter one is centered.
    const double e = std::max(ext_x, ext_y);
    if (e <= 0)
      throw ValidationError("masked pixels project to a point (zero extent)");
    ax = 1.0 / e;
    bx = -x_min / e + 0.5 * (1.0 - ext_x / e);
    ay = 1.0 / e;
    by = -y_min / e + 0.5 * (1.0 - ext_y / e);
  }
  for (size_t i = 0; i < total; ++i) {
    if (!remap.valid[i]) continue;
    remap.u[i] = (ax * remap.u[i] + bx) * sx;
    remap.v[i] = (ay * remap.v[i] + by) * sy;
  }
  return remap;
}

SplatCanvas splat(const Image& image, const Mask& mask, const RemapField& remap,
                  int target_w, int target_h) {
  if (image.width != remap.width || image.height != remap.height)
    throw ValidationError("image and remap dims differ");
  if (image.width != mask.width || image.height != mask.height)
    throw ValidationError("image and mask dims differ");
  if (target_w < 1 || target_h < 1)
    throw ValidationError("splat target dims must be >= 1");

  SplatCanvas canvas;
  canvas.width = target_w;
  canvas.height = target_h;
  canvas.channels = image.channels;
  const size_t cells = static_cast<size_t>(target_w) * target_h;
  canvas.accum.assign(cells * image.channels, 0.0);
  canvas.count.assign(cells, 0.0);

  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const size_t i = remap.idx(x, y);
      if (!mask.at(x, y) || !remap.valid[i]) continue;
      int tx = static_cast<int>(std::llround(remap.u[i]));
      int ty = static_cast<int>(std::llround(remap.v[i]));
      tx = std::clamp(tx, 0, target_w - 1);
      ty = std::clamp(ty, 0, target_h - 1);
      const size_t cell = canvas.idx(tx, ty);
      for (int c = 0; c < image.channels; ++c)
        canvas.accum[cells * c + cell] += image.at(x, y, c);
      canvas.count[cell] += 1.0;
    }
  return canvas;
}

Image fill_holes(const SplatCanvas& canvas, int k) {
  if (k < 3 || k % 2 == 0) throw ValidationError("hole kernel must be odd and >= 3");
  const int w = canvas.width, h = canvas.height, ch = canvas.channels;
  const size_t cells = static_cast<size_t>(w) * h;
  Image out = Image::create(w, h, ch);
  const int r = k / 2;

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const size_t cell = canvas.idx(x, y);
      const double cnt = canvas.count[cell];
      if (cnt > 0) {
        for (int c = 0; c < ch; ++c)
          out.at(x, y, c) = canvas.accum[cells * c + cell] / cnt;
        continue;
      }
      // Hole: average the hit cells of the k-by-k neighborhood (judged on
      // the original counts, so already-filled holes never contribute).
      const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
      const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
      double c_s = 0;
      for (int ny = y0; ny <= y1; ++ny)
        for (int nx = x0; nx <= x1; ++nx)
          if (canvas.count[canvas.idx(nx, ny)] > 0) c_s += 1.0;
      if (c_s == 0) continue;  // isolated hole stays 0
      for (int c = 0; c < ch; ++c) {
        double s = 0;
        for (int ny = y0; ny <= y1; ++ny)
          for (int nx = x0; nx <= x1; ++nx) {
            const size_t ncell = canvas.idx(nx, ny);
            if (canvas.count[ncell] > 0)
              s += canvas.accum[cells * c + ncell] / canvas.count[ncell];
          }
        out.at(x, y, c) = s / c_s;
      }
    }
  return out;
}

RectifyResult rectify(const Image& image, const Mask& mask, const DepthMap& depth,
                      const Intrinsics& K, const RectifyParams& params) {
  if (image.width != depth.width || image.height != depth.height)
    throw ValidationError("image and depth dims differ");
  const RemapField remap = unproject_remap(depth, mask, K, params);
  const int gw = params.grid_w(), gh = params.grid_h();
  const SplatCanvas canvas = splat(image, mask, remap, gw, gh);

  size_t holes = 0;
  for (double c : canvas.count) holes += c == 0;

  Image filled = fill_holes(canvas, params.hole_kernel_k);

  // Valid = hit cells plus holes that found a neighbor to copy from.
  const int r = params.hole_kernel_k / 2;
  Mask grid_valid = Mask::create(gw, gh, 0);
  for (int y = 0; y < gh; ++y)
    for (int x = 0; x < gw; ++x) {
      if (canvas.count[canvas.idx(x, y)] > 0) {
        grid_valid.at(x, y) = 1;
        continue;
      }
      for (int ny = std::max(0, y - r); ny <= std::min(gh - 1, y + r); ++ny)
        for (int nx = std::max(0, x - r); nx <= std::min(gw - 1, x + r); ++nx)
          if (canvas.count[canvas.idx(nx, ny)] > 0) grid_valid.at(x, y) = 1;
    }

  RectifyResult result;
  result.hole_fraction = static_cast<double>(holes) / (static_cast<size_t>(gw) * gh);
  if (gw == params.target_w && gh == params.target_h) {
    result.texture = std::move(filled);
    result.valid = std::move(grid_valid);
    return result;
  }
  result.texture = resize_bilinear(filled, params.target_w, params.target_h);
  Image vimg = Image::create(gw, gh, 1);
  for (int y = 0; y < gh; ++y)
    for (int x = 0; x < gw; ++x) vimg.at(x, y) = grid_valid.at(x, y) ? 1.0 : 0.0;
  vimg = resize_bilinear(vimg, params.target_w, params.target_h);
  result.valid = Mask::create(params.target_w, params.target_h, 0);
  for (int y = 0; y < params.target_h; ++y)
    for (int x = 0; x < params.target_w; ++x)
      result.valid.at(x, y) = vimg.at(x, y) > 0.5;
  return result;
}

std::vector<SweepRow> sweep_d_shift(const Image& image, const Mask& mask,
                                    const DepthMap& depth, const Intrinsics& K,
                                    const RectifyParams& params,
                                    const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("sweep needs at least one d_shift");
  for (double v : values)
    if (v <= 0) throw ValidationError("sweep d_shift values must be > 0");

  // Constant depth cancels inside the normalization, so any constant gives
  // the same affine baseline; d_shift is irrelevant for it too.
  RectifyParams base_params = params;
  base_params.d_shift = 1.0;
  const DepthMap flat = DepthMap::create(depth.width, depth.height, 0.5);
  const RemapField baseline = unproject_remap(flat, mask, K, base_params);

  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double d : values) {
    RectifyParams p = params;
    p.d_shift = d;
    const RemapField remap = unproject_remap(depth, mask, K, p);
    double dev = 0;
    size_t n = 0;
    for (size_t i = 0; i < remap.valid.size(); ++i) {
      if (!remap.valid[i]) continue;
      const double du = remap.u[i] - baseline.u[i];
      const double dv = remap.v[i] - baseline.v[i];
      dev += std::sqrt(du * du + dv * dv);
      ++n;
    }
    const SplatCanvas canvas = splat(image, mask, remap, p.grid_w(), p.grid_h());
    size_t holes = 0;
    for (double c : canvas.count) holes += c == 0;
    rows.push_back({d, dev / n,
                    static_cast<double>(holes) /
                        (static_cast<size_t>(p.grid_w()) * p.grid_h())});
  }
  return rows;
}

}  // namespace matkit
