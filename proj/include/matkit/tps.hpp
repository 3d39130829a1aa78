#pragma once

#include <vector>

#include "matkit/geometry.hpp"
#include "matkit/types.hpp"

namespace matkit {

// Thin-plate spline with kernel U(r) = r^2 log r^2 (U(0) = 0) plus an affine
// part. `values` below is one scalar target per control point; a 2D warp is
// two splines sharing control points.
struct TpsSpline {
  std::vector<Vec2> control_points;
  std::vector<double> weights;       // radial coefficients, one per control point
  double a0 = 0, ax = 0, ay = 0;     // affine part a0 + ax*x + ay*y
  double lambda = 0;

  double eval(const Vec2& p) const;
  // wᵀ K w with K_ij = U(|c_i - c_j|).
  double bending_energy() const;
};

// Solves the bordered system [[K + λI, P], [Pᵀ, 0]]. Throws ValidationError
// for fewer than 3 points, mismatched sizes, λ < 0, or a singular system
// (collinear or duplicate control points).
TpsSpline tps_fit(const std::vector<Vec2>& src, const std::vector<double>& values,
                  double lambda = 0.0);

struct TpsWarp {
  TpsSpline fx;  // target x as a function of source position
  TpsSpline fy;

  Vec2 eval(const Vec2& p) const { return {fx.eval(p), fy.eval(p)}; }
};

TpsWarp tps_fit_warp(const std::vector<Vec2>& src, const std::vector<Vec2>& dst,
                     double lambda = 0.0);

// Backward warp: output(p) = image(warp(p)) with bilinear sampling; samples
// falling outside the source are 0 and cleared in the returned mask.
struct WarpedImage {
  Image image;
  Mask valid;
};
WarpedImage tps_warp_image(const Image& image, const TpsWarp& to_source);

}  // namespace matkit
