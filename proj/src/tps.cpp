#include "matkit/tps.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "matkit/resample.hpp"

namespace matkit {

namespace {

// U(r) = r^2 log r^2, evaluated via the squared radius; U(0) = 0.
double kernel_r2(double r2) { return r2 > 0.0 ? r2 * std::log(r2) : 0.0; }

double kernel(const Vec2& a, const Vec2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return kernel_r2(dx * dx + dy * dy);
}

}  // namespace

double TpsSpline::eval(const Vec2& p) const {
  double v = a0 + ax * p.x + ay * p.y;
  for (size_t i = 0; i < control_points.size(); ++i)
    v += weights[i] * kernel(p, control_points[i]);
  return v;
}

double TpsSpline::bending_energy() const {
  const size_t n = control_points.size();
  double e = 0;
  for (size_t i = 0; i < n; ++i) {
    double row = 0;
    for (size_t j = 0; j < n; ++j)
      row += kernel(control_points[i], control_points[j]) * weights[j];
    e += weights[i] * row;
  }
  return e;
}

TpsSpline tps_fit(const std::vector<Vec2>& src, const std::vector<double>& values,
                  double lambda) {
  const size_t n = src.size();
  if (n < 3) throw ValidationError("TPS needs at least 3 control points");
  if (values.size() != n)
    throw ValidationError("TPS control point / target count mismatch");
  if (lambda < 0) throw ValidationError("TPS lambda must be >= 0");

  // Bordered system [[K + lambda I, P], [P^T, 0]] [w; a] = [values; 0] with
  // P rows (1, x_i, y_i); the zero block enforces the side conditions.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 3, n + 3);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 3);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) A(i, j) = kernel(src[i], src[j]);
    A(i, i) += lambda;
    A(i, n) = A(n, i) = 1.0;
    A(i, n + 1) = A(n + 1, i) = src[i].x;
    A(i, n + 2) = A(n + 2, i) = src[i].y;
    rhs(i) = values[i];
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible())
    throw ValidationError(
        "singular TPS system (collinear or duplicate control points)");
  Eigen::VectorXd sol = lu.solve(rhs);

  TpsSpline s;
  s.control_points = src;
  s.weights.assign(sol.data(), sol.data() + n);
  s.a0 = sol(n);
  s.ax = sol(n + 1);
  s.ay = sol(n + 2);
  s.lambda = lambda;
  return s;
}

TpsWarp tps_fit_warp(const std::vector<Vec2>& src, const std::vector<Vec2>& dst,
                     double lambda) {
  if (src.size() != dst.size())
    throw ValidationError("TPS control point / target count mismatch");
  std::vector<double> vx(dst.size()), vy(dst.size());
  for (size_t i = 0; i < dst.size(); ++i) {
    vx[i] = dst[i].x;
    vy[i] = dst[i].y;
  }
  return {tps_fit(src, vx, lambda), tps_fit(src, vy, lambda)};
}

WarpedImage tps_warp_image(const Image& image, const TpsWarp& to_source) {
  WarpedImage out;
  out.image = Image::create(image.width, image.height, image.channels, 0.0,
                            image.color_space);
  out.valid = Mask::create(image.width, image.height, 0);
  // Round-off in the spline can push an exactly-border sample a few ulp
  // outside the frame; treat those as border hits instead of holes.
  const double eps = 1e-9 * std::max(image.width, image.height);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      Vec2 q = to_source.eval({static_cast<double>(x), static_cast<double>(y)});
      if (q.x < -eps || q.y < -eps || q.x > image.width - 1 + eps ||
          q.y > image.height - 1 + eps)
        continue;
      q.x = std::clamp(q.x, 0.0, static_cast<double>(image.width - 1));
      q.y = std::clamp(q.y, 0.0, static_cast<double>(image.height - 1));
      out.valid.at(x, y) = 1;
      for (int c = 0; c < image.channels; ++c)
        out.image.at(x, y, c) = sample_bilinear(image, q.x, q.y, c);
    }
  return out;
}

}  // namespace matkit
