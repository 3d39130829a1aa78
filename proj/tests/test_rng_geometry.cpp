#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "matkit/geometry.hpp"
#include "matkit/rng.hpp"

using namespace matkit;

TEST_CASE("rng streams are deterministic and seed-separated") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
  }
  bool differs = false;
  Rng a2(42);
  for (int i = 0; i < 100; ++i) differs |= a2.next_u64() != c.next_u64();
  CHECK(differs);
}

TEST_CASE("rng uniform and normal ranges") {
  Rng rng(7);
  double sum = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 10000 - 0.5) < 0.02);

  double mean = 0, var = 0;
  const int n = 20000;
  std::vector<double> xs(n);
  for (double& x : xs) x = rng.normal();
  for (double x : xs) mean += x;
  mean /= n;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= n - 1;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("rng below covers the range") {
  Rng rng(11);
  std::set<uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const uint64_t v = rng.below(5);
    CHECK(v < 5);
    seen.insert(v);
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("derive_seed separates streams") {
  const uint64_t base = derive_seed(1, 2, 3, 4);
  CHECK(base == derive_seed(1, 2, 3, 4));
  CHECK(base != derive_seed(1, 2, 3, 5));
  CHECK(base != derive_seed(1, 2, 4, 4));
  CHECK(base != derive_seed(2, 2, 3, 4));
}

TEST_CASE("vector algebra") {
  const Vec3 x{1, 0, 0}, y{0, 1, 0};
  const Vec3 z = x.cross(y);
  CHECK(z.x == 0);
  CHECK(z.y == 0);
  CHECK(z.z == 1);
  CHECK(x.dot(y) == 0);
  CHECK((Vec3{3, 4, 0}.norm()) == doctest::Approx(5));
  const Vec3 zero{0, 0, 0};
  CHECK_THROWS_AS(zero.normalize(), ValidationError);
}

TEST_CASE("camera frame looks along the view vector") {
  CameraPose pose;
  pose.position = {0, 0, 2};
  pose.target = {0, 0, 0};
  pose.up_hint = {0, 1, 0};
  const CameraFrame frame = make_camera_frame(pose);
  CHECK(frame.forward.z == doctest::Approx(-1));
  CHECK(frame.axis_x.x == doctest::Approx(1));
  CHECK(frame.axis_y.y == doctest::Approx(1));

  const CameraSpacePoint p = to_camera(frame, {0.5, 0.5, 0});
  CHECK(p.x == doctest::Approx(0.5));
  CHECK(p.y == doctest::Approx(0.5));
  CHECK(p.z == doctest::Approx(2.0));

  const Vec2 uv = project_pinhole({100, 100, 64, 64}, p);
  CHECK(uv.x == doctest::Approx(89));
  CHECK(uv.y == doctest::Approx(89));
}

TEST_CASE("camera frame rejects a degenerate pose and handles axial views") {
  CameraPose pose;
  pose.position = {1, 1, 1};
  pose.target = {1, 1, 1};
  CHECK_THROWS_AS(make_camera_frame(pose), ValidationError);

  // Looking straight down the default up axis falls back to another hint.
  pose.target = {1, 1, 0};
  const CameraFrame frame = make_camera_frame(pose);
  CHECK(frame.axis_x.norm() == doctest::Approx(1));
  CHECK(std::abs(frame.axis_x.dot(frame.forward)) < 1e-12);
  CHECK(std::abs(frame.axis_y.dot(frame.forward)) < 1e-12);
}
