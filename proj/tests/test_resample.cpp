#include <doctest.h>

#include "matkit/resample.hpp"
#include "matkit/rng.hpp"
#include "matkit/types.hpp"

using namespace matkit;

TEST_CASE("resize is identity at the same resolution") {
  Rng rng(11);
  Image img = Image::create(7, 5, 3);
  for (double& v : img.data) v = rng.uniform();
  const Image out = resize_bilinear(img, 7, 5);
  for (size_t i = 0; i < img.data.size(); ++i) CHECK(out.data[i] == doctest::Approx(img.data[i]).epsilon(1e-12));
}

TEST_CASE("resize preserves constants") {
  const Image img = Image::create(4, 4, 1, 0.37);
  const Image up = resize_bilinear(img, 9, 9);
  for (double v : up.data) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("corner aligned upsample of a two pixel ramp") {
  Image img = Image::create(2, 1, 1);
  img.at(0, 0) = 0.0;
  img.at(1, 0) = 1.0;
  const Image out = resize_bilinear(img, 3, 1);
  CHECK(out.at(0, 0) == doctest::Approx(0.0));
  CHECK(out.at(1, 0) == doctest::Approx(0.5));
  CHECK(out.at(2, 0) == doctest::Approx(1.0));
}

TEST_CASE("box downsample averages blocks") {
  Image img = Image::create(4, 2, 1);
  for (int x = 0; x < 4; ++x) {
    img.at(x, 0) = x;
    img.at(x, 1) = x + 4;
  }
  for (double& v : img.data) v /= 8.0;
  const Image out = downsample_box(img, 2);
  CHECK(out.width == 2);
  CHECK(out.height == 1);
  CHECK(out.at(0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0 / 8.0));
  CHECK(out.at(1, 0) == doctest::Approx((2 + 3 + 6 + 7) / 4.0 / 8.0));
  CHECK_THROWS_AS(downsample_box(img, 3), ValidationError);
}

TEST_CASE("nearest upsample repeats blocks and inverts pooling on block constant input") {
  Image img = Image::create(2, 2, 1);
  img.at(0, 0) = 0.1;
  img.at(1, 0) = 0.2;
  img.at(0, 1) = 0.3;
  img.at(1, 1) = 0.4;
  const Image up = upsample_nearest(img, 3);
  CHECK(up.width == 6);
  CHECK(up.height == 6);
  CHECK(up.at(0, 0) == 0.1);
  CHECK(up.at(2, 2) == 0.1);
  CHECK(up.at(3, 2) == 0.2);
  CHECK(up.at(1, 4) == 0.3);
  CHECK(up.at(5, 5) == 0.4);

  const Image down = downsample_box(up, 3);
  for (size_t i = 0; i < img.data.size(); ++i) CHECK(down.data[i] == doctest::Approx(img.data[i]).epsilon(1e-12));
}

TEST_CASE("bilinear samplers clamp or wrap out of range coordinates") {
  Image img = Image::create(3, 1, 1);
  img.at(0, 0) = 0.0;
  img.at(1, 0) = 0.5;
  img.at(2, 0) = 1.0;
  CHECK(sample_bilinear(img, -5.0, 0.0, 0) == doctest::Approx(0.0));
  CHECK(sample_bilinear(img, 7.0, 0.0, 0) == doctest::Approx(1.0));
  CHECK(sample_bilinear(img, 1.0, 0.0, 0) == doctest::Approx(0.5));
  // Wrapping: x = 2.5 blends the last and first samples.
  CHECK(sample_bilinear_wrap(img, 2.5, 0.0, 0) == doctest::Approx(0.5));
  CHECK(sample_bilinear_wrap(img, -0.5, 0.0, 0) == doctest::Approx(0.5));
  CHECK(sample_bilinear_wrap(img, 4.0, 0.0, 0) == doctest::Approx(0.5));
}
