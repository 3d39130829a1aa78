#include <doctest.h>

#include <cmath>
#include <limits>

#include "matkit/align.hpp"
#include "matkit/metrics.hpp"
#include "matkit/procgen.hpp"
#include "matkit/resample.hpp"
#include "matkit/rng.hpp"
#include "matkit/types.hpp"
#include "testutil.hpp"

using namespace matkit;

namespace {

constexpr double kPi = 3.14159265358979323846;

Image shifted(const Image& img, int dx, int dy) {
  Image out = Image::create(img.width, img.height, img.channels, 0.0, img.color_space);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.at(x, y, c) =
            img.at((x + dx) % img.width, (y + dy) % img.height, c);
  return out;
}

}  // namespace

TEST_CASE("ssim self comparison is exactly one") {
  Rng rng(80);
  Image img = Image::create(24, 24, 3);
  for (double& v : img.data) v = rng.uniform();
  CHECK(ssim(img, img) == 1.0);
}

TEST_CASE("ssim of opposite constants collapses to the luminance floor") {
  const Image zeros = Image::create(16, 16, 1, 0.0);
  const Image ones = Image::create(16, 16, 1, 1.0);
  CHECK(ssim(zeros, ones) == doctest::Approx(0.0001 / 1.0001).epsilon(1e-9));
}

TEST_CASE("ssim is symmetric and drops for misaligned content") {
  Rng rng(81);
  const Image a = make_periodic_texture(48, 1, 0.0, 1.0, rng);
  const Image b = shifted(a, 24, 24);
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
  // Band-limited content keeps some window-level correlation under a half
  // shift; well below the aligned score is what matters.
  CHECK(ssim(a, b) < 0.6);
  CHECK(ssim(a, a) > ssim(a, b));
}

TEST_CASE("ssim is invariant under joint rotation") {
  Rng rng(82);
  const Image a = make_periodic_texture(32, 3, 0.1, 0.9, rng);
  Image b = a;
  for (double& v : b.data) v = std::min(1.0, v + 0.03);
  const double base = ssim(a, b);
  const Image ar = rotate_image(a, kPi / 2, Sampling::Nearest);
  const Image br = rotate_image(b, kPi / 2, Sampling::Nearest);
  CHECK(ssim(ar, br) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("ssim rejects images smaller than its window") {
  const Image small = Image::create(10, 10, 1, 0.5);
  CHECK_THROWS_AS(ssim(small, small), ValidationError);
  const Image a = Image::create(12, 12, 1, 0.5);
  const Image b = Image::create(12, 14, 1, 0.5);
  CHECK_THROWS_AS(ssim(a, b), ValidationError);
}

TEST_CASE("masked ssim ignores differences outside the mask") {
  Rng rng(83);
  Image a = Image::create(32, 32, 1);
  for (double& v : a.data) v = rng.uniform();
  Image b = a;
  // Corrupt a corner far from the masked interior.
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) b.at(x, y) = 1.0 - b.at(x, y);
  Mask mask = Mask::create(32, 32, 1);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x) mask.at(x, y) = 0;
  CHECK(ssim_masked(a, b, mask) == 1.0);
  CHECK(ssim(a, b) < 1.0);

  // Full mask reduces to plain ssim.
  const Mask full = Mask::create(32, 32, 1);
  CHECK(ssim_masked(a, b, full) == doctest::Approx(ssim(a, b)).epsilon(1e-12));

  // A mask with no complete window is an error.
  Mask tiny = Mask::create(32, 32, 0);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) tiny.at(x, y) = 1;
  CHECK_THROWS_AS(ssim_masked(a, b, tiny), ValidationError);
}

TEST_CASE("mae and psnr worked examples") {
  Image a = Image::create(2, 1, 1);
  Image b = Image::create(2, 1, 1, 0.5);
  a.at(0, 0) = 0.0;
  a.at(1, 0) = 0.5;
  CHECK(mae(a, b) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(8.0)).epsilon(1e-9));

  CHECK(mae(a, a) == 0.0);
  CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());

  const Image zeros = Image::create(4, 4, 1, 0.0);
  const Image ones = Image::create(4, 4, 1, 1.0);
  CHECK(mae(zeros, ones) == doctest::Approx(1.0));
  CHECK(psnr(zeros, ones) == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(mae(a, zeros), ValidationError);
}

TEST_CASE("seam ratio of a triangle wave is exactly one") {
  const Image tri = testutil::triangle_wave_image(8);
  CHECK(seam_ratio(tri) == 1.0);
  // All circular differences share one magnitude, so any roll keeps it.
  for (int s : {1, 3, 5}) CHECK(seam_ratio(shifted(tri, s, 0)) == 1.0);
}

TEST_CASE("seam ratio of a constant image is one") {
  CHECK(seam_ratio(Image::create(9, 9, 3, 0.42)) == 1.0);
}

TEST_CASE("seam ratio of a half split image follows the closed form") {
  const int n = 16;
  Image img = Image::create(n, n, 1);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) img.at(x, y) = x < n / 2 ? 0.0 : 1.0;
  // Boundary: n row wraps of size 1 over 2n terms; interior: n single steps
  // over 2n(n-1) terms.
  const double eps = 1e-6;
  const double expect = (0.5 + eps) / (1.0 / (2.0 * (n - 1)) + eps);
  CHECK(seam_ratio(img) == doctest::Approx(expect).epsilon(1e-9));
  CHECK(seam_ratio(img) > 10.0);
}

TEST_CASE("seam ratio flags gradients but accepts periodic textures") {
  const int n = 32;
  Image grad = Image::create(n, n, 1);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) grad.at(x, y) = x / (n - 1.0);
  CHECK(seam_ratio(grad) > 1.2);

  Rng rng(84);
  const Image tex = make_periodic_texture(n, 1, 0.0, 1.0, rng);
  CHECK(seam_ratio(tex) < 1.2);
  for (int s : {7, 13}) CHECK(seam_ratio(shifted(tex, s, s)) < 1.2);

  CHECK_THROWS_AS(seam_ratio(Image::create(3, 3, 1, 0.5)), ValidationError);
}

TEST_CASE("evaluating a material against itself is perfect") {
  Rng rng(85);
  const MaterialSet mat = make_procedural_material(24, rng);
  const EvalReport rep = evaluate_pair(mat, mat, RotationMode::Fixed);
  REQUIRE(rep.attributes.size() == 4);
  CHECK(rep.attributes[0].attribute == "albedo");
  CHECK(rep.attributes[1].attribute == "normal");
  CHECK(rep.attributes[2].attribute == "roughness");
  CHECK(rep.attributes[3].attribute == "height");
  for (const AttributeScore& s : rep.attributes) {
    CHECK(s.ssim == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.mae == 0.0);
    CHECK(s.psnr == std::numeric_limits<double>::infinity());
    CHECK(s.rotation_quarter_turns == 0);
  }
}

TEST_CASE("rotation search recovers a quarter turn exactly") {
  Rng rng(86);
  const MaterialSet gt = make_procedural_material(24, rng);
  const MaterialSet pred = rotate_material_set(gt, -kPi / 2, Sampling::Nearest);

  const EvalReport searched = evaluate_pair(pred, gt, RotationMode::Search);
  for (const AttributeScore& s : searched.attributes) {
    CHECK(s.ssim == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.rotation_quarter_turns == 1);
  }

  const EvalReport fixed = evaluate_pair(pred, gt, RotationMode::Fixed);
  for (size_t i = 0; i < fixed.attributes.size(); ++i)
    CHECK(fixed.attributes[i].ssim < searched.attributes[i].ssim);
}

TEST_CASE("prediction resolution is adapted to the ground truth") {
  Rng rng(87);
  const MaterialSet gt = make_procedural_material(32, rng);
  MaterialSet pred;
  pred.albedo = resize_bilinear(gt.albedo, 16, 16);
  pred.normal.encoded = resize_bilinear(gt.normal.encoded, 16, 16);
  pred.roughness = resize_bilinear(gt.roughness, 16, 16);
  pred.height = resize_bilinear(gt.height, 16, 16);
  const EvalReport rep = evaluate_pair(pred, gt, RotationMode::Fixed);
  for (const AttributeScore& s : rep.attributes) {
    CHECK(s.ssim > 0.3);
    CHECK(s.mae < 0.2);
  }
}
