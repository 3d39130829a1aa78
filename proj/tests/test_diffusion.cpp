#include <doctest.h>

#include <cmath>
#include <vector>

#include "matkit/diffusion.hpp"
#include "matkit/procgen.hpp"
#include "matkit/resample.hpp"
#include "matkit/rng.hpp"
#include "matkit/types.hpp"

using namespace matkit;

namespace {

LatentStack random_latent(int w, int h, uint64_t seed) {
  Rng rng(seed);
  LatentStack z = LatentStack::create(w, h);
  for (double& v : z.data) v = rng.normal();
  return z;
}

double max_abs_diff(const LatentStack& a, const LatentStack& b) {
  double m = 0;
  for (size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

// Schedule with hand-picked alpha_bar values for closed-form checks.
NoiseSchedule fixed_schedule(std::vector<double> alpha_bar) {
  NoiseSchedule s;
  s.T = static_cast<int>(alpha_bar.size());
  s.beta.assign(alpha_bar.size(), 0.0);
  s.alpha_bar = std::move(alpha_bar);
  return s;
}

}  // namespace

TEST_CASE("codec maps a constant material to constant latent planes") {
  MaterialSet mat;
  mat.albedo = Image::create(16, 16, 3, 0.25);
  mat.normal.encoded = Image::create(16, 16, 3, 0.5);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) mat.normal.encoded.at(x, y, 2) = 1.0;
  mat.roughness = Image::create(16, 16, 1, 0.6);
  mat.height = Image::create(16, 16, 1, 0.3);
  StubCodec codec;
  codec.factor = 8;
  const LatentStack z = codec.encode(mat);
  CHECK(z.width == 2);
  CHECK(z.height == 2);
  for (int c = 0; c < LatentStack::kChannels; ++c) {
    const double v = z.plane(c)[0];
    for (size_t i = 1; i < z.plane_size(); ++i) CHECK(z.plane(c)[i] == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("decode inverts encode on block constant materials") {
  Rng rng(60);
  const int factor = 4;
  MaterialSet blocky = make_procedural_material(8, rng);
  // Expand to 32 so each 4x4 block is constant by construction.
  MaterialSet mat;
  mat.albedo = upsample_nearest(blocky.albedo, factor);
  mat.normal.encoded = upsample_nearest(blocky.normal.encoded, factor);
  mat.roughness = upsample_nearest(blocky.roughness, factor);
  mat.height = upsample_nearest(blocky.height, factor);
  StubCodec codec;
  codec.factor = factor;
  const MaterialSet back = codec.decode(codec.encode(mat));
  double m = 0;
  for (size_t i = 0; i < mat.albedo.data.size(); ++i)
    m = std::max(m, std::abs(back.albedo.data[i] - mat.albedo.data[i]));
  for (size_t i = 0; i < mat.normal.encoded.data.size(); ++i)
    m = std::max(m, std::abs(back.normal.encoded.data[i] - mat.normal.encoded.data[i]));
  for (size_t i = 0; i < mat.roughness.data.size(); ++i)
    m = std::max(m, std::abs(back.roughness.data[i] - mat.roughness.data[i]));
  for (size_t i = 0; i < mat.height.data.size(); ++i)
    m = std::max(m, std::abs(back.height.data[i] - mat.height.data[i]));
  CHECK(m <= 1e-5);
}

TEST_CASE("decode of an arbitrary material is its blockwise mean") {
  Rng rng(61);
  const MaterialSet mat = make_procedural_material(32, rng);
  StubCodec codec;
  codec.factor = 8;
  const MaterialSet back = codec.decode(codec.encode(mat));
  const Image oracle = upsample_nearest(downsample_box(mat.albedo, 8), 8);
  double m = 0;
  for (size_t i = 0; i < oracle.data.size(); ++i)
    m = std::max(m, std::abs(back.albedo.data[i] - oracle.data[i]));
  CHECK(m <= 1e-5);
  const Image oracle_h = upsample_nearest(downsample_box(mat.height, 8), 8);
  m = 0;
  for (size_t i = 0; i < oracle_h.data.size(); ++i)
    m = std::max(m, std::abs(back.height.data[i] - oracle_h.data[i]));
  CHECK(m <= 1e-5);
}

TEST_CASE("condition encoding kills unmasked pixels and stores occupancy") {
  Image rgb = Image::create(8, 8, 3, 0.8);
  Mask mask = Mask::create(8, 8, 0);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 4; ++x) mask.at(x, y) = 1;  // left half visible
  StubCodec codec;
  codec.factor = 4;
  const LatentStack zc = codec.encode_condition(rgb, mask);
  CHECK(zc.width == 2);

  // Fully masked rgb block encodes like the raw value, empty block like 0.
  MaterialSet probe;
  probe.albedo = Image::create(8, 8, 3, 0.8);
  probe.normal.encoded = Image::create(8, 8, 3, 0.5);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) probe.normal.encoded.at(x, y, 2) = 1.0;
  probe.roughness = Image::create(8, 8, 1, 0.5);
  probe.height = Image::create(8, 8, 1, 0.5);
  const LatentStack zm = codec.encode(probe);
  for (int c = 0; c < 4; ++c) {
    CHECK(zc.at(0, 0, c) == doctest::Approx(zm.at(0, 0, c)).epsilon(1e-9));
    CHECK(zc.at(1, 0, c) == doctest::Approx(0.0).epsilon(1e-9));
    // The normal block carries the flat-normal lift on both halves.
    CHECK(zc.at(0, 0, 4 + c) == doctest::Approx(zm.at(0, 0, 4 + c)).epsilon(1e-9));
    CHECK(zc.at(1, 1, 4 + c) == doctest::Approx(zm.at(1, 1, 4 + c)).epsilon(1e-9));
  }
  // Mask occupancy block: 1 on the visible half, 0 elsewhere, scaled by the
  // single-channel lift whose first coefficient is 1.
  CHECK(zc.at(0, 0, 12) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(zc.at(1, 0, 12) == doctest::Approx(0.0).epsilon(1e-9));

  CHECK_THROWS_AS(codec.encode_condition(Image::create(8, 8, 1, 0.5), mask),
                  ValidationError);
  StubCodec bad;
  bad.factor = 3;
  CHECK_THROWS_AS(bad.encode_condition(rgb, mask), ValidationError);
}

TEST_CASE("attention with a single key returns that value row") {
  const std::vector<double> q = {3.0, -1.0, 0.5};
  const std::vector<double> k = {0.2, 0.4, 0.6};
  const std::vector<double> v = {9.0, 8.0, 7.0};
  const auto out = kv_injection_attention(q, k, v, 1, 1, 3);
  REQUIRE(out.size() == 3);
  CHECK(out[0] == doctest::Approx(9.0));
  CHECK(out[1] == doctest::Approx(8.0));
  CHECK(out[2] == doctest::Approx(7.0));
}

TEST_CASE("orthogonal queries average the value rows uniformly") {
  const std::vector<double> q = {0.0, 0.0, 5.0};
  const std::vector<double> k = {1, 0, 0, 0, 1, 0, -1, 0, 0};  // 3 keys, d = 3
  const std::vector<double> v = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  const auto out = kv_injection_attention(q, k, v, 1, 3, 3);
  for (int i = 0; i < 3; ++i) CHECK(out[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("attention softmax worked example") {
  const std::vector<double> q = {1.0, 0.0};
  const std::vector<double> k = {2.0, 0.0, 0.0, 2.0};
  const std::vector<double> v = {1.0, 0.0, 0.0, 1.0};
  const auto out = kv_injection_attention(q, k, v, 1, 2, 2);
  REQUIRE(out.size() == 2);
  CHECK(std::abs(out[0] - 0.8044) <= 5e-4);
  CHECK(std::abs(out[1] - 0.1956) <= 5e-4);
  CHECK(out[0] + out[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("attention rows are convex combinations for any key length") {
  Rng rng(62);
  const int l1 = 3, d = 4;
  std::vector<double> q(static_cast<size_t>(l1) * d);
  for (double& x : q) x = rng.normal();
  for (int l2 : {1, 16, 256}) {
    std::vector<double> k(static_cast<size_t>(l2) * d), v(static_cast<size_t>(l2) * d, 1.0);
    for (double& x : k) x = rng.normal();
    const auto out = kv_injection_attention(q, k, v, l1, l2, d);
    REQUIRE(out.size() == static_cast<size_t>(l1) * d);
    // With all-ones values every output element is the row sum of the
    // softmax, which must be 1.
    for (double x : out) CHECK(std::abs(x - 1.0) <= 1e-6);
  }
  CHECK_THROWS_AS(kv_injection_attention(q, q, q, l1, l1, 0), ValidationError);
}

TEST_CASE("linear schedule endpoints and monotonicity") {
  const NoiseSchedule s = make_schedule(1000);
  CHECK(s.beta.front() == doctest::Approx(1e-4));
  CHECK(s.beta.back() == doctest::Approx(2e-2));
  CHECK(s.alpha_bar_at(0) == 1.0);
  CHECK(s.alpha_bar_at(1) == doctest::Approx(1.0 - 1e-4));
  for (int t = 2; t <= 1000; ++t) CHECK(s.alpha_bar_at(t) < s.alpha_bar_at(t - 1));
  CHECK(s.alpha_bar_at(1000) < 0.01);

  const NoiseSchedule tiny = make_schedule(1);
  CHECK(tiny.beta.size() == 1);
  CHECK(tiny.beta[0] == doctest::Approx(1e-4));
  CHECK(tiny.alpha_bar_at(1) == doctest::Approx(1.0 - 1e-4));
  CHECK_THROWS_AS(make_schedule(0), ValidationError);
  CHECK_THROWS_AS(s.alpha_bar_at(1001), ValidationError);
}

TEST_CASE("forward process closed form values") {
  const NoiseSchedule s = fixed_schedule({1.0, 0.25, 0.0});
  LatentStack z0 = LatentStack::create(1, 1, 2.0);
  LatentStack eps = LatentStack::create(1, 1, 1.0);

  const LatentStack keep = forward_diffuse(z0, 1, eps, s);
  for (double v : keep.data) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));

  const LatentStack mid = forward_diffuse(z0, 2, eps, s);
  for (double v : mid.data) CHECK(v == doctest::Approx(1.8660254037844386).epsilon(1e-9));

  const LatentStack pure = forward_diffuse(z0, 3, eps, s);
  for (double v : pure.data) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(forward_diffuse(z0, 0, eps, s), ValidationError);
  CHECK_THROWS_AS(forward_diffuse(z0, 4, eps, s), ValidationError);
}

TEST_CASE("forward process variance matches one minus alpha bar") {
  const NoiseSchedule s = make_schedule(100);
  const LatentStack z0 = LatentStack::create(1, 1, 0.7);
  Rng rng(63);
  for (int t : {1, 50, 100}) {
    const double abar = s.alpha_bar_at(t);
    const double expect_var = 1.0 - abar;
    const int M = 4000;
    double sum = 0, sum_sq = 0;
    int n = 0;
    for (int m = 0; m < M; ++m) {
      LatentStack eps = LatentStack::create(1, 1);
      for (double& v : eps.data) v = rng.normal();
      const LatentStack zt = forward_diffuse(z0, t, eps, s);
      for (double v : zt.data) {
        sum += v;
        sum_sq += v * v;
        ++n;
      }
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    const double se = expect_var * std::sqrt(2.0 / (n - 1));
    CHECK(std::abs(var - expect_var) <= 3 * se + 1e-12);
    CHECK(std::abs(mean - std::sqrt(abar) * 0.7) <= 4 * std::sqrt(expect_var / n) + 1e-12);
  }
}

TEST_CASE("loss frozen values") {
  LatentStack a = LatentStack::create(1, 1, 0.0);
  LatentStack b = LatentStack::create(1, 1, 0.0);
  CHECK(diffusion_loss(a, b) == 0.0);

  for (double& v : b.data) v = 1.0;
  CHECK(diffusion_loss(a, b) == doctest::Approx(1.0).epsilon(1e-12));

  // Pairwise pattern eps = [0,2], eps_hat = [1,0] tiled across the stack:
  // mean of (1, 4) = 2.5.
  LatentStack eps = LatentStack::create(1, 1);
  LatentStack eps_hat = LatentStack::create(1, 1);
  for (size_t i = 0; i < eps.data.size(); ++i) {
    eps.data[i] = (i % 2 == 0) ? 0.0 : 2.0;
    eps_hat.data[i] = (i % 2 == 0) ? 1.0 : 0.0;
  }
  CHECK(diffusion_loss(eps, eps_hat) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(diffusion_loss(eps, eps) == 0.0);
}

TEST_CASE("loss gradient matches central finite differences") {
  const LatentStack eps = random_latent(1, 1, 64);
  LatentStack eps_hat = random_latent(1, 1, 65);
  const LatentStack grad = diffusion_loss_grad(eps, eps_hat);
  const double h = 1e-6;
  for (size_t i = 0; i < eps_hat.data.size(); ++i) {
    LatentStack plus = eps_hat, minus = eps_hat;
    plus.data[i] += h;
    minus.data[i] -= h;
    const double fd = (diffusion_loss(eps, plus) - diffusion_loss(eps, minus)) / (2 * h);
    const double scale = std::max(1e-8, std::abs(fd));
    CHECK(std::abs(grad.data[i] - fd) / scale <= 1e-5);
  }
}

TEST_CASE("rolling is a pure permutation with an exact inverse") {
  const LatentStack z = random_latent(5, 3, 66);
  const LatentStack r = roll(z, 2, 4);
  CHECK(max_abs_diff(roll(r, -2, -4), z) == 0.0);
  CHECK(max_abs_diff(roll(z, 0, 0), z) == 0.0);
  CHECK(max_abs_diff(roll(z, 3, 5), z) == 0.0);  // full wrap
  CHECK(max_abs_diff(roll(z, -3, -5), z) == 0.0);
  CHECK(r.at(4, 2, 0) == z.at(0, 0, 0));
}

TEST_CASE("oracle denoiser recovers the true noise and clean latent") {
  const NoiseSchedule s = make_schedule(50);
  const LatentStack z0 = random_latent(4, 4, 67);
  const LatentStack eps = random_latent(4, 4, 68);
  const Denoiser oracle = make_oracle_denoiser(s);
  const LatentStack z_t = forward_diffuse(z0, 50, eps, s);
  const LatentStack eps_hat = oracle(z_t, 50, z0);
  CHECK(max_abs_diff(eps_hat, eps) <= 1e-9);

  const LatentStack z_back = ddim_step(z_t, 50, 0, oracle, z0, s);
  CHECK(max_abs_diff(z_back, z0) <= 1e-9);

  // t_prev == t is the identity.
  const LatentStack same = ddim_step(z_t, 50, 50, oracle, z0, s);
  CHECK(max_abs_diff(same, z_t) == 0.0);
}

TEST_CASE("ten step oracle sampling recovers the conditioned latent") {
  const NoiseSchedule s = make_schedule(1000);
  const LatentStack z0 = random_latent(6, 6, 69);
  const Denoiser oracle = make_oracle_denoiser(s);
  Rng rng(70);
  const LatentStack out = sample(oracle, z0, 6, 6, 10, s, NoiseRolling::Off, rng);
  CHECK(max_abs_diff(out, z0) <= 1e-4);
}

TEST_CASE("conv denoiser commutes with circular shifts") {
  const NoiseSchedule s = make_schedule(100);
  const Denoiser conv = make_conv_denoiser(s);
  const Denoiser windowed = make_windowed_denoiser(s);
  const LatentStack z = random_latent(8, 8, 71);
  const LatentStack cond = random_latent(8, 8, 72);
  const int dy = 3, dx = 5, t = 60;

  const LatentStack lhs = conv(roll(z, dy, dx), t, roll(cond, dy, dx));
  const LatentStack rhs = roll(conv(z, t, cond), dy, dx);
  CHECK(max_abs_diff(lhs, rhs) <= 1e-12);

  const LatentStack wl = windowed(roll(z, dy, dx), t, roll(cond, dy, dx));
  const LatentStack wr = roll(windowed(z, t, cond), dy, dx);
  CHECK(max_abs_diff(wl, wr) > 1e-6);
}

TEST_CASE("rolling is a no-op for the shift equivariant denoiser") {
  const NoiseSchedule s = make_schedule(200);
  const Denoiser conv = make_conv_denoiser(s);
  const LatentStack cond = random_latent(8, 8, 73);
  Rng rng_off(99), rng_on(99);
  const LatentStack off = sample(conv, cond, 8, 8, 6, s, NoiseRolling::Off, rng_off);
  const LatentStack on = sample(conv, cond, 8, 8, 6, s, NoiseRolling::On, rng_on);
  CHECK(max_abs_diff(on, off) <= 1e-9);
}

TEST_CASE("sampling is deterministic in the rng seed") {
  const NoiseSchedule s = make_schedule(100);
  const Denoiser conv = make_conv_denoiser(s);
  const LatentStack cond = random_latent(4, 4, 74);
  Rng a(5), b(5), c(6);
  const LatentStack s1 = sample(conv, cond, 4, 4, 5, s, NoiseRolling::On, a);
  const LatentStack s2 = sample(conv, cond, 4, 4, 5, s, NoiseRolling::On, b);
  const LatentStack s3 = sample(conv, cond, 4, 4, 5, s, NoiseRolling::On, c);
  CHECK(max_abs_diff(s1, s2) == 0.0);
  CHECK(max_abs_diff(s1, s3) > 0.0);
}

TEST_CASE("sampler validates its arguments") {
  const NoiseSchedule s = make_schedule(10);
  const Denoiser oracle = make_oracle_denoiser(s);
  const LatentStack cond = LatentStack::create(4, 4, 0.0);
  Rng rng(1);
  CHECK_THROWS_AS(sample(oracle, cond, 4, 4, 0, s, NoiseRolling::Off, rng),
                  ValidationError);
  CHECK_THROWS_AS(sample(oracle, cond, 8, 8, 5, s, NoiseRolling::Off, rng),
                  ValidationError);
  CHECK_THROWS_AS(ddim_step(cond, 0, 5, oracle, cond, s), ValidationError);
}
