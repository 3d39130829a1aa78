#include "matkit/diffusion.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "matkit/geometry.hpp"
#include "matkit/resample.hpp"
#include "matkit/simd_kernels.hpp"

namespace matkit {

namespace {

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Fixed channel lifts: identity-dominant top blocks keep them provably
// left-invertible, the seeded perturbation makes the fourth channel carry
// information.
struct Lifts {
  Eigen::Matrix<double, 4, 3> l3;
  Eigen::Matrix<double, 4, 1> l1;
  Eigen::Matrix<double, 3, 4> p3;  // pseudo-inverses
  Eigen::Matrix<double, 1, 4> p1;
};

const Lifts& lifts() {
  static const Lifts m = [] {
    Lifts l;
    Rng rng(0x6d61746b69746c66ull);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 3; ++c)
        l.l3(r, c) = (r == c ? 1.0 : 0.0) + 0.1 * rng.uniform(-1.0, 1.0);
    l.l1(0, 0) = 1.0;
    for (int r = 1; r < 4; ++r) l.l1(r, 0) = 0.5 * rng.uniform(-1.0, 1.0);
    l.p3 = (l.l3.transpose() * l.l3).inverse() * l.l3.transpose();
    l.p1 = (l.l1.transpose() * l.l1).inverse() * l.l1.transpose();
    return l;
  }();
  return m;
}

// Per-pixel channel lift of a pooled map into 4 latent planes.
void lift_into(const Image& pooled, LatentStack& z, int first_channel) {
  const Lifts& m = lifts();
  const size_t n = pooled.plane_size();
  for (size_t i = 0; i < n; ++i) {
    for (int r = 0; r < 4; ++r) {
      double acc = 0;
      if (pooled.channels == 3)
        for (int c = 0; c < 3; ++c) acc += m.l3(r, c) * pooled.plane(c)[i];
      else
        acc = m.l1(r, 0) * pooled.plane(0)[i];
      z.plane(first_channel + r)[i] = acc;
    }
  }
}

Image unlift(const LatentStack& z, int first_channel, int channels) {
  const Lifts& m = lifts();
  Image out = Image::create(z.width, z.height, channels);
  const size_t n = z.plane_size();
  for (size_t i = 0; i < n; ++i) {
    for (int r = 0; r < channels; ++r) {
      double acc = 0;
      for (int c = 0; c < 4; ++c) {
        const double coef = channels == 3 ? m.p3(r, c) : m.p1(r, c);
        acc += coef * z.plane(first_channel + c)[i];
      }
      out.plane(r)[i] = clamp01(acc);
    }
  }
  return out;
}

void check_codec_input(const Image& img, int factor) {
  if (img.width != img.height)
    throw ValidationError("codec expects square inputs");
  if (img.width % factor != 0)
    throw ValidationError("image side must be divisible by the codec factor");
}

// Periodic (wrap) or zero-padded 3x3 box mean, the core of the toy
// denoisers.
LatentStack box3(const LatentStack& z, bool periodic) {
  LatentStack out = LatentStack::create(z.width, z.height);
  const int w = z.width, h = z.height;
  for (int c = 0; c < LatentStack::kChannels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            int sx = x + dx, sy = y + dy;
            if (periodic) {
              sx = (sx + w) % w;
              sy = (sy + h) % h;
            } else if (sx < 0 || sy < 0 || sx >= w || sy >= h) {
              continue;  // zero padding contributes nothing
            }
            s += z.at(sx, sy, c);
          }
        out.at(x, y, c) = s / 9.0;
      }
  return out;
}

// Shared toy-denoiser math: the implied clean-latent estimate is
// cond + box(z_t - sqrt(abar) cond), i.e. the condition as prior mean plus a
// smoothed residual; solving the forward equation for the noise gives eps.
LatentStack toy_eps(const LatentStack& z_t, int t, const LatentStack& cond,
                    const NoiseSchedule& schedule, bool periodic) {
  if (!z_t.same_shape(cond))
    throw ValidationError("denoiser condition shape mismatch");
  const double abar = schedule.alpha_bar_at(t);
  const double sa = std::sqrt(abar);
  const double sb = std::sqrt(1.0 - abar);
  if (sb <= 0) throw ValidationError("toy denoiser needs t >= 1");

  const auto& K = simd::kernels();
  const size_t n = z_t.data.size();
  LatentStack resid = LatentStack::create(z_t.width, z_t.height);
  K.scale_add(1.0, z_t.data.data(), -sa, cond.data.data(), resid.data.data(), n);
  LatentStack z0_hat = box3(resid, periodic);
  K.axpy(1.0, cond.data.data(), z0_hat.data.data(), n);
  LatentStack eps = LatentStack::create(z_t.width, z_t.height);
  K.scale_add(1.0 / sb, z_t.data.data(), -sa / sb, z0_hat.data.data(),
              eps.data.data(), n);
  return eps;
}

}  // namespace

LatentStack LatentStack::create(int w, int h, double fill) {
  if (w < 1 || h < 1) throw ValidationError("latent dims must be >= 1");
  LatentStack z;
  z.width = w;
  z.height = h;
  z.data.assign(static_cast<size_t>(kChannels) * w * h, fill);
  return z;
}

LatentStack StubCodec::encode(const MaterialSet& mat) const {
  if (factor < 1) throw ValidationError("codec factor must be >= 1");
  mat.validate();
  check_codec_input(mat.albedo, factor);

  const int side = mat.albedo.width / factor;
  LatentStack z = LatentStack::create(side, side);
  lift_into(downsample_box(mat.albedo, factor), z, 0);
  lift_into(downsample_box(mat.normal.encoded, factor), z, 4);
  lift_into(downsample_box(mat.roughness, factor), z, 8);
  lift_into(downsample_box(mat.height, factor), z, 12);
  return z;
}

LatentStack StubCodec::encode_condition(const Image& rgb, const Mask& mask) const {
  if (factor < 1) throw ValidationError("codec factor must be >= 1");
  if (rgb.channels != 3) throw ValidationError("condition image must be RGB");
  if (rgb.width != mask.width || rgb.height != mask.height)
    throw ValidationError("condition image and mask dims differ");
  check_codec_input(rgb, factor);

  Image masked = rgb;
  Image mask_img = Image::create(rgb.width, rgb.height, 1);
  Image luma = Image::create(rgb.width, rgb.height, 1);
  for (int y = 0; y < rgb.height; ++y)
    for (int x = 0; x < rgb.width; ++x) {
      const double m = mask.at(x, y) ? 1.0 : 0.0;
      mask_img.at(x, y) = m;
      for (int c = 0; c < 3; ++c) masked.at(x, y, c) *= m;
      luma.at(x, y) = 0.2126 * masked.at(x, y, 0) + 0.7152 * masked.at(x, y, 1) +
                      0.0722 * masked.at(x, y, 2);
    }

  const int side = rgb.width / factor;
  LatentStack z = LatentStack::create(side, side);
  lift_into(downsample_box(masked, factor), z, 0);
  Image flat_normal = Image::create(side, side, 3);
  for (size_t i = 0; i < flat_normal.plane_size(); ++i) {
    flat_normal.plane(0)[i] = 0.5;
    flat_normal.plane(1)[i] = 0.5;
    flat_normal.plane(2)[i] = 1.0;
  }
  lift_into(flat_normal, z, 4);
  lift_into(downsample_box(luma, factor), z, 8);
  lift_into(downsample_box(mask_img, factor), z, 12);
  return z;
}

MaterialSet StubCodec::decode(const LatentStack& z) const {
  MaterialSet mat;
  mat.albedo = upsample_nearest(unlift(z, 0, 3), factor);
  mat.normal.encoded = upsample_nearest(unlift(z, 4, 3), factor);
  mat.roughness = upsample_nearest(unlift(z, 8, 1), factor);
  mat.height = upsample_nearest(unlift(z, 12, 1), factor);
  return mat;
}

double NoiseSchedule::alpha_bar_at(int t) const {
  if (t == 0) return 1.0;
  if (t < 1 || t > T) throw ValidationError("timestep outside [0, T]");
  return alpha_bar[t - 1];
}

NoiseSchedule make_schedule(int T) {
  if (T < 1) throw ValidationError("schedule needs T >= 1");
  NoiseSchedule s;
  s.T = T;
  s.beta.resize(T);
  s.alpha_bar.resize(T);
  const double b0 = 1e-4, b1 = 2e-2;
  double prod = 1.0;
  for (int t = 0; t < T; ++t) {
    s.beta[t] = T > 1 ? b0 + (b1 - b0) * t / (T - 1) : b0;
    prod *= 1.0 - s.beta[t];
    s.alpha_bar[t] = prod;
  }
  return s;
}

std::vector<double> kv_injection_attention(const std::vector<double>& q,
                                           const std::vector<double>& k,
                                           const std::vector<double>& v,
                                           int l1, int l2, int d) {
  if (d < 1) throw ValidationError("attention head dim must be >= 1");
  if (l1 < 1 || l2 < 1) throw ValidationError("sequence lengths must be >= 1");
  if (q.size() != static_cast<size_t>(l1) * d ||
      k.size() != static_cast<size_t>(l2) * d ||
      v.size() != static_cast<size_t>(l2) * d)
    throw ValidationError("attention operand shape mismatch");

  const auto& Kn = simd::kernels();
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<double> out(static_cast<size_t>(l1) * d, 0.0);
  std::vector<double> logits(l2);
  for (int i = 0; i < l1; ++i) {
    const double* qi = q.data() + static_cast<size_t>(i) * d;
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < l2; ++j) {
      logits[j] = Kn.dot(qi, k.data() + static_cast<size_t>(j) * d, d) * inv_sqrt_d;
      max_logit = std::max(max_logit, logits[j]);
    }
    double denom = 0;
    for (int j = 0; j < l2; ++j) {
      logits[j] = std::exp(logits[j] - max_logit);
      denom += logits[j];
    }
    double* oi = out.data() + static_cast<size_t>(i) * d;
    for (int j = 0; j < l2; ++j) {
      const double p = logits[j] / denom;
      Kn.axpy(p, v.data() + static_cast<size_t>(j) * d, oi, d);
    }
  }
  return out;
}

LatentStack forward_diffuse(const LatentStack& z0, int t, const LatentStack& eps,
                            const NoiseSchedule& schedule) {
  if (!z0.same_shape(eps)) throw ValidationError("forward-process shape mismatch");
  if (t < 1 || t > schedule.T) throw ValidationError("timestep outside [1, T]");
  const double abar = schedule.alpha_bar_at(t);
  LatentStack out = LatentStack::create(z0.width, z0.height);
  simd::kernels().scale_add(std::sqrt(abar), z0.data.data(),
                            std::sqrt(1.0 - abar), eps.data.data(),
                            out.data.data(), z0.data.size());
  return out;
}

double diffusion_loss(const LatentStack& eps, const LatentStack& eps_hat) {
  if (!eps.same_shape(eps_hat)) throw ValidationError("loss shape mismatch");
  return simd::kernels().sum_sq_diff(eps.data.data(), eps_hat.data.data(),
                                     eps.data.size()) /
         static_cast<double>(eps.data.size());
}

LatentStack diffusion_loss_grad(const LatentStack& eps, const LatentStack& eps_hat) {
  if (!eps.same_shape(eps_hat)) throw ValidationError("loss shape mismatch");
  LatentStack g = LatentStack::create(eps.width, eps.height);
  const double s = 2.0 / static_cast<double>(eps.data.size());
  simd::kernels().scale_add(s, eps_hat.data.data(), -s, eps.data.data(),
                            g.data.data(), eps.data.size());
  return g;
}

Denoiser make_oracle_denoiser(const NoiseSchedule& schedule) {
  return [schedule](const LatentStack& z_t, int t, const LatentStack& cond) {
    if (!z_t.same_shape(cond))
      throw ValidationError("denoiser condition shape mismatch");
    const double abar = schedule.alpha_bar_at(t);
    const double sb = std::sqrt(1.0 - abar);
    if (sb <= 0) throw ValidationError("oracle denoiser needs t >= 1");
    LatentStack eps = LatentStack::create(z_t.width, z_t.height);
    simd::kernels().scale_add(1.0 / sb, z_t.data.data(), -std::sqrt(abar) / sb,
                              cond.data.data(), eps.data.data(), z_t.data.size());
    return eps;
  };
}

Denoiser make_conv_denoiser(const NoiseSchedule& schedule) {
  return [schedule](const LatentStack& z_t, int t, const LatentStack& cond) {
    return toy_eps(z_t, t, cond, schedule, true);
  };
}

Denoiser make_windowed_denoiser(const NoiseSchedule& schedule) {
  return [schedule](const LatentStack& z_t, int t, const LatentStack& cond) {
    return toy_eps(z_t, t, cond, schedule, false);
  };
}

LatentStack roll(const LatentStack& z, int dy, int dx) {
  const int w = z.width, h = z.height;
  auto wrap = [](int v, int n) {
    int m = v % n;
    return m < 0 ? m + n : m;
  };
  LatentStack out = LatentStack::create(w, h);
  for (int c = 0; c < LatentStack::kChannels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        out.at(x, y, c) = z.at(wrap(x - dx, w), wrap(y - dy, h), c);
  return out;
}

LatentStack ddim_step(const LatentStack& z_t, int t, int t_prev,
                      const Denoiser& denoiser, const LatentStack& condition,
                      const NoiseSchedule& schedule) {
  if (t_prev > t || t_prev < 0 || t > schedule.T)
    throw ValidationError("ddim_step needs T >= t >= t_prev >= 0");
  if (t_prev == t) return z_t;

  const double abar = schedule.alpha_bar_at(t);
  const double abar_prev = schedule.alpha_bar_at(t_prev);
  if (abar <= 0) throw ValidationError("alpha_bar vanished at the source step");

  const LatentStack eps = denoiser(z_t, t, condition);
  if (!eps.same_shape(z_t)) throw ValidationError("denoiser changed the shape");

  const auto& K = simd::kernels();
  const size_t n = z_t.data.size();
  const double sa = std::sqrt(abar);
  LatentStack z0_hat = LatentStack::create(z_t.width, z_t.height);
  K.scale_add(1.0 / sa, z_t.data.data(), -std::sqrt(1.0 - abar) / sa,
              eps.data.data(), z0_hat.data.data(), n);
  LatentStack out = LatentStack::create(z_t.width, z_t.height);
  K.scale_add(std::sqrt(abar_prev), z0_hat.data.data(),
              std::sqrt(1.0 - abar_prev), eps.data.data(), out.data.data(), n);
  return out;
}

LatentStack sample(const Denoiser& denoiser, const LatentStack& condition,
                   int width, int height, int steps, const NoiseSchedule& schedule,
                   NoiseRolling rolling, Rng& rng) {
  if (steps < 1) throw ValidationError("sampling needs steps >= 1");
  if (condition.width != width || condition.height != height)
    throw ValidationError("condition shape must match the sample shape");

  LatentStack z = LatentStack::create(width, height);
  for (double& v : z.data) v = rng.normal();

  // Timesteps round(T i / steps) for i = steps..0, collapsing duplicates.
  std::vector<int> ts;
  for (int i = steps; i >= 0; --i) {
    const int t = static_cast<int>(
        std::llround(static_cast<double>(schedule.T) * i / steps));
    if (ts.empty() || ts.back() != t) ts.push_back(t);
  }

  for (size_t i = 0; i + 1 < ts.size(); ++i) {
    if (rolling == NoiseRolling::On) {
      const int dy = static_cast<int>(rng.below(static_cast<uint64_t>(height)));
      const int dx = static_cast<int>(rng.below(static_cast<uint64_t>(width)));
      LatentStack zr = roll(z, dy, dx);
      const LatentStack cr = roll(condition, dy, dx);
      zr = ddim_step(zr, ts[i], ts[i + 1], denoiser, cr, schedule);
      z = roll(zr, -dy, -dx);
    } else {
      z = ddim_step(z, ts[i], ts[i + 1], denoiser, condition, schedule);
    }
  }
  return z;
}

}  // namespace matkit
