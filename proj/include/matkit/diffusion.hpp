#pragma once

#include <array>
#include <functional>
#include <vector>

#include "matkit/rng.hpp"
#include "matkit/types.hpp"

namespace matkit {

// Channel-concatenated latent: 4 channels per map, order
// albedo / normal / roughness / height.
struct LatentStack {
  static constexpr int kChannels = 16;
  int width = 0;
  int height = 0;
  std::vector<double> data;  // planar, kChannels * width * height

  static LatentStack create(int w, int h, double fill = 0.0);

  size_t plane_size() const { return static_cast<size_t>(width) * height; }
  double* plane(int c) { return data.data() + plane_size() * c; }
  const double* plane(int c) const { return data.data() + plane_size() * c; }
  double& at(int x, int y, int c) {
    return data[plane_size() * c + static_cast<size_t>(y) * width + x];
  }
  double at(int x, int y, int c) const {
    return data[plane_size() * c + static_cast<size_t>(y) * width + x];
  }
  bool same_shape(const LatentStack& o) const {
    return width == o.width && height == o.height;
  }
};

// Average-pool + fixed channel lift codec standing in for a learned
// autoencoder; exactly invertible up to the pooling.
struct StubCodec {
  int factor = 8;

  LatentStack encode(const MaterialSet& mat) const;
  // Masked condition image: albedo lift of rgb, flat-normal encoding, luma
  // broadcast, mask occupancy — one 4-channel block each.
  LatentStack encode_condition(const Image& rgb, const Mask& mask) const;
  MaterialSet decode(const LatentStack& z) const;
};

struct NoiseSchedule {
  int T = 0;
  std::vector<double> beta;       // beta[t-1] is step t
  std::vector<double> alpha_bar;  // alpha_bar[t-1] likewise

  // alpha_bar_at(0) = 1 by convention; otherwise alpha_bar[t-1].
  double alpha_bar_at(int t) const;
};

// Linear beta from 1e-4 to 2e-2 over T steps.
NoiseSchedule make_schedule(int T);

// softmax(Q Kᵀ / sqrt(d)) V for row-major q (l1 x d), k, v (l2 x d).
std::vector<double> kv_injection_attention(const std::vector<double>& q,
                                           const std::vector<double>& k,
                                           const std::vector<double>& v,
                                           int l1, int l2, int d);

LatentStack forward_diffuse(const LatentStack& z0, int t, const LatentStack& eps,
                            const NoiseSchedule& schedule);

double diffusion_loss(const LatentStack& eps, const LatentStack& eps_hat);
// d(loss)/d(eps_hat) = 2 (eps_hat - eps) / N, elementwise.
LatentStack diffusion_loss_grad(const LatentStack& eps, const LatentStack& eps_hat);

// (z, t, condition) -> predicted noise, same shape as z.
using Denoiser = std::function<LatentStack(const LatentStack&, int, const LatentStack&)>;

// Reads the clean latent straight from the condition argument and returns
// the exact noise implied by z_t; inverts the forward process by algebra.
Denoiser make_oracle_denoiser(const NoiseSchedule& schedule);
// Periodic 3x3 box smoother turned into a noise prediction; circular
// convolution makes it shift-equivariant.
Denoiser make_conv_denoiser(const NoiseSchedule& schedule);
// Same smoother with zero padding; the broken equivariance at borders is
// what noise rolling is measured against.
Denoiser make_windowed_denoiser(const NoiseSchedule& schedule);

LatentStack roll(const LatentStack& z, int dy, int dx);

// Deterministic eta = 0 update; t_prev == t returns z_t unchanged.
LatentStack ddim_step(const LatentStack& z_t, int t, int t_prev,
                      const Denoiser& denoiser, const LatentStack& condition,
                      const NoiseSchedule& schedule);

enum class NoiseRolling { Off, On };

// DDIM from pure noise over round(T*i/steps) timesteps. With rolling on,
// each step circularly shifts the latent (and condition) by a seeded random
// offset before the denoiser and shifts back after.
LatentStack sample(const Denoiser& denoiser, const LatentStack& condition,
                   int width, int height, int steps, const NoiseSchedule& schedule,
                   NoiseRolling rolling, Rng& rng);

}  // namespace matkit
