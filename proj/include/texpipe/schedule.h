#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace texpipe {

// Discrete diffusion noise schedule: betas[t] with derived alphas,
// cumulative products, and their square roots, t = 0..T-1.
struct DiffusionSchedule {
  std::vector<double> betas;
  std::vector<double> alphas;
  std::vector<double> alpha_bars;
  std::vector<double> sqrt_alpha_bars;

  int steps() const { return (int)betas.size(); }
};

// Scaled-linear schedule: betas linearly spaced in sqrt-beta space,
// beta_t = (sqrt(b0) + t/(T-1) * (sqrt(bT) - sqrt(b0)))^2.
DiffusionSchedule linear_beta_schedule(int steps = 1000, double beta_start = 0.00085,
                                       double beta_end = 0.012);

// Shifts and scales sqrt(alpha_bar) linearly so the terminal value is
// exactly zero while the first stays put, then rederives betas from
// consecutive ratios (the terminal alpha is assigned zero directly).
DiffusionSchedule rescale_zero_terminal_snr(const DiffusionSchedule& schedule);

// Flat tensor of latents; the shape (batch, views, tokens, channels) is
// carried for consistency checks but never interpreted.
struct LatentSample {
  std::array<int, 4> shape{0, 0, 0, 0};
  std::vector<double> values;

  static LatentSample zeros(std::array<int, 4> shape);
  size_t size() const { return values.size(); }
};

// x_t = sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * eps
LatentSample add_noise(const LatentSample& x0, const LatentSample& eps, int t,
                       const DiffusionSchedule& schedule);

// v = sqrt(alpha_bar_t) * eps - sqrt(1 - alpha_bar_t) * x0
LatentSample velocity(const LatentSample& x0, const LatentSample& eps, int t,
                      const DiffusionSchedule& schedule);

// eps = sqrt(alpha_bar_t) * v + sqrt(1 - alpha_bar_t) * x_t
LatentSample v_to_epsilon(const LatentSample& v, const LatentSample& x_t, int t,
                          const DiffusionSchedule& schedule);

// x0 = sqrt(alpha_bar_t) * x_t - sqrt(1 - alpha_bar_t) * v
LatentSample x0_from_v(const LatentSample& v, const LatentSample& x_t, int t,
                       const DiffusionSchedule& schedule);

// Mean squared error between predicted and true noise.
double loss_4v(const LatentSample& eps_true, const LatentSample& eps_pred);

// CSV table with one row per step: t, beta, alpha, alpha_bar, sqrt_alpha_bar, snr.
std::string schedule_csv(const DiffusionSchedule& schedule);

}  // namespace texpipe
