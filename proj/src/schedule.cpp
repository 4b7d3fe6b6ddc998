#include "texpipe/schedule.h"

#include <charconv>
#include <cmath>

#include "texpipe/errors.h"

namespace texpipe {

namespace {

void derive_from_betas(DiffusionSchedule* s) {
  int t_count = (int)s->betas.size();
  s->alphas.resize(t_count);
  s->alpha_bars.resize(t_count);
  s->sqrt_alpha_bars.resize(t_count);
  double product = 1;
  for (int t = 0; t < t_count; t++) {
    s->alphas[t] = 1.0 - s->betas[t];
    product *= s->alphas[t];
    s->alpha_bars[t] = product;
    s->sqrt_alpha_bars[t] = std::sqrt(product);
  }
}

void check_timestep(int t, const DiffusionSchedule& schedule) {
  if (t < 0 || t >= schedule.steps()) throw input_error("timestep out of range");
}

void check_shapes(const LatentSample& a, const LatentSample& b) {
  if (a.shape != b.shape || a.values.size() != b.values.size())
    throw input_error("latent shapes do not match");
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

DiffusionSchedule linear_beta_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 2) throw input_error("schedule needs at least 2 steps");
  if (!(beta_start > 0) || !(beta_start <= beta_end) || !(beta_end < 1))
    throw input_error("beta range must satisfy 0 < start <= end < 1");
  DiffusionSchedule s;
  s.betas.resize(steps);
  double sqrt_start = std::sqrt(beta_start), sqrt_end = std::sqrt(beta_end);
  for (int t = 0; t < steps; t++) {
    double root = sqrt_start + (sqrt_end - sqrt_start) * ((double)t / (steps - 1));
    s.betas[t] = root * root;
  }
  derive_from_betas(&s);
  return s;
}

DiffusionSchedule rescale_zero_terminal_snr(const DiffusionSchedule& schedule) {
  int t_count = schedule.steps();
  if (t_count < 2) throw input_error("schedule needs at least 2 steps");
  double first = schedule.sqrt_alpha_bars.front();
  double last = schedule.sqrt_alpha_bars.back();
  if (!(last > 0)) throw input_error("terminal sqrt alpha bar must be positive");
  if (first == last) throw input_error("degenerate schedule: flat sqrt alpha bar");

  DiffusionSchedule out;
  out.sqrt_alpha_bars.resize(t_count);
  out.alpha_bars.resize(t_count);
  for (int t = 0; t < t_count; t++) {
    double shifted = (schedule.sqrt_alpha_bars[t] - last) * first / (first - last);
    out.sqrt_alpha_bars[t] = shifted;
    out.alpha_bars[t] = shifted * shifted;
  }
  out.sqrt_alpha_bars[t_count - 1] = 0;  // exact, not a rounded difference
  out.alpha_bars[t_count - 1] = 0;

  out.alphas.resize(t_count);
  out.betas.resize(t_count);
  out.alphas[0] = out.alpha_bars[0];
  for (int t = 1; t < t_count; t++) out.alphas[t] = out.alpha_bars[t] / out.alpha_bars[t - 1];
  out.alphas[t_count - 1] = 0;  // avoids the 0/previous ratio
  for (int t = 0; t < t_count; t++) out.betas[t] = 1.0 - out.alphas[t];
  return out;
}

LatentSample LatentSample::zeros(std::array<int, 4> shape) {
  for (int d : shape)
    if (d <= 0) throw input_error("latent shape must be positive");
  LatentSample sample;
  sample.shape = shape;
  sample.values.assign((size_t)shape[0] * shape[1] * shape[2] * shape[3], 0.0);
  return sample;
}

LatentSample add_noise(const LatentSample& x0, const LatentSample& eps, int t,
                       const DiffusionSchedule& schedule) {
  check_shapes(x0, eps);
  check_timestep(t, schedule);
  double a = schedule.sqrt_alpha_bars[t];
  double b = std::sqrt(1.0 - schedule.alpha_bars[t]);
  LatentSample out = x0;
  for (size_t i = 0; i < out.values.size(); i++)
    out.values[i] = a * x0.values[i] + b * eps.values[i];
  return out;
}

LatentSample velocity(const LatentSample& x0, const LatentSample& eps, int t,
                      const DiffusionSchedule& schedule) {
  check_shapes(x0, eps);
  check_timestep(t, schedule);
  double a = schedule.sqrt_alpha_bars[t];
  double b = std::sqrt(1.0 - schedule.alpha_bars[t]);
  LatentSample out = x0;
  for (size_t i = 0; i < out.values.size(); i++)
    out.values[i] = a * eps.values[i] - b * x0.values[i];
  return out;
}

LatentSample v_to_epsilon(const LatentSample& v, const LatentSample& x_t, int t,
                          const DiffusionSchedule& schedule) {
  check_shapes(v, x_t);
  check_timestep(t, schedule);
  double a = schedule.sqrt_alpha_bars[t];
  double b = std::sqrt(1.0 - schedule.alpha_bars[t]);
  LatentSample out = v;
  for (size_t i = 0; i < out.values.size(); i++)
    out.values[i] = a * v.values[i] + b * x_t.values[i];
  return out;
}

LatentSample x0_from_v(const LatentSample& v, const LatentSample& x_t, int t,
                       const DiffusionSchedule& schedule) {
  check_shapes(v, x_t);
  check_timestep(t, schedule);
  double a = schedule.sqrt_alpha_bars[t];
  double b = std::sqrt(1.0 - schedule.alpha_bars[t]);
  LatentSample out = v;
  for (size_t i = 0; i < out.values.size(); i++)
    out.values[i] = a * x_t.values[i] - b * v.values[i];
  return out;
}

double loss_4v(const LatentSample& eps_true, const LatentSample& eps_pred) {
  check_shapes(eps_true, eps_pred);
  if (eps_true.values.empty()) throw input_error("empty latent");
  double sum = 0;
  for (size_t i = 0; i < eps_true.values.size(); i++) {
    double d = eps_pred.values[i] - eps_true.values[i];
    sum += d * d;
  }
  return sum / (double)eps_true.values.size();
}

std::string schedule_csv(const DiffusionSchedule& schedule) {
  std::string out = "t,beta,alpha,alpha_bar,sqrt_alpha_bar,snr\n";
  for (int t = 0; t < schedule.steps(); t++) {
    out += std::to_string(t);
    out += ',';
    append_double(out, schedule.betas[t]);
    out += ',';
    append_double(out, schedule.alphas[t]);
    out += ',';
    append_double(out, schedule.alpha_bars[t]);
    out += ',';
    append_double(out, schedule.sqrt_alpha_bars[t]);
    out += ',';
    double ab = schedule.alpha_bars[t];
    if (ab >= 1) {
      out += "inf";
    } else {
      append_double(out, ab / (1.0 - ab));
    }
    out += '\n';
  }
  return out;
}

}  // namespace texpipe
