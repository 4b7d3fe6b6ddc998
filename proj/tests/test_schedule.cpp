#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.h"
#include "texpipe/errors.h"
#include "texpipe/schedule.h"
#include "util.h"

using namespace texpipe;

namespace {

LatentSample random_latent(std::array<int, 4> shape, std::mt19937_64& rng) {
  LatentSample s = LatentSample::zeros(shape);
  for (auto& v : s.values) v = 4.0 * testutil::unit(rng) - 2.0;
  return s;
}

double max_abs_diff(const LatentSample& a, const LatentSample& b) {
  double worst = 0;
  for (size_t i = 0; i < a.values.size(); i++)
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  return worst;
}

}  // namespace

TEST_CASE("two-step schedule hits both beta endpoints") {
  DiffusionSchedule s = linear_beta_schedule(2);
  REQUIRE(s.steps() == 2);
  CHECK(s.betas[0] == 0.00085);
  CHECK(s.betas[1] == 0.012);
  CHECK(s.alphas[0] == 1.0 - 0.00085);
  CHECK(s.alpha_bars[1] == s.alphas[0] * s.alphas[1]);

  // Arbitrary ranges reproduce the endpoints to rounding error.
  DiffusionSchedule odd = linear_beta_schedule(2, 0.001, 0.5);
  CHECK(odd.betas[0] == doctest::Approx(0.001).epsilon(1e-15));
  CHECK(odd.betas[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("betas interpolate linearly in square-root space") {
  int steps = 101;
  DiffusionSchedule s = linear_beta_schedule(steps, 0.002, 0.03);
  double s0 = std::sqrt(0.002), s1 = std::sqrt(0.03);
  for (int t = 0; t < steps; t++) {
    double root = s0 + (s1 - s0) * ((double)t / (steps - 1));
    CHECK(std::sqrt(s.betas[t]) == doctest::Approx(root).epsilon(1e-14));
  }
  // Midpoint lands exactly halfway between the square roots.
  CHECK(std::sqrt(s.betas[50]) == doctest::Approx((s0 + s1) / 2).epsilon(1e-14));
}

TEST_CASE("derived arrays follow the cumulative product") {
  DiffusionSchedule s = linear_beta_schedule();
  REQUIRE(s.steps() == 1000);
  CHECK(s.betas[0] == 0.00085);
  CHECK(s.betas[999] == 0.012);

  double product = 1;
  for (int t = 0; t < 1000; t++) {
    CHECK(s.alphas[t] == 1.0 - s.betas[t]);
    product *= 1.0 - s.betas[t];
    CHECK(s.alpha_bars[t] == doctest::Approx(product).epsilon(1e-12));
    CHECK(s.sqrt_alpha_bars[t] == doctest::Approx(std::sqrt(product)).epsilon(1e-12));
    CHECK(s.alpha_bars[t] > 0);
    CHECK(s.alpha_bars[t] < 1);
    if (t > 0) CHECK(s.alpha_bars[t] < s.alpha_bars[t - 1]);
  }
}

TEST_CASE("schedule construction rejects bad ranges") {
  CHECK_THROWS_WITH_AS(linear_beta_schedule(1), "schedule needs at least 2 steps", input_error);
  CHECK_THROWS_WITH_AS(linear_beta_schedule(1000, 0.0, 0.012),
                       "beta range must satisfy 0 < start <= end < 1", input_error);
  CHECK_THROWS_WITH_AS(linear_beta_schedule(1000, 0.02, 0.012),
                       "beta range must satisfy 0 < start <= end < 1", input_error);
  CHECK_THROWS_WITH_AS(linear_beta_schedule(1000, 0.00085, 1.0),
                       "beta range must satisfy 0 < start <= end < 1", input_error);
  CHECK_THROWS_WITH_AS(linear_beta_schedule(1000, -0.1, 0.012),
                       "beta range must satisfy 0 < start <= end < 1", input_error);
}

TEST_CASE("zero-terminal rescale zeroes the end and preserves the start") {
  DiffusionSchedule base = linear_beta_schedule();
  DiffusionSchedule out = rescale_zero_terminal_snr(base);
  REQUIRE(out.steps() == 1000);

  CHECK(out.sqrt_alpha_bars[999] == 0.0);
  CHECK(out.alpha_bars[999] == 0.0);
  CHECK(out.alphas[999] == 0.0);
  CHECK(out.betas[999] == 1.0);
  CHECK(std::abs(out.sqrt_alpha_bars[0] - base.sqrt_alpha_bars[0]) <= 1e-12);

  // Elementwise agreement with the independently coded rescale recipe.
  std::vector<double> expect = oracle::rescale_terminal_zero(base.sqrt_alpha_bars);
  for (int t = 0; t < 999; t++)
    CHECK(std::abs(out.sqrt_alpha_bars[t] - expect[t]) <= 1e-12);
  CHECK(expect.back() == doctest::Approx(0.0).scale(1).epsilon(1e-15));

  // Monotone signal level, hence monotone SNR, with SNR exactly 0 at the end.
  for (int t = 1; t < 1000; t++) {
    CHECK(out.alpha_bars[t] < out.alpha_bars[t - 1]);
    double snr_prev = out.alpha_bars[t - 1] / (1.0 - out.alpha_bars[t - 1]);
    double snr = out.alpha_bars[t] / (1.0 - out.alpha_bars[t]);
    CHECK(snr < snr_prev);
  }
  CHECK(out.alpha_bars[999] / (1.0 - out.alpha_bars[999]) == 0.0);

  // Betas rederive from consecutive ratios away from the terminal step.
  CHECK(out.alphas[0] == out.alpha_bars[0]);
  for (int t = 1; t < 999; t++) {
    CHECK(out.alphas[t] == out.alpha_bars[t] / out.alpha_bars[t - 1]);
    CHECK(out.betas[t] == 1.0 - out.alphas[t]);
    CHECK(out.betas[t] > 0);
    CHECK(out.betas[t] < 1);
  }
}

TEST_CASE("rescale rejects degenerate schedules") {
  DiffusionSchedule flat;
  flat.betas = {0.1, 0.1};
  flat.alphas = {0.9, 0.9};
  flat.alpha_bars = {0.25, 0.25};
  flat.sqrt_alpha_bars = {0.5, 0.5};
  CHECK_THROWS_WITH_AS(rescale_zero_terminal_snr(flat),
                       "degenerate schedule: flat sqrt alpha bar", input_error);

  DiffusionSchedule stub;
  stub.betas = {0.1};
  stub.alphas = {0.9};
  stub.alpha_bars = {0.9};
  stub.sqrt_alpha_bars = {std::sqrt(0.9)};
  CHECK_THROWS_WITH_AS(rescale_zero_terminal_snr(stub), "schedule needs at least 2 steps",
                       input_error);

  // A rescaled schedule already ends at zero signal and cannot be rescaled again.
  DiffusionSchedule once = rescale_zero_terminal_snr(linear_beta_schedule(10));
  CHECK_THROWS_WITH_AS(rescale_zero_terminal_snr(once),
                       "terminal sqrt alpha bar must be positive", input_error);
}

TEST_CASE("latent zeros carries its shape and rejects empty dims") {
  LatentSample z = LatentSample::zeros({2, 4, 8, 16});
  CHECK(z.size() == 2u * 4 * 8 * 16);
  CHECK(z.shape == std::array<int, 4>{2, 4, 8, 16});
  for (double v : z.values) CHECK(v == 0.0);
  CHECK_THROWS_WITH_AS(LatentSample::zeros({0, 4, 8, 16}), "latent shape must be positive",
                       input_error);
  CHECK_THROWS_WITH_AS(LatentSample::zeros({2, 4, -1, 16}), "latent shape must be positive",
                       input_error);
}

TEST_CASE("forward noising matches the closed form") {
  std::mt19937_64 rng(31);
  DiffusionSchedule s = linear_beta_schedule(200);
  LatentSample x0 = random_latent({1, 4, 16, 8}, rng);
  LatentSample eps = random_latent({1, 4, 16, 8}, rng);

  for (int t : {0, 7, 57, 123, 199}) {
    LatentSample xt = add_noise(x0, eps, t, s);
    CHECK(xt.shape == x0.shape);
    double a = s.sqrt_alpha_bars[t];
    double b = std::sqrt(1.0 - s.alpha_bars[t]);
    for (size_t i = 0; i < xt.size(); i++) {
      double expect = a * x0.values[i] + b * eps.values[i];
      CHECK(std::abs(xt.values[i] - expect) <= 1e-12);
    }
  }

  LatentSample small = random_latent({1, 1, 2, 2}, rng);
  CHECK_THROWS_WITH_AS(add_noise(x0, small, 0, s), "latent shapes do not match", input_error);
  CHECK_THROWS_WITH_AS(add_noise(x0, eps, -1, s), "timestep out of range", input_error);
  CHECK_THROWS_WITH_AS(add_noise(x0, eps, 200, s), "timestep out of range", input_error);
}

TEST_CASE("terminal step of a zero-SNR schedule yields pure noise") {
  std::mt19937_64 rng(32);
  DiffusionSchedule s = rescale_zero_terminal_snr(linear_beta_schedule(50));
  LatentSample x0 = random_latent({2, 4, 4, 4}, rng);
  LatentSample eps = random_latent({2, 4, 4, 4}, rng);

  LatentSample xt = add_noise(x0, eps, 49, s);
  CHECK(max_abs_diff(xt, eps) == 0.0);

  // At zero signal the noise estimate is the sample itself.
  LatentSample v = velocity(x0, eps, 49, s);
  LatentSample back = v_to_epsilon(v, xt, 49, s);
  CHECK(max_abs_diff(back, xt) == 0.0);
}

TEST_CASE("velocity round trips recover noise and signal") {
  std::mt19937_64 rng(33);
  DiffusionSchedule plain = linear_beta_schedule(300);
  DiffusionSchedule zero = rescale_zero_terminal_snr(plain);

  for (const DiffusionSchedule& s : {plain, zero}) {
    LatentSample x0 = random_latent({2, 4, 8, 8}, rng);
    LatentSample eps = random_latent({2, 4, 8, 8}, rng);
    for (int trial = 0; trial < 20; trial++) {
      int t = (int)(rng() % 300);
      LatentSample xt = add_noise(x0, eps, t, s);
      LatentSample v = velocity(x0, eps, t, s);

      LatentSample eps_back = v_to_epsilon(v, xt, t, s);
      LatentSample x0_back = x0_from_v(v, xt, t, s);
      CHECK(max_abs_diff(eps_back, eps) <= 1e-9);
      CHECK(max_abs_diff(x0_back, x0) <= 1e-9);
    }
  }
}

TEST_CASE("velocity definition matches its closed form") {
  std::mt19937_64 rng(34);
  DiffusionSchedule s = linear_beta_schedule(64);
  LatentSample x0 = random_latent({1, 4, 4, 4}, rng);
  LatentSample eps = random_latent({1, 4, 4, 4}, rng);
  int t = 17;
  LatentSample v = velocity(x0, eps, t, s);
  double a = s.sqrt_alpha_bars[t];
  double b = std::sqrt(1.0 - s.alpha_bars[t]);
  for (size_t i = 0; i < v.size(); i++) {
    double expect = a * eps.values[i] - b * x0.values[i];
    CHECK(std::abs(v.values[i] - expect) <= 1e-12);
  }
}

TEST_CASE("training loss is the mean squared error") {
  std::mt19937_64 rng(35);
  LatentSample truth = random_latent({1, 4, 8, 4}, rng);

  CHECK(loss_4v(truth, truth) == 0.0);

  LatentSample shifted = truth;
  for (auto& v : shifted.values) v += 0.3;
  CHECK(loss_4v(truth, shifted) == doctest::Approx(0.09).epsilon(1e-12));

  LatentSample pred = random_latent({1, 4, 8, 4}, rng);
  double sum = 0;
  for (size_t i = 0; i < truth.size(); i++) {
    double d = pred.values[i] - truth.values[i];
    sum += d * d;
  }
  CHECK(loss_4v(truth, pred) == doctest::Approx(sum / truth.size()).epsilon(1e-15));
  CHECK(loss_4v(truth, pred) >= 0.0);

  LatentSample other = random_latent({1, 4, 4, 8}, rng);
  CHECK_THROWS_WITH_AS(loss_4v(truth, other), "latent shapes do not match", input_error);
  LatentSample empty_a, empty_b;
  CHECK_THROWS_WITH_AS(loss_4v(empty_a, empty_b), "empty latent", input_error);
}

TEST_CASE("schedule csv lists every step with parseable numbers") {
  DiffusionSchedule s = linear_beta_schedule(5, 0.01, 0.2);
  std::string csv = schedule_csv(s);

  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "t,beta,alpha,alpha_bar,sqrt_alpha_bar,snr");
  int rows = 0;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::string field;
    std::vector<std::string> cols;
    while (std::getline(fields, field, ',')) cols.push_back(field);
    REQUIRE(cols.size() == 6);
    CHECK(std::stoi(cols[0]) == rows);
    // Shortest-round-trip formatting: parsing back gives the exact value.
    CHECK(std::stod(cols[1]) == s.betas[rows]);
    CHECK(std::stod(cols[2]) == s.alphas[rows]);
    CHECK(std::stod(cols[3]) == s.alpha_bars[rows]);
    CHECK(std::stod(cols[4]) == s.sqrt_alpha_bars[rows]);
    double ab = s.alpha_bars[rows];
    CHECK(std::stod(cols[5]) == doctest::Approx(ab / (1 - ab)).epsilon(1e-15));
    rows++;
  }
  CHECK(rows == 5);
  CHECK(csv.back() == '\n');

  // A saturated first step reports an infinite SNR.
  DiffusionSchedule lossless;
  lossless.betas = {0.0, 0.5};
  lossless.alphas = {1.0, 0.5};
  lossless.alpha_bars = {1.0, 0.5};
  lossless.sqrt_alpha_bars = {1.0, std::sqrt(0.5)};
  std::string inf_csv = schedule_csv(lossless);
  CHECK(inf_csv.find(",inf\n") != std::string::npos);
}
