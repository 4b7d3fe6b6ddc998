#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.h"
#include "texpipe/blend.h"
#include "texpipe/errors.h"
#include "util.h"

using namespace texpipe;

namespace {

// Every texel valid, flat normals, one chart.
TexelMaps full_texels(int res) {
  TexelMaps t;
  t.atlas_res = res;
  size_t n = t.texel_count();
  t.position.assign(n * 3, 0.0f);
  t.normal.assign(n * 3, 0.0f);
  for (size_t i = 0; i < n; i++) t.normal[i * 3 + 2] = 1.0f;
  t.coarse.assign(n * 3, 0.0f);
  t.chart.assign(n, 0);
  t.valid.assign(n, 1);
  return t;
}

Image random_image(int res, std::mt19937_64& rng, double lo = 0.1, double hi = 0.9) {
  Image img = Image::create(res, res);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++)
      img.set_rgb(x, y, {lo + (hi - lo) * testutil::unit(rng),
                         lo + (hi - lo) * testutil::unit(rng),
                         lo + (hi - lo) * testutil::unit(rng)});
  return img;
}

double channel_of(const vec3& c, int channel) {
  return channel == 0 ? c.x : channel == 1 ? c.y : c.z;
}

// Independent dense assembly of the 5-point system described by the problem:
// 4f - sum(interior neighbors) = -div(guide) + sum(coarse at Dirichlet
// neighbors), solved by Gaussian elimination.
std::vector<double> dense_solution(const BlendProblem& p, int channel,
                                   std::vector<size_t>* texel_out = nullptr) {
  int res = p.atlas_res;
  std::vector<int> unknown(p.texel_count(), -1);
  std::vector<size_t> texel;
  for (size_t t = 0; t < p.texel_count(); t++)
    if (p.interior[t]) {
      unknown[t] = (int)texel.size();
      texel.push_back(t);
    }
  size_t n = texel.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  for (size_t i = 0; i < n; i++) {
    size_t t = texel[i];
    int x = (int)(t % res), y = (int)(t / res);
    a[i][i] = 4.0;
    double div = (double)p.guide_x[t * 3 + channel] - p.guide_x[(t - 1) * 3 + channel] +
                 p.guide_y[t * 3 + channel] - p.guide_y[(t - res) * 3 + channel];
    b[i] = -div;
    const int dx[4] = {-1, 1, 0, 0}, dy[4] = {0, 0, -1, 1};
    for (int k = 0; k < 4; k++) {
      size_t nt = (size_t)(y + dy[k]) * res + (size_t)(x + dx[k]);
      if (unknown[nt] >= 0)
        a[i][(size_t)unknown[nt]] -= 1.0;
      else
        b[i] += channel_of(p.coarse.rgb(x + dx[k], y + dy[k]), channel);
    }
  }
  if (texel_out) *texel_out = texel;
  return oracle::solve_dense(a, b);
}

// Relative residual of the (float-quantized) solution stored in an image.
double image_residual(const BlendProblem& p, const Image& solution, int channel) {
  int res = p.atlas_res;
  double num = 0, den = 0;
  for (size_t t = 0; t < p.texel_count(); t++) {
    if (!p.interior[t]) continue;
    int x = (int)(t % res), y = (int)(t / res);
    double div = (double)p.guide_x[t * 3 + channel] - p.guide_x[(t - 1) * 3 + channel] +
                 p.guide_y[t * 3 + channel] - p.guide_y[(t - res) * 3 + channel];
    double b = -div;
    double ax = 4.0 * channel_of(solution.rgb(x, y), channel);
    const int dx[4] = {-1, 1, 0, 0}, dy[4] = {0, 0, -1, 1};
    for (int k = 0; k < 4; k++) {
      size_t nt = (size_t)(y + dy[k]) * res + (size_t)(x + dx[k]);
      double v = channel_of(solution.rgb(x + dx[k], y + dy[k]), channel);
      if (p.interior[nt])
        ax -= v;
      else
        b += channel_of(p.coarse.rgb(x + dx[k], y + dy[k]), channel);
    }
    num += (b - ax) * (b - ax);
    den += b * b;
  }
  return den > 0 ? std::sqrt(num) / std::sqrt(den) : 0.0;
}

}  // namespace

TEST_CASE("problem assembly marks the eroded interior and forward differences") {
  std::mt19937_64 rng(11);
  int res = 8;
  TexelMaps texels = full_texels(res);
  Image projected = random_image(res, rng);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++)
      projected.set_alpha(x, y, (x >= 1 && x <= 5 && y >= 2 && y <= 6) ? 1.0f : 0.0f);
  Image coarse = random_image(res, rng);

  BlendProblem problem = build_problem(projected, coarse, texels);
  CHECK(problem.atlas_res == res);
  CHECK_FALSE(problem.trivial);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) {
      bool inner = x >= 2 && x <= 4 && y >= 3 && y <= 5;
      CHECK((int)problem.interior[(size_t)y * res + x] == (inner ? 1 : 0));
    }

  // Guides are forward differences of the projected colors wherever both
  // ends are valid texels of the same chart, zero at the atlas edge.
  for (int y : {0, 3, 6})
    for (int x : {0, 2, 6}) {
      size_t t = (size_t)y * res + x;
      double gx = problem.guide_x[t * 3];
      double gy = problem.guide_y[t * 3 + 1];
      double ex = (float)(projected.rgb(x + 1, y).x - projected.rgb(x, y).x);
      double ey = (float)(projected.rgb(x, y + 1).y - projected.rgb(x, y).y);
      CHECK(gx == ex);
      CHECK(gy == ey);
    }
  size_t edge = (size_t)3 * res + (res - 1);
  CHECK(problem.guide_x[edge * 3] == 0.0f);
  CHECK(problem.guide_y[((size_t)(res - 1) * res + 3) * 3] == 0.0f);

  // Full mask: the interior is everything but the atlas boundary ring.
  Image full_mask = projected;
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) full_mask.set_alpha(x, y, 1.0f);
  BlendProblem everything = build_problem(full_mask, coarse, texels);
  int count = 0;
  for (auto v : everything.interior) count += v;
  CHECK(count == (res - 2) * (res - 2));

  // Splitting the mask between two charts erodes both sides of the seam.
  TexelMaps split = texels;
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) split.chart[(size_t)y * res + x] = x < 3 ? 0 : 1;
  BlendProblem cut = build_problem(projected, coarse, split);
  // Chart 0 covers mask columns 1..2 (too thin to erode), chart 1 covers
  // 3..5, leaving only column 4 with same-chart masked neighbors.
  CHECK_FALSE(cut.trivial);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) {
      bool inner = x == 4 && y >= 3 && y <= 5;
      CHECK((int)cut.interior[(size_t)y * res + x] == (inner ? 1 : 0));
    }

  CHECK_THROWS_WITH_AS(build_problem(Image::create(res + 1, res), coarse, texels),
                       "blend images must match the atlas resolution", input_error);
  CHECK_THROWS_WITH_AS(build_problem(projected, Image::create(res, res - 1), texels),
                       "blend images must match the atlas resolution", input_error);
  SolverParams bad_tol;
  bad_tol.tolerance = 0;
  CHECK_THROWS_WITH_AS(build_problem(projected, coarse, texels, bad_tol),
                       "solver tolerance must be positive", input_error);
  SolverParams bad_iter;
  bad_iter.max_iterations = -1;
  CHECK_THROWS_WITH_AS(build_problem(projected, coarse, texels, bad_iter),
                       "max iterations must be non-negative", input_error);
  TexelMaps ragged = texels;
  ragged.valid.pop_back();
  CHECK_THROWS_WITH_AS(build_problem(projected, coarse, ragged),
                       "texel map array sizes do not match resolution", input_error);
}

TEST_CASE("charts touching in the atlas never share a stencil") {
  std::mt19937_64 rng(12);
  int res = 12;
  TexelMaps texels = full_texels(res);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) texels.chart[(size_t)y * res + x] = x < 6 ? 0 : 1;

  Image projected = random_image(res, rng);
  Image coarse = random_image(res, rng);
  BlendProblem problem = build_problem(projected, coarse, texels);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) {
      bool inner = y >= 1 && y <= res - 2 && ((x >= 1 && x <= 4) || (x >= 7 && x <= 10));
      CHECK((int)problem.interior[(size_t)y * res + x] == (inner ? 1 : 0));
    }

  // Changing the other chart's projected colors leaves this chart's solution
  // alone (up to the solver tolerance): the charts solve independently.
  Image projected2 = projected;
  for (int y = 0; y < res; y++)
    for (int x = 6; x < res; x++)
      projected2.set_rgb(x, y, {testutil::unit(rng), testutil::unit(rng), testutil::unit(rng)});
  BlendResult left1 = solve(build_problem(projected, coarse, texels));
  BlendResult left2 = solve(build_problem(projected2, coarse, texels));
  for (int y = 0; y < res; y++)
    for (int x = 0; x < 6; x++) {
      vec3 a = left1.preclamp.rgb(x, y);
      vec3 b = left2.preclamp.rgb(x, y);
      CHECK(a.x == doctest::Approx(b.x).scale(1).epsilon(1e-4));
      CHECK(a.y == doctest::Approx(b.y).scale(1).epsilon(1e-4));
      CHECK(a.z == doctest::Approx(b.z).scale(1).epsilon(1e-4));
    }
}

TEST_CASE("empty masks give back the coarse texture bitwise") {
  std::mt19937_64 rng(13);
  int res = 10;
  TexelMaps texels = full_texels(res);
  Image projected = random_image(res, rng);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) projected.set_alpha(x, y, 0.0f);
  Image coarse = random_image(res, rng);

  BlendProblem problem = build_problem(projected, coarse, texels);
  CHECK(problem.trivial);
  BlendResult result = solve(problem);
  CHECK(result.texture.pixels == coarse.pixels);
  CHECK(result.preclamp.pixels == coarse.pixels);
  CHECK(result.stats.interior_count == 0);
  CHECK(result.stats.iterations == std::array<int, 3>{0, 0, 0});

  BlendResult wrapped = blend_texture(projected, coarse, texels);
  CHECK(wrapped.texture.pixels == coarse.pixels);
}

TEST_CASE("constant boundary with zero divergence stays constant") {
  int res = 10;
  TexelMaps texels = full_texels(res);
  Image projected = Image::create(res, res, {0.7, 0.7, 0.7}, 1.0f);
  Image coarse = Image::create(res, res, {0.4, 0.4, 0.4});

  BlendResult result = solve(build_problem(projected, coarse, texels));
  CHECK(result.stats.interior_count == (res - 2) * (res - 2));
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) {
      vec3 c = result.texture.rgb(x, y);
      CHECK(c.x == doctest::Approx(0.4).epsilon(1e-6));
      CHECK(c.y == doctest::Approx(0.4).epsilon(1e-6));
      CHECK(c.z == doctest::Approx(0.4).epsilon(1e-6));
    }
}

TEST_CASE("guidance and boundary from the same image reproduce it") {
  std::mt19937_64 rng(14);
  int res = 12;
  TexelMaps texels = full_texels(res);
  Image p = random_image(res, rng);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) p.set_alpha(x, y, 1.0f);

  BlendResult result = solve(build_problem(p, p, texels));
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) {
      vec3 got = result.preclamp.rgb(x, y);
      vec3 want = p.rgb(x, y);
      CHECK(got.x == doctest::Approx(want.x).epsilon(1e-5));
      CHECK(got.y == doctest::Approx(want.y).epsilon(1e-5));
      CHECK(got.z == doctest::Approx(want.z).epsilon(1e-5));
    }
}

TEST_CASE("conjugate gradient matches dense elimination") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 6; trial++) {
    int res = 8 + 4 * (trial % 3);
    TexelMaps texels = full_texels(res);
    Image projected = random_image(res, rng);
    for (int y = 0; y < res; y++)
      for (int x = 0; x < res; x++)
        projected.set_alpha(x, y, testutil::unit(rng) < 0.85 ? 1.0f : 0.0f);
    Image coarse = random_image(res, rng);

    BlendProblem problem = build_problem(projected, coarse, texels);
    if (problem.trivial) continue;
    BlendResult result = solve(problem);

    for (int channel = 0; channel < 3; channel++) {
      std::vector<size_t> texel;
      std::vector<double> exact = dense_solution(problem, channel, &texel);
      for (size_t i = 0; i < texel.size(); i++) {
        int x = (int)(texel[i] % res), y = (int)(texel[i] / res);
        double got = channel_of(result.preclamp.rgb(x, y), channel);
        CHECK(got == doctest::Approx(exact[i]).scale(1).epsilon(1e-5));
      }
      CHECK(result.stats.residual[channel] <= problem.params.tolerance);
      REQUIRE(!result.stats.residual_history[channel].empty());
      CHECK(result.stats.residual_history[channel][0] == 1.0);
      CHECK((int)result.stats.residual_history[channel].size() ==
            result.stats.iterations[channel] + 1);
      CHECK(result.stats.residual_history[channel].back() <= problem.params.tolerance);
    }

    // Texels outside the interior keep the coarse values bitwise.
    for (size_t t = 0; t < problem.texel_count(); t++) {
      if (problem.interior[t]) continue;
      int x = (int)(t % res), y = (int)(t / res);
      vec3 got = result.texture.rgb(x, y);
      vec3 want = coarse.rgb(x, y);
      CHECK(got.x == want.x);
      CHECK(got.y == want.y);
      CHECK(got.z == want.z);
    }
  }
}

TEST_CASE("a single unknown is solved exactly") {
  TexelMaps texels = full_texels(3);
  Image projected = Image::create(3, 3, {0.7, 0.7, 0.7}, 1.0f);
  Image coarse = Image::create(3, 3, {0.25, 0.25, 0.25});

  BlendProblem problem = build_problem(projected, coarse, texels);
  CHECK(problem.atlas_res == 3);
  REQUIRE(problem.interior[4] == 1);
  BlendResult result = solve(problem);
  CHECK(result.stats.interior_count == 1);
  for (int channel = 0; channel < 3; channel++) {
    CHECK(result.stats.iterations[channel] == 1);
    CHECK(result.stats.residual[channel] == 0.0);
    REQUIRE(result.stats.residual_history[channel].size() == 2);
    CHECK(result.stats.residual_history[channel][0] == 1.0);
    CHECK(result.stats.residual_history[channel][1] == 0.0);
  }
  vec3 center = result.preclamp.rgb(1, 1);
  CHECK(center.x == 0.25);
  CHECK(center.y == 0.25);
  CHECK(center.z == 0.25);

  // Same single-unknown layout, hand-computed right-hand side.
  Image bumpy = Image::create(3, 3, {0, 0, 0}, 1.0f);
  double v[3][3] = {{0.1, 0.5, 0.2}, {0.3, 0.9, 0.4}, {0.6, 0.7, 0.8}};
  for (int y = 0; y < 3; y++)
    for (int x = 0; x < 3; x++) bumpy.set_rgb(x, y, {v[y][x], v[y][x], v[y][x]});
  BlendProblem hand = build_problem(bumpy, coarse, texels);
  BlendResult hand_result = solve(hand);
  // div at the center = sum of neighbors - 4*center (all drawn from floats).
  double div = (double)(float)(v[1][2] - v[1][1]) - (float)(v[1][1] - v[1][0]) +
               (float)(v[2][1] - v[1][1]) - (float)(v[1][1] - v[0][1]);
  double expected = (-div + 4 * 0.25) / 4.0;
  double got = hand_result.preclamp.rgb(1, 1).x;
  CHECK(got == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("zero-divergence problems obey the discrete maximum principle") {
  std::mt19937_64 rng(16);
  int solved = 0;
  for (int trial = 0; trial < 100; trial++) {
    int res = 8;
    TexelMaps texels = full_texels(res);
    Image projected = Image::create(res, res, {0.3, 0.3, 0.3});
    for (int y = 0; y < res; y++)
      for (int x = 0; x < res; x++)
        projected.set_alpha(x, y, trial % 2 == 0 || testutil::unit(rng) < 0.9 ? 1.0f : 0.0f);
    Image coarse = random_image(res, rng, 0.0, 1.0);

    BlendProblem problem = build_problem(projected, coarse, texels);
    if (problem.trivial) continue;
    solved++;
    BlendResult result = solve(problem);

    for (int channel = 0; channel < 3; channel++) {
      double lo = 1e30, hi = -1e30;
      for (size_t t = 0; t < problem.texel_count(); t++) {
        if (!problem.interior[t]) continue;
        int x = (int)(t % res), y = (int)(t / res);
        const int dx[4] = {-1, 1, 0, 0}, dy[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; k++) {
          size_t nt = (size_t)(y + dy[k]) * res + (size_t)(x + dx[k]);
          if (problem.interior[nt]) continue;
          double b = channel_of(coarse.rgb(x + dx[k], y + dy[k]), channel);
          lo = std::min(lo, b);
          hi = std::max(hi, b);
        }
      }
      for (size_t t = 0; t < problem.texel_count(); t++) {
        if (!problem.interior[t]) continue;
        double s = channel_of(result.preclamp.rgb((int)(t % res), (int)(t / res)), channel);
        CHECK(s >= lo - 1e-8);
        CHECK(s <= hi + 1e-8);
      }
    }
  }
  CHECK(solved >= 50);
}

TEST_CASE("the solve is linear in the guidance and boundary") {
  std::mt19937_64 rng(17);
  int res = 14;
  TexelMaps texels = full_texels(res);
  Image projected = random_image(res, rng);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) projected.set_alpha(x, y, 1.0f);
  Image coarse = random_image(res, rng);

  BlendProblem problem = build_problem(projected, coarse, texels);
  BlendProblem halved = problem;
  for (auto& g : halved.guide_x) g *= 0.5f;
  for (auto& g : halved.guide_y) g *= 0.5f;
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) {
      vec3 c = halved.coarse.rgb(x, y);
      halved.coarse.set_rgb(x, y, {0.5 * c.x, 0.5 * c.y, 0.5 * c.z});
    }

  BlendResult full = solve(problem);
  BlendResult half = solve(halved);
  // Scaling by a power of two commutes with every rounding step, so the
  // iterates scale exactly.
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) {
      vec3 a = full.preclamp.rgb(x, y);
      vec3 b = half.preclamp.rgb(x, y);
      CHECK(b.x == 0.5 * a.x);
      CHECK(b.y == 0.5 * a.y);
      CHECK(b.z == 0.5 * a.z);
    }
}

TEST_CASE("the solution is clamped only in the final texture") {
  int res = 12;
  TexelMaps texels = full_texels(res);
  // Guidance reproduces a spike image; a constant 0.5 boundary lifts the
  // whole solution, pushing the spikes outside [0, 1].
  Image spikes = Image::create(res, res, {0, 0, 0}, 1.0f);
  spikes.set_rgb(5, 5, {0.6, 0.6, 0.6});
  spikes.set_rgb(8, 8, {-0.6, -0.6, -0.6});
  Image coarse = Image::create(res, res, {0.5, 0.5, 0.5});

  BlendResult result = solve(build_problem(spikes, coarse, texels));
  double peak = result.preclamp.rgb(5, 5).x;
  double dip = result.preclamp.rgb(8, 8).x;
  CHECK(peak == doctest::Approx(1.1).epsilon(1e-4));
  CHECK(dip == doctest::Approx(-0.1).epsilon(1e-4));
  CHECK(result.texture.rgb(5, 5).x == 1.0);
  CHECK(result.texture.rgb(8, 8).x == 0.0);
}

TEST_CASE("zero right-hand side skips the iteration entirely") {
  int res = 6;
  TexelMaps texels = full_texels(res);
  Image projected = Image::create(res, res, {0.2, 0.2, 0.2}, 1.0f);
  Image coarse = Image::create(res, res, {0, 0, 0});

  BlendResult result = solve(build_problem(projected, coarse, texels));
  CHECK(result.stats.interior_count == 16);
  for (int channel = 0; channel < 3; channel++) {
    CHECK(result.stats.iterations[channel] == 0);
    CHECK(result.stats.residual[channel] == 0.0);
    CHECK(result.stats.residual_history[channel].empty());
  }
  CHECK(result.preclamp.rgb(3, 3).x == 0.0);
}

TEST_CASE("running out of iterations raises a numeric error") {
  std::mt19937_64 rng(18);
  int res = 16;
  TexelMaps texels = full_texels(res);
  Image projected = random_image(res, rng);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) projected.set_alpha(x, y, 1.0f);
  Image coarse = random_image(res, rng);
  SolverParams starved;
  starved.max_iterations = 1;
  CHECK_THROWS_AS(solve(build_problem(projected, coarse, texels, starved)), numeric_error);

  CHECK_THROWS_WITH_AS(solve(BlendProblem{}), "blend problem has no resolution", input_error);
}

TEST_CASE("residual history ends at the first entry under tolerance") {
  std::mt19937_64 rng(19);
  int res = 16;
  TexelMaps texels = full_texels(res);
  Image projected = random_image(res, rng);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) projected.set_alpha(x, y, 1.0f);
  Image coarse = random_image(res, rng);

  // Conjugate gradient drives the error A-norm down monotonically but its
  // residual 2-norm wiggles by a few percent along the way, so the history
  // is not required to decrease step by step. What must hold: the run stops
  // at the first entry under the tolerance, and never before.
  BlendProblem problem = build_problem(projected, coarse, texels);
  BlendResult result = solve(problem);
  double tol = problem.params.tolerance;
  for (int channel = 0; channel < 3; channel++) {
    const auto& history = result.stats.residual_history[channel];
    REQUIRE(history.size() >= 2);
    CHECK(history.front() == 1.0);
    for (size_t i = 0; i + 1 < history.size(); i++) CHECK(history[i] > tol);
    CHECK(history.back() <= tol);
  }
}

TEST_CASE("reported residual agrees with an independent recomputation") {
  std::mt19937_64 rng(20);
  int res = 12;
  TexelMaps texels = full_texels(res);
  Image projected = random_image(res, rng);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) projected.set_alpha(x, y, 1.0f);
  Image coarse = random_image(res, rng);

  BlendProblem problem = build_problem(projected, coarse, texels);
  BlendResult result = solve(problem);
  for (int channel = 0; channel < 3; channel++) {
    // The image stores the solution as floats, which perturbs the residual
    // by a few times the quantization step; allow for that.
    double recomputed = image_residual(problem, result.preclamp, channel);
    CHECK(result.stats.residual[channel] <= problem.params.tolerance);
    CHECK(std::abs(recomputed - result.stats.residual[channel]) <= 2e-6);
  }
}

TEST_CASE("the solve ignores the thread count") {
  std::mt19937_64 rng(21);
  int res = 16;
  TexelMaps texels = full_texels(res);
  Image projected = random_image(res, rng);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++)
      projected.set_alpha(x, y, testutil::unit(rng) < 0.9 ? 1.0f : 0.0f);
  Image coarse = random_image(res, rng);

  BlendProblem problem = build_problem(projected, coarse, texels);
  BlendResult serial = solve(problem, 1);
  BlendResult parallel = solve(problem, 8);
  CHECK(serial.texture.pixels == parallel.texture.pixels);
  CHECK(serial.preclamp.pixels == parallel.preclamp.pixels);
  CHECK(serial.stats.iterations == parallel.stats.iterations);
  CHECK(serial.stats.residual == parallel.stats.residual);
  for (int c = 0; c < 3; c++)
    CHECK(serial.stats.residual_history[c] == parallel.stats.residual_history[c]);
}

TEST_CASE("blending removes the seam left by a constant offset") {
  int res = 24;
  TexelMaps texels = full_texels(res);
  Image coarse = Image::create(res, res);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++)
      coarse.set_rgb(x, y, {0.2 + 0.3 * x / (res - 1.0), 0.2 + 0.3 * y / (res - 1.0), 0.4});

  Image projected = coarse;
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) {
      bool masked = x >= 6 && x <= 17 && y >= 6 && y <= 17;
      projected.set_alpha(x, y, masked ? 1.0f : 0.0f);
      if (masked) {
        vec3 c = coarse.rgb(x, y);
        projected.set_rgb(x, y, {c.x + 0.25, c.y + 0.25, c.z + 0.25});
      }
    }

  BlendProblem problem = build_problem(projected, coarse, texels);
  BlendResult result = blend_texture(projected, coarse, texels);

  // Largest jump between a solved texel and its un-solved neighbor, vs the
  // largest jump between two solved texels.
  double cross = 0, inside = 0;
  for (size_t t = 0; t < problem.texel_count(); t++) {
    if (!problem.interior[t]) continue;
    int x = (int)(t % res), y = (int)(t / res);
    vec3 here = result.texture.rgb(x, y);
    const int dx[4] = {-1, 1, 0, 0}, dy[4] = {0, 0, -1, 1};
    for (int k = 0; k < 4; k++) {
      size_t nt = (size_t)(y + dy[k]) * res + (size_t)(x + dx[k]);
      vec3 there = result.texture.rgb(x + dx[k], y + dy[k]);
      double jump = std::max({std::abs(here.x - there.x), std::abs(here.y - there.y),
                              std::abs(here.z - there.z)});
      if (problem.interior[nt])
        inside = std::max(inside, jump);
      else
        cross = std::max(cross, jump);
    }
  }
  CHECK(cross <= inside + 1e-3);

  // Raw selection (no blend) would jump by the full offset at the seam.
  CHECK(inside < 0.05);

  // Projected equal to coarse with a full mask changes nothing.
  Image agree = coarse;
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) agree.set_alpha(x, y, 1.0f);
  BlendResult same = blend_texture(agree, coarse, texels);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) {
      vec3 got = same.texture.rgb(x, y);
      vec3 want = coarse.rgb(x, y);
      CHECK(got.x == doctest::Approx(want.x).epsilon(1e-5));
      CHECK(got.y == doctest::Approx(want.y).epsilon(1e-5));
      CHECK(got.z == doctest::Approx(want.z).epsilon(1e-5));
    }
}
