#include "texpipe/blend.h"

#include <cmath>
#include <string>

#include "texpipe/errors.h"
#include "texpipe/parallel.h"

namespace texpipe {

BlendProblem build_problem(const Image& projected, const Image& coarse,
                           const TexelMaps& texels, SolverParams params) {
  validate(texels);
  int res = texels.atlas_res;
  if (projected.width != res || projected.height != res || coarse.width != res ||
      coarse.height != res)
    throw input_error("blend images must match the atlas resolution");
  if (!(params.tolerance > 0)) throw input_error("solver tolerance must be positive");
  if (params.max_iterations < 0) throw input_error("max iterations must be non-negative");

  BlendProblem problem;
  problem.atlas_res = res;
  problem.chart.assign(texels.chart.begin(), texels.chart.end());
  problem.coarse = coarse;
  problem.params = params;

  size_t n = problem.texel_count();
  auto masked = [&](size_t t) { return texels.valid[t] && projected.alpha((int)(t % res), (int)(t / res)) > 0.5f; };

  // Interior: masked texels whose 4 neighbors are masked texels of the same
  // chart (erosion by one, never reaching the atlas edge).
  problem.interior.assign(n, 0);
  bool any_interior = false;
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) {
      size_t t = (size_t)y * res + x;
      if (!masked(t)) continue;
      if (x == 0 || x == res - 1 || y == 0 || y == res - 1) continue;
      size_t left = t - 1, right = t + 1, up = t - res, down = t + res;
      int32_t chart = texels.chart[t];
      bool inner = masked(left) && masked(right) && masked(up) && masked(down) &&
                   texels.chart[left] == chart && texels.chart[right] == chart &&
                   texels.chart[up] == chart && texels.chart[down] == chart;
      if (inner) {
        problem.interior[t] = 1;
        any_interior = true;
      }
    }
  problem.trivial = !any_interior;

  // Forward differences of the projected texture wherever both ends are
  // valid texels of the same chart; zero elsewhere.
  problem.guide_x.assign(n * 3, 0);
  problem.guide_y.assign(n * 3, 0);
  for (int y = 0; y < res; y++)
    for (int x = 0; x < res; x++) {
      size_t t = (size_t)y * res + x;
      if (!texels.valid[t]) continue;
      vec3 here = projected.rgb(x, y);
      if (x + 1 < res) {
        size_t r = t + 1;
        if (texels.valid[r] && texels.chart[r] == texels.chart[t]) {
          vec3 g = projected.rgb(x + 1, y) - here;
          problem.guide_x[t * 3] = (float)g.x;
          problem.guide_x[t * 3 + 1] = (float)g.y;
          problem.guide_x[t * 3 + 2] = (float)g.z;
        }
      }
      if (y + 1 < res) {
        size_t d = t + res;
        if (texels.valid[d] && texels.chart[d] == texels.chart[t]) {
          vec3 g = projected.rgb(x, y + 1) - here;
          problem.guide_y[t * 3] = (float)g.x;
          problem.guide_y[t * 3 + 1] = (float)g.y;
          problem.guide_y[t * 3 + 2] = (float)g.z;
        }
      }
    }
  return problem;
}

namespace {

// Fixed-order pairwise summation: deterministic and far more accurate than
// a running sum at these sizes.
double dot_pairwise(const double* a, const double* b, size_t n) {
  if (n <= 64) {
    double s = 0;
    for (size_t i = 0; i < n; i++) s += a[i] * b[i];
    return s;
  }
  size_t half = n / 2;
  return dot_pairwise(a, b, half) + dot_pairwise(a + half, b + half, n - half);
}

struct System {
  std::vector<int32_t> unknown_of;     // texel -> unknown index or -1
  std::vector<int32_t> texel_of;       // unknown -> texel
  std::vector<int32_t> neighbors;      // 4 per unknown, -1 = Dirichlet
  int n = 0;

  void matvec(const std::vector<double>& p, std::vector<double>* q, int threads) const {
    parallel_for((size_t)n, threads, [&](size_t i) {
      double v = 4.0 * p[i];
      const int32_t* nb = &neighbors[i * 4];
      for (int k = 0; k < 4; k++)
        if (nb[k] >= 0) v -= p[nb[k]];
      (*q)[i] = v;
    });
  }
};

}  // namespace

BlendResult solve(const BlendProblem& problem, int threads) {
  int res = problem.atlas_res;
  if (res <= 0) throw input_error("blend problem has no resolution");
  BlendResult result;
  result.texture = problem.coarse;
  result.preclamp = problem.coarse;
  if (problem.trivial) return result;

  size_t n_texels = problem.texel_count();
  System sys;
  sys.unknown_of.assign(n_texels, -1);
  for (size_t t = 0; t < n_texels; t++) {
    if (!problem.interior[t]) continue;
    sys.unknown_of[t] = sys.n++;
    sys.texel_of.push_back((int32_t)t);
  }
  sys.neighbors.resize((size_t)sys.n * 4);
  for (int i = 0; i < sys.n; i++) {
    size_t t = sys.texel_of[i];
    size_t nb[4] = {t - 1, t + 1, t - (size_t)res, t + (size_t)res};
    for (int k = 0; k < 4; k++) sys.neighbors[(size_t)i * 4 + k] = sys.unknown_of[nb[k]];
  }

  int max_iterations = problem.params.max_iterations;
  if (max_iterations == 0)
    max_iterations = (int)(10.0 * std::sqrt((double)sys.n)) + 1000;

  result.stats.interior_count = sys.n;
  std::vector<double> b((size_t)sys.n), x((size_t)sys.n), r((size_t)sys.n),
      z((size_t)sys.n), p((size_t)sys.n), q((size_t)sys.n);

  for (int channel = 0; channel < 3; channel++) {
    auto guide_x = [&](size_t t) { return (double)problem.guide_x[t * 3 + channel]; };
    auto guide_y = [&](size_t t) { return (double)problem.guide_y[t * 3 + channel]; };
    // Right-hand side: 4f - sum(neighbors) = -div g, Dirichlet terms moved over.
    for (int i = 0; i < sys.n; i++) {
      size_t t = sys.texel_of[i];
      int tx = (int)(t % res), ty = (int)(t / res);
      double div = guide_x(t) - guide_x(t - 1) + guide_y(t) - guide_y(t - (size_t)res);
      double rhs = -div;
      size_t nb[4] = {t - 1, t + 1, t - (size_t)res, t + (size_t)res};
      int nx[4] = {tx - 1, tx + 1, tx, tx};
      int ny[4] = {ty, ty, ty - 1, ty + 1};
      for (int k = 0; k < 4; k++)
        if (sys.unknown_of[nb[k]] < 0) {
          vec3 c = problem.coarse.rgb(nx[k], ny[k]);
          rhs += channel == 0 ? c.x : channel == 1 ? c.y : c.z;
        }
      b[i] = rhs;
    }

    double norm_b = std::sqrt(dot_pairwise(b.data(), b.data(), b.size()));
    std::fill(x.begin(), x.end(), 0.0);
    int iterations = 0;
    double relative = 0;
    if (norm_b > 0) {
      r = b;  // r = b - A*0
      // Jacobi preconditioner: constant diagonal 4.
      for (int i = 0; i < sys.n; i++) z[i] = r[i] * 0.25;
      p = z;
      double rz = dot_pairwise(r.data(), z.data(), r.size());
      relative = 1.0;
      while (iterations < max_iterations) {
        double norm_r = std::sqrt(dot_pairwise(r.data(), r.data(), r.size()));
        relative = norm_r / norm_b;
        result.stats.residual_history[channel].push_back(relative);
        if (relative <= problem.params.tolerance) break;
        sys.matvec(p, &q, threads);
        double pq = dot_pairwise(p.data(), q.data(), p.size());
        if (!(pq > 0)) break;  // loss of positive-definiteness in arithmetic
        double alpha = rz / pq;
        for (int i = 0; i < sys.n; i++) x[i] += alpha * p[i];
        for (int i = 0; i < sys.n; i++) r[i] -= alpha * q[i];
        for (int i = 0; i < sys.n; i++) z[i] = r[i] * 0.25;
        double rz_next = dot_pairwise(r.data(), z.data(), r.size());
        double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < sys.n; i++) p[i] = z[i] + beta * p[i];
        iterations++;
      }
      // Recompute the reported residual from scratch.
      sys.matvec(x, &q, threads);
      for (int i = 0; i < sys.n; i++) q[i] = b[i] - q[i];
      relative = std::sqrt(dot_pairwise(q.data(), q.data(), q.size())) / norm_b;
      if (relative > problem.params.tolerance)
        throw numeric_error("poisson solver did not converge: relative residual " +
                            std::to_string(relative) + " after " +
                            std::to_string(iterations) + " iterations");
    }
    result.stats.iterations[channel] = iterations;
    result.stats.residual[channel] = relative;

    for (int i = 0; i < sys.n; i++) {
      size_t t = sys.texel_of[i];
      int tx = (int)(t % res), ty = (int)(t / res);
      result.preclamp.pixels[result.preclamp.index(tx, ty) + channel] = (float)x[i];
      result.texture.pixels[result.texture.index(tx, ty) + channel] =
          (float)clamp(x[i], 0.0, 1.0);
    }
  }
  return result;
}

BlendResult blend_texture(const Image& projected, const Image& coarse,
                          const TexelMaps& texels, SolverParams params, int threads) {
  return solve(build_problem(projected, coarse, texels, params), threads);
}

}  // namespace texpipe
