#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "texpipe/image.h"
#include "texpipe/texelmaps.h"

namespace texpipe {

struct SolverParams {
  double tolerance = 1e-6;  // relative residual
  int max_iterations = 0;   // 0 = 10 * sqrt(interior) + 1000
};

// Discrete Poisson problem over the atlas: solve the 5-point Laplacian on
// the interior with Dirichlet boundary taken from the coarse texture and
// guidance gradients taken from the projected texture. The interior is the
// selection mask eroded by one texel within each chart, so no stencil ever
// crosses a chart boundary.
struct BlendProblem {
  int atlas_res = 0;
  std::vector<uint8_t> interior;   // per texel
  std::vector<int32_t> chart;      // per texel, from the texel maps
  std::vector<float> guide_x;      // 3 per texel: projected(x+1,y) - projected(x,y)
  std::vector<float> guide_y;      // 3 per texel: projected(x,y+1) - projected(x,y)
  Image coarse;                    // boundary values and non-interior output
  SolverParams params;
  bool trivial = false;            // empty interior: output = coarse

  size_t texel_count() const { return (size_t)atlas_res * atlas_res; }
};

// The projected image's alpha channel is the selection mask.
BlendProblem build_problem(const Image& projected, const Image& coarse,
                           const TexelMaps& texels, SolverParams params = {});

struct BlendStats {
  int interior_count = 0;
  std::array<int, 3> iterations{0, 0, 0};
  std::array<double, 3> residual{0, 0, 0};  // relative, recomputed after solve
  std::array<std::vector<double>, 3> residual_history;  // relative, per iteration
};

struct BlendResult {
  Image texture;   // coarse outside the interior, solution inside, clamped
  Image preclamp;  // same but without the [0,1] clamp
  BlendStats stats;
};

// Conjugate gradient with Jacobi preconditioning, zero initial guess, and
// fixed-order pairwise-summation dot products: output is independent of
// thread count. Throws when any channel misses the tolerance within the
// iteration budget.
BlendResult solve(const BlendProblem& problem, int threads = 1);

BlendResult blend_texture(const Image& projected, const Image& coarse,
                          const TexelMaps& texels, SolverParams params = {},
                          int threads = 1);

}  // namespace texpipe
