#pragma once

#include <cstdint>
#include <vector>

#include "texpipe/geometry.h"
#include "texpipe/image.h"
#include "texpipe/texelmaps.h"

namespace texpipe {

// Per-pixel hit data from rasterization. Depth is camera-space distance
// along the view axis (not ray length); empty pixels hold +inf depth,
// triangle -1, mask 0. Barycentrics refer to the original (unclipped)
// triangle corners.
struct GBuffer {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  std::vector<int32_t> tri;
  std::vector<vec3> bary;
  std::vector<vec2> uv;
  std::vector<vec3> normal;
  std::vector<uint8_t> mask;

  size_t index(int x, int y) const { return (size_t)y * width + x; }
};

// Serial scanline rasterizer with perspective-correct interpolation,
// near-plane clipping, and a top-left fill rule evaluated on canonically
// ordered edges so triangles sharing an edge cover every boundary pixel
// exactly once. Both windings are drawn (no backface culling); depth ties
// keep the lower triangle index.
GBuffer rasterize(const Mesh& mesh, const Camera& camera);

// Looks up the texture at each covered pixel's UV (bilinear); everything
// else gets the background color. Alpha carries the coverage mask.
Image render_textured(const GBuffer& gbuffer, const Image& texture,
                      vec3 background = {1, 1, 1});

// Rasterizes triangles in UV space at the atlas resolution, storing
// interpolated world position, unit normal, and chart id per covered texel.
// The mesh must carry UVs and vertex normals. degenerate_uv_triangles,
// when given, receives the count of zero-area UV triangles skipped.
TexelMaps rasterize_uv_space(const Mesh& mesh, int atlas_res,
                             int* degenerate_uv_triangles = nullptr);

// World-space point for a hit recorded in a GBuffer.
vec3 world_position(const Mesh& mesh, int tri, const vec3& bary);

}  // namespace texpipe
