#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "texpipe/geometry.h"
#include "texpipe/image.h"
#include "texpipe/sdf.h"
#include "texpipe/vec.h"

namespace texpipe {

// Texture-space geometry buffers: for every atlas texel, the surface point
// it represents. Arrays are row-major with row 0 at the top of the atlas
// image; a texel is valid when some chart covers its center.
struct TexelMaps {
  int atlas_res = 0;
  std::vector<float> position;  // 3 per texel
  std::vector<float> normal;    // 3 per texel, unit for valid texels
  std::vector<float> coarse;    // 3 per texel, filled by baking
  std::vector<int32_t> chart;   // -1 where invalid
  std::vector<uint8_t> valid;

  size_t texel_count() const { return (size_t)atlas_res * atlas_res; }
  vec3 position_at(size_t t) const {
    return {position[t * 3], position[t * 3 + 1], position[t * 3 + 2]};
  }
  vec3 normal_at(size_t t) const {
    return {normal[t * 3], normal[t * 3 + 1], normal[t * 3 + 2]};
  }
  vec3 coarse_at(size_t t) const {
    return {coarse[t * 3], coarse[t * 3 + 1], coarse[t * 3 + 2]};
  }
};

void validate(const TexelMaps& texels);

void save_texelmaps(const std::string& path, const TexelMaps& texels);
TexelMaps load_texelmaps(const std::string& path);

// Colors every valid texel by a trilinear lookup of the grid's color volume
// at the texel's surface point, stores it in texels.coarse, and returns the
// same colors as an atlas image (invalid texels black, alpha 0). When the
// mesh was transformed after sampling the grid (p' = p * scale + offset),
// pass that map so lookups happen in grid space.
Image bake_coarse_texture(TexelMaps& texels, const SdfGrid& grid, double scale = 1.0,
                          vec3 offset = {0, 0, 0});

// Convenience: rasterizes the mesh's atlas at atlas_res and bakes in one
// call. The mesh must carry a UV atlas and be in grid coordinates; an empty
// mesh gives a fully masked-out texture.
Image bake_coarse_texture(const Mesh& mesh, const SdfGrid& grid, int atlas_res);

// Pads chart colors into the gutter so bilinear texture lookups near chart
// borders don't pull in black. Each ring fills empty texels with the average
// of their filled 8-neighbors, restricted to a single chart (the most common
// one, ties to the lowest id) so neighboring charts never mix. Alpha is left
// untouched: the coverage mask survives.
Image dilate_atlas(const Image& texture, const TexelMaps& texels, int rings = 2);

}  // namespace texpipe
