#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "texpipe/image.h"
#include "texpipe/raster.h"
#include "texpipe/texelmaps.h"

namespace texpipe {

// One calibrated view: its image, camera, and a depth GBuffer rendered from
// the mesh being textured.
struct View {
  Image image;
  Camera camera;
  GBuffer gbuffer;
};

// Exactly four views, mutually 90 degrees apart in azimuth, same resolution.
struct ViewSet {
  std::vector<View> views;
};

void validate(const ViewSet& views);

// Priority used for selection tie-breaks: front (0), then 90, 270, 180;
// anything else falls behind in view-index order.
int view_priority(const ViewSet& views, int view_index);

// Flags recorded per candidate.
enum : uint8_t {
  kCandidateDepthOk = 1,
  kCandidateFacingOk = 2,
};

// Up to one candidate color per view per valid texel.
struct CandidateSet {
  int atlas_res = 0;
  std::array<int, 4> priority{0, 1, 2, 3};  // selection rank per view index
  std::vector<uint8_t> count;               // per texel
  std::vector<int8_t> view;                 // 4 slots per texel, -1 empty
  std::vector<float> rgb;                   // 12 floats per texel (4 slots)
  std::vector<uint8_t> flags;               // 4 slots per texel

  size_t texel_count() const { return (size_t)atlas_res * atlas_res; }
  vec3 rgb_at(size_t texel, int slot) const {
    size_t b = (texel * 4 + slot) * 3;
    return {rgb[b], rgb[b + 1], rgb[b + 2]};
  }
};

// Projects each valid texel into every view. A view contributes a candidate
// when the texel lands inside the image and its camera-space depth matches
// the view's depth buffer within depth_eps (occlusion test). Colors are
// sampled bilinearly at the projected subpixel position.
CandidateSet project_views(const TexelMaps& texels, const ViewSet& views, double depth_eps,
                           int threads = 1);

// Keeps a candidate iff dot(texel normal, camera-to-surface direction) <=
// threshold; anything greater (grazing or back-facing) is dropped.
CandidateSet cull_silhouette(const CandidateSet& candidates, const TexelMaps& texels,
                             const ViewSet& views, double threshold = -0.2,
                             int threads = 1);

// Per texel, picks the candidate whose RGB is closest (Euclidean) to the
// coarse color, ties going to the higher-priority view; alpha 1 marks such
// texels. Texels without candidates keep the coarse color with alpha 0.
Image select_texels(const CandidateSet& candidates, const TexelMaps& texels,
                    int threads = 1);

}  // namespace texpipe
