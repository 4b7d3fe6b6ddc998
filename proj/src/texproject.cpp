#include "texpipe/texproject.h"

#include <algorithm>
#include <cmath>

#include "texpipe/errors.h"
#include "texpipe/parallel.h"

namespace texpipe {

void validate(const ViewSet& views) {
  if (views.views.size() != 4) throw input_error("view set must hold exactly 4 views");
  int w = views.views[0].image.width, h = views.views[0].image.height;
  for (auto& view : views.views) {
    if (view.image.empty()) throw input_error("view image is empty");
    if (view.image.width != w || view.image.height != h)
      throw input_error("view images differ in resolution");
    if (view.gbuffer.width != view.camera.width || view.gbuffer.height != view.camera.height)
      throw input_error("view depth buffer does not match its camera");
    if (view.image.width != view.camera.width || view.image.height != view.camera.height)
      throw input_error("view image does not match its camera");
  }
  // Mutually 90 degrees apart in azimuth: sorted azimuths form an arithmetic
  // chain with step 90.
  double az[4];
  for (int i = 0; i < 4; i++) {
    double a = std::fmod(views.views[i].camera.azimuth_deg, 360.0);
    if (a < 0) a += 360.0;
    az[i] = a;
  }
  std::sort(az, az + 4);
  for (int i = 1; i < 4; i++)
    if (std::abs(az[i] - az[0] - 90.0 * i) > 1e-6)
      throw input_error("view azimuths must be mutually 90 degrees apart");
}

int view_priority(const ViewSet& views, int view_index) {
  constexpr double kOrder[4] = {0, 90, 270, 180};
  double a = std::fmod(views.views[view_index].camera.azimuth_deg, 360.0);
  if (a < 0) a += 360.0;
  for (int rank = 0; rank < 4; rank++)
    if (std::abs(a - kOrder[rank]) < 1e-9) return rank;
  return 4 + view_index;
}

namespace {

CandidateSet empty_candidates(const TexelMaps& texels) {
  CandidateSet set;
  set.atlas_res = texels.atlas_res;
  size_t n = set.texel_count();
  set.count.assign(n, 0);
  set.view.assign(n * 4, -1);
  set.rgb.assign(n * 12, 0);
  set.flags.assign(n * 4, 0);
  return set;
}

}  // namespace

CandidateSet project_views(const TexelMaps& texels, const ViewSet& views, double depth_eps,
                           int threads) {
  validate(texels);
  validate(views);
  if (!(depth_eps >= 0)) throw input_error("depth tolerance must be non-negative");

  CandidateSet set = empty_candidates(texels);
  for (int i = 0; i < 4; i++) set.priority[i] = view_priority(views, i);

  CameraFrame frames[4];
  for (int v = 0; v < 4; v++) frames[v] = make_frame(views.views[v].camera);

  parallel_for(set.texel_count(), threads, [&](size_t t) {
    if (!texels.valid[t]) return;
    vec3 p = texels.position_at(t);
    for (int v = 0; v < 4; v++) {
      const View& view = views.views[v];
      vec2 pixel;
      double depth;
      if (!frames[v].project(p, &pixel, &depth)) continue;
      if (pixel.x < 0 || pixel.x >= view.image.width || pixel.y < 0 ||
          pixel.y >= view.image.height)
        continue;
      int px = (int)pixel.x, py = (int)pixel.y;
      double buffer_depth = view.gbuffer.depth[view.gbuffer.index(px, py)];
      if (!(std::abs(depth - buffer_depth) <= depth_eps)) continue;
      vec3 color = sample_bilinear_px(view.image, pixel.x, pixel.y);
      int slot = set.count[t]++;
      set.view[t * 4 + slot] = (int8_t)v;
      size_t b = (t * 4 + slot) * 3;
      set.rgb[b] = (float)color.x;
      set.rgb[b + 1] = (float)color.y;
      set.rgb[b + 2] = (float)color.z;
      set.flags[t * 4 + slot] = kCandidateDepthOk;
    }
  });
  return set;
}

CandidateSet cull_silhouette(const CandidateSet& candidates, const TexelMaps& texels,
                             const ViewSet& views, double threshold, int threads) {
  validate(texels);
  validate(views);
  if ((size_t)candidates.atlas_res != (size_t)texels.atlas_res)
    throw input_error("candidate set does not match texel maps");

  vec3 eyes[4];
  for (int v = 0; v < 4; v++) eyes[v] = make_frame(views.views[v].camera).eye;

  CandidateSet out = empty_candidates(texels);
  out.priority = candidates.priority;
  parallel_for(candidates.texel_count(), threads, [&](size_t t) {
    vec3 normal = texels.valid[t] ? texels.normal_at(t) : vec3{0, 0, 0};
    vec3 p = texels.position_at(t);
    for (int slot = 0; slot < candidates.count[t]; slot++) {
      int v = candidates.view[t * 4 + slot];
      vec3 dir = normalize(p - eyes[v]);  // camera toward surface
      if (dot(normal, dir) > threshold) continue;  // grazing/back-facing
      int dst = out.count[t]++;
      out.view[t * 4 + dst] = (int8_t)v;
      size_t src = (t * 4 + slot) * 3, dst_b = (t * 4 + dst) * 3;
      out.rgb[dst_b] = candidates.rgb[src];
      out.rgb[dst_b + 1] = candidates.rgb[src + 1];
      out.rgb[dst_b + 2] = candidates.rgb[src + 2];
      out.flags[t * 4 + dst] = candidates.flags[t * 4 + slot] | kCandidateFacingOk;
    }
  });
  return out;
}

Image select_texels(const CandidateSet& candidates, const TexelMaps& texels, int threads) {
  validate(texels);
  if ((size_t)candidates.atlas_res != (size_t)texels.atlas_res)
    throw input_error("candidate set does not match texel maps");

  int res = texels.atlas_res;
  Image out = Image::create(res, res, {0, 0, 0}, 0);
  parallel_for(texels.texel_count(), threads, [&](size_t t) {
    int x = (int)(t % res), y = (int)(t / res);
    vec3 coarse = texels.coarse_at(t);
    if (candidates.count[t] == 0) {
      out.set_rgb(x, y, coarse);
      return;  // alpha stays 0: excluded from the blend interior
    }
    int best_slot = -1, best_rank = 0;
    double best_dist = 0;
    for (int slot = 0; slot < candidates.count[t]; slot++) {
      vec3 c = candidates.rgb_at(t, slot);
      double dist = length_squared(c - coarse);
      int rank = candidates.priority[candidates.view[t * 4 + slot]];
      if (best_slot < 0 || dist < best_dist || (dist == best_dist && rank < best_rank)) {
        best_slot = slot;
        best_dist = dist;
        best_rank = rank;
      }
    }
    out.set_rgb(x, y, candidates.rgb_at(t, best_slot));
    out.set_alpha(x, y, 1);
  });
  return out;
}

}  // namespace texpipe
