#include "texpipe/raster.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "texpipe/errors.h"

namespace texpipe {

namespace {

// Edge function evaluated from canonically ordered endpoints: both triangles
// sharing an edge compute bit-identical values, so the strict/top-left split
// below covers every boundary pixel exactly once.
struct Edge {
  vec2 a, b;      // canonical order: lexicographic by (x, y)
  double sign;    // +1 when the triangle traverses a->b
  vec2 dir;      // directed edge in winding order
  double eval(double px, double py) const {
    return sign * ((b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x));
  }
  // Boundary pixels belong to edges pointing up, or horizontal edges
  // pointing right (screen y grows down).
  bool boundary_inside() const { return dir.y < 0 || (dir.y == 0 && dir.x > 0); }
};

Edge make_edge(const vec2& from, const vec2& to) {
  Edge e;
  bool ordered = from.x < to.x || (from.x == to.x && from.y <= to.y);
  e.a = ordered ? from : to;
  e.b = ordered ? to : from;
  e.sign = ordered ? 1.0 : -1.0;
  e.dir = {to.x - from.x, to.y - from.y};
  return e;
}

struct ClipVertex {
  vec3 camera;  // camera-space position
  vec3 bary;    // barycentric in the original triangle
};

// Sutherland-Hodgman against the near plane z = near, barycentrics carried
// through the cut. A triangle yields at most four vertices.
int clip_near(const ClipVertex in[3], double near_clip, ClipVertex out[4]) {
  int count = 0;
  for (int i = 0; i < 3; i++) {
    const ClipVertex& p = in[i];
    const ClipVertex& q = in[(i + 1) % 3];
    bool p_in = p.camera.z >= near_clip;
    bool q_in = q.camera.z >= near_clip;
    if (p_in) out[count++] = p;
    if (p_in != q_in) {
      double t = (near_clip - p.camera.z) / (q.camera.z - p.camera.z);
      out[count++] = {p.camera + (q.camera - p.camera) * t,
                      p.bary + (q.bary - p.bary) * t};
    }
  }
  return count;
}

struct ScreenVertex {
  vec2 pixel;
  double z;
  vec3 bary;
};

// Rasterizes one screen triangle, calling emit(x, y, depth, original-bary)
// for every covered pixel.
template <typename Emit>
void scan_triangle(ScreenVertex v0, ScreenVertex v1, ScreenVertex v2, int width,
                   int height, Emit&& emit) {
  double area2 = (v1.pixel.x - v0.pixel.x) * (v2.pixel.y - v0.pixel.y) -
                 (v1.pixel.y - v0.pixel.y) * (v2.pixel.x - v0.pixel.x);
  if (area2 == 0) return;
  if (area2 < 0) std::swap(v1, v2);  // canonical winding; both sides drawn

  Edge edges[3] = {make_edge(v1.pixel, v2.pixel), make_edge(v2.pixel, v0.pixel),
                   make_edge(v0.pixel, v1.pixel)};

  double min_x = std::min({v0.pixel.x, v1.pixel.x, v2.pixel.x});
  double max_x = std::max({v0.pixel.x, v1.pixel.x, v2.pixel.x});
  double min_y = std::min({v0.pixel.y, v1.pixel.y, v2.pixel.y});
  double max_y = std::max({v0.pixel.y, v1.pixel.y, v2.pixel.y});
  int x0 = std::max(0, (int)std::floor(min_x - 0.5));
  int x1 = std::min(width - 1, (int)std::ceil(max_x - 0.5) + 1);
  int y0 = std::max(0, (int)std::floor(min_y - 0.5));
  int y1 = std::min(height - 1, (int)std::ceil(max_y - 0.5) + 1);

  for (int y = y0; y <= y1; y++) {
    double py = y + 0.5;
    for (int x = x0; x <= x1; x++) {
      double px = x + 0.5;
      double w[3];
      bool inside = true;
      for (int e = 0; e < 3 && inside; e++) {
        w[e] = edges[e].eval(px, py);
        if (w[e] < 0 || (w[e] == 0 && !edges[e].boundary_inside())) inside = false;
      }
      if (!inside) continue;
      double sum = w[0] + w[1] + w[2];
      if (sum <= 0) continue;
      // Perspective-correct blend: screen weights divided by vertex depth.
      double f0 = w[0] / (sum * v0.z), f1 = w[1] / (sum * v1.z), f2 = w[2] / (sum * v2.z);
      double inv_z = f0 + f1 + f2;
      double depth = 1.0 / inv_z;
      vec3 bary = (v0.bary * f0 + v1.bary * f1 + v2.bary * f2) * depth;
      emit(x, y, depth, bary);
    }
  }
}

}  // namespace

GBuffer rasterize(const Mesh& mesh, const Camera& camera) {
  validate(mesh);
  CameraFrame frame = make_frame(camera);

  GBuffer gbuffer;
  gbuffer.width = frame.width;
  gbuffer.height = frame.height;
  size_t pixels = (size_t)frame.width * frame.height;
  gbuffer.depth.assign(pixels, std::numeric_limits<double>::infinity());
  gbuffer.tri.assign(pixels, -1);
  gbuffer.bary.assign(pixels, vec3{0, 0, 0});
  gbuffer.uv.assign(pixels, vec2{0, 0});
  gbuffer.normal.assign(pixels, vec3{0, 0, 0});
  gbuffer.mask.assign(pixels, 0);

  for (int t = 0; t < (int)mesh.triangles.size(); t++) {
    auto& tri = mesh.triangles[t];
    ClipVertex corners[3] = {
        {frame.to_camera(mesh.positions[tri.x]), {1, 0, 0}},
        {frame.to_camera(mesh.positions[tri.y]), {0, 1, 0}},
        {frame.to_camera(mesh.positions[tri.z]), {0, 0, 1}},
    };
    ClipVertex clipped[4];
    int n = clip_near(corners, frame.near_clip, clipped);
    for (int i = 2; i < n; i++) {
      ScreenVertex s0{frame.camera_to_pixel(clipped[0].camera), clipped[0].camera.z,
                      clipped[0].bary};
      ScreenVertex s1{frame.camera_to_pixel(clipped[i - 1].camera),
                      clipped[i - 1].camera.z, clipped[i - 1].bary};
      ScreenVertex s2{frame.camera_to_pixel(clipped[i].camera), clipped[i].camera.z,
                      clipped[i].bary};
      scan_triangle(s0, s1, s2, frame.width, frame.height,
                    [&](int x, int y, double depth, const vec3& bary) {
                      if (depth > frame.far_clip) return;
                      size_t p = gbuffer.index(x, y);
                      if (depth < gbuffer.depth[p]) {
                        gbuffer.depth[p] = depth;
                        gbuffer.tri[p] = t;
                        gbuffer.bary[p] = bary;
                      }
                    });
    }
  }

  bool with_uv = mesh.has_uvs();
  bool with_normals = mesh.has_normals();
  for (size_t p = 0; p < pixels; p++) {
    int t = gbuffer.tri[p];
    if (t < 0) continue;
    gbuffer.mask[p] = 1;
    vec3 b = gbuffer.bary[p];
    auto& tri = mesh.triangles[t];
    if (with_uv) {
      auto& ut = mesh.uv_triangles[t];
      gbuffer.uv[p] = mesh.uvs[ut.x] * b.x + mesh.uvs[ut.y] * b.y + mesh.uvs[ut.z] * b.z;
    }
    vec3 n{0, 0, 0};
    if (with_normals)
      n = mesh.normals[tri.x] * b.x + mesh.normals[tri.y] * b.y + mesh.normals[tri.z] * b.z;
    if (length(n) == 0)
      n = cross(mesh.positions[tri.y] - mesh.positions[tri.x],
                mesh.positions[tri.z] - mesh.positions[tri.x]);
    gbuffer.normal[p] = normalize(n);
  }
  return gbuffer;
}

Image render_textured(const GBuffer& gbuffer, const Image& texture, vec3 background) {
  if (texture.empty()) throw input_error("empty texture");
  Image out = Image::create(gbuffer.width, gbuffer.height, background, 0);
  for (int y = 0; y < gbuffer.height; y++)
    for (int x = 0; x < gbuffer.width; x++) {
      size_t p = gbuffer.index(x, y);
      if (!gbuffer.mask[p]) continue;
      out.set_rgb(x, y, sample_bilinear_uv(texture, gbuffer.uv[p].x, gbuffer.uv[p].y));
      out.set_alpha(x, y, 1);
    }
  return out;
}

TexelMaps rasterize_uv_space(const Mesh& mesh, int atlas_res, int* degenerate_uv_triangles) {
  validate(mesh);
  if (mesh.empty()) throw input_error("empty geometry");
  if (!mesh.has_uvs()) throw input_error("mesh has no uv atlas");
  if (!mesh.has_normals()) throw input_error("mesh has no vertex normals");
  if (atlas_res <= 0) throw input_error("atlas resolution must be positive");

  TexelMaps texels;
  texels.atlas_res = atlas_res;
  size_t n = texels.texel_count();
  texels.position.assign(n * 3, 0);
  texels.normal.assign(n * 3, 0);
  texels.coarse.assign(n * 3, 0);
  texels.chart.assign(n, -1);
  texels.valid.assign(n, 0);

  int degenerate = 0;
  for (int t = 0; t < (int)mesh.triangles.size(); t++) {
    auto& ut = mesh.uv_triangles[t];
    auto& tri = mesh.triangles[t];
    // Texel space with y up; rows are flipped on store.
    ScreenVertex v0{{mesh.uvs[ut.x].x * atlas_res, mesh.uvs[ut.x].y * atlas_res}, 1, {1, 0, 0}};
    ScreenVertex v1{{mesh.uvs[ut.y].x * atlas_res, mesh.uvs[ut.y].y * atlas_res}, 1, {0, 1, 0}};
    ScreenVertex v2{{mesh.uvs[ut.z].x * atlas_res, mesh.uvs[ut.z].y * atlas_res}, 1, {0, 0, 1}};
    double area2 = (v1.pixel.x - v0.pixel.x) * (v2.pixel.y - v0.pixel.y) -
                   (v1.pixel.y - v0.pixel.y) * (v2.pixel.x - v0.pixel.x);
    if (area2 == 0) {
      degenerate++;
      continue;
    }
    int chart = mesh.chart_ids.empty() ? 0 : mesh.chart_ids[t];
    scan_triangle(v0, v1, v2, atlas_res, atlas_res,
                  [&](int x, int y_up, double, const vec3& b) {
                    size_t p = (size_t)(atlas_res - 1 - y_up) * atlas_res + x;
                    vec3 pos = mesh.positions[tri.x] * b.x + mesh.positions[tri.y] * b.y +
                               mesh.positions[tri.z] * b.z;
                    vec3 nrm = normalize(mesh.normals[tri.x] * b.x +
                                         mesh.normals[tri.y] * b.y +
                                         mesh.normals[tri.z] * b.z);
                    if (length(nrm) == 0) return;  // fully degenerate normals
                    texels.position[p * 3] = (float)pos.x;
                    texels.position[p * 3 + 1] = (float)pos.y;
                    texels.position[p * 3 + 2] = (float)pos.z;
                    texels.normal[p * 3] = (float)nrm.x;
                    texels.normal[p * 3 + 1] = (float)nrm.y;
                    texels.normal[p * 3 + 2] = (float)nrm.z;
                    texels.chart[p] = chart;
                    texels.valid[p] = 1;
                  });
  }
  if (degenerate_uv_triangles) *degenerate_uv_triangles = degenerate;
  validate(texels);
  return texels;
}

vec3 world_position(const Mesh& mesh, int tri, const vec3& bary) {
  auto& t = mesh.triangles[tri];
  return mesh.positions[t.x] * bary.x + mesh.positions[t.y] * bary.y +
         mesh.positions[t.z] * bary.z;
}

}  // namespace texpipe
