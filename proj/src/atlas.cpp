#include "texpipe/atlas.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include "texpipe/errors.h"

namespace texpipe {

namespace {

constexpr int kGutter = 2;
constexpr double kNormalCone = 0.5;  // cos 60 degrees

struct Chart {
  std::vector<int> faces;       // ascending
  std::vector<int> vertices;    // ascending, unique
  std::vector<vec2> projected;  // parallel to vertices
  vec2 lo{0, 0}, hi{0, 0};      // projected bounds
};

struct Rect {
  int chart = 0;
  int w = 0, h = 0;  // texels, gutter included
  int x = 0, y = 0;  // placement, from packing
};

// First-fit shelves, full atlas width, charts pre-sorted by height.
bool shelf_pack(std::vector<Rect>& rects, int res) {
  int shelf_y = 0, shelf_h = 0, cursor_x = 0;
  for (auto& r : rects) {
    if (r.w > res) return false;
    if (cursor_x + r.w > res) {
      shelf_y += shelf_h;
      shelf_h = 0;
      cursor_x = 0;
    }
    if (shelf_h == 0) shelf_h = r.h;
    if (shelf_y + r.h > res) return false;
    r.x = cursor_x;
    r.y = shelf_y;
    cursor_x += r.w;
  }
  return true;
}

}  // namespace

Mesh generate_uv_atlas(const Mesh& input, int atlas_res) {
  validate(input);
  if (input.empty()) throw input_error("empty geometry");
  if (atlas_res < 4 * kGutter) throw input_error("atlas resolution too small");

  int nfaces = (int)input.triangles.size();
  std::vector<vec3> face_area_normal(nfaces);  // cross product, length = 2 * area
  std::vector<vec3> face_unit_normal(nfaces);
  for (int f = 0; f < nfaces; f++) {
    auto& t = input.triangles[f];
    vec3 c = cross(input.positions[t.y] - input.positions[t.x],
                   input.positions[t.z] - input.positions[t.x]);
    face_area_normal[f] = c;
    face_unit_normal[f] = normalize(c);
  }

  // Face adjacency across shared undirected edges.
  std::unordered_map<uint64_t, std::vector<int>> edge_faces;
  edge_faces.reserve((size_t)nfaces * 3);
  auto edge_key = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return ((uint64_t)(uint32_t)a << 32) | (uint32_t)b;
  };
  for (int f = 0; f < nfaces; f++) {
    auto& t = input.triangles[f];
    edge_faces[edge_key(t.x, t.y)].push_back(f);
    edge_faces[edge_key(t.y, t.z)].push_back(f);
    edge_faces[edge_key(t.z, t.x)].push_back(f);
  }
  std::vector<std::vector<int>> neighbors(nfaces);
  for (int f = 0; f < nfaces; f++) {
    auto& t = input.triangles[f];
    for (auto key : {edge_key(t.x, t.y), edge_key(t.y, t.z), edge_key(t.z, t.x)}) {
      for (int other : edge_faces[key])
        if (other != f) neighbors[f].push_back(other);
    }
    std::sort(neighbors[f].begin(), neighbors[f].end());
    neighbors[f].erase(std::unique(neighbors[f].begin(), neighbors[f].end()),
                       neighbors[f].end());
  }

  // Grow charts breadth-first from the lowest unassigned face.
  std::vector<int> chart_of(nfaces, -1);
  std::vector<Chart> charts;
  for (int seed = 0; seed < nfaces; seed++) {
    if (chart_of[seed] >= 0) continue;
    int chart_id = (int)charts.size();
    charts.emplace_back();
    vec3 seed_normal = face_unit_normal[seed];
    std::deque<int> queue{seed};
    chart_of[seed] = chart_id;
    while (!queue.empty()) {
      int face = queue.front();
      queue.pop_front();
      charts[chart_id].faces.push_back(face);
      for (int next : neighbors[face]) {
        if (chart_of[next] >= 0) continue;
        if (dot(face_unit_normal[next], seed_normal) < kNormalCone) continue;
        chart_of[next] = chart_id;
        queue.push_back(next);
      }
    }
    std::sort(charts[chart_id].faces.begin(), charts[chart_id].faces.end());
  }

  // Flatten each chart onto the plane of its area-weighted mean normal.
  for (auto& chart : charts) {
    vec3 mean{0, 0, 0};
    for (int f : chart.faces) mean += face_area_normal[f];
    vec3 n = normalize(mean);
    if (length(n) == 0) n = {0, 0, 1};
    double ax = std::abs(n.x), ay = std::abs(n.y), az = std::abs(n.z);
    vec3 helper = ax <= ay && ax <= az ? vec3{1, 0, 0}
                  : ay <= az           ? vec3{0, 1, 0}
                                       : vec3{0, 0, 1};
    vec3 u = normalize(cross(helper, n));
    vec3 v = cross(n, u);

    for (int f : chart.faces) {
      auto& t = input.triangles[f];
      for (int idx : {t.x, t.y, t.z}) chart.vertices.push_back(idx);
    }
    std::sort(chart.vertices.begin(), chart.vertices.end());
    chart.vertices.erase(std::unique(chart.vertices.begin(), chart.vertices.end()),
                         chart.vertices.end());
    chart.projected.resize(chart.vertices.size());
    for (size_t i = 0; i < chart.vertices.size(); i++) {
      vec3 p = input.positions[chart.vertices[i]];
      chart.projected[i] = {dot(p, u), dot(p, v)};
    }
    chart.lo = chart.hi = chart.projected[0];
    for (auto& q : chart.projected) {
      chart.lo = {std::min(chart.lo.x, q.x), std::min(chart.lo.y, q.y)};
      chart.hi = {std::max(chart.hi.x, q.x), std::max(chart.hi.y, q.y)};
    }
  }

  // Rects at a given texel-per-unit scale, sorted tallest first for packing.
  auto rects_at = [&](double scale) {
    std::vector<Rect> rects(charts.size());
    for (size_t c = 0; c < charts.size(); c++) {
      vec2 extent = charts[c].hi - charts[c].lo;
      rects[c].chart = (int)c;
      rects[c].w = std::max((int)std::ceil(extent.x * scale), 1) + 2 * kGutter;
      rects[c].h = std::max((int)std::ceil(extent.y * scale), 1) + 2 * kGutter;
    }
    std::stable_sort(rects.begin(), rects.end(), [](const Rect& a, const Rect& b) {
      if (a.h != b.h) return a.h > b.h;
      if (a.w != b.w) return a.w > b.w;
      return a.chart < b.chart;
    });
    return rects;
  };
  auto try_pack = [&](double scale, std::vector<Rect>* out) {
    auto rects = rects_at(scale);
    if (!shelf_pack(rects, atlas_res)) return false;
    if (out) *out = std::move(rects);
    return true;
  };

  constexpr double kMinScale = 1e-9;
  if (!try_pack(kMinScale, nullptr))
    throw input_error("atlas overflow: increase resolution");
  double lo = kMinScale, hi = std::max(1.0, 2 * kMinScale);
  while (try_pack(hi, nullptr)) {
    lo = hi;
    hi *= 2;
    if (hi > 1e15) break;
  }
  for (int iter = 0; iter < 60; iter++) {
    double mid = 0.5 * (lo + hi);
    if (try_pack(mid, nullptr))
      lo = mid;
    else
      hi = mid;
  }
  double scale = lo;
  std::vector<Rect> placed;
  if (!try_pack(scale, &placed)) throw input_error("atlas overflow: increase resolution");

  std::vector<Rect> rect_of_chart(charts.size());
  for (auto& r : placed) rect_of_chart[r.chart] = r;

  // Emit one UV per chart vertex; shared mesh vertices get distinct UVs in
  // each chart they touch. V runs bottom-up.
  Mesh result = input;
  result.uvs.clear();
  result.uv_triangles.assign(input.triangles.size(), {-1, -1, -1});
  result.chart_ids.assign(nfaces, -1);
  for (size_t c = 0; c < charts.size(); c++) {
    auto& chart = charts[c];
    auto& rect = rect_of_chart[c];
    std::unordered_map<int, int> uv_of_vertex;
    uv_of_vertex.reserve(chart.vertices.size());
    for (size_t i = 0; i < chart.vertices.size(); i++) {
      vec2 local = chart.projected[i] - chart.lo;
      double tx = rect.x + kGutter + local.x * scale;
      double ty = rect.y + kGutter + local.y * scale;
      uv_of_vertex[chart.vertices[i]] = (int)result.uvs.size();
      result.uvs.push_back({tx / atlas_res, ty / atlas_res});
    }
    for (int f : chart.faces) {
      auto& t = input.triangles[f];
      result.uv_triangles[f] = {uv_of_vertex[t.x], uv_of_vertex[t.y], uv_of_vertex[t.z]};
      result.chart_ids[f] = (int)c;
    }
  }
  validate(result);
  return result;
}

}  // namespace texpipe
