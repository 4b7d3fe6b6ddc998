#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "texpipe/vec.h"

namespace texpipe {

// Indexed triangle mesh. Normals are per vertex (parallel to positions when
// present). UVs live in a separate pool referenced by per-corner indices so
// a vertex can take different texture coordinates on different charts.
struct Mesh {
  std::vector<vec3> positions;
  std::vector<vec3> normals;
  std::vector<vec2> uvs;
  std::vector<vec3i> triangles;
  std::vector<vec3i> uv_triangles;
  std::vector<int> chart_ids;  // per triangle; empty when no atlas

  bool has_normals() const { return !normals.empty(); }
  bool has_uvs() const { return !uvs.empty() && uv_triangles.size() == triangles.size(); }
  bool empty() const { return positions.empty() || triangles.empty(); }
};

// Throws input_error when index arrays are out of range or parallel arrays
// disagree in size.
void validate(const Mesh& mesh);

struct Bounds {
  vec3 min{0, 0, 0};
  vec3 max{0, 0, 0};
  vec3 extent() const { return max - min; }
  vec3 center() const { return (min + max) * 0.5; }
};

Bounds bounds(const Mesh& mesh);

// Pairs (a, b) with a < b, sorted ascending, each undirected edge once.
std::vector<std::pair<int, int>> unique_edges(const Mesh& mesh);

double surface_area(const Mesh& mesh);

// Rigid translate + uniform scale so the axis-aligned bounding box is
// centered at the origin with its longest side equal to 1. The applied map
// is p' = p * scale + offset.
struct NormalizeResult {
  Mesh mesh;
  double scale = 1;
  vec3 offset{0, 0, 0};
};
NormalizeResult normalize_to_unit_box(const Mesh& mesh);

// Orbit camera looking at the origin. Azimuth 0 places the eye on +Z looking
// down -Z; azimuth grows toward +X. Elevation lifts the eye toward +Y.
// Vertical field of view, square pixels, y-down pixel coordinates with pixel
// centers at half-integer offsets.
struct Camera {
  double azimuth_deg = 0;
  double elevation_deg = 0;
  double distance = 1.5;
  double fov_deg = 40;
  int width = 512;
  int height = 512;
  double near_clip = 0.05;
  double far_clip = 100;
};

Camera camera_from_orbit(double azimuth_deg, double elevation_deg, double distance,
                         double fov_deg, int width, int height);

// Orthonormal eye frame plus projection constants, derived once per render.
struct CameraFrame {
  vec3 eye{0, 0, 0};
  vec3 right{1, 0, 0};
  vec3 up{0, 1, 0};
  vec3 forward{0, 0, -1};  // unit vector from eye toward the origin
  double focal_px = 1;     // pixels per unit tangent
  int width = 0;
  int height = 0;
  double near_clip = 0;
  double far_clip = 0;

  // Camera-space coordinates: x along right, y along up, z = distance in
  // front of the eye along forward.
  vec3 to_camera(const vec3& p) const {
    vec3 d = p - eye;
    return {dot(d, right), dot(d, up), dot(d, forward)};
  }
  // Pixel coordinates of a camera-space point; valid only for q.z > 0.
  vec2 camera_to_pixel(const vec3& q) const {
    return {width * 0.5 + q.x / q.z * focal_px, height * 0.5 - q.y / q.z * focal_px};
  }
  // Projects a world point; returns false behind the near plane.
  bool project(const vec3& p, vec2* pixel, double* depth) const;
};

CameraFrame make_frame(const Camera& camera);

// Area-weighted vertex normals. Zero-area triangles contribute nothing; a
// vertex with no non-degenerate incident triangle falls back to (0,0,1).
// degenerate_vertices, when given, receives the count of such vertices.
Mesh compute_vertex_normals(const Mesh& mesh, int* degenerate_vertices = nullptr);

// Uniform-weight Laplacian smoothing: each iteration moves every vertex by
// lambda times (neighbor average - vertex), all vertices updated from the
// previous iteration's positions. Vertices without neighbors stay put.
// Stale normals are dropped; topology and UVs are kept.
Mesh laplacian_smooth(const Mesh& mesh, int iterations = 5, double lambda = 0.5);

}  // namespace texpipe
