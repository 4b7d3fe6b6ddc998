#include "texpipe/geometry.h"

#include <algorithm>
#include <cmath>

#include "texpipe/errors.h"

namespace texpipe {

void validate(const Mesh& mesh) {
  int nverts = (int)mesh.positions.size();
  for (auto& t : mesh.triangles) {
    if (t.x < 0 || t.x >= nverts || t.y < 0 || t.y >= nverts || t.z < 0 || t.z >= nverts)
      throw input_error("triangle index out of range");
  }
  if (!mesh.normals.empty() && mesh.normals.size() != mesh.positions.size())
    throw input_error("normal count does not match vertex count");
  if (!mesh.uv_triangles.empty()) {
    if (mesh.uv_triangles.size() != mesh.triangles.size())
      throw input_error("uv triangle count does not match triangle count");
    int nuvs = (int)mesh.uvs.size();
    for (auto& t : mesh.uv_triangles) {
      if (t.x < 0 || t.x >= nuvs || t.y < 0 || t.y >= nuvs || t.z < 0 || t.z >= nuvs)
        throw input_error("uv index out of range");
    }
  }
  if (!mesh.chart_ids.empty() && mesh.chart_ids.size() != mesh.triangles.size())
    throw input_error("chart id count does not match triangle count");
}

Bounds bounds(const Mesh& mesh) {
  if (mesh.positions.empty()) throw input_error("empty geometry");
  Bounds b{mesh.positions[0], mesh.positions[0]};
  for (auto& p : mesh.positions) {
    b.min = min(b.min, p);
    b.max = max(b.max, p);
  }
  return b;
}

std::vector<std::pair<int, int>> unique_edges(const Mesh& mesh) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(mesh.triangles.size() * 3);
  for (auto& t : mesh.triangles) {
    edges.emplace_back(std::min(t.x, t.y), std::max(t.x, t.y));
    edges.emplace_back(std::min(t.y, t.z), std::max(t.y, t.z));
    edges.emplace_back(std::min(t.z, t.x), std::max(t.z, t.x));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

double surface_area(const Mesh& mesh) {
  double area = 0;
  for (auto& t : mesh.triangles) {
    vec3 a = mesh.positions[t.x], b = mesh.positions[t.y], c = mesh.positions[t.z];
    area += 0.5 * length(cross(b - a, c - a));
  }
  return area;
}

NormalizeResult normalize_to_unit_box(const Mesh& mesh) {
  if (mesh.empty()) throw input_error("empty geometry");
  Bounds b = bounds(mesh);
  double extent = max_component(b.extent());
  if (!(extent > 0)) throw input_error("degenerate extent");
  NormalizeResult result;
  result.scale = 1.0 / extent;
  result.offset = -b.center() * result.scale;
  result.mesh = mesh;
  for (auto& p : result.mesh.positions) p = p * result.scale + result.offset;
  return result;
}

Camera camera_from_orbit(double azimuth_deg, double elevation_deg, double distance,
                         double fov_deg, int width, int height) {
  if (!(distance > 0)) throw input_error("camera distance must be positive");
  if (!(fov_deg > 0) || !(fov_deg < 180)) throw input_error("field of view out of range");
  if (!(elevation_deg >= -90) || !(elevation_deg <= 90))
    throw input_error("elevation out of range");
  if (width <= 0 || height <= 0) throw input_error("image size must be positive");
  // Reduce in degrees so 0 and 360 produce bit-identical cameras.
  double az = std::fmod(azimuth_deg, 360.0);
  if (az < 0) az += 360.0;
  Camera camera;
  camera.azimuth_deg = az;
  camera.elevation_deg = elevation_deg;
  camera.distance = distance;
  camera.fov_deg = fov_deg;
  camera.width = width;
  camera.height = height;
  return camera;
}

CameraFrame make_frame(const Camera& camera) {
  if (!(camera.distance > 0)) throw input_error("camera distance must be positive");
  if (!(camera.fov_deg > 0) || !(camera.fov_deg < 180))
    throw input_error("field of view out of range");
  if (!(camera.near_clip > 0) || !(camera.near_clip < camera.far_clip))
    throw input_error("bad clip planes");
  double az = radians(camera.azimuth_deg);
  double el = radians(camera.elevation_deg);
  CameraFrame frame;
  frame.eye = vec3{std::sin(az) * std::cos(el), std::sin(el), std::cos(az) * std::cos(el)} *
              camera.distance;
  frame.forward = normalize(-frame.eye);
  vec3 up_hint{0, 1, 0};
  if (std::abs(std::cos(el)) < 1e-9) {
    // Looking straight down (or up) the Y axis: keep the horizontal frame
    // the same camera would have just before reaching the pole.
    double sign = el > 0 ? 1.0 : -1.0;
    up_hint = vec3{std::sin(az), 0, std::cos(az)} * -sign;
  }
  frame.right = normalize(cross(frame.forward, up_hint));
  frame.up = cross(frame.right, frame.forward);
  frame.focal_px = (camera.height * 0.5) / std::tan(radians(camera.fov_deg) * 0.5);
  frame.width = camera.width;
  frame.height = camera.height;
  frame.near_clip = camera.near_clip;
  frame.far_clip = camera.far_clip;
  return frame;
}

bool CameraFrame::project(const vec3& p, vec2* pixel, double* depth) const {
  vec3 q = to_camera(p);
  if (q.z < near_clip) return false;
  if (pixel) *pixel = camera_to_pixel(q);
  if (depth) *depth = q.z;
  return true;
}

Mesh compute_vertex_normals(const Mesh& mesh, int* degenerate_vertices) {
  validate(mesh);
  Mesh result = mesh;
  result.normals.assign(mesh.positions.size(), vec3{0, 0, 0});
  for (auto& t : mesh.triangles) {
    vec3 a = mesh.positions[t.x], b = mesh.positions[t.y], c = mesh.positions[t.z];
    vec3 weighted = cross(b - a, c - a);  // length is twice the triangle area
    result.normals[t.x] += weighted;
    result.normals[t.y] += weighted;
    result.normals[t.z] += weighted;
  }
  int degenerate = 0;
  for (auto& n : result.normals) {
    double len = length(n);
    if (len > 0) {
      n /= len;
    } else {
      n = vec3{0, 0, 1};  // no non-degenerate incident triangle
      degenerate++;
    }
  }
  if (degenerate_vertices) *degenerate_vertices = degenerate;
  return result;
}

Mesh laplacian_smooth(const Mesh& mesh, int iterations, double lambda) {
  validate(mesh);
  if (iterations < 0) throw input_error("iterations must be non-negative");
  Mesh result = mesh;
  result.normals.clear();
  if (iterations == 0 || mesh.positions.empty()) return result;

  auto edges = unique_edges(mesh);
  std::vector<std::vector<int>> neighbors(mesh.positions.size());
  for (auto& [a, b] : edges) {
    neighbors[a].push_back(b);
    neighbors[b].push_back(a);
  }

  std::vector<vec3> current = mesh.positions;
  std::vector<vec3> next(current.size());
  for (int iter = 0; iter < iterations; iter++) {
    for (size_t i = 0; i < current.size(); i++) {
      if (neighbors[i].empty()) {
        next[i] = current[i];
        continue;
      }
      vec3 sum{0, 0, 0};
      for (int j : neighbors[i]) sum += current[j];
      vec3 average = sum / (double)neighbors[i].size();
      next[i] = current[i] + (average - current[i]) * lambda;
    }
    std::swap(current, next);
  }
  result.positions = current;
  return result;
}

}  // namespace texpipe
