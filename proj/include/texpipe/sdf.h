#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "texpipe/vec.h"

namespace texpipe {

// Regular grid of signed distances, negative inside. Node (i,j,k) sits at
// origin + spacing * (i,j,k); values are stored x-fastest, then y, then z.
// An optional color field holds RGB per node.
struct SdfGrid {
  int nx = 0, ny = 0, nz = 0;
  vec3 origin{0, 0, 0};
  double spacing = 1;
  std::vector<float> values;
  std::vector<float> colors;  // 3 per node or empty

  bool has_colors() const { return !colors.empty(); }
  size_t node_count() const { return (size_t)nx * ny * nz; }
  size_t index(int i, int j, int k) const { return (size_t)i + (size_t)nx * ((size_t)j + (size_t)ny * k); }
  vec3 point(int i, int j, int k) const { return origin + vec3{(double)i, (double)j, (double)k} * spacing; }
  double value(int i, int j, int k) const { return values[index(i, j, k)]; }
  vec3 color(int i, int j, int k) const {
    size_t b = index(i, j, k) * 3;
    return {colors[b], colors[b + 1], colors[b + 2]};
  }
};

void validate(const SdfGrid& grid);

// Non-fatal issues worth surfacing in run reports, e.g. the surface reaching
// the grid boundary (which clips the extracted mesh).
std::vector<std::string> grid_warnings(const SdfGrid& grid);

void save_sdfg(const std::string& path, const SdfGrid& grid);
SdfGrid load_sdfg(const std::string& path);

// Clamp-to-edge trilinear interpolation at a world-space point.
double trilinear_value(const SdfGrid& grid, const vec3& p);
vec3 trilinear_color(const SdfGrid& grid, const vec3& p);

// Procedural test scene: signed distance plus surface color, both defined
// everywhere in space.
struct AnalyticScene {
  std::function<double(const vec3&)> sdf;
  std::function<vec3(const vec3&)> color;
};

double sd_sphere(const vec3& p, const vec3& center, double radius);
double sd_capsule(const vec3& p, const vec3& a, const vec3& b, double radius);
double smooth_union(double a, double b, double k);

const std::vector<std::string>& fixture_names();
AnalyticScene make_fixture(const std::string& name);

// Samples the scene over a cube [-domain, domain]^3 with n nodes per axis.
SdfGrid sample_grid(const AnalyticScene& scene, int n, double domain);
SdfGrid sample_grid(const AnalyticScene& scene, int nx, int ny, int nz, vec3 origin,
                    double spacing);

}  // namespace texpipe
