#include "texpipe/sdf.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "texpipe/errors.h"

static_assert(std::endian::native == std::endian::little,
              "sdfg i/o assumes a little-endian host");

namespace texpipe {

void validate(const SdfGrid& grid) {
  if (grid.nx < 2 || grid.ny < 2 || grid.nz < 2)
    throw input_error("grid must have at least 2 nodes per axis");
  if (!(grid.spacing > 0) || !std::isfinite(grid.spacing))
    throw input_error("grid spacing must be positive");
  if (grid.values.size() != grid.node_count())
    throw input_error("grid value count does not match dimensions");
  if (!grid.colors.empty() && grid.colors.size() != grid.node_count() * 3)
    throw input_error("grid color count does not match dimensions");
  for (float v : grid.values)
    if (!std::isfinite(v)) throw input_error("non-finite value in grid");
  for (float c : grid.colors)
    if (!std::isfinite(c)) throw input_error("non-finite color in grid");
}

std::vector<std::string> grid_warnings(const SdfGrid& grid) {
  std::vector<std::string> warnings;
  bool boundary_inside = false;
  for (int k = 0; k < grid.nz && !boundary_inside; k++)
    for (int j = 0; j < grid.ny && !boundary_inside; j++)
      for (int i = 0; i < grid.nx && !boundary_inside; i++) {
        bool on_boundary = i == 0 || j == 0 || k == 0 || i == grid.nx - 1 ||
                           j == grid.ny - 1 || k == grid.nz - 1;
        if (on_boundary && grid.value(i, j, k) < 0) boundary_inside = true;
      }
  if (boundary_inside)
    warnings.push_back("signed distance negative on grid boundary; surface may be clipped");
  vec3 far = grid.point(grid.nx - 1, grid.ny - 1, grid.nz - 1);
  double reach = std::max(max_component(max(grid.origin, -grid.origin)),
                          max_component(max(far, -far)));
  if (reach > 0.6)
    warnings.push_back("grid domain extends outside [-0.6,0.6]^3");
  return warnings;
}

namespace {

constexpr char kMagic[4] = {'S', 'D', 'F', 'G'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void read_pod(std::ifstream& in, T* v, const std::string& path) {
  in.read(reinterpret_cast<char*>(v), sizeof *v);
  if (!in) throw input_error("truncated file: " + path);
}

}  // namespace

void save_sdfg(const std::string& path, const SdfGrid& grid) {
  validate(grid);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write " + path);
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, (uint32_t)grid.nx);
  write_pod(out, (uint32_t)grid.ny);
  write_pod(out, (uint32_t)grid.nz);
  write_pod(out, (float)grid.origin.x);
  write_pod(out, (float)grid.origin.y);
  write_pod(out, (float)grid.origin.z);
  write_pod(out, (float)grid.spacing);
  write_pod(out, (uint8_t)(grid.has_colors() ? 1 : 0));
  out.write(reinterpret_cast<const char*>(grid.values.data()),
            (std::streamsize)(grid.values.size() * sizeof(float)));
  if (grid.has_colors())
    out.write(reinterpret_cast<const char*>(grid.colors.data()),
              (std::streamsize)(grid.colors.size() * sizeof(float)));
  if (!out) throw input_error("cannot write " + path);
}

SdfGrid load_sdfg(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw input_error("bad magic in " + path);
  uint32_t version = 0;
  read_pod(in, &version, path);
  if (version != kVersion)
    throw input_error("unsupported sdfg version " + std::to_string(version) + " in " + path);

  SdfGrid grid;
  uint32_t nx = 0, ny = 0, nz = 0;
  read_pod(in, &nx, path);
  read_pod(in, &ny, path);
  read_pod(in, &nz, path);
  constexpr uint32_t kMaxDim = 1u << 10;
  if (nx < 2 || ny < 2 || nz < 2 || nx > kMaxDim || ny > kMaxDim || nz > kMaxDim)
    throw input_error("unreasonable grid dimensions in " + path);
  grid.nx = (int)nx;
  grid.ny = (int)ny;
  grid.nz = (int)nz;
  float ox, oy, oz, spacing;
  read_pod(in, &ox, path);
  read_pod(in, &oy, path);
  read_pod(in, &oz, path);
  read_pod(in, &spacing, path);
  grid.origin = {ox, oy, oz};
  grid.spacing = spacing;
  uint8_t has_color = 0;
  read_pod(in, &has_color, path);
  if (has_color > 1) throw input_error("bad color flag in " + path);

  grid.values.resize(grid.node_count());
  in.read(reinterpret_cast<char*>(grid.values.data()),
          (std::streamsize)(grid.values.size() * sizeof(float)));
  if (!in) throw input_error("truncated file: " + path);
  if (has_color) {
    grid.colors.resize(grid.node_count() * 3);
    in.read(reinterpret_cast<char*>(grid.colors.data()),
            (std::streamsize)(grid.colors.size() * sizeof(float)));
    if (!in) throw input_error("truncated file: " + path);
  }
  in.peek();
  if (!in.eof()) throw input_error("trailing data in " + path);
  validate(grid);
  return grid;
}

namespace {

struct TrilinearWeights {
  int i0, j0, k0, i1, j1, k1;
  double tx, ty, tz;
};

TrilinearWeights trilinear_setup(const SdfGrid& grid, const vec3& p) {
  auto axis = [](double g, int n, int* a0, int* a1, double* t) {
    double c = g < 0 ? 0 : (g > n - 1 ? n - 1 : g);
    *a0 = std::min((int)std::floor(c), n - 2);
    *a1 = *a0 + 1;
    *t = c - *a0;
  };
  vec3 g = (p - grid.origin) / grid.spacing;
  TrilinearWeights w;
  axis(g.x, grid.nx, &w.i0, &w.i1, &w.tx);
  axis(g.y, grid.ny, &w.j0, &w.j1, &w.ty);
  axis(g.z, grid.nz, &w.k0, &w.k1, &w.tz);
  return w;
}

}  // namespace

double trilinear_value(const SdfGrid& grid, const vec3& p) {
  auto w = trilinear_setup(grid, p);
  auto v = [&](int i, int j, int k) { return grid.value(i, j, k); };
  double c00 = v(w.i0, w.j0, w.k0) * (1 - w.tx) + v(w.i1, w.j0, w.k0) * w.tx;
  double c10 = v(w.i0, w.j1, w.k0) * (1 - w.tx) + v(w.i1, w.j1, w.k0) * w.tx;
  double c01 = v(w.i0, w.j0, w.k1) * (1 - w.tx) + v(w.i1, w.j0, w.k1) * w.tx;
  double c11 = v(w.i0, w.j1, w.k1) * (1 - w.tx) + v(w.i1, w.j1, w.k1) * w.tx;
  return (c00 * (1 - w.ty) + c10 * w.ty) * (1 - w.tz) + (c01 * (1 - w.ty) + c11 * w.ty) * w.tz;
}

vec3 trilinear_color(const SdfGrid& grid, const vec3& p) {
  if (!grid.has_colors()) throw input_error("grid has no color field");
  auto w = trilinear_setup(grid, p);
  auto c = [&](int i, int j, int k) { return grid.color(i, j, k); };
  vec3 c00 = c(w.i0, w.j0, w.k0) * (1 - w.tx) + c(w.i1, w.j0, w.k0) * w.tx;
  vec3 c10 = c(w.i0, w.j1, w.k0) * (1 - w.tx) + c(w.i1, w.j1, w.k0) * w.tx;
  vec3 c01 = c(w.i0, w.j0, w.k1) * (1 - w.tx) + c(w.i1, w.j0, w.k1) * w.tx;
  vec3 c11 = c(w.i0, w.j1, w.k1) * (1 - w.tx) + c(w.i1, w.j1, w.k1) * w.tx;
  return (c00 * (1 - w.ty) + c10 * w.ty) * (1 - w.tz) + (c01 * (1 - w.ty) + c11 * w.ty) * w.tz;
}

double sd_sphere(const vec3& p, const vec3& center, double radius) {
  return length(p - center) - radius;
}

double sd_capsule(const vec3& p, const vec3& a, const vec3& b, double radius) {
  vec3 pa = p - a, ba = b - a;
  double h = clamp(dot(pa, ba) / dot(ba, ba), 0.0, 1.0);
  return length(pa - ba * h) - radius;
}

double smooth_union(double a, double b, double k) {
  double h = clamp(0.5 + 0.5 * (b - a) / k, 0.0, 1.0);
  return b * (1 - h) + a * h - k * h * (1 - h);
}

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {"sphere", "capsule", "blob_character",
                                                 "nested_spheres"};
  return names;
}

AnalyticScene make_fixture(const std::string& name) {
  AnalyticScene scene;
  if (name == "sphere") {
    scene.sdf = [](const vec3& p) { return sd_sphere(p, {0, 0, 0}, 0.3); };
    scene.color = [](const vec3&) { return vec3{0.8, 0.45, 0.2}; };
  } else if (name == "capsule") {
    scene.sdf = [](const vec3& p) {
      return sd_capsule(p, {0, -0.22, 0}, {0, 0.22, 0}, 0.16);
    };
    scene.color = [](const vec3& p) {
      double t = clamp((p.y + 0.3) / 0.6, 0.0, 1.0);
      return lerp({0.15, 0.35, 0.75}, {0.95, 0.85, 0.25}, t);
    };
  } else if (name == "blob_character") {
    scene.sdf = [](const vec3& p) {
      constexpr double k = 0.03;
      double d = sd_capsule(p, {0, -0.12, 0}, {0, 0.12, 0}, 0.11);       // torso
      d = smooth_union(d, sd_sphere(p, {0, 0.28, 0}, 0.12), k);          // head
      d = smooth_union(d, sd_capsule(p, {0.10, 0.10, 0}, {0.26, -0.06, 0}, 0.045), k);
      d = smooth_union(d, sd_capsule(p, {-0.10, 0.10, 0}, {-0.26, -0.06, 0}, 0.045), k);
      d = smooth_union(d, sd_capsule(p, {0.055, -0.16, 0}, {0.09, -0.42, 0}, 0.05), k);
      d = smooth_union(d, sd_capsule(p, {-0.055, -0.16, 0}, {-0.09, -0.42, 0}, 0.05), k);
      return d;
    };
    scene.color = [](const vec3& p) {
      return clamp(vec3{0.55 + 1.6 * p.x + 0.25 * p.z, 0.50 + 1.5 * p.y - 0.3 * p.x,
                        0.50 - 1.4 * p.z + 0.2 * p.y},
                   0.0, 1.0);
    };
  } else if (name == "nested_spheres") {
    scene.sdf = [](const vec3& p) {
      double r = length(p);
      return std::min(std::max(r - 0.35, 0.25 - r), r - 0.15);
    };
    scene.color = [](const vec3& p) {
      double t = clamp(length(p) / 0.4, 0.0, 1.0);
      return lerp({0.9, 0.2, 0.3}, {0.2, 0.5, 0.9}, t);
    };
  } else {
    throw input_error("unknown fixture: " + name);
  }
  return scene;
}

SdfGrid sample_grid(const AnalyticScene& scene, int n, double domain) {
  if (!(domain > 0)) throw input_error("domain must be positive");
  if (n < 2) throw input_error("grid must have at least 2 nodes per axis");
  // Round origin and spacing through float so the in-memory grid matches the
  // file format exactly and meshes built before and after a save/load agree
  // to the bit.
  vec3 origin{(float)-domain, (float)-domain, (float)-domain};
  double spacing = (float)(2.0 * domain / (n - 1));
  return sample_grid(scene, n, n, n, origin, spacing);
}

SdfGrid sample_grid(const AnalyticScene& scene, int nx, int ny, int nz, vec3 origin,
                    double spacing) {
  if (!scene.sdf) throw input_error("scene has no sdf");
  if (nx < 2 || ny < 2 || nz < 2)
    throw input_error("grid must have at least 2 nodes per axis");
  if (!(spacing > 0)) throw input_error("grid spacing must be positive");
  SdfGrid grid;
  grid.nx = nx;
  grid.ny = ny;
  grid.nz = nz;
  grid.origin = origin;
  grid.spacing = spacing;
  grid.values.resize(grid.node_count());
  if (scene.color) grid.colors.resize(grid.node_count() * 3);
  for (int k = 0; k < nz; k++)
    for (int j = 0; j < ny; j++)
      for (int i = 0; i < nx; i++) {
        vec3 p = grid.point(i, j, k);
        grid.values[grid.index(i, j, k)] = (float)scene.sdf(p);
        if (scene.color) {
          vec3 c = clamp(scene.color(p), 0.0, 1.0);
          size_t b = grid.index(i, j, k) * 3;
          grid.colors[b] = (float)c.x;
          grid.colors[b + 1] = (float)c.y;
          grid.colors[b + 2] = (float)c.z;
        }
      }
  validate(grid);
  return grid;
}

}  // namespace texpipe
