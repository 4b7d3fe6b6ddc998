#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>

#include "texpipe/geometry.h"

namespace testutil {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Axis-aligned box with outward-facing faces, two triangles each.
inline texpipe::Mesh make_cube(texpipe::vec3 lo, texpipe::vec3 hi) {
  texpipe::Mesh mesh;
  for (int corner = 0; corner < 8; corner++)
    mesh.positions.push_back({corner & 1 ? hi.x : lo.x, corner & 2 ? hi.y : lo.y,
                              corner & 4 ? hi.z : lo.z});
  int faces[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                     {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (auto& f : faces) {
    mesh.triangles.push_back({f[0], f[1], f[2]});
    mesh.triangles.push_back({f[0], f[2], f[3]});
  }
  return mesh;
}

inline texpipe::Mesh make_tetrahedron() {
  texpipe::Mesh mesh;
  mesh.positions = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  mesh.triangles = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  return mesh;
}

// Icosahedron subdivided and reprojected onto the unit sphere; shared
// vertices, watertight, outward winding.
inline texpipe::Mesh make_icosphere(int subdivisions) {
  using texpipe::vec3;
  texpipe::Mesh mesh;
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  const vec3 base[12] = {{-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t},   {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : base) mesh.positions.push_back(texpipe::normalize(p));
  mesh.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                    {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                    {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                    {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; s++) {
    texpipe::Mesh next;
    next.positions = mesh.positions;
    std::map<std::pair<int, int>, int> cache;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto [it, fresh] = cache.try_emplace(key, (int)next.positions.size());
      if (fresh)
        next.positions.push_back(
            texpipe::normalize((next.positions[a] + next.positions[b]) * 0.5));
      return it->second;
    };
    for (auto& t : mesh.triangles) {
      int ab = midpoint(t.x, t.y), bc = midpoint(t.y, t.z), ca = midpoint(t.z, t.x);
      next.triangles.push_back({t.x, ab, ca});
      next.triangles.push_back({t.y, bc, ab});
      next.triangles.push_back({t.z, ca, bc});
      next.triangles.push_back({ab, bc, ca});
    }
    mesh = next;
  }
  return mesh;
}

}  // namespace testutil
