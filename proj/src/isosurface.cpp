#include "texpipe/isosurface.h"

#include <unordered_map>

#include "texpipe/errors.h"

namespace texpipe {

namespace {

// Cell corner offsets; the main diagonal runs from corner 0 to corner 6.
constexpr int kCorner[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
};

// Six positively-oriented tetrahedra around the 0-6 diagonal. Neighboring
// cells see matching face diagonals, which keeps the surface watertight.
constexpr int kTet[6][4] = {
    {0, 5, 1, 6}, {0, 1, 2, 6}, {0, 2, 3, 6},
    {0, 3, 7, 6}, {0, 7, 4, 6}, {0, 4, 5, 6},
};

// Surface triangles per inside-mask (bit i set = tet vertex i inside). Each
// entry lists crossing edges as local vertex pairs, wound so the normal
// points toward the outside.
struct TetCase {
  int count;
  uint8_t edge[6][2];
};

constexpr TetCase kCases[16] = {
    {0, {}},                                                            // 0000
    {1, {{0, 1}, {0, 2}, {0, 3}}},                                      // 0001
    {1, {{1, 0}, {1, 3}, {1, 2}}},                                      // 0010
    {2, {{0, 2}, {0, 3}, {1, 3}, {0, 2}, {1, 3}, {1, 2}}},              // 0011
    {1, {{2, 0}, {2, 1}, {2, 3}}},                                      // 0100
    {2, {{0, 3}, {0, 1}, {2, 1}, {0, 3}, {2, 1}, {2, 3}}},              // 0101
    {2, {{1, 0}, {1, 3}, {2, 3}, {1, 0}, {2, 3}, {2, 0}}},              // 0110
    {1, {{3, 0}, {3, 1}, {3, 2}}},                                      // 0111
    {1, {{3, 0}, {3, 2}, {3, 1}}},                                      // 1000
    {2, {{0, 1}, {0, 2}, {3, 2}, {0, 1}, {3, 2}, {3, 1}}},              // 1001
    {2, {{1, 2}, {1, 0}, {3, 0}, {1, 2}, {3, 0}, {3, 2}}},              // 1010
    {1, {{2, 0}, {2, 3}, {2, 1}}},                                      // 1011
    {2, {{2, 0}, {2, 1}, {3, 1}, {2, 0}, {3, 1}, {3, 0}}},              // 1100
    {1, {{1, 0}, {1, 2}, {1, 3}}},                                      // 1101
    {1, {{0, 1}, {0, 3}, {0, 2}}},                                      // 1110
    {0, {}},                                                            // 1111
};

}  // namespace

Mesh marching_tetrahedra(const SdfGrid& grid) {
  validate(grid);
  if (grid.node_count() > 0xFFFFFFFFull)
    throw input_error("grid too large for edge keys");
  Mesh mesh;
  std::unordered_map<uint64_t, int> edge_vertices;
  edge_vertices.reserve(grid.node_count() / 4);

  // One vertex per crossing grid edge, interpolated from the lower-index
  // node, so every tetrahedron touching the edge gets bit-identical output.
  auto crossing_vertex = [&](size_t na, size_t nb, vec3 pa, vec3 pb, double sa,
                             double sb) -> int {
    if (na > nb) {
      std::swap(na, nb);
      std::swap(pa, pb);
      std::swap(sa, sb);
    }
    uint64_t key = ((uint64_t)na << 32) | (uint64_t)nb;
    auto it = edge_vertices.find(key);
    if (it != edge_vertices.end()) return it->second;
    double t = sa / (sa - sb);
    int index = (int)mesh.positions.size();
    mesh.positions.push_back(pa + (pb - pa) * t);
    edge_vertices.emplace(key, index);
    return index;
  };

  size_t node_index[8];
  vec3 node_point[8];
  double node_value[8];
  for (int k = 0; k + 1 < grid.nz; k++)
    for (int j = 0; j + 1 < grid.ny; j++)
      for (int i = 0; i + 1 < grid.nx; i++) {
        for (int c = 0; c < 8; c++) {
          int ci = i + kCorner[c][0], cj = j + kCorner[c][1], ck = k + kCorner[c][2];
          node_index[c] = grid.index(ci, cj, ck);
          node_point[c] = grid.point(ci, cj, ck);
          node_value[c] = grid.values[node_index[c]];
        }
        for (auto& tet : kTet) {
          int mask = 0;
          for (int v = 0; v < 4; v++)
            if (node_value[tet[v]] < 0) mask |= 1 << v;
          const TetCase& entry = kCases[mask];
          for (int t = 0; t < entry.count; t++) {
            int tri[3];
            for (int e = 0; e < 3; e++) {
              int a = tet[entry.edge[t * 3 + e][0]];
              int b = tet[entry.edge[t * 3 + e][1]];
              tri[e] = crossing_vertex(node_index[a], node_index[b], node_point[a],
                                       node_point[b], node_value[a], node_value[b]);
            }
            mesh.triangles.push_back({tri[0], tri[1], tri[2]});
          }
        }
      }

  // A grid that never changes sign yields an empty mesh; callers that need a
  // surface decide whether that is an error.
  return mesh;
}

}  // namespace texpipe
