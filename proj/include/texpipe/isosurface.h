#pragma once

#include "texpipe/geometry.h"
#include "texpipe/sdf.h"

namespace texpipe {

// Extracts the zero level set of the grid as a triangle mesh. Each cell is
// split into six tetrahedra sharing the cell's main diagonal; crossings are
// interpolated linearly along edges. Inside means value < 0; triangles wind
// counter-clockwise seen from outside. Crossing vertices are created once
// per grid edge, so the mesh is watertight wherever the surface stays off
// the grid boundary. A grid that never changes sign gives an empty mesh.
Mesh marching_tetrahedra(const SdfGrid& grid);

}  // namespace texpipe
