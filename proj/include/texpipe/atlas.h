#pragma once

#include "texpipe/geometry.h"

namespace texpipe {

// Builds per-corner UVs for the mesh. Faces are grown into charts by BFS
// from the lowest-index unassigned face; a face joins while its normal stays
// within 60 degrees of the seed's. Each chart is flattened by orthographic
// projection onto the plane of its area-weighted mean normal, then charts
// are shelf-packed into a square atlas with a 2-texel gutter on every side
// under the largest uniform scale that fits. Throws "atlas overflow:
// increase resolution" when even minimal charts cannot be packed.
Mesh generate_uv_atlas(const Mesh& mesh, int atlas_res);

}  // namespace texpipe
