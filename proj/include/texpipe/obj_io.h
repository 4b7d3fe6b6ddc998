#pragma once

#include <string>

#include "texpipe/geometry.h"

namespace texpipe {

// Writes positions, UVs, normals, and faces. Chart ids, when present, are
// emitted as "g chart_N" groups in triangle order. A non-empty texture path
// additionally writes a sibling .mtl referencing it. Floats are printed with
// shortest round-trip formatting, so save/load is lossless.
void save_obj(const std::string& path, const Mesh& mesh,
              const std::string& texture_relpath = "");

Mesh load_obj(const std::string& path);

}  // namespace texpipe
