#include "texpipe/texelmaps.h"

#include <cmath>
#include <cstring>
#include <fstream>

#include "texpipe/errors.h"
#include "texpipe/raster.h"

namespace texpipe {

void validate(const TexelMaps& texels) {
  size_t n = texels.texel_count();
  if (texels.atlas_res <= 0) throw input_error("texel maps have no resolution");
  if (texels.position.size() != n * 3 || texels.normal.size() != n * 3 ||
      texels.coarse.size() != n * 3 || texels.chart.size() != n || texels.valid.size() != n)
    throw input_error("texel map array sizes do not match resolution");
  for (size_t t = 0; t < n; t++) {
    if (!texels.valid[t]) continue;
    vec3 p = texels.position_at(t), m = texels.normal_at(t);
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      throw input_error("non-finite texel position");
    if (std::abs(length(m) - 1.0) > 1e-5)
      throw input_error("texel normal not unit length");
  }
}

namespace {

constexpr char kMagic[4] = {'T', 'X', 'L', 'M'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_array(std::ofstream& out, const std::vector<T>& data) {
  out.write(reinterpret_cast<const char*>(data.data()),
            (std::streamsize)(data.size() * sizeof(T)));
}

template <typename T>
void read_array(std::ifstream& in, std::vector<T>* data, size_t count,
                const std::string& path) {
  data->resize(count);
  in.read(reinterpret_cast<char*>(data->data()), (std::streamsize)(count * sizeof(T)));
  if (!in) throw input_error("truncated file: " + path);
}

}  // namespace

void save_texelmaps(const std::string& path, const TexelMaps& texels) {
  validate(texels);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write " + path);
  out.write(kMagic, 4);
  uint32_t version = kVersion, res = (uint32_t)texels.atlas_res;
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&res), 4);
  write_array(out, texels.position);
  write_array(out, texels.normal);
  write_array(out, texels.coarse);
  write_array(out, texels.chart);
  write_array(out, texels.valid);
  if (!out) throw input_error("cannot write " + path);
}

TexelMaps load_texelmaps(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw input_error("bad magic in " + path);
  uint32_t version = 0, res = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&res), 4);
  if (!in) throw input_error("truncated file: " + path);
  if (version != kVersion)
    throw input_error("unsupported texel map version " + std::to_string(version) + " in " + path);
  if (res == 0 || res > (1u << 15)) throw input_error("unreasonable resolution in " + path);

  TexelMaps texels;
  texels.atlas_res = (int)res;
  size_t n = texels.texel_count();
  read_array(in, &texels.position, n * 3, path);
  read_array(in, &texels.normal, n * 3, path);
  read_array(in, &texels.coarse, n * 3, path);
  read_array(in, &texels.chart, n, path);
  read_array(in, &texels.valid, n, path);
  in.peek();
  if (!in.eof()) throw input_error("trailing data in " + path);
  validate(texels);
  return texels;
}

Image bake_coarse_texture(TexelMaps& texels, const SdfGrid& grid, double scale, vec3 offset) {
  validate(texels);
  if (!grid.has_colors()) throw input_error("grid has no color field");
  if (!(scale != 0)) throw input_error("bake scale must be non-zero");
  Image texture = Image::create(texels.atlas_res, texels.atlas_res, {0, 0, 0}, 0);
  size_t n = texels.texel_count();
  for (size_t t = 0; t < n; t++) {
    if (!texels.valid[t]) {
      texels.coarse[t * 3] = texels.coarse[t * 3 + 1] = texels.coarse[t * 3 + 2] = 0;
      continue;
    }
    vec3 grid_point = (texels.position_at(t) - offset) / scale;
    vec3 color = trilinear_color(grid, grid_point);
    texels.coarse[t * 3] = (float)color.x;
    texels.coarse[t * 3 + 1] = (float)color.y;
    texels.coarse[t * 3 + 2] = (float)color.z;
    int x = (int)(t % texels.atlas_res), y = (int)(t / texels.atlas_res);
    texture.set_rgb(x, y, color);
    texture.set_alpha(x, y, 1);
  }
  return texture;
}

Image bake_coarse_texture(const Mesh& mesh, const SdfGrid& grid, int atlas_res) {
  if (!grid.has_colors()) throw input_error("grid has no color field");
  if (atlas_res < 1) throw input_error("atlas resolution must be positive");
  if (mesh.empty()) return Image::create(atlas_res, atlas_res, {0, 0, 0}, 0);
  if (!mesh.has_uvs()) throw input_error("mesh has no texture coordinates");
  Mesh shaded = mesh.has_normals() ? mesh : compute_vertex_normals(mesh);
  TexelMaps texels = rasterize_uv_space(shaded, atlas_res);
  return bake_coarse_texture(texels, grid);
}

Image dilate_atlas(const Image& texture, const TexelMaps& texels, int rings) {
  int res = texture.width;
  if (texture.height != res || texels.atlas_res != res)
    throw input_error("dilate: texture and texel maps disagree in size");

  Image out = texture;
  size_t n = texels.texel_count();
  std::vector<int32_t> chart(texels.chart.begin(), texels.chart.end());
  std::vector<uint8_t> filled(n);
  for (size_t t = 0; t < n; t++) filled[t] = texture.pixels[t * 4 + 3] > 0.5f;

  for (int ring = 0; ring < rings; ring++) {
    Image prev = out;
    std::vector<uint8_t> prev_filled = filled;
    std::vector<int32_t> prev_chart = chart;
    for (int y = 0; y < res; y++) {
      for (int x = 0; x < res; x++) {
        size_t t = (size_t)y * res + x;
        if (prev_filled[t]) continue;
        int32_t neighbor_chart[8];
        vec3 neighbor_rgb[8];
        int count = 0;
        for (int dy = -1; dy <= 1; dy++) {
          for (int dx = -1; dx <= 1; dx++) {
            if (!dx && !dy) continue;
            int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= res || ny >= res) continue;
            size_t nt = (size_t)ny * res + nx;
            if (!prev_filled[nt]) continue;
            neighbor_chart[count] = prev_chart[nt];
            neighbor_rgb[count] = prev.rgb(nx, ny);
            count++;
          }
        }
        if (!count) continue;
        // Majority chart, ties to the lowest id.
        int32_t best_chart = 0;
        int best_votes = -1;
        for (int i = 0; i < count; i++) {
          int votes = 0;
          for (int j = 0; j < count; j++) votes += neighbor_chart[j] == neighbor_chart[i];
          if (votes > best_votes ||
              (votes == best_votes && neighbor_chart[i] < best_chart)) {
            best_votes = votes;
            best_chart = neighbor_chart[i];
          }
        }
        vec3 sum{0, 0, 0};
        int used = 0;
        for (int i = 0; i < count; i++) {
          if (neighbor_chart[i] != best_chart) continue;
          sum += neighbor_rgb[i];
          used++;
        }
        out.set_rgb(x, y, sum / used);
        filled[t] = 1;
        chart[t] = best_chart;
      }
    }
  }
  return out;
}

}  // namespace texpipe
