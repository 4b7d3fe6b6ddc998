#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "texpipe/vec.h"

namespace texpipe {

// Float RGBA image, row-major, row 0 at the top. Values are nominally [0,1]
// but are only clamped when encoding to 8-bit.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;  // 4 floats per pixel

  static Image create(int width, int height, vec3 rgb = {0, 0, 0}, float alpha = 1);

  size_t index(int x, int y) const { return ((size_t)y * width + x) * 4; }
  vec3 rgb(int x, int y) const {
    size_t i = index(x, y);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  float alpha(int x, int y) const { return pixels[index(x, y) + 3]; }
  void set_rgb(int x, int y, vec3 c) {
    size_t i = index(x, y);
    pixels[i] = (float)c.x;
    pixels[i + 1] = (float)c.y;
    pixels[i + 2] = (float)c.z;
  }
  void set_alpha(int x, int y, float a) { pixels[index(x, y) + 3] = a; }
  bool empty() const { return pixels.empty(); }
};

// 8-bit RGBA PNG with fixed encoder settings, so identical images produce
// identical bytes. Values are clamped to [0,1] and rounded on write.
void write_png(const std::string& path, const Image& image);
Image read_png(const std::string& path);

// Clamp-to-edge bilinear lookup. UV has (0,0) at the bottom-left of the
// texture; pixel coordinates have (0.5, 0.5) at the center of pixel (0,0).
vec3 sample_bilinear_px(const Image& image, double px, double py);
vec3 sample_bilinear_uv(const Image& image, double u, double v);

double mean_squared_error(const Image& a, const Image& b);

}  // namespace texpipe
