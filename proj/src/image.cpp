#include "texpipe/image.h"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

#include "texpipe/errors.h"

namespace texpipe {

Image Image::create(int width, int height, vec3 rgb, float alpha) {
  if (width <= 0 || height <= 0) throw input_error("image size must be positive");
  Image image;
  image.width = width;
  image.height = height;
  image.pixels.resize((size_t)width * height * 4);
  for (size_t i = 0; i < image.pixels.size(); i += 4) {
    image.pixels[i] = (float)rgb.x;
    image.pixels[i + 1] = (float)rgb.y;
    image.pixels[i + 2] = (float)rgb.z;
    image.pixels[i + 3] = alpha;
  }
  return image;
}

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};

uint8_t to_byte(float v) {
  float c = v < 0 ? 0.0f : (v > 1 ? 1.0f : v);
  return (uint8_t)std::lround(c * 255.0f);
}

}  // namespace

void write_png(const std::string& path, const Image& image) {
  if (image.empty()) throw input_error("cannot write empty image");
  std::unique_ptr<FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) throw input_error("cannot write " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw numeric_error("png encoder init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw numeric_error("png encoder init failed");
  }
  std::vector<uint8_t> bytes((size_t)image.width * image.height * 4);
  std::vector<png_bytep> rows(image.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw input_error("png write failed: " + path);
  }
  png_init_io(png, file.get());
  // Pin encoder knobs; defaults could drift between libpng builds.
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGBA,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  for (size_t i = 0; i < bytes.size(); i++) bytes[i] = to_byte(image.pixels[i]);
  for (int y = 0; y < image.height; y++)
    rows[y] = bytes.data() + (size_t)y * image.width * 4;
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const std::string& path) {
  std::unique_ptr<FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw input_error("cannot open " + path);

  uint8_t header[8];
  if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw input_error("not a png file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw numeric_error("png decoder init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw numeric_error("png decoder init failed");
  }
  std::vector<uint8_t> bytes;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw input_error("png read failed: " + path);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  // Normalize every variant to 8-bit RGBA.
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  png_byte color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
  png_read_update_info(png, info);

  Image image;
  image.width = (int)png_get_image_width(png, info);
  image.height = (int)png_get_image_height(png, info);
  bytes.resize((size_t)image.width * image.height * 4);
  rows.resize(image.height);
  for (int y = 0; y < image.height; y++)
    rows[y] = bytes.data() + (size_t)y * image.width * 4;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  image.pixels.resize(bytes.size());
  for (size_t i = 0; i < bytes.size(); i++) image.pixels[i] = bytes[i] / 255.0f;
  return image;
}

vec3 sample_bilinear_px(const Image& image, double px, double py) {
  double fx = px - 0.5, fy = py - 0.5;
  int x0 = (int)std::floor(fx), y0 = (int)std::floor(fy);
  double tx = fx - x0, ty = fy - y0;
  auto clamp_x = [&](int x) { return x < 0 ? 0 : (x >= image.width ? image.width - 1 : x); };
  auto clamp_y = [&](int y) { return y < 0 ? 0 : (y >= image.height ? image.height - 1 : y); };
  int x1 = clamp_x(x0 + 1), y1 = clamp_y(y0 + 1);
  x0 = clamp_x(x0);
  y0 = clamp_y(y0);
  vec3 c00 = image.rgb(x0, y0), c10 = image.rgb(x1, y0);
  vec3 c01 = image.rgb(x0, y1), c11 = image.rgb(x1, y1);
  return lerp(lerp(c00, c10, tx), lerp(c01, c11, tx), ty);
}

vec3 sample_bilinear_uv(const Image& image, double u, double v) {
  return sample_bilinear_px(image, u * image.width, (1.0 - v) * image.height);
}

double mean_squared_error(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height)
    throw input_error("image size mismatch");
  if (a.empty()) throw input_error("empty image");
  double sum = 0;
  size_t count = (size_t)a.width * a.height;
  for (size_t p = 0; p < count; p++) {
    for (int c = 0; c < 3; c++) {
      double d = (double)a.pixels[p * 4 + c] - b.pixels[p * 4 + c];
      sum += d * d;
    }
  }
  return sum / (double)(count * 3);
}

}  // namespace texpipe
