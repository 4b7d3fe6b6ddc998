#include "texpipe/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>

#include "texpipe/errors.h"

namespace texpipe {

namespace {

// Uniform double in [0,1) from the top 53 bits, so clouds are reproducible
// across standard library implementations.
double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct KdTree {
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  const std::vector<vec3>* points = nullptr;
  std::vector<Node> nodes;
  int root = -1;

  explicit KdTree(const std::vector<vec3>& pts) : points(&pts) {
    std::vector<int> order(pts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    nodes.reserve(pts.size());
    root = build(order.data(), static_cast<int>(order.size()));
  }

  int build(int* ids, int count) {
    if (count == 0) return -1;
    const std::vector<vec3>& pts = *points;
    vec3 lo = pts[ids[0]];
    vec3 hi = lo;
    for (int i = 1; i < count; ++i) {
      lo = min(lo, pts[ids[i]]);
      hi = max(hi, pts[ids[i]]);
    }
    vec3 extent = hi - lo;
    int axis = 0;
    if (extent.y > extent.x) axis = 1;
    if (extent.z > extent[axis]) axis = 2;
    int mid = count / 2;
    std::nth_element(ids, ids + mid, ids + count, [&](int a, int b) {
      if (pts[a][axis] != pts[b][axis]) return pts[a][axis] < pts[b][axis];
      return a < b;
    });
    Node node;
    node.point = ids[mid];
    node.axis = axis;
    int self = static_cast<int>(nodes.size());
    nodes.push_back(node);
    int left = build(ids, mid);
    int right = build(ids + mid + 1, count - mid - 1);
    nodes[self].left = left;
    nodes[self].right = right;
    return self;
  }

  double nearest_squared(const vec3& query) const {
    double best = std::numeric_limits<double>::infinity();
    search(root, query, best);
    return best;
  }

  void search(int index, const vec3& query, double& best) const {
    if (index < 0) return;
    const Node& node = nodes[index];
    const vec3& p = (*points)[node.point];
    double d = distance_squared(query, p);
    if (d < best) best = d;
    double diff = query[node.axis] - p[node.axis];
    int near = diff < 0 ? node.left : node.right;
    int far = diff < 0 ? node.right : node.left;
    search(near, query, best);
    if (diff * diff < best) search(far, query, best);
  }
};

double luma601(const Image& image, int x, int y) {
  vec3 px = image.rgb(x, y);
  return 0.299 * px.x + 0.587 * px.y + 0.114 * px.z;
}

}  // namespace

PointCloudSample sample_surface(const Mesh& mesh, int count, uint64_t seed) {
  if (count < 1) throw input_error("sample count must be positive");
  if (mesh.triangles.empty()) throw input_error("empty geometry");

  // Cumulative areas for proportional triangle selection.
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0;
  for (size_t i = 0; i < mesh.triangles.size(); ++i) {
    const vec3i& tri = mesh.triangles[i];
    vec3 a = mesh.positions[tri.x];
    vec3 b = mesh.positions[tri.y];
    vec3 c = mesh.positions[tri.z];
    total += 0.5 * length(cross(b - a, c - a));
    cumulative[i] = total;
  }
  if (!(total > 0)) throw input_error("mesh has zero surface area");

  PointCloudSample sample;
  sample.seed = seed;
  sample.points.resize(count);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    double pick = next_unit(rng) * total;
    size_t tri_index =
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin();
    if (tri_index >= mesh.triangles.size()) tri_index = mesh.triangles.size() - 1;
    double u = next_unit(rng);
    double v = next_unit(rng);
    if (u + v > 1) {
      u = 1 - u;
      v = 1 - v;
    }
    const vec3i& tri = mesh.triangles[tri_index];
    vec3 a = mesh.positions[tri.x];
    vec3 b = mesh.positions[tri.y];
    vec3 c = mesh.positions[tri.z];
    sample.points[i] = a + (b - a) * u + (c - a) * v;
  }
  return sample;
}

double chamfer_distance(const Mesh& mesh_a, const Mesh& mesh_b, int samples, uint64_t seed) {
  Mesh norm_a = normalize_to_unit_box(mesh_a).mesh;
  Mesh norm_b = normalize_to_unit_box(mesh_b).mesh;
  PointCloudSample cloud_a = sample_surface(norm_a, samples, seed);
  PointCloudSample cloud_b = sample_surface(norm_b, samples, seed);

  KdTree tree_a(cloud_a.points);
  KdTree tree_b(cloud_b.points);

  double sum_ab = 0;
  for (const vec3& p : cloud_a.points) sum_ab += tree_b.nearest_squared(p);
  double sum_ba = 0;
  for (const vec3& p : cloud_b.points) sum_ba += tree_a.nearest_squared(p);

  double n = static_cast<double>(samples);
  return 0.5 * (sum_ab / n + sum_ba / n);
}

double ssim(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height)
    throw input_error("image size mismatch");
  constexpr int kWindow = 11;
  constexpr int kHalf = kWindow / 2;
  if (a.width < kWindow || a.height < kWindow)
    throw input_error("image too small for ssim window");

  double kernel[kWindow][kWindow];
  double kernel_sum = 0;
  constexpr double sigma = 1.5;
  for (int j = 0; j < kWindow; ++j)
    for (int i = 0; i < kWindow; ++i) {
      double dx = i - kHalf;
      double dy = j - kHalf;
      kernel[j][i] = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
      kernel_sum += kernel[j][i];
    }
  for (int j = 0; j < kWindow; ++j)
    for (int i = 0; i < kWindow; ++i) kernel[j][i] /= kernel_sum;

  std::vector<double> luma_a(static_cast<size_t>(a.width) * a.height);
  std::vector<double> luma_b(luma_a.size());
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      luma_a[static_cast<size_t>(y) * a.width + x] = luma601(a, x, y);
      luma_b[static_cast<size_t>(y) * a.width + x] = luma601(b, x, y);
    }

  constexpr double c1 = 0.01 * 0.01;  // (K1 * L)^2 with L = 1
  constexpr double c2 = 0.03 * 0.03;

  double total = 0;
  long window_count = 0;
  for (int cy = kHalf; cy < a.height - kHalf; ++cy) {
    for (int cx = kHalf; cx < a.width - kHalf; ++cx) {
      double mu_a = 0, mu_b = 0;
      double aa = 0, bb = 0, ab = 0;
      for (int j = 0; j < kWindow; ++j) {
        const double* row_a = &luma_a[static_cast<size_t>(cy - kHalf + j) * a.width + cx - kHalf];
        const double* row_b = &luma_b[static_cast<size_t>(cy - kHalf + j) * a.width + cx - kHalf];
        for (int i = 0; i < kWindow; ++i) {
          double w = kernel[j][i];
          double va = row_a[i];
          double vb = row_b[i];
          mu_a += w * va;
          mu_b += w * vb;
          aa += w * va * va;
          bb += w * vb * vb;
          ab += w * va * vb;
        }
      }
      double var_a = aa - mu_a * mu_a;
      double var_b = bb - mu_b * mu_b;
      double cov = ab - mu_a * mu_b;
      double value = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
                     ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      total += value;
      ++window_count;
    }
  }
  return total / static_cast<double>(window_count);
}

PsnrMse psnr_mse(const Image& a, const Image& b, const std::vector<uint8_t>* mask) {
  if (a.width != b.width || a.height != b.height)
    throw input_error("image size mismatch");
  size_t pixel_count = static_cast<size_t>(a.width) * a.height;
  if (mask && mask->size() != pixel_count)
    throw input_error("mask size mismatch");

  double sum = 0;
  long counted = 0;
  for (size_t p = 0; p < pixel_count; ++p) {
    if (mask && !(*mask)[p]) continue;
    const float* pa = &a.pixels[p * 4];
    const float* pb = &b.pixels[p * 4];
    for (int c = 0; c < 3; ++c) {
      double d = static_cast<double>(pa[c]) - pb[c];
      sum += d * d;
    }
    ++counted;
  }
  if (counted == 0) throw input_error("empty mask");

  PsnrMse result;
  result.mse = sum / (3.0 * counted);
  result.psnr_db = result.mse == 0 ? std::numeric_limits<double>::infinity()
                                   : -10.0 * std::log10(result.mse);
  return result;
}

double mask_bce(const Image& pred, const Image& truth) {
  if (pred.width != truth.width || pred.height != truth.height)
    throw input_error("image size mismatch");
  size_t pixel_count = static_cast<size_t>(pred.width) * pred.height;
  if (pixel_count == 0) throw input_error("empty image");

  constexpr double eps = 1e-7;
  double sum = 0;
  for (size_t i = 0; i < pixel_count; ++i) {
    double p = std::clamp(static_cast<double>(pred.pixels[i * 4 + 3]), eps, 1.0 - eps);
    double y = truth.pixels[i * 4 + 3];
    sum += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  }
  return sum / static_cast<double>(pixel_count);
}

ReconLoss recon_loss(double mse, double bce) {
  ReconLoss loss;
  loss.value = mse + 0.1 * bce;
  loss.lpips_included = false;
  return loss;
}

ReconLoss recon_loss(double mse, double bce, double lpips) {
  ReconLoss loss;
  loss.value = mse + 0.1 * bce + 0.5 * lpips;
  loss.lpips_included = true;
  return loss;
}

}  // namespace texpipe
