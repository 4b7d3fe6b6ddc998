#pragma once

#include <cstdint>
#include <vector>

#include "texpipe/geometry.h"
#include "texpipe/image.h"

namespace texpipe {

// Area-uniform surface samples; deterministic for a given seed.
struct PointCloudSample {
  std::vector<vec3> points;
  uint64_t seed = 0;
};

PointCloudSample sample_surface(const Mesh& mesh, int count, uint64_t seed);

// Both meshes are normalized to the unit box, sampled with the same seed,
// and compared by symmetric mean squared nearest-neighbor distance, halved.
// Nearest neighbors are exact (kd-tree, equal to brute force).
double chamfer_distance(const Mesh& mesh_a, const Mesh& mesh_b, int samples, uint64_t seed);

// Mean SSIM over all fully-inside 11x11 windows (Gaussian sigma 1.5,
// K1=0.01, K2=0.03, dynamic range 1), computed on Rec. 601 luma.
double ssim(const Image& a, const Image& b);

struct PsnrMse {
  double psnr_db = 0;
  double mse = 0;
  bool infinite() const { return mse == 0; }
};

// MSE over RGB channels of (optionally masked) pixels; PSNR = -10 log10 mse
// for range-1 images. Identical images report mse 0 with infinite PSNR.
PsnrMse psnr_mse(const Image& a, const Image& b,
                 const std::vector<uint8_t>* mask = nullptr);

// Binary cross-entropy between alpha channels, predictions clamped to
// [1e-7, 1-1e-7].
double mask_bce(const Image& pred, const Image& truth);

struct ReconLoss {
  double value = 0;
  bool lpips_included = false;
};

// 1*mse + 0.1*bce + 0.5*lpips; the lpips term is dropped (and flagged) when
// not supplied, since it needs a pretrained network.
ReconLoss recon_loss(double mse, double bce);
ReconLoss recon_loss(double mse, double bce, double lpips);

}  // namespace texpipe
