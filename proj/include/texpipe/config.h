#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "texpipe/geometry.h"
#include "texpipe/vec.h"

namespace texpipe {

struct CameraConfig {
  double fov_deg = 40;
  double distance = 1.5;
  double elevation = 0;
  std::array<double, 4> azimuths = {0, 90, 180, 270};
  int view_resolution = 512;
};

struct PipelineConfig {
  CameraConfig camera;
  int atlas_resolution = 1024;
  double silhouette_threshold = -0.2;
  double depth_eps = 2e-3;
  double smoothing_lambda = 0.5;
  int smoothing_iterations = 5;
  double solver_tolerance = 1e-6;
  int solver_max_iterations = 0;  // 0 = pick from problem size
  vec3 background = {1, 1, 1};
  int grid_resolution = 64;
  double grid_domain = 0.5;  // half-extent of the synth sampling box
  int eval_samples = 50000;
  uint64_t sample_seed = 1234;
};

bool operator==(const PipelineConfig& a, const PipelineConfig& b);

void validate(const PipelineConfig& config);

// Sectioned key=value text. Unknown sections, unknown keys, and duplicate
// keys are rejected. serialize/parse round-trip exactly (shortest
// round-trip float formatting).
PipelineConfig parse_config(const std::string& text);
std::string serialize_config(const PipelineConfig& config);

PipelineConfig load_config(const std::string& path);
void save_config(const std::string& path, const PipelineConfig& config);

// Orbit camera for one of the four configured views.
Camera camera_for_view(const PipelineConfig& config, int view_index);

}  // namespace texpipe
