#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "texpipe/config.h"

namespace texpipe {

struct StageTiming {
  std::string stage;
  double milliseconds = 0;
};

// Run record written next to every command's outputs. Lists every file the
// run emitted (including itself) plus input hashes, the config snapshot,
// stage timings, warnings, and numeric counters.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::pair<std::string, std::string>> inputs;  // path -> fnv1a hash
  std::string config_text;
  std::vector<StageTiming> timings;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> counters;
  std::vector<std::string> outputs;  // relative to the out dir
};

void write_manifest(const std::string& path, const RunManifest& manifest);

// FNV-1a (64-bit) over a file's bytes, as 16 hex digits.
std::string file_hash(const std::string& path);

// Analytic fixture -> SDF grid file, ground-truth mesh/texture, and the four
// canonical view renders (analytic surface color, no lighting).
RunManifest cmd_synth(const std::string& fixture, const PipelineConfig& config,
                      const std::string& out_dir, int threads = 1);

// SDF grid file -> mesh with UV atlas, coarse texture, texel cache.
RunManifest cmd_extract(const std::string& grid_path, const PipelineConfig& config,
                        const std::string& out_dir, int threads = 1);

struct RefineInputs {
  std::string mesh_path;
  std::string coarse_path;
  std::array<std::string, 4> view_paths;  // paired with config azimuths by order
  std::string texels_path;                // optional cache; empty = rebuild from mesh
};

// Back-projects the four views onto the atlas, selects per-texel colors, and
// Poisson-blends them against the coarse texture.
RunManifest cmd_refine(const RefineInputs& inputs, const PipelineConfig& config,
                       const std::string& out_dir, int threads = 1);

// One textured render from an orbit camera.
RunManifest cmd_render(const std::string& mesh_path, const std::string& texture_path,
                       double azimuth_deg, const PipelineConfig& config,
                       const std::string& out_dir, int threads = 1);

struct EvalInputs {
  std::string mesh_a;
  std::string mesh_b;
  std::array<std::string, 4> views_a;
  std::array<std::string, 4> views_b;
};

// Chamfer distance between the meshes plus per-view image metrics; writes
// report.json and report.csv (one row per view plus a mesh row).
RunManifest cmd_eval(const EvalInputs& inputs, const PipelineConfig& config,
                     const std::string& out_dir, int threads = 1);

// Noise-schedule table (CSV) for the standard and zero-terminal-SNR
// rescaled variants.
RunManifest cmd_schedule(int steps, const std::string& out_dir);

}  // namespace texpipe
