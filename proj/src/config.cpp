#include "texpipe/config.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "texpipe/errors.h"

namespace texpipe {

namespace {

std::string trim(const std::string& s) {
  size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string format_double(double v) {
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  double value = 0;
  auto result = std::from_chars(t.data(), t.data() + t.size(), value);
  if (result.ec != std::errc() || result.ptr != t.data() + t.size())
    throw input_error("config: bad number for key '" + key + "': " + t);
  return value;
}

long long parse_int(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  long long value = 0;
  auto result = std::from_chars(t.data(), t.data() + t.size(), value);
  if (result.ec != std::errc() || result.ptr != t.data() + t.size())
    throw input_error("config: bad integer for key '" + key + "': " + t);
  return value;
}

uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  uint64_t value = 0;
  auto result = std::from_chars(t.data(), t.data() + t.size(), value);
  if (result.ec != std::errc() || result.ptr != t.data() + t.size())
    throw input_error("config: bad unsigned integer for key '" + key + "': " + t);
  return value;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> values;
  std::string item;
  std::stringstream stream(text);
  while (std::getline(stream, item, ',')) values.push_back(parse_double(key, item));
  return values;
}

}  // namespace

bool operator==(const PipelineConfig& a, const PipelineConfig& b) {
  return a.camera.fov_deg == b.camera.fov_deg && a.camera.distance == b.camera.distance &&
         a.camera.elevation == b.camera.elevation && a.camera.azimuths == b.camera.azimuths &&
         a.camera.view_resolution == b.camera.view_resolution &&
         a.atlas_resolution == b.atlas_resolution &&
         a.silhouette_threshold == b.silhouette_threshold && a.depth_eps == b.depth_eps &&
         a.smoothing_lambda == b.smoothing_lambda &&
         a.smoothing_iterations == b.smoothing_iterations &&
         a.solver_tolerance == b.solver_tolerance &&
         a.solver_max_iterations == b.solver_max_iterations && a.background == b.background &&
         a.grid_resolution == b.grid_resolution && a.grid_domain == b.grid_domain &&
         a.eval_samples == b.eval_samples && a.sample_seed == b.sample_seed;
}

void validate(const PipelineConfig& config) {
  const CameraConfig& cam = config.camera;
  if (!(cam.fov_deg > 0) || !(cam.fov_deg < 180))
    throw input_error("config: fov_deg must be in (0, 180)");
  if (!(cam.distance > 0) || !std::isfinite(cam.distance))
    throw input_error("config: distance must be positive");
  if (!std::isfinite(cam.elevation) || std::abs(cam.elevation) > 90)
    throw input_error("config: elevation must be in [-90, 90]");
  for (double az : cam.azimuths)
    if (!std::isfinite(az)) throw input_error("config: azimuths must be finite");
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      double a = std::fmod(cam.azimuths[i], 360.0);
      if (a < 0) a += 360;
      double b = std::fmod(cam.azimuths[j], 360.0);
      if (b < 0) b += 360;
      if (a == b) throw input_error("config: azimuths must be pairwise distinct mod 360");
    }
  if (cam.view_resolution < 1) throw input_error("config: view_resolution must be positive");
  if (config.atlas_resolution < 8) throw input_error("config: atlas resolution too small");
  if (!std::isfinite(config.silhouette_threshold))
    throw input_error("config: silhouette_threshold must be finite");
  if (!(config.depth_eps > 0) || !std::isfinite(config.depth_eps))
    throw input_error("config: depth_eps must be positive");
  if (!(config.smoothing_lambda >= 0) || !(config.smoothing_lambda <= 1))
    throw input_error("config: smoothing lambda must be in [0, 1]");
  if (config.smoothing_iterations < 0)
    throw input_error("config: smoothing iterations must be non-negative");
  if (!(config.solver_tolerance > 0) || !std::isfinite(config.solver_tolerance))
    throw input_error("config: solver tolerance must be positive");
  if (config.solver_max_iterations < 0)
    throw input_error("config: solver max_iterations must be non-negative");
  for (int c = 0; c < 3; ++c) {
    double v = c == 0 ? config.background.x : c == 1 ? config.background.y : config.background.z;
    if (!(v >= 0) || !(v <= 1)) throw input_error("config: background must be in [0, 1]");
  }
  if (config.grid_resolution < 2) throw input_error("config: grid_resolution must be >= 2");
  if (!(config.grid_domain > 0) || !std::isfinite(config.grid_domain))
    throw input_error("config: domain must be positive");
  if (config.eval_samples < 1) throw input_error("config: samples must be positive");
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig config;
  std::string section;
  std::set<std::string> seen;

  std::stringstream stream(text);
  std::string raw;
  int line_number = 0;
  while (std::getline(stream, raw)) {
    ++line_number;
    std::string line = raw;
    size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw input_error("config: malformed section at line " + std::to_string(line_number));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }

    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw input_error("config: expected key=value at line " + std::to_string(line_number));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    std::string full = section + "." + key;
    if (!seen.insert(full).second)
      throw input_error("config: duplicate key '" + full + "'");

    if (full == "camera.fov_deg") {
      config.camera.fov_deg = parse_double(full, value);
    } else if (full == "camera.distance") {
      config.camera.distance = parse_double(full, value);
    } else if (full == "camera.elevation") {
      config.camera.elevation = parse_double(full, value);
    } else if (full == "camera.azimuths") {
      std::vector<double> azimuths = parse_list(full, value);
      if (azimuths.size() != 4)
        throw input_error("config: azimuths must have exactly 4 values");
      for (int i = 0; i < 4; ++i) config.camera.azimuths[i] = azimuths[i];
    } else if (full == "camera.view_resolution") {
      config.camera.view_resolution = static_cast<int>(parse_int(full, value));
    } else if (full == "atlas.resolution") {
      config.atlas_resolution = static_cast<int>(parse_int(full, value));
    } else if (full == "projection.silhouette_threshold") {
      config.silhouette_threshold = parse_double(full, value);
    } else if (full == "projection.depth_eps") {
      config.depth_eps = parse_double(full, value);
    } else if (full == "smoothing.lambda") {
      config.smoothing_lambda = parse_double(full, value);
    } else if (full == "smoothing.iterations") {
      config.smoothing_iterations = static_cast<int>(parse_int(full, value));
    } else if (full == "solver.tolerance") {
      config.solver_tolerance = parse_double(full, value);
    } else if (full == "solver.max_iterations") {
      config.solver_max_iterations = static_cast<int>(parse_int(full, value));
    } else if (full == "render.background") {
      std::vector<double> rgb = parse_list(full, value);
      if (rgb.size() != 3) throw input_error("config: background must have 3 components");
      config.background = {rgb[0], rgb[1], rgb[2]};
    } else if (full == "synth.grid_resolution") {
      config.grid_resolution = static_cast<int>(parse_int(full, value));
    } else if (full == "synth.domain") {
      config.grid_domain = parse_double(full, value);
    } else if (full == "eval.samples") {
      config.eval_samples = static_cast<int>(parse_int(full, value));
    } else if (full == "seeds.sample_seed") {
      config.sample_seed = parse_u64(full, value);
    } else {
      throw input_error("config: unknown key '" + full + "'");
    }
  }

  validate(config);
  return config;
}

std::string serialize_config(const PipelineConfig& config) {
  std::string out;
  out += "[camera]\n";
  out += "fov_deg = " + format_double(config.camera.fov_deg) + "\n";
  out += "distance = " + format_double(config.camera.distance) + "\n";
  out += "elevation = " + format_double(config.camera.elevation) + "\n";
  out += "azimuths = ";
  for (int i = 0; i < 4; ++i) {
    if (i) out += ", ";
    out += format_double(config.camera.azimuths[i]);
  }
  out += "\n";
  out += "view_resolution = " + std::to_string(config.camera.view_resolution) + "\n";
  out += "\n[atlas]\n";
  out += "resolution = " + std::to_string(config.atlas_resolution) + "\n";
  out += "\n[projection]\n";
  out += "silhouette_threshold = " + format_double(config.silhouette_threshold) + "\n";
  out += "depth_eps = " + format_double(config.depth_eps) + "\n";
  out += "\n[smoothing]\n";
  out += "lambda = " + format_double(config.smoothing_lambda) + "\n";
  out += "iterations = " + std::to_string(config.smoothing_iterations) + "\n";
  out += "\n[solver]\n";
  out += "tolerance = " + format_double(config.solver_tolerance) + "\n";
  out += "max_iterations = " + std::to_string(config.solver_max_iterations) + "\n";
  out += "\n[render]\n";
  out += "background = " + format_double(config.background.x) + ", " +
         format_double(config.background.y) + ", " + format_double(config.background.z) + "\n";
  out += "\n[synth]\n";
  out += "grid_resolution = " + std::to_string(config.grid_resolution) + "\n";
  out += "domain = " + format_double(config.grid_domain) + "\n";
  out += "\n[eval]\n";
  out += "samples = " + std::to_string(config.eval_samples) + "\n";
  out += "\n[seeds]\n";
  out += "sample_seed = " + std::to_string(config.sample_seed) + "\n";
  return out;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw input_error("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_config(buffer.str());
}

void save_config(const std::string& path, const PipelineConfig& config) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw input_error("cannot write config file: " + path);
  file << serialize_config(config);
  if (!file) throw input_error("failed writing config file: " + path);
}

Camera camera_for_view(const PipelineConfig& config, int view_index) {
  if (view_index < 0 || view_index > 3) throw input_error("view index out of range");
  return camera_from_orbit(config.camera.azimuths[view_index], config.camera.elevation,
                           config.camera.distance, config.camera.fov_deg,
                           config.camera.view_resolution, config.camera.view_resolution);
}

}  // namespace texpipe
