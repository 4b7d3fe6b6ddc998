#include "texpipe/pipeline.h"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <type_traits>

#include "json.hpp"
#include "texpipe/atlas.h"
#include "texpipe/blend.h"
#include "texpipe/errors.h"
#include "texpipe/isosurface.h"
#include "texpipe/metrics.h"
#include "texpipe/obj_io.h"
#include "texpipe/parallel.h"
#include "texpipe/raster.h"
#include "texpipe/schedule.h"
#include "texpipe/sdf.h"
#include "texpipe/texproject.h"

namespace texpipe {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string format_double(double v) {
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

// Times stages into the manifest and prefixes errors with the stage name.
class StageList {
 public:
  explicit StageList(RunManifest* manifest) : manifest_(manifest) {}

  template <class Fn>
  auto operator()(const std::string& name, Fn&& fn) {
    auto start = std::chrono::steady_clock::now();
    auto record = [&] {
      double ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
      manifest_->timings.push_back({name, ms});
    };
    try {
      if constexpr (std::is_void_v<std::invoke_result_t<Fn>>) {
        fn();
        record();
      } else {
        auto value = fn();
        record();
        return value;
      }
    } catch (const input_error& e) {
      throw input_error(name + ": " + e.what());
    } catch (const numeric_error& e) {
      throw numeric_error(name + ": " + e.what());
    }
  }

 private:
  RunManifest* manifest_;
};

void prepare_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw input_error("cannot create output directory " + out_dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write " + path);
  out << content;
  if (!out) throw input_error("failed writing " + path);
}

void add_input(RunManifest* manifest, const std::string& path) {
  manifest->inputs.emplace_back(path, file_hash(path));
}

// Filename piece for an azimuth: integral angles lose the decimal point.
std::string azimuth_label(double azimuth) { return format_double(azimuth); }

void finish(RunManifest* manifest, const std::string& out_dir) {
  manifest->outputs.push_back("manifest.json");
  write_manifest(join(out_dir, "manifest.json"), *manifest);
}

// Shared by synth and extract: everything between the grid and the texel
// maps. Smoothing is skipped for the ground-truth path.
struct SurfaceBuild {
  Mesh mesh;
  NormalizeResult norm;
  TexelMaps texels;
};

SurfaceBuild build_surface(const SdfGrid& grid, const PipelineConfig& config, bool smooth,
                           StageList& stage, RunManifest* manifest) {
  SurfaceBuild build;
  Mesh mesh = stage("isosurface", [&] { return marching_tetrahedra(grid); });
  if (mesh.empty()) throw input_error("isosurface: no surface crossing");
  build.norm = stage("normalize", [&] { return normalize_to_unit_box(mesh); });
  mesh = build.norm.mesh;
  if (smooth)
    mesh = stage("smooth", [&] {
      return laplacian_smooth(mesh, config.smoothing_iterations, config.smoothing_lambda);
    });
  int degenerate = 0;
  mesh = stage("normals", [&] { return compute_vertex_normals(mesh, &degenerate); });
  if (degenerate)
    manifest->warnings.push_back(std::to_string(degenerate) +
                                 " vertices had no usable normal; defaulted");
  mesh = stage("atlas", [&] { return generate_uv_atlas(mesh, config.atlas_resolution); });
  int bad_uv = 0;
  build.texels = stage("texel_maps", [&] {
    return rasterize_uv_space(mesh, config.atlas_resolution, &bad_uv);
  });
  if (bad_uv)
    manifest->warnings.push_back(std::to_string(bad_uv) + " degenerate uv triangles skipped");
  build.mesh = std::move(mesh);

  int charts = 0;
  for (int id : build.mesh.chart_ids) charts = std::max(charts, id + 1);
  size_t valid = 0;
  for (uint8_t v : build.texels.valid) valid += v;
  manifest->counters.emplace_back("vertices", (double)build.mesh.positions.size());
  manifest->counters.emplace_back("triangles", (double)build.mesh.triangles.size());
  manifest->counters.emplace_back("charts", (double)charts);
  manifest->counters.emplace_back("valid_texels", (double)valid);
  return build;
}

}  // namespace

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open " + path);
  uint64_t hash = 14695981039346656037ull;
  char buf[1 << 16];
  for (;;) {
    in.read(buf, sizeof buf);
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= (unsigned char)buf[i];
      hash *= 1099511628211ull;
    }
    if (got < (std::streamsize)sizeof buf) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)hash);
  return hex;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["command"] = manifest.command;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [key, value] : manifest.params) params[key] = value;
  j["params"] = params;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  for (const auto& [file, hash] : manifest.inputs) inputs[file] = hash;
  j["inputs"] = inputs;
  j["config"] = manifest.config_text;
  nlohmann::ordered_json timings = nlohmann::ordered_json::array();
  for (const auto& t : manifest.timings)
    timings.push_back({{"stage", t.stage}, {"ms", t.milliseconds}});
  j["timings_ms"] = timings;
  j["warnings"] = manifest.warnings;
  nlohmann::ordered_json counters = nlohmann::ordered_json::object();
  for (const auto& [key, value] : manifest.counters) counters[key] = value;
  j["counters"] = counters;
  j["outputs"] = manifest.outputs;
  write_text(path, j.dump(2) + "\n");
}

RunManifest cmd_synth(const std::string& fixture, const PipelineConfig& config,
                      const std::string& out_dir, int threads) {
  validate(config);
  RunManifest manifest;
  manifest.command = "synth";
  manifest.params.emplace_back("fixture", fixture);
  manifest.params.emplace_back("threads", std::to_string(threads));
  manifest.config_text = serialize_config(config);
  prepare_out_dir(out_dir);
  StageList stage(&manifest);

  AnalyticScene scene = stage("fixture", [&] { return make_fixture(fixture); });
  SdfGrid grid = stage("sample_grid", [&] {
    return sample_grid(scene, config.grid_resolution, config.grid_domain);
  });
  for (const auto& w : grid_warnings(grid)) manifest.warnings.push_back(w);
  stage("write_grid", [&] { save_sdfg(join(out_dir, "grid.sdfg"), grid); });
  manifest.outputs.push_back("grid.sdfg");

  SurfaceBuild build = build_surface(grid, config, /*smooth=*/false, stage, &manifest);
  const Mesh& mesh = build.mesh;
  const vec3 offset = build.norm.offset;
  const double scale = build.norm.scale;
  TexelMaps& texels = build.texels;

  // Texture = analytic color at every texel's pre-normalization point.
  Image texture = stage("texture", [&] {
    Image img = Image::create(config.atlas_resolution, config.atlas_resolution, {0, 0, 0}, 0);
    parallel_for(texels.texel_count(), threads, [&](size_t t) {
      if (!texels.valid[t]) return;
      vec3 world = (texels.position_at(t) - offset) / scale;
      vec3 color = clamp(scene.color(world), 0.0, 1.0);
      texels.coarse[t * 3] = (float)color.x;
      texels.coarse[t * 3 + 1] = (float)color.y;
      texels.coarse[t * 3 + 2] = (float)color.z;
      int x = (int)(t % texels.atlas_res), y = (int)(t / texels.atlas_res);
      img.set_rgb(x, y, color);
      img.set_alpha(x, y, 1);
    });
    return img;
  });
  texture = stage("dilate", [&] { return dilate_atlas(texture, texels); });
  stage("write_texture", [&] { write_png(join(out_dir, "gt_texture.png"), texture); });
  manifest.outputs.push_back("gt_texture.png");
  stage("write_mesh", [&] { save_obj(join(out_dir, "gt_mesh.obj"), mesh, "gt_texture.png"); });
  manifest.outputs.push_back("gt_mesh.obj");
  manifest.outputs.push_back("gt_mesh.mtl");

  for (int i = 0; i < 4; ++i) {
    std::string label = azimuth_label(config.camera.azimuths[i]);
    Camera camera = camera_for_view(config, i);
    GBuffer gbuffer = stage("view_raster_" + label, [&] { return rasterize(mesh, camera); });
    Image view = stage("view_shade_" + label, [&] {
      Image img = Image::create(camera.width, camera.height, config.background, 0);
      parallel_for((size_t)camera.height, threads, [&](size_t y) {
        for (int x = 0; x < camera.width; ++x) {
          size_t p = gbuffer.index(x, (int)y);
          if (!gbuffer.mask[p]) continue;
          vec3 world = (world_position(mesh, gbuffer.tri[p], gbuffer.bary[p]) - offset) / scale;
          img.set_rgb(x, (int)y, clamp(scene.color(world), 0.0, 1.0));
          img.set_alpha(x, (int)y, 1);
        }
      });
      return img;
    });
    std::string name = "view_" + label + ".png";
    stage("write_" + name, [&] { write_png(join(out_dir, name), view); });
    manifest.outputs.push_back(name);
  }

  finish(&manifest, out_dir);
  return manifest;
}

RunManifest cmd_extract(const std::string& grid_path, const PipelineConfig& config,
                        const std::string& out_dir, int threads) {
  validate(config);
  RunManifest manifest;
  manifest.command = "extract";
  manifest.params.emplace_back("threads", std::to_string(threads));
  manifest.config_text = serialize_config(config);
  add_input(&manifest, grid_path);
  prepare_out_dir(out_dir);
  StageList stage(&manifest);

  SdfGrid grid = stage("load_grid", [&] { return load_sdfg(grid_path); });
  for (const auto& w : grid_warnings(grid)) manifest.warnings.push_back(w);

  SurfaceBuild build = build_surface(grid, config, /*smooth=*/true, stage, &manifest);

  std::string texture_rel;
  if (grid.has_colors()) {
    Image coarse = stage("bake", [&] {
      return bake_coarse_texture(build.texels, grid, build.norm.scale, build.norm.offset);
    });
    coarse = stage("dilate", [&] { return dilate_atlas(coarse, build.texels); });
    stage("write_texture", [&] { write_png(join(out_dir, "coarse.png"), coarse); });
    manifest.outputs.push_back("coarse.png");
    texture_rel = "coarse.png";
  } else {
    manifest.warnings.push_back(
        "grid has no color volume; coarse texture not baked (refine will need one)");
    manifest.params.emplace_back("coarse_texture", "absent");
  }

  stage("write_mesh", [&] { save_obj(join(out_dir, "mesh.obj"), build.mesh, texture_rel); });
  manifest.outputs.push_back("mesh.obj");
  if (!texture_rel.empty()) manifest.outputs.push_back("mesh.mtl");
  stage("write_texels", [&] { save_texelmaps(join(out_dir, "texels.bin"), build.texels); });
  manifest.outputs.push_back("texels.bin");

  finish(&manifest, out_dir);
  return manifest;
}

RunManifest cmd_refine(const RefineInputs& inputs, const PipelineConfig& config,
                       const std::string& out_dir, int threads) {
  validate(config);
  RunManifest manifest;
  manifest.command = "refine";
  manifest.params.emplace_back("threads", std::to_string(threads));
  manifest.config_text = serialize_config(config);
  add_input(&manifest, inputs.mesh_path);
  add_input(&manifest, inputs.coarse_path);
  for (const auto& path : inputs.view_paths) add_input(&manifest, path);
  if (!inputs.texels_path.empty()) add_input(&manifest, inputs.texels_path);
  prepare_out_dir(out_dir);
  StageList stage(&manifest);

  Mesh mesh = stage("load_mesh", [&] {
    Mesh m = load_obj(inputs.mesh_path);
    if (!m.has_uvs()) throw input_error("mesh has no texture coordinates");
    if (!m.has_normals()) m = compute_vertex_normals(m);
    return m;
  });
  Image coarse = stage("load_coarse", [&] {
    Image img = read_png(inputs.coarse_path);
    if (img.width != img.height) throw input_error("coarse texture must be square");
    return img;
  });
  const int atlas_res = coarse.width;

  TexelMaps texels = stage("texel_maps", [&] {
    TexelMaps maps;
    if (!inputs.texels_path.empty()) {
      maps = load_texelmaps(inputs.texels_path);
      if (maps.atlas_res != atlas_res)
        throw input_error("texel cache resolution does not match the coarse texture");
    } else {
      maps = rasterize_uv_space(mesh, atlas_res);
    }
    // The coarse argument is authoritative for colors either way.
    for (size_t t = 0; t < maps.texel_count(); ++t) {
      int x = (int)(t % atlas_res), y = (int)(t / atlas_res);
      vec3 c = coarse.rgb(x, y);
      maps.coarse[t * 3] = (float)c.x;
      maps.coarse[t * 3 + 1] = (float)c.y;
      maps.coarse[t * 3 + 2] = (float)c.z;
    }
    return maps;
  });

  ViewSet views;
  views.views.resize(4);
  for (int i = 0; i < 4; ++i) {
    std::string label = azimuth_label(config.camera.azimuths[i]);
    views.views[i].camera = camera_for_view(config, i);
    views.views[i].image = stage("load_view_" + label, [&] {
      return read_png(inputs.view_paths[i]);
    });
    views.views[i].gbuffer = stage("depth_" + label, [&] {
      return rasterize(mesh, views.views[i].camera);
    });
  }
  stage("validate_views", [&] { validate(views); });

  CandidateSet candidates = stage("project", [&] {
    return project_views(texels, views, config.depth_eps, threads);
  });
  long projected_count = 0;
  for (uint8_t c : candidates.count) projected_count += c;

  candidates = stage("cull", [&] {
    return cull_silhouette(candidates, texels, views, config.silhouette_threshold, threads);
  });
  long kept_count = 0;
  for (uint8_t c : candidates.count) kept_count += c;

  Image projected = stage("select", [&] { return select_texels(candidates, texels, threads); });
  long selected = 0;
  for (size_t t = 0; t < projected.pixels.size(); t += 4)
    if (projected.pixels[t + 3] > 0.5f) ++selected;

  SolverParams params{config.solver_tolerance, config.solver_max_iterations};
  BlendResult blended = stage("blend", [&] {
    return blend_texture(projected, coarse, texels, params, threads);
  });

  manifest.counters.emplace_back("candidates_projected", (double)projected_count);
  manifest.counters.emplace_back("candidates_kept", (double)kept_count);
  manifest.counters.emplace_back("candidates_culled", (double)(projected_count - kept_count));
  manifest.counters.emplace_back("texels_selected", (double)selected);
  manifest.counters.emplace_back("interior_texels", (double)blended.stats.interior_count);
  const char* channel_names[3] = {"r", "g", "b"};
  for (int c = 0; c < 3; ++c) {
    manifest.counters.emplace_back(std::string("cg_iterations_") + channel_names[c],
                                   (double)blended.stats.iterations[c]);
    manifest.counters.emplace_back(std::string("cg_residual_") + channel_names[c],
                                   blended.stats.residual[c]);
  }

  stage("write_projected", [&] { write_png(join(out_dir, "projected.png"), projected); });
  manifest.outputs.push_back("projected.png");
  Image refined = stage("dilate", [&] { return dilate_atlas(blended.texture, texels); });
  stage("write_refined", [&] { write_png(join(out_dir, "refined.png"), refined); });
  manifest.outputs.push_back("refined.png");
  stage("write_mesh", [&] { save_obj(join(out_dir, "refined.obj"), mesh, "refined.png"); });
  manifest.outputs.push_back("refined.obj");
  manifest.outputs.push_back("refined.mtl");

  finish(&manifest, out_dir);
  return manifest;
}

RunManifest cmd_render(const std::string& mesh_path, const std::string& texture_path,
                       double azimuth_deg, const PipelineConfig& config,
                       const std::string& out_dir, int threads) {
  (void)threads;  // the rasterizer is serial by contract
  validate(config);
  RunManifest manifest;
  manifest.command = "render";
  manifest.params.emplace_back("azimuth", format_double(azimuth_deg));
  manifest.config_text = serialize_config(config);
  add_input(&manifest, mesh_path);
  add_input(&manifest, texture_path);
  prepare_out_dir(out_dir);
  StageList stage(&manifest);

  Mesh mesh = stage("load_mesh", [&] {
    Mesh m = load_obj(mesh_path);
    if (!m.has_uvs()) throw input_error("mesh has no texture coordinates");
    return m;
  });
  Image texture = stage("load_texture", [&] { return read_png(texture_path); });
  Camera camera = camera_from_orbit(azimuth_deg, config.camera.elevation, config.camera.distance,
                                    config.camera.fov_deg, config.camera.view_resolution,
                                    config.camera.view_resolution);
  GBuffer gbuffer = stage("rasterize", [&] { return rasterize(mesh, camera); });
  Image image = stage("shade", [&] { return render_textured(gbuffer, texture, config.background); });
  std::string name = "render_" + azimuth_label(azimuth_deg) + ".png";
  stage("write_image", [&] { write_png(join(out_dir, name), image); });
  manifest.outputs.push_back(name);

  finish(&manifest, out_dir);
  return manifest;
}

RunManifest cmd_eval(const EvalInputs& inputs, const PipelineConfig& config,
                     const std::string& out_dir, int threads) {
  (void)threads;
  validate(config);
  RunManifest manifest;
  manifest.command = "eval";
  manifest.config_text = serialize_config(config);
  add_input(&manifest, inputs.mesh_a);
  add_input(&manifest, inputs.mesh_b);
  for (const auto& path : inputs.views_a) add_input(&manifest, path);
  for (const auto& path : inputs.views_b) add_input(&manifest, path);
  prepare_out_dir(out_dir);
  StageList stage(&manifest);

  Mesh mesh_a = stage("load_mesh_a", [&] { return load_obj(inputs.mesh_a); });
  Mesh mesh_b = stage("load_mesh_b", [&] { return load_obj(inputs.mesh_b); });
  double chamfer = stage("chamfer", [&] {
    return chamfer_distance(mesh_a, mesh_b, config.eval_samples, config.sample_seed);
  });

  nlohmann::ordered_json report;
  report["views"] = nlohmann::ordered_json::array();
  std::string csv = "row,azimuth,ssim,psnr_db,mse,mask_bce,recon_loss,lpips_included,chamfer\n";
  for (int i = 0; i < 4; ++i) {
    std::string label = azimuth_label(config.camera.azimuths[i]);
    Image a = stage("load_view_a_" + label, [&] { return read_png(inputs.views_a[i]); });
    Image b = stage("load_view_b_" + label, [&] { return read_png(inputs.views_b[i]); });
    double ssim_value = 0, bce = 0;
    PsnrMse pm;
    stage("metrics_" + label, [&] {
      ssim_value = ssim(a, b);
      pm = psnr_mse(a, b);
      bce = mask_bce(a, b);
    });
    ReconLoss recon = recon_loss(pm.mse, bce);

    nlohmann::ordered_json row;
    row["azimuth"] = config.camera.azimuths[i];
    row["ssim"] = ssim_value;
    if (pm.infinite())
      row["psnr_db"] = nullptr;
    else
      row["psnr_db"] = pm.psnr_db;
    row["psnr_infinite"] = pm.infinite();
    row["mse"] = pm.mse;
    row["mask_bce"] = bce;
    row["recon_loss"] = recon.value;
    row["lpips_included"] = recon.lpips_included;
    report["views"].push_back(row);

    csv += "view," + label + "," + format_double(ssim_value) + "," +
           (pm.infinite() ? "inf" : format_double(pm.psnr_db)) + "," + format_double(pm.mse) +
           "," + format_double(bce) + "," + format_double(recon.value) + "," +
           (recon.lpips_included ? "true" : "false") + ",\n";
  }
  report["mesh"] = {{"chamfer_distance", chamfer},
                    {"samples", config.eval_samples},
                    {"seed", config.sample_seed}};
  csv += "mesh,,,,,,,," + format_double(chamfer) + "\n";

  stage("write_report", [&] {
    write_text(join(out_dir, "report.json"), report.dump(2) + "\n");
    write_text(join(out_dir, "report.csv"), csv);
  });
  manifest.outputs.push_back("report.json");
  manifest.outputs.push_back("report.csv");

  finish(&manifest, out_dir);
  return manifest;
}

RunManifest cmd_schedule(int steps, const std::string& out_dir) {
  RunManifest manifest;
  manifest.command = "schedule";
  manifest.params.emplace_back("steps", std::to_string(steps));
  prepare_out_dir(out_dir);
  StageList stage(&manifest);

  DiffusionSchedule base = stage("schedule", [&] { return linear_beta_schedule(steps); });
  DiffusionSchedule rescaled =
      stage("rescale", [&] { return rescale_zero_terminal_snr(base); });
  stage("write_tables", [&] {
    write_text(join(out_dir, "schedule.csv"), schedule_csv(base));
    write_text(join(out_dir, "schedule_zero_snr.csv"), schedule_csv(rescaled));
  });
  manifest.outputs.push_back("schedule.csv");
  manifest.outputs.push_back("schedule_zero_snr.csv");

  finish(&manifest, out_dir);
  return manifest;
}

}  // namespace texpipe
