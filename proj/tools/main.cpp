#include <array>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "texpipe/config.h"
#include "texpipe/errors.h"
#include "texpipe/pipeline.h"

using namespace texpipe;

int main(int argc, char** argv) {
  CLI::App app{"image-to-3D texture pipeline: deterministic geometry, baking, "
               "back-projection, and evaluation stages"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  int threads = 1;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (sections of key=value)");
    cmd->add_option("--out", out_dir, "output directory")->required();
    cmd->add_option("--seed", seed, "override the sampling seed");
    cmd->add_option("--threads", threads, "worker threads (results are identical for any count)")
        ->check(CLI::PositiveNumber);
  };

  std::string fixture;
  CLI::App* synth = app.add_subcommand("synth", "generate an analytic fixture with ground truth");
  synth->add_option("--fixture", fixture, "sphere | capsule | blob_character | nested_spheres")
      ->required();
  add_common(synth);

  std::string grid_path;
  CLI::App* extract = app.add_subcommand("extract", "grid file -> mesh + atlas + coarse texture");
  extract->add_option("--grid", grid_path, "SDFG grid file")->required();
  add_common(extract);

  RefineInputs refine_in;
  std::vector<std::string> view_paths;
  CLI::App* refine = app.add_subcommand("refine", "back-project views and blend the texture");
  refine->add_option("--mesh", refine_in.mesh_path, "OBJ with UV atlas")->required();
  refine->add_option("--coarse", refine_in.coarse_path, "coarse texture PNG")->required();
  refine->add_option("--view", view_paths, "view images, 4 in config azimuth order")
      ->expected(4)
      ->required();
  refine->add_option("--texels", refine_in.texels_path, "texel cache from extract (optional)");
  add_common(refine);

  std::string mesh_path, texture_path;
  double azimuth = 0;
  CLI::App* render = app.add_subcommand("render", "one textured view");
  render->add_option("--mesh", mesh_path, "OBJ with UV atlas")->required();
  render->add_option("--texture", texture_path, "texture PNG")->required();
  render->add_option("--azimuth", azimuth, "orbit azimuth in degrees")->required();
  add_common(render);

  EvalInputs eval_in;
  std::vector<std::string> views_a, views_b;
  CLI::App* eval = app.add_subcommand("eval", "metric report for a mesh/view pair");
  eval->add_option("--mesh-a", eval_in.mesh_a, "reference mesh")->required();
  eval->add_option("--mesh-b", eval_in.mesh_b, "candidate mesh")->required();
  eval->add_option("--view-a", views_a, "reference views, 4 in config azimuth order")
      ->expected(4)
      ->required();
  eval->add_option("--view-b", views_b, "candidate views, 4 in config azimuth order")
      ->expected(4)
      ->required();
  add_common(eval);

  int steps = 1000;
  CLI::App* schedule = app.add_subcommand("schedule", "noise schedule tables");
  schedule->add_option("--steps", steps, "timestep count")->check(CLI::PositiveNumber);
  add_common(schedule);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    PipelineConfig config = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (synth->count("--seed") || extract->count("--seed") || refine->count("--seed") ||
        render->count("--seed") || eval->count("--seed") || schedule->count("--seed"))
      config.sample_seed = seed;

    if (*synth) {
      cmd_synth(fixture, config, out_dir, threads);
    } else if (*extract) {
      cmd_extract(grid_path, config, out_dir, threads);
    } else if (*refine) {
      for (int i = 0; i < 4; ++i) refine_in.view_paths[i] = view_paths[i];
      cmd_refine(refine_in, config, out_dir, threads);
    } else if (*render) {
      cmd_render(mesh_path, texture_path, azimuth, config, out_dir, threads);
    } else if (*eval) {
      for (int i = 0; i < 4; ++i) {
        eval_in.views_a[i] = views_a[i];
        eval_in.views_b[i] = views_b[i];
      }
      cmd_eval(eval_in, config, out_dir, threads);
    } else if (*schedule) {
      cmd_schedule(steps, out_dir);
    }
    return 0;
  } catch (const input_error& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const numeric_error& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  }
}
