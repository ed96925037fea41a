// Command-line front end for the exploration simulator.
//
// Subcommands:
//   run      one simulation -> trace/belief/world/summary files
//   batch    n seeded runs of one controller -> per-tick aggregate CSV
//   compare  paired-seed batches across controllers -> aggregates + table
//   render   belief CSV -> grayscale PGM
//
// Exit codes: 0 ok, 2 configuration error, 3 I/O error, 4 internal error.

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dora/cli.hpp"
#include "dora/config.hpp"
#include "dora/engine.hpp"

namespace {

struct CommonOpts {
  std::optional<std::string> preset;
  std::optional<std::string> config_path;
  std::vector<std::string> sets;  // raw key=value overrides
  std::optional<std::uint64_t> seed;
  std::optional<int> robots;
  std::optional<int> steps;
  std::optional<std::string> controller;
  std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--preset", o.preset, "named preset: sim20 | arena");
  cmd->add_option("--config", o.config_path, "flat key=value config file");
  cmd->add_option("--set", o.sets, "override a single key, e.g. --set alpha=2");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--robots", o.robots, "number of robots");
  cmd->add_option("--steps", o.steps, "simulation steps");
  cmd->add_option("--controller", o.controller, "dora | fbe | random");
  cmd->add_option("--out", o.out_dir, "output directory");
}

// Preset, then file, then --set pairs, then the specific flags.
dora::SimConfig resolve_config(const CommonOpts& o) {
  dora::SimConfig cfg;
  if (o.preset) dora::apply_preset(cfg, *o.preset);
  if (o.config_path) {
    dora::parse_config_text(cfg, dora::read_file(*o.config_path));
  }
  for (const std::string& kv : o.sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw dora::ConfigError("--set expects key=value, got '" + kv + "'");
    }
    dora::apply_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.robots) cfg.robots = static_cast<std::int32_t>(*o.robots);
  if (o.steps) cfg.steps = static_cast<std::int32_t>(*o.steps);
  if (o.controller) cfg.controller = dora::parse_controller(*o.controller);
  dora::validate_config(cfg);
  return cfg;
}

void echo_config(const dora::SimConfig& cfg) {
  std::cout << "# resolved configuration\n" << dora::config_to_string(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic multi-robot exploration simulator"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "run one simulation");
  add_common(run_cmd, run_opts);

  CommonOpts batch_opts;
  int batch_runs = 1;
  int batch_jobs = 0;
  CLI::App* batch_cmd = app.add_subcommand("batch", "aggregate seeded runs");
  add_common(batch_cmd, batch_opts);
  batch_cmd->add_option("--runs", batch_runs, "number of seeded runs");
  batch_cmd->add_option("--jobs", batch_jobs, "worker threads (0 = all cores)");

  CommonOpts cmp_opts;
  int cmp_runs = 1;
  int cmp_jobs = 0;
  std::vector<std::string> cmp_controllers{"dora", "fbe", "random"};
  CLI::App* cmp_cmd =
      app.add_subcommand("compare", "paired-seed controller comparison");
  add_common(cmp_cmd, cmp_opts);
  cmp_cmd->add_option("--runs", cmp_runs, "runs per controller");
  cmp_cmd->add_option("--jobs", cmp_jobs, "worker threads (0 = all cores)");
  cmp_cmd->add_option("--controllers", cmp_controllers,
                      "controllers to compare")
      ->delimiter(',');

  std::string render_in;
  std::string render_out = "belief.pgm";
  std::optional<std::string> render_world;
  std::optional<std::int32_t> render_w, render_h;
  CLI::App* render_cmd = app.add_subcommand("render", "belief CSV -> PGM");
  render_cmd->add_option("belief", render_in, "belief CSV path")->required();
  render_cmd->add_option("--out", render_out, "output PGM path");
  render_cmd->add_option("--world", render_world,
                         "world CSV for obstacle overlay");
  render_cmd->add_option("--width", render_w, "grid width override");
  render_cmd->add_option("--height", render_h, "grid height override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto jobs_or_cores = [](int jobs) {
    if (jobs > 0) return jobs;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
  };

  try {
    if (run_cmd->parsed()) {
      const dora::SimConfig cfg = resolve_config(run_opts);
      echo_config(cfg);
      dora::cli::cmd_run(cfg, run_opts.out_dir);
    } else if (batch_cmd->parsed()) {
      const dora::SimConfig cfg = resolve_config(batch_opts);
      echo_config(cfg);
      dora::cli::cmd_batch(cfg, batch_runs, jobs_or_cores(batch_jobs),
                           batch_opts.out_dir);
    } else if (cmp_cmd->parsed()) {
      const dora::SimConfig cfg = resolve_config(cmp_opts);
      echo_config(cfg);
      std::vector<dora::Controller> controllers;
      for (const std::string& name : cmp_controllers) {
        controllers.push_back(dora::parse_controller(name));
      }
      dora::cli::cmd_compare(cfg, cmp_runs, jobs_or_cores(cmp_jobs),
                             controllers, cmp_opts.out_dir);
    } else if (render_cmd->parsed()) {
      std::optional<std::filesystem::path> world;
      if (render_world) world = *render_world;
      dora::cli::cmd_render(render_in, render_out, world, render_w, render_h);
    }
  } catch (const dora::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const dora::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
