#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dora/config.hpp"
#include "dora/engine.hpp"
#include "dora/errors.hpp"
#include "dora/io.hpp"

namespace dora::cli {

namespace fs = std::filesystem;

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

// FNV-1a, used to pair-check worlds across controllers.
inline std::uint64_t hash_bytes(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct RunArtifacts {
  fs::path trace;
  fs::path belief;
  fs::path pgm;
  fs::path world;
  fs::path summary;
};

// Execute one run and write trace.csv, belief.csv, belief.pgm, world.csv and
// summary.txt into out_dir. Every file starts with the resolved config.
inline RunArtifacts cmd_run(const SimConfig& cfg, const fs::path& out_dir,
                            std::ostream& log = std::cout) {
  validate_config(cfg);
  ensure_dir(out_dir);
  const std::string header = provenance_header(cfg);

  SimState s = run(cfg);
  const RunSummary sum = summarize(s);

  RunArtifacts a{out_dir / "trace.csv", out_dir / "belief.csv",
                 out_dir / "belief.pgm", out_dir / "world.csv",
                 out_dir / "summary.txt"};
  write_file(a.trace, trace_csv(s.trace, header));
  write_file(a.belief, belief_csv(s, header));

  PgmOverlay overlay;
  for (const RadiationSource& src : s.world.sources) overlay.sources.push_back(src.position);
  overlay.obstacles.assign(s.world.obstacles.begin(), s.world.obstacles.end());
  write_file(a.pgm,
             render_pgm(belief_entries(s), cfg.width, cfg.height, overlay, header));
  write_file(a.world, world_csv(s.world, cfg.lambda, header));

  std::string summary = header;
  summary += "final_active_robots=" + std::to_string(sum.final_active) + "\n";
  summary += "final_explored_cells=" + std::to_string(sum.final_explored) + "\n";
  summary += "mean_bytes_per_robot_tick=" + format_double(sum.mean_bytes_per_robot_tick) + "\n";
  summary += "mean_stig_ops_per_robot_tick=" + format_double(sum.mean_ops_per_robot_tick) + "\n";
  write_file(a.summary, summary);

  log << "run controller=" << to_string(cfg.controller) << " seed=" << cfg.seed
      << ": " << sum.final_active << "/" << cfg.robots << " robots active, "
      << sum.final_explored << " cells explored -> " << out_dir.string()
      << "\n";
  return a;
}

// Batch one controller over seeds seed..seed+runs-1 and write the per-tick
// aggregate CSV. Returns the result for callers that keep processing.
inline BatchResult cmd_batch(const SimConfig& cfg, int runs, int jobs,
                             const fs::path& out_dir,
                             std::ostream& log = std::cout) {
  validate_config(cfg);
  ensure_dir(out_dir);
  BatchResult res = batch(cfg, runs, cfg.seed, jobs);
  const fs::path file = out_dir / ("batch_" + to_string(cfg.controller) + ".csv");
  std::string header = provenance_header(cfg);
  header += "# runs=" + std::to_string(runs) + "\n";
  write_file(file, aggregate_csv(res.per_tick, header));
  const AggregateRecord& last = res.per_tick.back();
  log << "batch controller=" << to_string(cfg.controller) << " runs=" << runs
      << ": final active mean " << format_double(last.active_mean)
      << ", explored mean " << format_double(last.explored_mean) << " -> "
      << file.string() << "\n";
  return res;
}

struct CompareRow {
  Controller controller;
  double active_mean = 0;
  double explored_mean = 0;
  double bytes_per_robot_tick_mean = 0;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  std::vector<std::uint64_t> world_hashes;  // one per seed, equal across controllers
};

// Run every controller over the same seed list (identical worlds per seed, so
// differences are the controller's doing), write per-controller aggregates
// and a final-tick comparison table.
inline CompareResult cmd_compare(const SimConfig& base, int runs, int jobs,
                                 const std::vector<Controller>& controllers,
                                 const fs::path& out_dir,
                                 std::ostream& log = std::cout) {
  validate_config(base);
  if (runs < 1) throw ConfigError("compare: runs must be >= 1");
  if (controllers.empty()) throw ConfigError("compare: no controllers given");
  ensure_dir(out_dir);

  CompareResult result;
  // Paired-world check: the world depends only on world keys + seed, but
  // verify byte-equality anyway and record the hashes.
  for (int i = 0; i < runs; ++i) {
    SimConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(i);
    std::optional<std::uint64_t> expected;
    for (Controller c : controllers) {
      cfg.controller = c;
      RandomStream rng = derive_stream(cfg.seed, streams::kWorld);
      const GridWorld w = generate_world(world_params(cfg), rng);
      const std::uint64_t h = hash_bytes(world_csv(w, cfg.lambda));
      if (expected && *expected != h) {
        throw std::logic_error("paired worlds diverged across controllers");
      }
      expected = h;
    }
    result.world_hashes.push_back(*expected);
  }

  std::string table;
  {
    std::string header;
    for (std::size_t i = 0; i < result.world_hashes.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "# world_hash seed=%llu %016llx\n",
                    static_cast<unsigned long long>(base.seed + i),
                    static_cast<unsigned long long>(result.world_hashes[i]));
      header += buf;
    }
    table = header;
  }
  table += "controller,active_robots_mean,explored_cells_mean,bytes_per_robot_tick_mean\n";

  for (Controller c : controllers) {
    SimConfig cfg = base;
    cfg.controller = c;
    const fs::path agg_file =
        out_dir / ("compare_" + to_string(c) + ".csv");
    BatchResult res = batch(cfg, runs, cfg.seed, jobs);
    std::string header = provenance_header(cfg);
    header += "# runs=" + std::to_string(runs) + "\n";
    write_file(agg_file, aggregate_csv(res.per_tick, header));

    CompareRow row;
    row.controller = c;
    double bytes = 0;
    for (const RunSummary& rs : res.runs) bytes += rs.mean_bytes_per_robot_tick;
    row.bytes_per_robot_tick_mean = bytes / static_cast<double>(res.runs.size());
    row.active_mean = res.per_tick.back().active_mean;
    row.explored_mean = res.per_tick.back().explored_mean;
    result.rows.push_back(row);

    table += to_string(c);
    table += ',';
    table += format_double(row.active_mean);
    table += ',';
    table += format_double(row.explored_mean);
    table += ',';
    table += format_double(row.bytes_per_robot_tick_mean);
    table += '\n';
  }
  const fs::path table_file = out_dir / "compare_table.csv";
  write_file(table_file, table);
  log << table;
  log << "compare: wrote " << table_file.string() << "\n";
  return result;
}

// Re-render a belief CSV as a PGM. Grid extents come from the file's
// provenance header unless overridden; an optional world CSV adds
// source/obstacle overlays.
inline void cmd_render(const fs::path& belief_path, const fs::path& out_path,
                       const std::optional<fs::path>& world_path = {},
                       std::optional<std::int32_t> width = {},
                       std::optional<std::int32_t> height = {},
                       std::ostream& log = std::cout) {
  const BeliefFile belief = parse_belief_csv(read_file(belief_path));
  std::int32_t w = width.value_or(0);
  std::int32_t h = height.value_or(0);
  for (const auto& [k, v] : belief.header_kv) {
    if (k == "width" && !width) w = static_cast<std::int32_t>(detail::parse_int(k, v));
    if (k == "height" && !height) h = static_cast<std::int32_t>(detail::parse_int(k, v));
  }
  if (w < 1 || h < 1) {
    throw ConfigError("render: grid extents unknown (no header; pass --width/--height)");
  }

  PgmOverlay overlay;
  if (world_path) {
    const std::string text = read_file(*world_path);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line.front() == '#' || line.front() == 'x') continue;
      long x = 0, y = 0, obstacle = 0;
      double truth = 0;
      if (std::sscanf(line.c_str(), "%ld,%ld,%lf,%ld", &x, &y, &truth,
                      &obstacle) != 4) {
        throw ConfigError("render: malformed world row '" + line + "'");
      }
      if (obstacle) {
        overlay.obstacles.push_back({static_cast<std::int32_t>(x),
                                     static_cast<std::int32_t>(y)});
      }
    }
  }
  std::string header;
  for (const auto& [k, v] : belief.header_kv) {
    header += "# " + k + "=" + v + "\n";
  }
  write_file(out_path, render_pgm(belief.entries, w, h, overlay, header));
  log << "render: " << belief.entries.size() << " cells -> "
      << out_path.string() << "\n";
}

}  // namespace dora::cli
