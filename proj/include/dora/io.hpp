#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dora/config.hpp"
#include "dora/engine.hpp"
#include "dora/errors.hpp"
#include "dora/stigmergy.hpp"
#include "dora/world.hpp"

namespace dora {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Comment header carrying the fully resolved config; stripping the leading
// "# " yields valid config-file lines again.
inline std::string provenance_header(const SimConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_to_kv(cfg)) {
    out += "# ";
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

// `x,y,radiation_truth,obstacle` over the whole grid (noiseless field).
inline std::string world_csv(const GridWorld& w, double lambda,
                             const std::string& header = {}) {
  std::string out = header;
  out += "x,y,radiation_truth,obstacle\n";
  for (std::int32_t y = 0; y < w.height; ++y) {
    for (std::int32_t x = 0; x < w.width; ++x) {
      const CellCoord c{x, y};
      out += std::to_string(x);
      out += ',';
      out += std::to_string(y);
      out += ',';
      out += format_double(radiation_truth(w, c, lambda));
      out += ',';
      out += w.obstacles.contains(c) ? '1' : '0';
      out += '\n';
    }
  }
  return out;
}

inline std::string entries_csv(const std::vector<StigmergyEntry>& entries,
                               const std::string& header = {}) {
  std::string out = header;
  out += "key_x,key_y,value,lamport,writer_id\n";
  for (const StigmergyEntry& e : entries) {
    out += std::to_string(e.key.x);
    out += ',';
    out += std::to_string(e.key.y);
    out += ',';
    out += format_double(e.value);
    out += ',';
    out += std::to_string(e.lamport);
    out += ',';
    out += std::to_string(e.writer_id);
    out += '\n';
  }
  return out;
}

// One replica's table, keys in (x, y) order.
inline std::string replica_csv(const StigmergyReplica& rep,
                               const std::string& header = {}) {
  return entries_csv(sorted_entries(rep), header);
}

// The run's radiation belief: every visited cell with its last sensed level,
// visit tick as the logical timestamp and the visiting robot as writer.
// Well-defined for all controllers, including the uncoordinated baseline.
inline std::vector<StigmergyEntry> belief_entries(const SimState& s) {
  std::vector<StigmergyEntry> entries;
  entries.reserve(s.coverage.size());
  for (const auto& [key, rec] : s.coverage) {
    entries.push_back({unpack_cell(key), rec.radiation, rec.tick, rec.robot_id});
  }
  std::sort(entries.begin(), entries.end(),
            [](const StigmergyEntry& a, const StigmergyEntry& b) {
              return std::pair{a.key.x, a.key.y} < std::pair{b.key.x, b.key.y};
            });
  return entries;
}

inline std::string belief_csv(const SimState& s, const std::string& header = {}) {
  return entries_csv(belief_entries(s), header);
}

// `tick,active_robots,explored_cells,bytes_per_robot,stig_ops_per_robot`
inline std::string trace_csv(const std::vector<MetricsRecord>& trace,
                             const std::string& header = {}) {
  std::string out = header;
  out += "tick,active_robots,explored_cells,bytes_per_robot,stig_ops_per_robot\n";
  for (const MetricsRecord& m : trace) {
    out += std::to_string(m.tick);
    out += ',';
    out += std::to_string(m.active_robots);
    out += ',';
    out += std::to_string(m.explored_cells);
    out += ',';
    out += format_double(m.bytes_per_robot);
    out += ',';
    out += format_double(m.stig_ops_per_robot);
    out += '\n';
  }
  return out;
}

inline std::string aggregate_csv(const std::vector<AggregateRecord>& recs,
                                 const std::string& header = {}) {
  std::string out = header;
  out +=
      "tick,active_robots_mean,active_robots_std,explored_cells_mean,"
      "explored_cells_std,bytes_per_robot_mean,bytes_per_robot_std,"
      "stig_ops_per_robot_mean,stig_ops_per_robot_std\n";
  for (const AggregateRecord& a : recs) {
    out += std::to_string(a.tick);
    for (double v : {a.active_mean, a.active_std, a.explored_mean,
                     a.explored_std, a.bytes_mean, a.bytes_std, a.ops_mean,
                     a.ops_std}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

struct PgmOverlay {
  std::vector<CellCoord> sources;    // rendered at 254
  std::vector<CellCoord> obstacles;  // rendered at 0
};

// Grayscale P2 render of a belief map, one pixel per cell, top row =
// highest y. Unvisited cells are blank (255); visited cells shade with the
// stored value, 0 -> black, saturating at 254.
inline std::string render_pgm(const std::vector<StigmergyEntry>& entries,
                              std::int32_t width, std::int32_t height,
                              const PgmOverlay& overlay = {},
                              const std::string& header = {}) {
  std::vector<int> px(
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 255);
  auto at = [&](CellCoord c) -> int* {
    if (c.x < 0 || c.x >= width || c.y < 0 || c.y >= height) return nullptr;
    return &px[static_cast<std::size_t>(c.y) * width + c.x];
  };
  for (const StigmergyEntry& e : entries) {
    if (int* p = at(e.key)) {
      const double v = std::clamp(e.value, 0.0, 1.0);
      *p = static_cast<int>(std::lround(v * 254.0));
    }
  }
  for (const CellCoord& c : overlay.obstacles) {
    if (int* p = at(c)) *p = 0;
  }
  for (const CellCoord& c : overlay.sources) {
    if (int* p = at(c)) *p = 254;
  }
  std::string out = "P2\n";
  out += header;  // PGM comments carry the provenance
  out += std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (std::int32_t y = height - 1; y >= 0; --y) {
    for (std::int32_t x = 0; x < width; ++x) {
      out += std::to_string(px[static_cast<std::size_t>(y) * width + x]);
      out += x + 1 == width ? '\n' : ' ';
    }
  }
  return out;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f << content;
  if (!f) throw IoError("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct BeliefFile {
  std::vector<StigmergyEntry> entries;
  std::vector<std::pair<std::string, std::string>> header_kv;
};

// Parse a belief/replica CSV, keeping any `# key=value` provenance lines.
inline BeliefFile parse_belief_csv(const std::string& text) {
  BeliefFile out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool saw_columns = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string body = detail::trim(line.substr(1));
      const std::size_t eq = body.find('=');
      if (eq != std::string::npos) {
        out.header_kv.emplace_back(detail::trim(body.substr(0, eq)),
                                   detail::trim(body.substr(eq + 1)));
      }
      continue;
    }
    if (!saw_columns) {
      if (line != "key_x,key_y,value,lamport,writer_id") {
        throw ConfigError("belief csv line " + std::to_string(line_no) +
                          ": unexpected column header '" + line + "'");
      }
      saw_columns = true;
      continue;
    }
    StigmergyEntry e;
    long lamport = 0;
    long writer = 0;
    long kx = 0, ky = 0;
    double value = 0.0;
    if (std::sscanf(line.c_str(), "%ld,%ld,%lf,%ld,%ld", &kx, &ky, &value,
                    &lamport, &writer) != 5) {
      throw ConfigError("belief csv line " + std::to_string(line_no) +
                        ": malformed row '" + line + "'");
    }
    e.key = {static_cast<std::int32_t>(kx), static_cast<std::int32_t>(ky)};
    e.value = value;
    e.lamport = static_cast<std::uint64_t>(lamport);
    e.writer_id = static_cast<std::uint32_t>(writer);
    out.entries.push_back(e);
  }
  if (!saw_columns) throw ConfigError("belief csv: missing column header");
  return out;
}

}  // namespace dora
