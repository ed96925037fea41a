#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "dora/errors.hpp"
#include "dora/geom.hpp"
#include "dora/rng.hpp"

namespace dora {

struct RadiationSource {
  CellCoord position;
  double intensity = 0.0;  // in [0, 1]
};

// The discretized 2D environment: grid extents, obstacles, radiation sources
// and the ground-truth field robots sample. Immutable after generation.
struct GridWorld {
  std::int32_t width = 0;   // cells
  std::int32_t height = 0;  // cells
  double cell_size = 1.0;   // meters per cell
  std::vector<RadiationSource> sources;
  std::set<CellCoord> obstacles;
  double background_sigma = 0.0;
  bool sources_block = true;  // emitters are physical bodies robots cannot enter
};

inline bool in_grid(const GridWorld& w, CellCoord c) {
  return c.x >= 0 && c.x < w.width && c.y >= 0 && c.y < w.height;
}

// Continuous point inside the arena [0, width*cell) x [0, height*cell)?
inline bool in_arena(const GridWorld& w, Vec2 p) {
  return p.x >= 0.0 && p.x < w.width * w.cell_size && p.y >= 0.0 &&
         p.y < w.height * w.cell_size;
}

inline bool is_source_cell(const GridWorld& w, CellCoord c) {
  for (const RadiationSource& s : w.sources) {
    if (s.position == c) return true;
  }
  return false;
}

inline bool is_traversable(const GridWorld& w, CellCoord c) {
  if (!in_grid(w, c) || w.obstacles.contains(c)) return false;
  return !(w.sources_block && is_source_cell(w, c));
}

// Continuous position -> cell index by floor division. Points within 1e-9
// cells of an upper cell boundary snap up, so exact multiples of cell_size
// land in the cell they nominally start.
inline CellCoord discretize(Vec2 position, double cell_size) {
  return {static_cast<std::int32_t>(std::floor(position.x / cell_size + 1e-9)),
          static_cast<std::int32_t>(std::floor(position.y / cell_size + 1e-9))};
}

// Perceived level from one source: I / (1 + lambda * rho^2), rho the
// Euclidean distance in cell units. Equals I at the source cell and decays
// with distance.
inline double radiation_from_source(const RadiationSource& s, CellCoord cell,
                                    double lambda) {
  const double dx = static_cast<double>(cell.x - s.position.x);
  const double dy = static_cast<double>(cell.y - s.position.y);
  return s.intensity / (1.0 + lambda * (dx * dx + dy * dy));
}

struct RadiationModel {
  double lambda = 5.0;
};

// Noiseless sum of all source contributions at a cell.
inline double radiation_truth(const GridWorld& w, CellCoord cell,
                              double lambda) {
  double total = 0.0;
  for (const RadiationSource& s : w.sources) {
    total += radiation_from_source(s, cell, lambda);
  }
  return total;
}

// What a sensor reads: truth plus one Gaussian background draw, clamped at 0
// (a sensor cannot report negative radiation). Consumes exactly one noise
// sample from the stream.
inline double total_radiation(const GridWorld& w, CellCoord cell,
                              double lambda, RandomStream& rng) {
  const double b = rng.normal(w.background_sigma);
  return std::max(0.0, b + radiation_truth(w, cell, lambda));
}

struct WorldGenParams {
  std::int32_t width = 20;
  std::int32_t height = 20;
  double cell_size = 1.0;
  int sources = 2;
  int obstacles = 5;
  double obstacle_size = 0.8;  // meters, square side
  double background_sigma = 0.05;
};

// Random environment: sources uniform on the grid (distinct cells, intensity
// uniform in [0,1]), then square obstacles that overlap neither each other
// nor any source. Obstacle side is rounded up to whole cells. Deterministic
// given the stream state.
inline GridWorld generate_world(const WorldGenParams& p, RandomStream& rng) {
  if (p.width < 1 || p.height < 1 || p.cell_size <= 0.0) {
    throw ConfigError("generate_world: grid dimensions must be positive");
  }
  const std::int64_t cells =
      static_cast<std::int64_t>(p.width) * static_cast<std::int64_t>(p.height);
  if (p.sources < 0 || p.obstacles < 0) {
    throw ConfigError("generate_world: counts must be non-negative");
  }
  if (p.sources > cells) {
    throw ConfigError("generate_world: more sources than grid cells");
  }

  GridWorld w;
  w.width = p.width;
  w.height = p.height;
  w.cell_size = p.cell_size;
  w.background_sigma = p.background_sigma;

  constexpr int kMaxAttempts = 1000;

  std::set<CellCoord> taken;
  for (int j = 0; j < p.sources; ++j) {
    CellCoord c;
    int attempt = 0;
    do {
      if (++attempt > kMaxAttempts) {
        throw ConfigError("generate_world: could not place source (grid too crowded)");
      }
      c = {static_cast<std::int32_t>(rng.uniform_below(p.width)),
           static_cast<std::int32_t>(rng.uniform_below(p.height))};
    } while (taken.contains(c));
    taken.insert(c);
    w.sources.push_back({c, rng.uniform01()});
  }

  const std::int32_t side = std::max<std::int32_t>(
      1, static_cast<std::int32_t>(
             std::ceil(p.obstacle_size / p.cell_size - 1e-9)));
  if (p.obstacles > 0 && (side > p.width || side > p.height)) {
    throw ConfigError("generate_world: obstacle larger than grid");
  }
  for (int o = 0; o < p.obstacles; ++o) {
    int attempt = 0;
    for (;;) {
      if (++attempt > kMaxAttempts) {
        throw ConfigError("generate_world: could not place obstacle (grid too crowded)");
      }
      const std::int32_t ox =
          static_cast<std::int32_t>(rng.uniform_below(p.width - side + 1));
      const std::int32_t oy =
          static_cast<std::int32_t>(rng.uniform_below(p.height - side + 1));
      bool clear = true;
      for (std::int32_t x = ox; clear && x < ox + side; ++x) {
        for (std::int32_t y = oy; clear && y < oy + side; ++y) {
          if (taken.contains({x, y}) || w.obstacles.contains({x, y})) {
            clear = false;
          }
        }
      }
      if (!clear) continue;
      for (std::int32_t x = ox; x < ox + side; ++x) {
        for (std::int32_t y = oy; y < oy + side; ++y) {
          w.obstacles.insert({x, y});
        }
      }
      break;
    }
  }
  return w;
}

}  // namespace dora
