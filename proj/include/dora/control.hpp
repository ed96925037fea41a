#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "dora/geom.hpp"
#include "dora/risk.hpp"
#include "dora/rng.hpp"
#include "dora/stigmergy.hpp"

namespace dora {

// The 8 Moore offsets around a cell, top-left first.
inline constexpr std::array<CellCoord, 8> kMooreOffsets{{{-1, 1},
                                                         {0, 1},
                                                         {1, 1},
                                                         {-1, 0},
                                                         {1, 0},
                                                         {-1, -1},
                                                         {0, -1},
                                                         {1, -1}}};

struct Neighborhood {
  std::array<CellCoord, 8> offsets = kMooreOffsets;
};

struct ControlGains {
  double alpha = 2.0;  // risk avoidance
  double beta = 1.0;   // exploration
  double gamma = 1.0;  // obstacle avoidance
  double k = 0.2;      // step length, meters per tick
  double stagnation_epsilon = 1e-3;
};

struct MovementCommand {
  Vec2 vector;                    // desired movement direction (unnormalized)
  bool fallback_forward = false;  // stagnation: keep current heading
};

// Local gradient over a scalar field known through `values` (cell ->
// optional scalar): sum over the neighborhood of (v(center) - v(neighbor))
// times the unit offset, so diagonals weigh 1/sqrt(2). Missing values read as
// missing_default. Points away from larger neighboring values.
template <typename Lookup>
Vec2 local_gradient(Lookup&& values, CellCoord center, const Neighborhood& nb,
                    double missing_default) {
  const double vc = values(center).value_or(missing_default);
  Vec2 g;
  for (const CellCoord& off : nb.offsets) {
    const CellCoord n{center.x + off.x, center.y + off.y};
    const double vn = values(n).value_or(missing_default);
    const double len = std::hypot(static_cast<double>(off.x),
                                  static_cast<double>(off.y));
    g.x += (vc - vn) * off.x / len;
    g.y += (vc - vn) * off.y / len;
  }
  return g;
}

// Repulsion away from proximity readings. Sensor s looks along body angle
// s * 45 degrees; readings grow toward 1 as an obstacle gets close. The
// result is rotated from the body frame into the world frame.
inline Vec2 obstacle_avoidance(std::span<const double, 8> readings,
                               double heading) {
  Vec2 body;
  for (int s = 0; s < 8; ++s) {
    const double theta = s * (std::numbers::pi / 4.0);
    body.x -= readings[s] * std::cos(theta);
    body.y -= readings[s] * std::sin(theta);
  }
  return rotate(body, heading);
}

// One control decision of the risk-aware explorer: radiation and visit-time
// gradients from the two belief maps, blended with obstacle repulsion.
// Neighbor cells go through vget -- 16 shared reads per call -- while the
// center values come from the robot's own replica.
//
// Missing reads resolve differently per map. A never-visited cell reads as
// visit time 0 (the oldest possible), which is the pull toward unexplored
// ground. A cell with no radiation sample contributes nothing to the risk
// gradient: defaulting it to "no risk" would turn the risk term into a push
// toward unknown cells that grows with the danger of the current cell, the
// opposite of risk avoidance. Cells beyond the arena contribute to neither
// gradient (the void past a wall would otherwise look eternally unvisited and
// pin robots to the boundary). Near-zero commands fall back to moving forward.

// How stored visit times enter the exploration gradient.
//   info_gain: differences of the information-gain probability
//              1 - min(1, omega * exp(-omega * dt)). Bounded like the risk
//              values, and staleness saturates, so a long-unreachable cell
//              stops outbidding the risk term.
//   age_ratio: raw time differences scaled by 1/t.
//   raw_time:  the unscaled differences.
enum class EpsilonMode { info_gain, age_ratio, raw_time };

struct DoraContext {
  std::int32_t width = 0;
  std::int32_t height = 0;
  std::uint64_t t = 1;
  double omega = 0.1;
  EpsilonMode eps_mode = EpsilonMode::info_gain;
  bool unvisited_pull = true;
  // map readings at or below this level count as background, not signal;
  // keeps measurement speckle from exerting phantom forces
  double detection_floor = 0.0;
};

inline MovementCommand dora_step(StigmergyReplica& r_map,
                                 StigmergyReplica& e_map, BroadcastBus& bus,
                                 CellCoord cell, double heading,
                                 std::span<const double, 8> proximity,
                                 const ControlGains& gains,
                                 const Neighborhood& nb,
                                 const DoraContext& ctx) {
  auto out_of_arena = [&](CellCoord c) {
    return c.x < 0 || c.x >= ctx.width || c.y < 0 || c.y >= ctx.height;
  };
  auto detected = [&](double v) { return v <= ctx.detection_floor ? 0.0 : v; };
  const double r_center = detected(peek(r_map, cell).value_or(0.0));
  auto read_r = [&](CellCoord c) -> std::optional<double> {
    if (c == cell) return r_center;
    const std::optional<double> v = vget(r_map, c, bus);
    if (out_of_arena(c) || !v) return r_center;  // neutral term
    return detected(*v);
  };
  const double now = static_cast<double>(ctx.t);
  auto eps_value = [&](std::optional<double> stamp) {
    // missing = never visited = the oldest possible stamp
    const double visited_at = stamp.value_or(0.0);
    switch (ctx.eps_mode) {
      case EpsilonMode::info_gain:
        return info_gain_probability(now - visited_at, {ctx.omega});
      case EpsilonMode::age_ratio:
        return (now - visited_at) / std::max(now, 1.0);
      case EpsilonMode::raw_time:
        return now - visited_at;
    }
    return 0.0;
  };
  // staleness grows where visit stamps are old, so its gradient points toward
  // fresh cells; the exploration pull is the opposite direction
  const double e_center = eps_value(peek(e_map, cell));
  auto read_e = [&](CellCoord c) -> std::optional<double> {
    if (c == cell) return e_center;
    const std::optional<double> v = vget(e_map, c, bus);
    if (out_of_arena(c)) return e_center;  // neutral
    if (!v && !ctx.unvisited_pull) return e_center;
    return eps_value(v);
  };
  const Vec2 grad_r = local_gradient(read_r, cell, nb, 0.0);
  const Vec2 grad_e = local_gradient(read_e, cell, nb, e_center);
  const Vec2 o = obstacle_avoidance(proximity, heading);
  // grad_e points away from stale ground, so exploration subtracts it
  const Vec2 m =
      gains.alpha * grad_r - gains.beta * grad_e + gains.gamma * o;
  if (norm(m) < gains.stagnation_epsilon) {
    return {Vec2{}, true};
  }
  return {m, false};
}

// Advance exactly k along the normalized command (or along the current
// heading when falling back). Returns the new position and heading.
inline std::pair<Vec2, double> apply_control(Vec2 position,
                                             const MovementCommand& cmd,
                                             const ControlGains& gains,
                                             double heading) {
  if (cmd.fallback_forward || norm(cmd.vector) == 0.0) {
    return {position + gains.k * Vec2{std::cos(heading), std::sin(heading)},
            heading};
  }
  const Vec2 dir = cmd.vector / norm(cmd.vector);
  return {position + gains.k * dir, std::atan2(cmd.vector.y, cmd.vector.x)};
}

enum class CellState : std::uint8_t { unexplored, explored, frontier };

// Three-way cell classification against an exploration map: present keys are
// explored; an explored cell with at least one in-bounds Moore neighbor
// absent from the map is a frontier.
inline std::vector<CellState> classify_cells(const StigmergyReplica& e_map,
                                             std::int32_t width,
                                             std::int32_t height) {
  std::vector<CellState> states(
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
      CellState::unexplored);
  for (std::int32_t y = 0; y < height; ++y) {
    for (std::int32_t x = 0; x < width; ++x) {
      if (!e_map.table.contains(pack_cell({x, y}))) continue;
      CellState s = CellState::explored;
      for (const CellCoord& off : kMooreOffsets) {
        const CellCoord n{x + off.x, y + off.y};
        if (n.x < 0 || n.x >= width || n.y < 0 || n.y >= height) continue;
        if (!e_map.table.contains(pack_cell(n))) {
          s = CellState::frontier;
          break;
        }
      }
      states[static_cast<std::size_t>(y) * width + x] = s;
    }
  }
  return states;
}

// Frontier cells only, computed from the map's own keys (cheaper than a full
// grid classification; agrees with classify_cells).
inline std::vector<CellCoord> frontier_cells(const StigmergyReplica& e_map,
                                             std::int32_t width,
                                             std::int32_t height) {
  std::vector<CellCoord> out;
  for (const auto& [key, entry] : e_map.table) {
    const CellCoord c = unpack_cell(key);
    if (c.x < 0 || c.x >= width || c.y < 0 || c.y >= height) continue;
    for (const CellCoord& off : kMooreOffsets) {
      const CellCoord n{c.x + off.x, c.y + off.y};
      if (n.x < 0 || n.x >= width || n.y < 0 || n.y >= height) continue;
      if (!e_map.table.contains(pack_cell(n))) {
        out.push_back(c);
        break;
      }
    }
  }
  return out;
}

// Frontier-based exploration step: read the 8 neighbor cells (sharing map
// entries the same way the gradient controller does), then head for the
// nearest frontier cell. Equidistant frontiers tie-break on lowest (y, x),
// so identical maps pick identical targets. A robot already standing on the
// chosen frontier pushes on into its nearest unexplored neighbor, which is
// what grows the explored region. No frontier left -> fallback.
inline MovementCommand fbe_step(StigmergyReplica& e_map, BroadcastBus& bus,
                                Vec2 position, CellCoord cell, double heading,
                                std::span<const double, 8> proximity,
                                const ControlGains& gains,
                                const Neighborhood& nb, std::int32_t width,
                                std::int32_t height, double cell_size) {
  for (const CellCoord& off : nb.offsets) {
    vget(e_map, {cell.x + off.x, cell.y + off.y}, bus);
  }
  const std::vector<CellCoord> frontiers = frontier_cells(e_map, width, height);
  if (frontiers.empty()) {
    return {Vec2{}, true};
  }
  auto rank = [&](CellCoord c) {
    const Vec2 d = cell_center(c, cell_size) - position;
    return std::tuple{d.x * d.x + d.y * d.y, c.y, c.x};
  };
  CellCoord target = frontiers.front();
  for (const CellCoord& c : frontiers) {
    if (rank(c) < rank(target)) target = c;
  }
  if (target == cell) {
    // arrived: advance the frontier through the lowest-(y, x) unexplored
    // in-bounds neighbor (one exists, or this cell would not be a frontier)
    std::optional<CellCoord> next;
    for (const CellCoord& off : nb.offsets) {
      const CellCoord n{cell.x + off.x, cell.y + off.y};
      if (n.x < 0 || n.x >= width || n.y < 0 || n.y >= height) continue;
      if (e_map.table.contains(pack_cell(n))) continue;
      if (!next || std::pair{n.y, n.x} < std::pair{next->y, next->x}) next = n;
    }
    if (next) target = *next;
  }
  const Vec2 to_target = cell_center(target, cell_size) - position;
  const double dist = norm(to_target);
  if (dist < 1e-12) {
    return {Vec2{}, true};
  }
  const Vec2 m =
      to_target / dist + gains.gamma * obstacle_avoidance(proximity, heading);
  if (norm(m) < gains.stagnation_epsilon) {
    return {Vec2{}, true};
  }
  return {m, false};
}

// Random-walk baseline: keep the heading, except with probability p_turn pick
// a fresh uniform one. Consumes exactly two stream draws per call.
inline MovementCommand random_walk_step(double heading,
                                        std::span<const double, 8> proximity,
                                        const ControlGains& gains,
                                        double p_turn, RandomStream& rng) {
  const double u = rng.uniform01();
  const double fresh = rng.uniform_angle();
  const double h = u < p_turn ? fresh : heading;
  const Vec2 m = Vec2{std::cos(h), std::sin(h)} +
                 gains.gamma * obstacle_avoidance(proximity, heading);
  if (norm(m) < gains.stagnation_epsilon) {
    return {Vec2{}, true};
  }
  return {m, false};
}

}  // namespace dora
