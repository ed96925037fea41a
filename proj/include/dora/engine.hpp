#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dora/config.hpp"
#include "dora/control.hpp"
#include "dora/errors.hpp"
#include "dora/geom.hpp"
#include "dora/risk.hpp"
#include "dora/rng.hpp"
#include "dora/stigmergy.hpp"
#include "dora/world.hpp"

namespace dora {

// One agent. Once active goes false it stays false; the replicas freeze with
// whatever the robot knew at that point.
struct RobotState {
  std::uint32_t id = 0;
  Vec2 position;       // meters
  double heading = 0;  // radians
  bool active = true;
  CellCoord last_cell;
  RandomStream rng;
  std::vector<StigmergyReplica> replicas;  // dora: [radiation, visit]; fbe: [visit]
  std::unordered_set<std::uint64_t> visited;  // cells this robot ever entered
  bool bump_commit = false;  // last move hit something; ride the contact out
};

// What the run logger knows: for each visited cell, the latest sensed
// radiation, visit tick and visiting robot. Drives the explored-cells metric
// and the exported belief map for every controller.
struct VisitRecord {
  double radiation = 0.0;
  std::uint64_t tick = 0;
  std::uint32_t robot_id = 0;
};

struct MetricsRecord {
  std::uint64_t tick = 0;
  std::int32_t active_robots = 0;
  std::uint64_t explored_cells = 0;
  double bytes_per_robot = 0.0;
  double stig_ops_per_robot = 0.0;
};

struct RobotTickStats {
  std::uint32_t id = 0;
  bool acted = false;       // active at tick start
  bool active_end = false;  // survived the tick
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t bytes = 0;
};

struct TickReport {
  std::vector<RobotTickStats> robots;
  FlushReport flush;
  MetricsRecord record;
};

struct SimState {
  SimConfig config;
  GridWorld world;
  std::vector<RobotState> robots;
  BroadcastBus bus;
  RandomStream net_rng;
  Neighborhood neighborhood;
  std::unordered_map<std::uint64_t, VisitRecord> coverage;
  std::uint64_t tick_index = 0;
  std::vector<MetricsRecord> trace;
};

// 8 proximity readings at 45-degree spacing starting from the heading.
// Linear falloff: 1 near contact, 0 at range. Walls and obstacle cells both
// register; hits on in-bounds obstacle cells also report which cell was seen.
// Ray-marched at range/16 resolution.
struct ProximityScan {
  std::array<double, 8> readings{};
  std::array<std::optional<CellCoord>, 8> blocked_cells{};
};

inline ProximityScan sense_proximity(const GridWorld& w, Vec2 position,
                                     double heading, double range_m) {
  ProximityScan scan;
  if (range_m <= 0.0) return scan;
  constexpr int kSamples = 16;
  for (int s = 0; s < 8; ++s) {
    const double theta = heading + s * (std::numbers::pi / 4.0);
    const Vec2 dir{std::cos(theta), std::sin(theta)};
    for (int i = 1; i <= kSamples; ++i) {
      const double d = range_m * i / kSamples;
      const Vec2 p = position + d * dir;
      const CellCoord c = discretize(p, w.cell_size);
      if (!in_arena(w, p) || !is_traversable(w, c)) {
        scan.readings[s] = 1.0 - static_cast<double>(i) / kSamples;
        if (in_arena(w, p)) scan.blocked_cells[s] = c;
        break;
      }
    }
  }
  return scan;
}

// Other robots register on the proximity ring too (they are bodies the IR
// sensors see); each peer inside the range raises the sensor covering its
// bearing.
inline void sense_peers(ProximityScan& scan, Vec2 position, double heading,
                        double range_m, std::span<const Vec2> peers) {
  for (const Vec2& peer : peers) {
    const double d = distance(position, peer);
    if (d <= 0.0 || d >= range_m) continue;
    const double bearing = std::atan2(peer.y - position.y, peer.x - position.x);
    double rel = bearing - heading;
    rel -= 2.0 * std::numbers::pi *
           std::floor(rel / (2.0 * std::numbers::pi) + 0.5);
    int sector =
        static_cast<int>(std::lround(rel / (std::numbers::pi / 4.0)));
    sector = ((sector % 8) + 8) % 8;
    scan.readings[static_cast<std::size_t>(sector)] = std::max(
        scan.readings[static_cast<std::size_t>(sector)], 1.0 - d / range_m);
  }
}

// Cancel displacement components that would leave the arena or enter a
// blocked cell, so robots slide along walls instead of sticking to them. A
// fully blocked move deflects 45 degrees around the contact instead of
// freezing in place (a real robot pushed against a body jostles around it).
inline Vec2 resolve_collision(const GridWorld& w, Vec2 from, Vec2 to) {
  auto ok = [&](Vec2 p) {
    return in_arena(w, p) && is_traversable(w, discretize(p, w.cell_size));
  };
  if (ok(to)) return to;
  const Vec2 x_only{to.x, from.y};
  if (ok(x_only)) return x_only;
  const Vec2 y_only{from.x, to.y};
  if (ok(y_only)) return y_only;
  const Vec2 d = to - from;
  for (const double turn : {std::numbers::pi / 4.0, -std::numbers::pi / 4.0}) {
    const Vec2 deflected = from + rotate(d, turn);
    if (ok(deflected)) return deflected;
  }
  return from;
}

inline WorldGenParams world_params(const SimConfig& cfg) {
  return {cfg.width,     cfg.height,        cfg.cell_size,       cfg.sources,
          cfg.obstacles, cfg.obstacle_size, cfg.background_sigma};
}

// Fresh simulation: generate the world, then place robots on distinct free
// cells (uniformly, via a seeded shuffle) with uniform random headings.
// Robot i's private stream is substream kRobotBase + i of the master seed.
inline SimState init_run(const SimConfig& cfg) {
  validate_config(cfg);
  SimState s;
  s.config = cfg;
  RandomStream world_rng = derive_stream(cfg.seed, streams::kWorld);
  s.world = generate_world(world_params(cfg), world_rng);
  s.world.sources_block = cfg.sources_block;
  s.net_rng = derive_stream(cfg.seed, streams::kNetwork);
  s.bus.drop_probability = cfg.drop_probability;
  s.bus.message_bytes = static_cast<std::uint32_t>(cfg.message_bytes);
  s.bus.max_rounds = cfg.flush_rounds;
  s.bus.comm_radius_cells = cfg.comm_radius;

  std::vector<CellCoord> free_cells;
  free_cells.reserve(static_cast<std::size_t>(cfg.width) * cfg.height);
  for (std::int32_t y = 0; y < cfg.height; ++y) {
    for (std::int32_t x = 0; x < cfg.width; ++x) {
      if (is_traversable(s.world, {x, y})) free_cells.push_back({x, y});
    }
  }
  if (static_cast<std::size_t>(cfg.robots) > free_cells.size()) {
    throw ConfigError("more robots than free cells");
  }
  RandomStream placement = derive_stream(cfg.seed, streams::kPlacement);
  for (std::size_t i = free_cells.size(); i > 1; --i) {
    const std::size_t j = placement.uniform_below(static_cast<std::uint32_t>(i));
    std::swap(free_cells[i - 1], free_cells[j]);
  }

  s.robots.reserve(static_cast<std::size_t>(cfg.robots));
  for (std::int32_t i = 0; i < cfg.robots; ++i) {
    RobotState r;
    r.id = static_cast<std::uint32_t>(i);
    r.last_cell = free_cells[static_cast<std::size_t>(i)];
    r.position = cell_center(r.last_cell, cfg.cell_size);
    r.heading = placement.uniform_angle();
    r.rng = derive_stream(cfg.seed, streams::kRobotBase + static_cast<std::uint64_t>(i));
    r.visited.insert(pack_cell(r.last_cell));  // the spawn cell is not an exploration event
    auto make_replica = [&](std::uint8_t map_id) {
      StigmergyReplica rep;
      rep.robot_id = r.id;
      rep.map_id = map_id;
      return rep;
    };
    switch (cfg.controller) {
      case Controller::dora:
        r.replicas.push_back(make_replica(maps::kRadiation));
        r.replicas.push_back(make_replica(maps::kVisit));
        break;
      case Controller::fbe:
        r.replicas.push_back(make_replica(maps::kVisit));
        break;
      case Controller::random_walk:
        break;
    }
    s.robots.push_back(std::move(r));
  }
  return s;
}

namespace detail {

inline void check_invariants(const SimState& s, std::int32_t prev_active,
                             std::uint64_t prev_explored) {
  std::int32_t active = 0;
  for (const RobotState& r : s.robots) {
    if (r.active) ++active;
    if (!is_traversable(s.world, discretize(r.position, s.world.cell_size))) {
      throw std::logic_error("invariant violated: robot on blocked cell");
    }
  }
  if (active > prev_active) {
    throw std::logic_error("invariant violated: active robots increased");
  }
  if (s.coverage.size() < prev_explored) {
    throw std::logic_error("invariant violated: explored cells decreased");
  }
}

}  // namespace detail

// One simulation step, robots in ascending id order: sense, decide, move
// (collisions cancel the offending component), a destruction draw against the
// source field, belief-map writes, then one network flush and a metrics
// record. Failed robots do nothing and acquire nothing.
inline TickReport tick(SimState& s) {
  const SimConfig& cfg = s.config;
  const std::uint64_t t = ++s.tick_index;
  const std::int32_t prev_active = [&] {
    std::int32_t n = 0;
    for (const RobotState& r : s.robots) n += r.active ? 1 : 0;
    return n;
  }();
  const std::uint64_t prev_explored = s.coverage.size();

  TickReport report;
  report.robots.resize(s.robots.size());

  for (RobotState& r : s.robots) {
    RobotTickStats& stats = report.robots[r.id];
    stats.id = r.id;
    stats.acted = r.active;
    if (!r.active) continue;

    ProximityScan scan = sense_proximity(
        s.world, r.position, r.heading, cfg.sensor_range * cfg.cell_size);
    if (cfg.peer_sensing) {
      std::vector<Vec2> peers;
      for (const RobotState& other : s.robots) {
        if (other.id != r.id && other.active) peers.push_back(other.position);
      }
      sense_peers(scan, r.position, r.heading,
                  cfg.sensor_range * cfg.cell_size, peers);
    }
    s.bus.current_sender_pos = r.position / cfg.cell_size;
    const CellCoord cell = discretize(r.position, cfg.cell_size);
    ControlGains gains{cfg.alpha, cfg.beta, cfg.gamma, cfg.k,
                       cfg.stagnation_epsilon};

    if (cfg.controller == Controller::fbe) {
      // occupancy marking: a sensed obstacle box is known terrain and must
      // stop spawning frontiers; source emitters are left unmarked, so the
      // unexplored ground around them keeps its pull
      for (const std::optional<CellCoord>& blocked : scan.blocked_cells) {
        if (blocked && s.world.obstacles.contains(*blocked) &&
            !r.replicas[0].table.contains(pack_cell(*blocked))) {
          vput(r.replicas[0], *blocked, static_cast<double>(t), s.bus);
        }
      }
    }

    MovementCommand cmd;
    switch (cfg.controller) {
      case Controller::dora: {
        DoraContext ctx{cfg.width, cfg.height, t, cfg.omega,
                        cfg.epsilon_mode == "age_ratio" ? EpsilonMode::age_ratio
                        : cfg.epsilon_mode == "raw_time" ? EpsilonMode::raw_time
                                                         : EpsilonMode::info_gain,
                        cfg.unvisited_pull, cfg.detection_floor};
        cmd = dora_step(r.replicas[0], r.replicas[1], s.bus, cell, r.heading,
                        scan.readings, gains, s.neighborhood, ctx);
        break;
      }
      case Controller::fbe:
        cmd = fbe_step(r.replicas[0], s.bus, r.position, cell, r.heading,
                       scan.readings, gains, s.neighborhood, cfg.width,
                       cfg.height, cfg.cell_size);
        break;
      case Controller::random_walk:
        cmd = random_walk_step(r.heading, scan.readings, gains, cfg.p_turn,
                               r.rng);
        break;
    }

    if (r.bump_commit) {
      // keep moving the way the last contact pushed us for one tick; a robot
      // re-aiming at a blocked target every tick would pin in place
      cmd = {Vec2{}, true};
      r.bump_commit = false;
    }

    const auto [target, new_heading] =
        apply_control(r.position, cmd, gains, r.heading);
    const Vec2 before = r.position;
    r.position = resolve_collision(s.world, r.position, target);
    r.heading = new_heading;
    if (r.position.x != target.x || r.position.y != target.y) {
      const Vec2 disp = r.position - before;
      if (norm(disp) > 1e-12) {
        r.heading = std::atan2(disp.y, disp.x);
      } else {
        r.heading += std::numbers::pi / 4.0;  // fully stuck: probe around
      }
      r.bump_commit = true;
    }

    const CellCoord new_cell = discretize(r.position, cfg.cell_size);
    const bool cell_changed = new_cell != r.last_cell;
    // The sensor reading (with measurement noise) is what gets shared; the
    // destruction draw comes from the physical source field, and levels at
    // background (at or below the hazard floor) do not destroy robots.
    const double sensed = total_radiation(s.world, new_cell, cfg.lambda, r.rng);
    const double truth = radiation_truth(s.world, new_cell, cfg.lambda);
    const double hazard =
        truth > cfg.hazard_floor ? std::min(1.0, truth) : 0.0;

    const bool first_entry = r.visited.insert(pack_cell(new_cell)).second;
    bool draw = false;
    switch (cfg.failure_policy) {
      case FailurePolicy::per_first_entry: draw = first_entry; break;
      case FailurePolicy::per_cell_entry: draw = cell_changed; break;
      case FailurePolicy::per_step: draw = true; break;
    }
    if (draw && sample_failure(failure_probability(hazard), r.rng)) {
      r.active = false;
      r.last_cell = new_cell;
      continue;  // destroyed before writing anything this tick
    }
    r.last_cell = new_cell;

    switch (cfg.controller) {
      case Controller::dora:
        vput(r.replicas[0], new_cell, sensed, s.bus);
        vput(r.replicas[1], new_cell, static_cast<double>(t), s.bus);
        break;
      case Controller::fbe:
        vput(r.replicas[0], new_cell, static_cast<double>(t), s.bus);
        break;
      case Controller::random_walk:
        break;
    }
    s.coverage[pack_cell(new_cell)] = {sensed, t, r.id};
  }

  std::vector<ReplicaEndpoint> endpoints;
  for (RobotState& r : s.robots) {
    if (!r.active) continue;
    for (StigmergyReplica& rep : r.replicas) {
      endpoints.push_back({&rep, r.position / cfg.cell_size});
    }
  }
  report.flush = flush(s.bus, endpoints, s.net_rng);

  std::int32_t active = 0;
  std::uint64_t total_bytes = 0;
  std::uint64_t total_ops = 0;
  for (RobotState& r : s.robots) {
    RobotTickStats& stats = report.robots[r.id];
    stats.active_end = r.active;
    if (r.active) ++active;
    for (StigmergyReplica& rep : r.replicas) {
      const OpCounters ops = account(rep);
      stats.reads += ops.reads;
      stats.writes += ops.writes;
      stats.bytes += ops.bytes;
    }
    total_bytes += stats.bytes;
    total_ops += stats.reads + stats.writes;
  }

  const double actors = static_cast<double>(std::max(prev_active, 1));
  report.record = {t, active, s.coverage.size(),
                   static_cast<double>(total_bytes) / actors,
                   static_cast<double>(total_ops) / actors};
  s.trace.push_back(report.record);

  detail::check_invariants(s, prev_active, prev_explored);
  return report;
}

// Full run: init plus `steps` ticks. Bit-deterministic in the config.
inline SimState run(const SimConfig& cfg) {
  SimState s = init_run(cfg);
  for (std::int32_t i = 0; i < cfg.steps; ++i) {
    tick(s);
  }
  return s;
}

struct RunSummary {
  std::uint64_t seed = 0;
  std::int32_t final_active = 0;
  std::uint64_t final_explored = 0;
  double mean_bytes_per_robot_tick = 0.0;
  double mean_ops_per_robot_tick = 0.0;
};

struct AggregateRecord {
  std::uint64_t tick = 0;
  double active_mean = 0, active_std = 0;
  double explored_mean = 0, explored_std = 0;
  double bytes_mean = 0, bytes_std = 0;
  double ops_mean = 0, ops_std = 0;
};

struct BatchResult {
  std::vector<AggregateRecord> per_tick;
  std::vector<RunSummary> runs;  // ordered by seed
};

inline RunSummary summarize(const SimState& s) {
  RunSummary out;
  out.seed = s.config.seed;
  out.final_explored = s.coverage.size();
  for (const RobotState& r : s.robots) out.final_active += r.active ? 1 : 0;
  double bytes = 0, ops = 0;
  for (const MetricsRecord& m : s.trace) {
    bytes += m.bytes_per_robot;
    ops += m.stig_ops_per_robot;
  }
  const double n = static_cast<double>(std::max<std::size_t>(s.trace.size(), 1));
  out.mean_bytes_per_robot_tick = bytes / n;
  out.mean_ops_per_robot_tick = ops / n;
  return out;
}

// n_runs independent runs with seeds seed_base .. seed_base+n_runs-1,
// aggregated per tick (mean and population standard deviation). Runs are
// shared-nothing, so jobs > 1 fans them out to worker threads; results are
// always assembled in seed order.
inline BatchResult batch(const SimConfig& base, int n_runs,
                         std::uint64_t seed_base, int jobs = 1) {
  if (n_runs < 1) throw ConfigError("batch: n_runs must be >= 1");
  std::vector<std::vector<MetricsRecord>> traces(static_cast<std::size_t>(n_runs));
  std::vector<RunSummary> summaries(static_cast<std::size_t>(n_runs));

  auto do_run = [&](int i) {
    SimConfig cfg = base;
    cfg.seed = seed_base + static_cast<std::uint64_t>(i);
    SimState s = run(cfg);
    summaries[static_cast<std::size_t>(i)] = summarize(s);
    traces[static_cast<std::size_t>(i)] = std::move(s.trace);
  };

  if (jobs <= 1) {
    for (int i = 0; i < n_runs; ++i) do_run(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const int workers = std::min(jobs, n_runs);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n_runs; i = next.fetch_add(1)) {
          do_run(i);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  BatchResult out;
  out.runs = std::move(summaries);
  const std::size_t ticks = traces.front().size();
  out.per_tick.resize(ticks);
  const double n = static_cast<double>(n_runs);
  for (std::size_t ti = 0; ti < ticks; ++ti) {
    AggregateRecord& agg = out.per_tick[ti];
    agg.tick = traces.front()[ti].tick;
    auto accumulate = [&](auto get, double& mean, double& stdev) {
      double sum = 0, sum2 = 0;
      for (const auto& trace : traces) {
        const double v = get(trace[ti]);
        sum += v;
        sum2 += v * v;
      }
      mean = sum / n;
      stdev = std::sqrt(std::max(0.0, sum2 / n - mean * mean));
    };
    accumulate([](const MetricsRecord& m) { return double(m.active_robots); },
               agg.active_mean, agg.active_std);
    accumulate([](const MetricsRecord& m) { return double(m.explored_cells); },
               agg.explored_mean, agg.explored_std);
    accumulate([](const MetricsRecord& m) { return m.bytes_per_robot; },
               agg.bytes_mean, agg.bytes_std);
    accumulate([](const MetricsRecord& m) { return m.stig_ops_per_robot; },
               agg.ops_mean, agg.ops_std);
  }
  return out;
}

}  // namespace dora
