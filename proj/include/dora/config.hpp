#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dora/errors.hpp"
#include "dora/risk.hpp"

namespace dora {

enum class Controller { dora, fbe, random_walk };

inline std::string to_string(Controller c) {
  switch (c) {
    case Controller::dora: return "dora";
    case Controller::fbe: return "fbe";
    case Controller::random_walk: return "random";
  }
  return "dora";
}

inline std::string to_string(FailurePolicy p) {
  switch (p) {
    case FailurePolicy::per_first_entry: return "per_first_entry";
    case FailurePolicy::per_cell_entry: return "per_cell_entry";
    case FailurePolicy::per_step: return "per_step";
  }
  return "per_first_entry";
}

// Every knob of a simulation run. Defaults reproduce the 20m x 20m survey
// setup; see preset() for the named variants.
struct SimConfig {
  std::int32_t width = 20;   // cells
  std::int32_t height = 20;  // cells
  double cell_size = 1.0;    // meters per cell
  std::int32_t robots = 20;
  std::int32_t sources = 2;
  std::int32_t obstacles = 5;
  double obstacle_size = 0.8;  // meters, square side
  double lambda = 5.0;         // radiation decay constant
  double background_sigma = 0.05;
  double alpha = 2.0;
  double beta = 1.0;
  double gamma = 1.0;
  double k = 0.2;       // meters per tick
  double omega = 0.1;  // information-gain rate per step
  double p_turn = 1.0;  // random-walk turn probability per tick
  double drop_probability = 0.0;
  FailurePolicy failure_policy = FailurePolicy::per_step;
  std::int32_t steps = 300;
  std::uint64_t seed = 1;
  Controller controller = Controller::dora;
  std::int32_t message_bytes = 20;
  std::int32_t flush_rounds = 4;
  double stagnation_epsilon = 1e-3;
  std::string epsilon_mode = "info_gain";  // info_gain | age_ratio | raw_time
  double detection_floor = 0.07;  // control reads below this are background
  double hazard_floor = 0.03;    // field levels below this never destroy robots
  double comm_radius = 0.0;   // cells; 0 = full-swarm broadcast
  double sensor_range = 0.8;  // cells (scales with cell_size in meters)
  bool sources_block = true;   // sources are physical bodies (impassable)
  bool unvisited_pull = true;  // never-visited cells attract the explorer
  bool peer_sensing = true;    // proximity sensors also register other robots
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw ConfigError("invalid number for key '" + key + "': " + v);
  }
  return x;
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const std::int64_t x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw ConfigError("invalid integer for key '" + key + "': " + v);
  }
  return x;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const std::uint64_t x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || v.front() == '-' || end != v.c_str() + v.size()) {
    throw ConfigError("invalid unsigned integer for key '" + key + "': " + v);
  }
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("invalid boolean for key '" + key + "': " + v);
}

}  // namespace detail

inline Controller parse_controller(const std::string& v) {
  if (v == "dora") return Controller::dora;
  if (v == "fbe") return Controller::fbe;
  if (v == "random") return Controller::random_walk;
  throw ConfigError("unknown controller '" + v + "' (expected dora|fbe|random)");
}

inline FailurePolicy parse_failure_policy(const std::string& v) {
  if (v == "per_first_entry") return FailurePolicy::per_first_entry;
  if (v == "per_cell_entry") return FailurePolicy::per_cell_entry;
  if (v == "per_step") return FailurePolicy::per_step;
  throw ConfigError("unknown failure_policy '" + v +
                    "' (expected per_first_entry|per_cell_entry|per_step)");
}

// Set one key. Throws ConfigError naming the key on unknown keys or bad values.
inline void apply_key(SimConfig& cfg, const std::string& key,
                      const std::string& value) {
  using namespace detail;
  if (key == "width") cfg.width = static_cast<std::int32_t>(parse_int(key, value));
  else if (key == "height") cfg.height = static_cast<std::int32_t>(parse_int(key, value));
  else if (key == "cell_size") cfg.cell_size = parse_double(key, value);
  else if (key == "robots") cfg.robots = static_cast<std::int32_t>(parse_int(key, value));
  else if (key == "sources") cfg.sources = static_cast<std::int32_t>(parse_int(key, value));
  else if (key == "obstacles") cfg.obstacles = static_cast<std::int32_t>(parse_int(key, value));
  else if (key == "obstacle_size") cfg.obstacle_size = parse_double(key, value);
  else if (key == "lambda") cfg.lambda = parse_double(key, value);
  else if (key == "background_sigma") cfg.background_sigma = parse_double(key, value);
  else if (key == "alpha") cfg.alpha = parse_double(key, value);
  else if (key == "beta") cfg.beta = parse_double(key, value);
  else if (key == "gamma") cfg.gamma = parse_double(key, value);
  else if (key == "k") cfg.k = parse_double(key, value);
  else if (key == "omega") cfg.omega = parse_double(key, value);
  else if (key == "p_turn") cfg.p_turn = parse_double(key, value);
  else if (key == "drop_probability") cfg.drop_probability = parse_double(key, value);
  else if (key == "failure_policy") cfg.failure_policy = parse_failure_policy(value);
  else if (key == "steps") cfg.steps = static_cast<std::int32_t>(parse_int(key, value));
  else if (key == "seed") cfg.seed = parse_uint(key, value);
  else if (key == "controller") cfg.controller = parse_controller(value);
  else if (key == "message_bytes") cfg.message_bytes = static_cast<std::int32_t>(parse_int(key, value));
  else if (key == "flush_rounds") cfg.flush_rounds = static_cast<std::int32_t>(parse_int(key, value));
  else if (key == "stagnation_epsilon") cfg.stagnation_epsilon = parse_double(key, value);
  else if (key == "detection_floor") cfg.detection_floor = parse_double(key, value);
  else if (key == "hazard_floor") cfg.hazard_floor = parse_double(key, value);
  else if (key == "epsilon_mode") {
    if (value != "info_gain" && value != "age_ratio" && value != "raw_time") {
      throw ConfigError("unknown epsilon_mode '" + value +
                        "' (expected info_gain|age_ratio|raw_time)");
    }
    cfg.epsilon_mode = value;
  }
  else if (key == "comm_radius") cfg.comm_radius = parse_double(key, value);
  else if (key == "sensor_range") cfg.sensor_range = parse_double(key, value);
  else if (key == "sources_block") cfg.sources_block = parse_bool(key, value);
  else if (key == "unvisited_pull") cfg.unvisited_pull = parse_bool(key, value);
  else if (key == "peer_sensing") cfg.peer_sensing = parse_bool(key, value);
  else throw ConfigError("unknown key '" + key + "'");
}

// Flat key=value text. '#' lines are comments, [section] markers are
// tolerated and ignored, anything else must be key=value.
inline void parse_config_text(SimConfig& cfg, const std::string& text) {
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string line = detail::trim(
        text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos));
    ++line_no;
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[' && line.back() == ']') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key=value, got '" + line + "'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    try {
      apply_key(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

// Named configurations shipped with the tool.
//   sim20: 20x20 m survey arena, 2 sources, 5 obstacles, 20 robots, 300 steps.
//   arena: 2x2 m physical-style arena as a 10x10 grid, 1 source, 3 robots,
//          200 steps; step length scales with the finer cells.
inline void apply_preset(SimConfig& cfg, const std::string& name) {
  if (name == "sim20") {
    cfg = SimConfig{};  // the defaults
  } else if (name == "arena") {
    cfg = SimConfig{};
    cfg.width = 10;
    cfg.height = 10;
    cfg.cell_size = 0.2;
    cfg.robots = 3;
    cfg.sources = 1;
    cfg.obstacles = 0;
    cfg.steps = 200;
    cfg.k = 0.04;  // same 0.2 cells/tick as sim20
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected sim20|arena)");
  }
}

inline void validate_config(const SimConfig& cfg) {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("invalid " + key + ": " + why);
  };
  if (cfg.width < 1) fail("width", "must be >= 1");
  if (cfg.height < 1) fail("height", "must be >= 1");
  if (cfg.cell_size <= 0.0) fail("cell_size", "must be > 0");
  if (cfg.robots < 0) fail("robots", "must be >= 0");
  if (cfg.sources < 0) fail("sources", "must be >= 0");
  if (cfg.obstacles < 0) fail("obstacles", "must be >= 0");
  if (cfg.obstacle_size <= 0.0) fail("obstacle_size", "must be > 0");
  if (cfg.lambda < 0.0) fail("lambda", "must be >= 0");
  if (cfg.background_sigma < 0.0) fail("background_sigma", "must be >= 0");
  if (cfg.alpha < 0.0) fail("alpha", "must be >= 0");
  if (cfg.beta < 0.0) fail("beta", "must be >= 0");
  if (cfg.gamma < 0.0) fail("gamma", "must be >= 0");
  if (cfg.k <= 0.0) fail("k", "must be > 0");
  if (cfg.omega <= 0.0) fail("omega", "must be > 0");
  if (cfg.p_turn < 0.0 || cfg.p_turn > 1.0) fail("p_turn", "must be in [0, 1]");
  if (cfg.drop_probability < 0.0 || cfg.drop_probability > 1.0) {
    fail("drop_probability", "must be in [0, 1]");
  }
  if (cfg.steps < 1) fail("steps", "must be >= 1");
  if (cfg.message_bytes < 0) fail("message_bytes", "must be >= 0");
  if (cfg.flush_rounds < 1) fail("flush_rounds", "must be >= 1");
  if (cfg.stagnation_epsilon < 0.0) fail("stagnation_epsilon", "must be >= 0");
  if (cfg.detection_floor < 0.0) fail("detection_floor", "must be >= 0");
  if (cfg.hazard_floor < 0.0) fail("hazard_floor", "must be >= 0");
  if (cfg.comm_radius < 0.0) fail("comm_radius", "must be >= 0");
  if (cfg.sensor_range < 0.0) fail("sensor_range", "must be >= 0");
}

// Key/value view of a config, keys sorted, values formatted so the echo
// parses back to the identical config.
inline std::vector<std::pair<std::string, std::string>> config_to_kv(
    const SimConfig& cfg) {
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  std::map<std::string, std::string> kv;
  kv["width"] = std::to_string(cfg.width);
  kv["height"] = std::to_string(cfg.height);
  kv["cell_size"] = num(cfg.cell_size);
  kv["robots"] = std::to_string(cfg.robots);
  kv["sources"] = std::to_string(cfg.sources);
  kv["obstacles"] = std::to_string(cfg.obstacles);
  kv["obstacle_size"] = num(cfg.obstacle_size);
  kv["lambda"] = num(cfg.lambda);
  kv["background_sigma"] = num(cfg.background_sigma);
  kv["alpha"] = num(cfg.alpha);
  kv["beta"] = num(cfg.beta);
  kv["gamma"] = num(cfg.gamma);
  kv["k"] = num(cfg.k);
  kv["omega"] = num(cfg.omega);
  kv["p_turn"] = num(cfg.p_turn);
  kv["drop_probability"] = num(cfg.drop_probability);
  kv["failure_policy"] = to_string(cfg.failure_policy);
  kv["steps"] = std::to_string(cfg.steps);
  kv["seed"] = std::to_string(cfg.seed);
  kv["controller"] = to_string(cfg.controller);
  kv["message_bytes"] = std::to_string(cfg.message_bytes);
  kv["flush_rounds"] = std::to_string(cfg.flush_rounds);
  kv["stagnation_epsilon"] = num(cfg.stagnation_epsilon);
  kv["epsilon_mode"] = cfg.epsilon_mode;
  kv["detection_floor"] = num(cfg.detection_floor);
  kv["hazard_floor"] = num(cfg.hazard_floor);
  kv["comm_radius"] = num(cfg.comm_radius);
  kv["sensor_range"] = num(cfg.sensor_range);
  kv["sources_block"] = cfg.sources_block ? "true" : "false";
  kv["unvisited_pull"] = cfg.unvisited_pull ? "true" : "false";
  kv["peer_sensing"] = cfg.peer_sensing ? "true" : "false";
  return {kv.begin(), kv.end()};
}

inline std::string config_to_string(const SimConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_to_kv(cfg)) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

}  // namespace dora
