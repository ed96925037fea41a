#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

#include "dora/rng.hpp"

namespace dora {

// When the robot-destruction Bernoulli draw happens.
enum class FailurePolicy {
  per_first_entry,  // when a robot enters a cell it never visited (default)
  per_cell_entry,   // on each change of the discretized cell
  per_step,         // every tick; the harshest reading
};

// Failure chance from the sensed total radiation: a Bernoulli parameter,
// clamped to [0, 1].
inline double failure_probability(double radiation) {
  if (radiation < 0.0) {
    throw std::invalid_argument("failure_probability: radiation must be >= 0");
  }
  return std::min(radiation, 1.0);
}

// Alternative combination rule treating sources independently: the product of
// per-source Bernoulli parameters. Not used in the simulation loop (the loop
// draws from the sensed total), provided for comparison studies.
inline double failure_probability_product(std::span<const double> per_source) {
  double p = 1.0;
  for (double r : per_source) {
    p *= std::clamp(r, 0.0, 1.0);
  }
  return per_source.empty() ? 0.0 : p;
}

// One Bernoulli draw; consumes exactly one sample from the stream.
inline bool sample_failure(double p, RandomStream& rng) {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("sample_failure: p must be in [0, 1]");
  }
  return rng.uniform01() < p;
}

struct InfoModelParams {
  double omega = 0.01;  // rate per step, > 0
};

// Probability of finding useful information in a cell last visited delta_t
// steps ago: 1 - min(1, omega * exp(-omega * delta_t)). A never-visited or
// long-unvisited cell approaches 1; a just-visited cell with omega = 1 gives
// exactly 0. Negative delta_t falls in the density's zero branch, so the
// probability is 1.
inline double info_gain_probability(double delta_t, InfoModelParams params) {
  if (params.omega <= 0.0) {
    throw std::invalid_argument("info_gain_probability: omega must be > 0");
  }
  if (delta_t < 0.0) return 1.0;
  const double density = params.omega * std::exp(-params.omega * delta_t);
  return 1.0 - std::min(1.0, density);
}

}  // namespace dora
