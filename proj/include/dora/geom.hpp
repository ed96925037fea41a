#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace dora {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
  friend Vec2 operator/(Vec2 v, double s) { return {v.x / s, v.y / s}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

// Rotate by angle (radians, counterclockwise).
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {v.x * c - v.y * s, v.x * s + v.y * c};
}

// Integer grid cell index.
struct CellCoord {
  std::int32_t x = 0;
  std::int32_t y = 0;
  friend auto operator<=>(const CellCoord&, const CellCoord&) = default;
};

inline Vec2 to_vec(CellCoord c) {
  return {static_cast<double>(c.x), static_cast<double>(c.y)};
}

inline Vec2 cell_center(CellCoord c, double cell_size) {
  return {(c.x + 0.5) * cell_size, (c.y + 0.5) * cell_size};
}

// A cell keys a stigmergy entry as the concatenation of its x and y indices.
inline constexpr std::uint64_t pack_cell(CellCoord c) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.y));
}

inline constexpr CellCoord unpack_cell(std::uint64_t key) {
  return {static_cast<std::int32_t>(static_cast<std::uint32_t>(key >> 32)),
          static_cast<std::int32_t>(static_cast<std::uint32_t>(key))};
}

}  // namespace dora
