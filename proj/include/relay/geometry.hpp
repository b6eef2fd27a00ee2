#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>

namespace relay {

struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Position operator+(const Position& a, const Position& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Position operator-(const Position& a, const Position& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Position operator*(double s, const Position& a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Position&, const Position&) = default;
    friend auto operator<=>(const Position&, const Position&) = default;
};

inline double dot(const Position& a, const Position& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Position& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Position& a, const Position& b) { return norm(a - b); }
inline double horizontal_distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline bool finite(const Position& p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

// a + s (b - a)
inline Position lerp(const Position& a, const Position& b, double s) {
    return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), a.z + s * (b.z - a.z)};
}

struct GridIndex {
    int ix = 0;
    int iy = 0;
    int iz = 0;
    friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace relay
