#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "relay/geometry.hpp"

namespace relay {

struct Building {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
    double height = 0.0;

    // Open box; the solid extends below the ground so ground-level links are blocked too.
    bool contains_strict(const Position& p) const {
        return p.x > x_min && p.x < x_max && p.y > y_min && p.y < y_max && p.z < height;
    }
    friend bool operator==(const Building&, const Building&) = default;
};

struct Region {
    Position lo;
    Position hi;
    bool contains(const Position& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
    }
    friend bool operator==(const Region&, const Region&) = default;
};

class Environment {
public:
    Region region;
    std::vector<Building> buildings;

    Environment() = default;
    Environment(Region r, std::vector<Building> b) : region(r), buildings(std::move(b)) { validate(); }

    void validate() const {
        if (!(region.lo.x < region.hi.x && region.lo.y < region.hi.y && region.lo.z < region.hi.z))
            throw std::invalid_argument("degenerate region");
        for (const auto& b : buildings) {
            if (!(b.x_min < b.x_max && b.y_min < b.y_max && b.height > 0.0))
                throw std::invalid_argument("degenerate building");
            if (b.x_min < region.lo.x || b.x_max > region.hi.x || b.y_min < region.lo.y || b.y_max > region.hi.y)
                throw std::invalid_argument("building footprint outside region");
        }
    }

    bool inside_building(const Position& p) const {
        return std::any_of(buildings.begin(), buildings.end(), [&](const Building& b) { return b.contains_strict(p); });
    }
    bool in_free_space(const Position& p) const { return p.z >= 0.0 && !inside_building(p); }

    double max_height() const {
        double h = 0.0;
        for (const auto& b : buildings) h = std::max(h, b.height);
        return h;
    }
};

namespace detail {

// Parameter interval (t0, t1) of the segment a + t(b - a), t in [0,1], strictly inside the box.
// Empty when t1 <= t0.
inline std::pair<double, double> open_chord(const Building& box, const Position& a, const Position& b) {
    double t0 = 0.0;
    double t1 = 1.0;
    auto slab = [&](double pa, double d, double lo, double hi) {
        if (d == 0.0) {
            if (!(pa > lo && pa < hi)) t1 = -1.0;
            return;
        }
        double u = (lo - pa) / d;
        double v = (hi - pa) / d;
        if (u > v) std::swap(u, v);
        t0 = std::max(t0, u);
        t1 = std::min(t1, v);
    };
    slab(a.x, b.x - a.x, box.x_min, box.x_max);
    if (t1 <= t0) return {0.0, 0.0};
    slab(a.y, b.y - a.y, box.y_min, box.y_max);
    if (t1 <= t0) return {0.0, 0.0};
    slab(a.z, b.z - a.z, -kInf, box.height);
    if (t1 <= t0) return {0.0, 0.0};
    return {t0, t1};
}

// Both directions of a segment evaluate with identical arithmetic.
inline std::pair<Position, Position> canonical(const Position& a, const Position& b) {
    return (b < a) ? std::pair{b, a} : std::pair{a, b};
}

inline void require_free_endpoints(const Environment& env, const Position& a, const Position& b) {
    if (env.inside_building(a) || env.inside_building(b))
        throw std::invalid_argument("segment endpoint inside a building");
}

}  // namespace detail

inline bool line_of_sight(const Environment& env, const Position& a, const Position& b) {
    detail::require_free_endpoints(env, a, b);
    auto [p, q] = detail::canonical(a, b);
    for (const auto& box : env.buildings) {
        if (p.z >= box.height && q.z >= box.height) continue;
        auto [t0, t1] = detail::open_chord(box, p, q);
        if (t1 > t0) return false;
    }
    return true;
}

inline double segment_inside_length(const Environment& env, const Position& a, const Position& b) {
    auto [p, q] = detail::canonical(a, b);
    const double len = distance(p, q);
    // Union of the per-box chords, so overlapping footprints are not counted twice.
    std::vector<std::pair<double, double>> chords;
    for (const auto& box : env.buildings) {
        if (p.z >= box.height && q.z >= box.height) continue;
        auto c = detail::open_chord(box, p, q);
        if (c.second > c.first) chords.push_back(c);
    }
    std::sort(chords.begin(), chords.end());
    double total = 0.0, hi = -kInf;
    for (const auto& [t0, t1] : chords) {
        const double lo = std::max(t0, hi);
        if (t1 > lo) total += t1 - lo;
        hi = std::max(hi, t1);
    }
    return total * len;
}

struct FlightGrid {
    Position origin;
    int n_x = 1;
    int n_y = 1;
    int n_z = 1;
    double dx = 1.0;
    double dy = 1.0;
    double dz = 1.0;
    double z_min = -kInf;
    double z_max = kInf;

    void validate() const {
        if (n_x <= 0 || n_y <= 0 || n_z <= 0) throw std::invalid_argument("grid counts must be positive");
        if (!(dx > 0.0 && dy > 0.0 && dz > 0.0)) throw std::invalid_argument("grid spacings must be positive");
    }
    Position lattice(int ix, int iy, int iz) const {
        return {origin.x + ix * dx, origin.y + iy * dy, origin.z + iz * dz};
    }
    double level_z(int iz) const { return origin.z + iz * dz; }
    double min_spacing() const { return std::min({dx, dy, dz}); }
    // Nearest lattice index, without bounds or membership checks.
    GridIndex nearest_index(const Position& p) const {
        return {static_cast<int>(std::lround((p.x - origin.x) / dx)), static_cast<int>(std::lround((p.y - origin.y) / dy)),
                static_cast<int>(std::lround((p.z - origin.z) / dz))};
    }
};

inline bool lattice_point_allowed(const FlightGrid& grid, const Environment& env, const Position& p) {
    const double eps = 1e-9 * std::max(1.0, std::abs(p.z));
    return p.z >= grid.z_min - eps && p.z <= grid.z_max + eps && !env.inside_building(p);
}

// Ordered x-major, then y, then z.
inline std::vector<Position> grid_points(const FlightGrid& grid, const Environment& env) {
    grid.validate();
    std::vector<Position> out;
    for (int ix = 0; ix < grid.n_x; ++ix)
        for (int iy = 0; iy < grid.n_y; ++iy)
            for (int iz = 0; iz < grid.n_z; ++iz) {
                Position p = grid.lattice(ix, iy, iz);
                if (lattice_point_allowed(grid, env, p)) out.push_back(p);
            }
    return out;
}

inline bool adjacent(const FlightGrid& grid, const Position& a, const Position& b) {
    GridIndex ia = grid.nearest_index(a);
    GridIndex ib = grid.nearest_index(b);
    if (ia == ib) return false;
    return std::abs(ia.ix - ib.ix) <= 1 && std::abs(ia.iy - ib.iy) <= 1 && std::abs(ia.iz - ib.iz) <= 1;
}

using PointId = std::int32_t;
inline constexpr PointId kNoPoint = -1;

// Indexed flight grid: dense ids in grid_points order, 26-neighbour lists, lift operator.
class GridMap {
public:
    GridMap(const FlightGrid& grid, const Environment& env) : grid_(grid) {
        grid.validate();
        lookup_.assign(static_cast<size_t>(grid.n_x) * grid.n_y * grid.n_z, kNoPoint);
        for (int ix = 0; ix < grid.n_x; ++ix)
            for (int iy = 0; iy < grid.n_y; ++iy)
                for (int iz = 0; iz < grid.n_z; ++iz) {
                    Position p = grid.lattice(ix, iy, iz);
                    if (!lattice_point_allowed(grid, env, p)) continue;
                    lookup_[flat(ix, iy, iz)] = static_cast<PointId>(points_.size());
                    points_.push_back(p);
                    index_.push_back({ix, iy, iz});
                }
        neighbors_.resize(points_.size());
        for (size_t id = 0; id < points_.size(); ++id) {
            const GridIndex g = index_[id];
            for (int ox = -1; ox <= 1; ++ox)
                for (int oy = -1; oy <= 1; ++oy)
                    for (int oz = -1; oz <= 1; ++oz) {
                        if (ox == 0 && oy == 0 && oz == 0) continue;
                        PointId n = at({g.ix + ox, g.iy + oy, g.iz + oz});
                        if (n != kNoPoint) neighbors_[id].push_back(n);
                    }
        }
        const double tallest = env.max_height();
        top_level_ = grid.n_z - 1;
        for (int iz = 0; iz < grid.n_z; ++iz)
            if (grid.level_z(iz) > tallest) {
                top_level_ = iz;
                break;
            }
    }

    const FlightGrid& grid() const { return grid_; }
    size_t size() const { return points_.size(); }
    const Position& position(PointId id) const { return points_[static_cast<size_t>(id)]; }
    const std::vector<Position>& positions() const { return points_; }
    const GridIndex& index(PointId id) const { return index_[static_cast<size_t>(id)]; }
    const std::vector<PointId>& neighbors(PointId id) const { return neighbors_[static_cast<size_t>(id)]; }

    PointId at(const GridIndex& g) const {
        if (g.ix < 0 || g.iy < 0 || g.iz < 0 || g.ix >= grid_.n_x || g.iy >= grid_.n_y || g.iz >= grid_.n_z) return kNoPoint;
        return lookup_[flat(g.ix, g.iy, g.iz)];
    }
    // Grid point coinciding with p (within 1e-6 m), if any.
    PointId find(const Position& p) const {
        PointId id = at(grid_.nearest_index(p));
        if (id == kNoPoint || distance(points_[static_cast<size_t>(id)], p) > 1e-6) return kNoPoint;
        return id;
    }

    bool adjacent(PointId a, PointId b) const {
        const GridIndex& ia = index(a);
        const GridIndex& ib = index(b);
        return a != b && std::abs(ia.ix - ib.ix) <= 1 && std::abs(ia.iy - ib.iy) <= 1 && std::abs(ia.iz - ib.iz) <= 1;
    }
    bool adjacent_or_same(PointId a, PointId b) const { return a == b || adjacent(a, b); }

    // Lowest level strictly above every obstacle (the top level when none is).
    int top_level() const { return top_level_; }
    double h_max() const { return grid_.level_z(top_level_); }

    PointId lift(PointId id) const {
        const GridIndex& g = index(id);
        if (g.iz + 1 > top_level_) return id;
        PointId up = at({g.ix, g.iy, g.iz + 1});
        return up == kNoPoint ? id : up;
    }
    PointId lift(PointId id, int times) const {
        for (int i = 0; i < times; ++i) id = lift(id);
        return id;
    }
    int lifts_to_fixed_point(PointId id) const {
        int n = 0;
        for (PointId next = lift(id); next != id; next = lift(id)) {
            id = next;
            ++n;
        }
        return n;
    }

private:
    size_t flat(int ix, int iy, int iz) const {
        return (static_cast<size_t>(ix) * grid_.n_y + static_cast<size_t>(iy)) * grid_.n_z + static_cast<size_t>(iz);
    }

    FlightGrid grid_;
    std::vector<Position> points_;
    std::vector<GridIndex> index_;
    std::vector<PointId> lookup_;
    std::vector<std::vector<PointId>> neighbors_;
    int top_level_ = 0;
};

}  // namespace relay
