#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "relay/channel.hpp"
#include "relay/env.hpp"
#include "relay/graph.hpp"

namespace relay {

// Immutable bundle shared by every planner working on one environment.
struct World {
    Environment env;
    FlightGrid grid_spec;
    std::unique_ptr<GridMap> grid;
    std::unique_ptr<ChannelModel> channel;
    std::unique_ptr<LinkTable> links;
};

// c_zero left at 0 is derived from the grid spacing.
inline std::shared_ptr<const World> make_world(Environment env, const FlightGrid& grid, LinkBudget budget, ChannelMode mode) {
    env.validate();
    auto w = std::make_shared<World>();
    w->env = std::move(env);
    w->grid_spec = grid;
    w->grid = std::make_unique<GridMap>(grid, w->env);
    if (w->grid->size() == 0) throw std::invalid_argument("flight grid has no free points");
    if (budget.c_zero <= 0.0) budget.set_c_zero_for_spacing(grid.min_spacing());
    w->channel = std::make_unique<ChannelModel>(budget, mode, w->env);
    w->links = std::make_unique<LinkTable>(*w->channel, *w->grid);
    return w;
}

using ConfigPoint = std::vector<Position>;  // column k is UAV k+1
using CombinedPath = std::vector<ConfigPoint>;

struct GridCP {
    PointId q1 = kNoPoint;
    PointId q2 = kNoPoint;
    friend bool operator==(const GridCP&, const GridCP&) = default;
    friend auto operator<=>(const GridCP&, const GridCP&) = default;
};
using GridPath = std::vector<PointId>;
using GridCombinedPath = std::vector<GridCP>;

inline ConfigPoint to_config(const GridMap& g, const GridCP& cp) { return {g.position(cp.q1), g.position(cp.q2)}; }
inline CombinedPath to_positions(const GridMap& g, const GridCombinedPath& path) {
    CombinedPath out;
    out.reserve(path.size());
    for (const auto& cp : path) out.push_back(to_config(g, cp));
    return out;
}

struct RelayParams {
    double r_cc = 200e3;
    double r_min = 90e6;
    double v_max = 7.0;
};

struct StaticProblem {
    std::shared_ptr<const World> world;
    RelayParams params;
    Position q_bs;
    Position q_ue;
    GridCP Q0;

    const GridMap& grid() const { return *world->grid; }
    const LinkTable& links() const { return *world->links; }
    const ChannelModel& channel() const { return *world->channel; }
};

struct UeTrajectory {
    double tau = 1.0;
    std::vector<Position> positions;
    size_t size() const { return positions.size(); }
    // Piecewise-linear position; held constant after the last sample.
    Position at(double t) const {
        if (positions.empty()) throw std::logic_error("empty UE trajectory");
        if (t <= 0.0) return positions.front();
        const double s = t / tau;
        const auto n = static_cast<size_t>(s);
        if (n + 1 >= positions.size()) return positions.back();
        return lerp(positions[n], positions[n + 1], s - static_cast<double>(n));
    }
};

struct MovingProblem {
    std::shared_ptr<const World> world;
    RelayParams params;
    double tau = 1.0;
    double w_p = 0.0;  // 0 selects 10 * N_UE
    Position q_bs;
    GridCP Q0;
    UeTrajectory ue;

    const GridMap& grid() const { return *world->grid; }
    const LinkTable& links() const { return *world->links; }
    const ChannelModel& channel() const { return *world->channel; }
    size_t steps() const { return ue.size(); }
    double penalty() const { return w_p > 0.0 ? w_p : 10.0 * static_cast<double>(ue.size()); }
};

// Lowest flight-grid point in the BS column: the shared take-off location.
inline PointId takeoff_point(const GridMap& g, const Position& q_bs) {
    const FlightGrid& fg = g.grid();
    GridIndex c = fg.nearest_index(q_bs);
    for (int iz = 0; iz < fg.n_z; ++iz) {
        PointId id = g.at({c.ix, c.iy, iz});
        if (id != kNoPoint) return id;
    }
    throw std::invalid_argument("no flight-grid point above the base station");
}

inline double max_hop_length(const FlightGrid& g) {
    return std::sqrt(g.dx * g.dx + g.dy * g.dy + g.dz * g.dz);
}

enum class PlanStatus {
    OK,
    START_OUTSIDE_CANDIDATES,
    NO_DESTINATION,
    NO_PATH,
    LIFT_EXHAUSTED,
};

inline const char* to_string(PlanStatus s) {
    switch (s) {
        case PlanStatus::OK: return "ok";
        case PlanStatus::START_OUTSIDE_CANDIDATES: return "start_outside_candidates";
        case PlanStatus::NO_DESTINATION: return "no_destination";
        case PlanStatus::NO_PATH: return "no_path";
        case PlanStatus::LIFT_EXHAUSTED: return "lift_exhausted";
    }
    return "unknown";
}

inline std::vector<char> to_mask(const PointSet& s) {
    std::vector<char> m(s.universe(), 0);
    s.for_each([&](PointId i) { m[static_cast<size_t>(i)] = 1; });
    return m;
}

}  // namespace relay
