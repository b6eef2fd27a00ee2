#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "relay/channel.hpp"
#include "relay/graph.hpp"
#include "relay/problem.hpp"

namespace relay {

struct StaticSets {
    PointSet bs_2cc;          // R(q_BS, 2r_cc)
    PointSet bs_2cc_min;      // R(q_BS, 2r_cc + r_min)
    PointSet n2;              // R(q_BS, 2r_cc, r_cc)
    PointSet bs_relay_min;    // R(q_BS, 2r_cc + r_min, r_cc + r_min)
    PointSet ue_min;          // R(q_UE, r_min)
    PointSet d2;
};

inline StaticSets static_sets(const StaticProblem& p) {
    const LinkTable& L = p.links();
    const double rcc = p.params.r_cc, rmin = p.params.r_min;
    StaticSets s;
    s.bs_2cc = L.reach(p.q_bs, 2 * rcc);
    s.bs_2cc_min = L.reach(p.q_bs, 2 * rcc + rmin);
    s.n2 = L.reach_two_hop(p.q_bs, 2 * rcc, rcc);
    s.bs_relay_min = L.reach_two_hop(p.q_bs, 2 * rcc + rmin, rcc + rmin);
    s.ue_min = L.reach(p.q_ue, rmin);
    s.d2 = s.bs_relay_min & s.ue_min;
    return s;
}

struct Uav2Plan {
    PlanStatus status = PlanStatus::NO_PATH;
    GridPath path;
    bool ok() const { return status == PlanStatus::OK; }
};

// Shortest grid path from `from` to any point of `targets` through `members`.
inline std::optional<GridPath> grid_shortest_path(const GridMap& g, const std::vector<char>& members, PointId from,
                                                  const PointSet& targets) {
    if (!members[static_cast<size_t>(from)]) return std::nullopt;
    GridSubgraph sub(g, members);
    auto res = dijkstra(sub, static_cast<NodeId>(from), [&](NodeId u) { return targets.test(static_cast<PointId>(u)); });
    if (!res) return std::nullopt;
    GridPath out;
    for (NodeId u : res->nodes) out.push_back(static_cast<PointId>(u));
    return out;
}

inline Uav2Plan plan_uav2_static(const StaticProblem& p, const StaticSets& s, const PointSet& destinations) {
    Uav2Plan plan;
    const PointId start = p.Q0.q2;
    if (!s.n2.test(start)) {
        plan.status = PlanStatus::START_OUTSIDE_CANDIDATES;
        return plan;
    }
    if (destinations.empty()) {
        plan.status = PlanStatus::NO_DESTINATION;
        return plan;
    }
    auto path = grid_shortest_path(p.grid(), to_mask(s.n2), start, destinations);
    if (!path) {
        plan.status = PlanStatus::NO_PATH;
        return plan;
    }
    plan.status = PlanStatus::OK;
    plan.path = std::move(*path);
    return plan;
}

inline Uav2Plan plan_uav2_static(const StaticProblem& p) {
    StaticSets s = static_sets(p);
    return plan_uav2_static(p, s, s.d2);
}

// Ascent of the start, shortest path at the lifted level, descent to the original end.
inline std::optional<GridPath> lift_path_static(const StaticProblem& p, const StaticSets& s, const GridPath& path2, int u) {
    if (path2.empty()) return std::nullopt;
    if (u == 0) return path2;
    const GridMap& g = p.grid();
    const PointId first = path2.front(), last = path2.back();
    const int up = std::min(u, g.lifts_to_fixed_point(first));
    const int down = std::min(u, g.lifts_to_fixed_point(last));
    GridPath out;
    for (int i = 0; i < up; ++i) out.push_back(g.lift(first, i));
    PointSet target(g.size());
    target.set(g.lift(last, down));
    auto middle = grid_shortest_path(g, to_mask(s.n2), g.lift(first, up), target);
    if (!middle) return std::nullopt;
    out.insert(out.end(), middle->begin(), middle->end());
    for (int i = down - 1; i >= 0; --i) out.push_back(g.lift(last, i));
    return out;
}

enum class Uav1Cost {
    DISTANCE,     // UAV-1 hop length only
    FLIGHT_TIME,  // advancing edges also pay UAV-2's concurrent hop
};

struct TentativeStatic {
    PlanStatus status = PlanStatus::NO_PATH;
    GridCombinedPath path;
    std::vector<size_t> indices;  // n_i into lifted UAV-2 path
    GridPath uav2;                // Algorithm-1 output
    GridPath lifted_uav2;
    int lifts = 0;
    int waits = 0;
    bool ok() const { return status == PlanStatus::OK; }
    bool strictly_increasing() const {
        for (size_t i = 1; i < indices.size(); ++i)
            if (indices[i] == indices[i - 1]) return false;
        return true;
    }
};

struct Uav1StaticOptions {
    Uav1Cost cost = Uav1Cost::DISTANCE;
};

inline TentativeStatic plan_uav1_static(const StaticProblem& p, const StaticSets& s, const GridPath& path2,
                                        const Uav1StaticOptions& opt = {}) {
    TentativeStatic out;
    out.uav2 = path2;
    if (path2.empty()) return out;
    const GridMap& g = p.grid();
    const LinkTable& L = p.links();
    const double rcc = p.params.r_cc, rmin = p.params.r_min;
    const int max_u = std::max(g.lifts_to_fixed_point(path2.front()), g.lifts_to_fixed_point(path2.back()));
    out.status = PlanStatus::LIFT_EXHAUSTED;
    for (int u = 0; u <= max_u; ++u) {
        auto lifted = lift_path_static(p, s, path2, u);
        if (!lifted) continue;
        const size_t N = lifted->size();
        std::vector<std::vector<PointId>> steps(N);
        for (size_t n = 0; n < N; ++n) steps[n] = (s.bs_2cc & L.reach((*lifted)[n], rcc)).ids();
        PointSet d1 = s.bs_2cc_min & L.reach(lifted->back(), rcc + rmin);
        const GridPath& q2 = *lifted;
        auto weight = [&](size_t n, PointId a, size_t n2, PointId b) {
            const double own = distance(g.position(a), g.position(b));
            if (opt.cost == Uav1Cost::DISTANCE || n2 == n) return own;
            return std::max(own, distance(g.position(q2[n]), g.position(q2[n2])));
        };
        auto xg = build_extended_graph(g, std::move(steps), StepRule::WAIT_ALLOWED, weight);
        const NodeId src = xg.node(0, p.Q0.q1);
        if (src == kNoNode) continue;
        auto res = dijkstra(xg, src, [&](NodeId v) {
            return xg.step_of(v) == N - 1 && d1.test(xg.point_of(v));
        });
        if (!res) continue;
        out.status = PlanStatus::OK;
        out.lifts = u;
        out.lifted_uav2 = *lifted;
        for (NodeId v : res->nodes) {
            const size_t n = xg.step_of(v);
            out.indices.push_back(n);
            out.path.push_back({xg.point_of(v), q2[n]});
        }
        for (size_t i = 1; i < out.indices.size(); ++i)
            if (out.indices[i] == out.indices[i - 1]) ++out.waits;
        return out;
    }
    return out;
}

inline TentativeStatic plan_tentative_static(const StaticProblem& p, const Uav1StaticOptions& opt = {}) {
    StaticSets s = static_sets(p);
    Uav2Plan u2 = plan_uav2_static(p, s, s.d2);
    if (!u2.ok()) {
        TentativeStatic t;
        t.status = u2.status;
        return t;
    }
    return plan_uav1_static(p, s, u2.path, opt);
}

inline Chain2 grid_chain(const StaticProblem& p, const GridCP& cp) {
    const LinkTable& L = p.links();
    const auto bs = L.anchor_row(p.q_bs);
    const auto ue = L.anchor_row(p.q_ue);
    return chain2((*bs)[static_cast<size_t>(cp.q1)], L.between(cp.q1, cp.q2), (*ue)[static_cast<size_t>(cp.q2)], p.params.r_cc);
}

inline bool check_validity_static(const StaticProblem& p, const CombinedPath& path) {
    if (path.empty()) return false;
    RelayChainParams rp{p.params.r_cc, p.params.r_min, static_cast<int>(path.front().size())};
    bool reached = false;
    for (const auto& Q : path) {
        ChainRates c = relay_chain_rates(p.channel(), rp, Q, p.q_bs, p.q_ue);
        for (double r : c.r)
            if (r < p.params.r_cc) return false;
        if (c.r_ue >= p.params.r_min) reached = true;
    }
    return reached;
}

// Prefix ending at the first waypoint that serves the UE at r_min; unchanged when none does.
inline GridCombinedPath truncate_at_target(const StaticProblem& p, const GridCombinedPath& path) {
    for (size_t i = 0; i < path.size(); ++i)
        if (grid_chain(p, path[i]).r_ue >= p.params.r_min) return {path.begin(), path.begin() + static_cast<long>(i) + 1};
    return path;
}

struct ConnectionBound {
    bool hypotheses = false;
    double z = 0.0;       // construction altitude
    double d = 0.0;       // BS-UE horizontal distance
    double t_bound = 0.0; // (z - z_BS + d) / v_max
};

// Under the LOS map: tallest obstacle below the construction altitude, horizontal range within
// c^-1(r_min + r_cc), and a cruise altitude `h_cruise` the construction can fly at (h < h_cruise <= z).
inline ConnectionBound check_connection_bound(const StaticProblem& p, double h_cruise) {
    const LinkBudget& b = p.channel().budget();
    const double rcc = p.params.r_cc, rmin = p.params.r_min;
    ConnectionBound out;
    out.z = std::min(p.q_ue.z + capacity_inverse(b, rmin), p.q_bs.z + capacity_inverse(b, rmin + 2 * rcc));
    out.d = horizontal_distance(p.q_bs, p.q_ue);
    out.t_bound = (out.z - p.q_bs.z + out.d) / p.params.v_max;
    const double h = p.world->env.max_height();
    out.hypotheses = p.channel().mode() == ChannelMode::LOS_MAP && h < out.z && out.d <= capacity_inverse(b, rmin + rcc) &&
                     h < h_cruise && h_cruise <= out.z;
    return out;
}

inline bool check_validity_hypotheses(const StaticProblem& p) {
    const LinkBudget& b = p.channel().budget();
    const double rcc = p.params.r_cc, rmin = p.params.r_min;
    const double a = capacity_inverse(b, 2 * rcc), c = capacity_inverse(b, 2 * rcc + rmin);
    return p.channel().mode() == ChannelMode::LOS_MAP && rmin >= 4 * rcc && p.grid().h_max() <= std::sqrt(a * a - c * c) &&
           p.Q0.q1 == p.Q0.q2;
}

}  // namespace relay
