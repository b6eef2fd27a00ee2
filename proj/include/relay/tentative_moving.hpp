#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "relay/graph.hpp"
#include "relay/problem.hpp"
#include "relay/tentative_static.hpp"

namespace relay {

struct MovingSets {
    PointSet bs_2cc;
    PointSet bs_2cc_min;
    PointSet n2;
    PointSet bs_relay_min;
    std::vector<PointSet> d2;  // per step
};

inline MovingSets moving_sets(const MovingProblem& p) {
    const LinkTable& L = p.links();
    const double rcc = p.params.r_cc, rmin = p.params.r_min;
    MovingSets s;
    s.bs_2cc = L.reach(p.q_bs, 2 * rcc);
    s.bs_2cc_min = L.reach(p.q_bs, 2 * rcc + rmin);
    s.n2 = L.reach_two_hop(p.q_bs, 2 * rcc, rcc);
    s.bs_relay_min = L.reach_two_hop(p.q_bs, 2 * rcc + rmin, rcc + rmin);
    s.d2.reserve(p.steps());
    for (const auto& u : p.ue.positions) s.d2.push_back(s.bs_relay_min & L.reach(u, rmin));
    return s;
}

// Stay-in-destination 0, move-into-destination 1, outside w_p.
struct OutageWeight {
    const std::vector<PointSet>* dest;
    double w_p;
    double operator()(size_t, PointId a, size_t n2, PointId b) const {
        if (!(*dest)[n2].test(b)) return w_p;
        return a == b ? 0.0 : 1.0;
    }
};

struct MovingPlan {
    PlanStatus status = PlanStatus::NO_PATH;
    GridPath path;
    double cost = 0.0;
    bool ok() const { return status == PlanStatus::OK; }
};

// Min-cost STRICT path over per-step candidates from `start` at step 0 to any node at the last step.
inline MovingPlan strict_outage_path(const GridMap& g, const std::vector<std::vector<PointId>>& cand,
                                     const std::vector<PointSet>& dest, double w_p, PointId start) {
    MovingPlan out;
    auto xg = build_extended_graph(g, cand, StepRule::STRICT, OutageWeight{&dest, w_p});
    const NodeId src = xg.node(0, start);
    if (src == kNoNode) {
        out.status = PlanStatus::START_OUTSIDE_CANDIDATES;
        return out;
    }
    const size_t last = cand.size() - 1;
    auto res = dijkstra(xg, src, [&](NodeId v) { return xg.step_of(v) == last; });
    if (!res) return out;
    out.status = PlanStatus::OK;
    out.cost = res->cost;
    for (NodeId v : res->nodes) out.path.push_back(xg.point_of(v));
    return out;
}

inline MovingPlan plan_uav2_moving(const MovingProblem& p, const MovingSets& s) {
    if (p.steps() == 0) throw std::invalid_argument("empty UE trajectory");
    std::vector<std::vector<PointId>> cand(p.steps(), s.n2.ids());
    return strict_outage_path(p.grid(), cand, s.d2, p.penalty(), p.Q0.q2);
}

inline MovingPlan plan_uav2_moving(const MovingProblem& p) { return plan_uav2_moving(p, moving_sets(p)); }

// A(p) = {p[0], L(p[0]), ..., L(p[N-1])}
inline GridPath lift_add(const GridMap& g, const GridPath& path) {
    if (path.empty()) throw std::invalid_argument("lift_add on empty path");
    GridPath out;
    out.reserve(path.size() + 1);
    out.push_back(path.front());
    for (PointId q : path) out.push_back(g.lift(q));
    return out;
}

// Z drops the first repeated point, or the last point when none repeats.
inline GridPath trim(const GridPath& path) {
    if (path.size() < 2) throw std::invalid_argument("trim needs at least two points");
    size_t drop = path.size() - 1;
    for (size_t n = 0; n + 1 < path.size(); ++n)
        if (path[n] == path[n + 1]) {
            drop = n;
            break;
        }
    GridPath out;
    out.reserve(path.size() - 1);
    for (size_t n = 0; n < path.size(); ++n)
        if (n != drop) out.push_back(path[n]);
    return out;
}

inline GridPath lift_trim(const GridMap& g, GridPath path, int u) {
    for (int i = 0; i < u; ++i) path = lift_add(g, path);
    for (int i = 0; i < u; ++i) path = trim(path);
    return path;
}

struct TentativeMoving {
    PlanStatus status = PlanStatus::NO_PATH;
    GridCombinedPath path;
    GridPath uav2;
    GridPath lifted_uav2;
    int lifts = 0;
    double cost_uav2 = 0.0;
    double cost_uav1 = 0.0;
    bool ok() const { return status == PlanStatus::OK; }
};

inline TentativeMoving plan_uav1_moving(const MovingProblem& p, const MovingSets& s, const GridPath& path2) {
    TentativeMoving out;
    out.uav2 = path2;
    out.status = PlanStatus::LIFT_EXHAUSTED;
    if (path2.size() != p.steps()) throw std::invalid_argument("UAV-2 path length differs from UE trajectory");
    const GridMap& g = p.grid();
    const LinkTable& L = p.links();
    const double rcc = p.params.r_cc, rmin = p.params.r_min;
    // Past the largest per-point lift count every further iteration reproduces the same path.
    int max_u = 0;
    for (PointId q : path2) max_u = std::max(max_u, g.lifts_to_fixed_point(q));
    for (int u = 0; u <= max_u; ++u) {
        GridPath q2 = lift_trim(g, path2, u);
        const size_t N = q2.size();
        std::vector<std::vector<PointId>> cand(N);
        std::vector<PointSet> d1(N);
        for (size_t n = 0; n < N; ++n) {
            cand[n] = (s.bs_2cc & L.reach(q2[n], rcc)).ids();
            d1[n] = s.bs_2cc_min & L.reach(q2[n], rcc + rmin);
        }
        MovingPlan m = strict_outage_path(g, cand, d1, p.penalty(), p.Q0.q1);
        if (!m.ok()) continue;
        out.status = PlanStatus::OK;
        out.lifts = u;
        out.lifted_uav2 = q2;
        out.cost_uav1 = m.cost;
        for (size_t n = 0; n < N; ++n) out.path.push_back({m.path[n], q2[n]});
        return out;
    }
    return out;
}

inline TentativeMoving plan_tentative_moving(const MovingProblem& p) {
    MovingSets s = moving_sets(p);
    MovingPlan u2 = plan_uav2_moving(p, s);
    if (!u2.ok()) {
        TentativeMoving t;
        t.status = u2.status;
        return t;
    }
    TentativeMoving t = plan_uav1_moving(p, s, u2.path);
    t.cost_uav2 = u2.cost;
    return t;
}

inline bool check_moving_feasibility(const MovingProblem& p) {
    const LinkBudget& b = p.channel().budget();
    const GridMap& g = p.grid();
    double d_c = 0.0;
    for (const auto& q : g.positions()) d_c = std::max(d_c, horizontal_distance(q, p.q_bs));
    return g.h_max() <= capacity_inverse(b, 2 * p.params.r_cc) && d_c <= capacity_inverse(b, p.params.r_cc);
}

}  // namespace relay
