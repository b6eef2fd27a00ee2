#pragma once

#include <algorithm>
#include <vector>

#include "relay/problem.hpp"
#include "relay/tentative_static.hpp"
#include "relay/trajectory.hpp"

namespace relay {

inline double h_top(const GridMap& g) { return g.grid().level_z(g.grid().n_z - 1); }

inline Position at_height(const Position& q, double z) { return {q.x, q.y, z}; }

// Cut at the first sample of maximal UE rate over [0, end].
inline TimedTrajectory truncate_at_max_rate(const TimedTrajectory& traj, const StaticProblem& p, double dt,
                                            size_t* argmax = nullptr) {
    RelayChainParams rp{p.params.r_cc, p.params.r_min, static_cast<int>(traj.uavs())};
    const size_t M = static_cast<size_t>(std::floor(traj.end_time() / dt + 1e-9)) + 1;
    size_t best = 0;
    double best_r = -1.0;
    for (size_t i = 0; i < M; ++i) {
        const double r = relay_chain_rates(p.channel(), rp, traj.at(static_cast<double>(i) * dt), p.q_bs, p.q_ue).r_ue;
        if (r > best_r) {
            best_r = r;
            best = i;
        }
    }
    if (argmax) *argmax = best;
    return traj.truncated(static_cast<double>(best) * dt);
}

inline TimedTrajectory benchmark1(const StaticProblem& p, double dt) {
    const GridMap& g = p.grid();
    const double top = h_top(g);
    const Position s = g.position(p.Q0.q1);
    const Position mid = 0.5 * (at_height(p.q_bs, top) + at_height(p.q_ue, top));
    CombinedPath path{{s}, {at_height(s, top)}, {mid}};
    return truncate_at_max_rate(timestamp_static(path, p.params.v_max), p, dt);
}

inline TimedTrajectory benchmark2(const StaticProblem& p, double dt) {
    const GridMap& g = p.grid();
    const double top = h_top(g);
    const Position s = g.position(p.Q0.q1);
    const Position bs = at_height(p.q_bs, top), ue = at_height(p.q_ue, top);
    const Position t1 = (2.0 / 3.0) * bs + (1.0 / 3.0) * ue;
    const Position t2 = (1.0 / 3.0) * bs + (2.0 / 3.0) * ue;
    CombinedPath path{{s, s}, {at_height(s, top), at_height(s, top)}, {t1, t2}};
    return truncate_at_max_rate(timestamp_static(path, p.params.v_max), p, dt);
}

// UAV-1 holds above the BS at the cruise altitude while UAV-2 flies straight above the UE.
inline TimedTrajectory benchmark3_static(const StaticProblem& p, double dt, double cruise) {
    const Position s = p.grid().position(p.Q0.q1);
    const Position up = at_height(s, cruise);
    CombinedPath path{{s, s}, {up, up}, {up, at_height(p.q_ue, cruise)}};
    return truncate_at_max_rate(timestamp_static(path, p.params.v_max), p, dt);
}
inline TimedTrajectory benchmark3_static(const StaticProblem& p, double dt) {
    return benchmark3_static(p, dt, h_top(p.grid()));
}

// Greedy pursuit at the top level: each step UAV-2 takes the top-level neighbour (or stays)
// horizontally nearest to the UE's next position; UAV-1 climbs and then holds.
inline GridCombinedPath benchmark3_moving_path(const MovingProblem& p) {
    const GridMap& g = p.grid();
    const int top = g.grid().n_z - 1;
    GridCombinedPath path{p.Q0};
    GridCP cur = p.Q0;
    auto climb = [&](PointId q) {
        const GridIndex& i = g.index(q);
        if (i.iz >= top) return q;
        const PointId up = g.at({i.ix, i.iy, i.iz + 1});
        return up == kNoPoint ? q : up;
    };
    for (size_t n = 1; n < p.steps(); ++n) {
        cur.q1 = climb(cur.q1);
        if (g.index(cur.q2).iz < top) {
            cur.q2 = climb(cur.q2);
        } else {
            const Position& target = p.ue.positions[n];
            PointId best = cur.q2;
            double best_d = horizontal_distance(g.position(cur.q2), target);
            for (PointId v : g.neighbors(cur.q2)) {
                if (g.index(v).iz != top) continue;
                const double d = horizontal_distance(g.position(v), target);
                if (d < best_d || (d == best_d && v < best)) {
                    best = v;
                    best_d = d;
                }
            }
            cur.q2 = best;
        }
        path.push_back(cur);
    }
    return path;
}

inline TimedTrajectory benchmark3_moving(const MovingProblem& p) {
    return timestamp_moving(to_positions(p.grid(), benchmark3_moving_path(p)), p.tau);
}

struct Benchmark4Result {
    GridCombinedPath path;
    std::vector<int> chosen_j;  // 0 marks a held window
    bool any_held = false;
};

inline Benchmark4Result benchmark4_path(const MovingProblem& p, size_t n_replan, size_t n_known) {
    if (n_replan == 0 || n_replan > n_known) throw std::invalid_argument("benchmark 4 needs 0 < N_replan <= N_known");
    const size_t N = p.steps();
    const LinkTable& L = p.links();
    Benchmark4Result out;
    out.path.push_back(p.Q0);
    GridCP cur = p.Q0;
    for (size_t start = 0; out.path.size() < N; start += n_replan) {
        std::vector<Position> known;
        for (size_t i = 1; i <= n_known; ++i) known.push_back(p.ue.positions[std::min(start + i, N - 1)]);
        StaticProblem sp{p.world, p.params, p.q_bs, known.back(), cur};
        StaticSets s = static_sets(sp);
        GridCombinedPath window;
        int chosen = 0;
        for (size_t j = n_known; j >= 1 && window.empty(); --j) {
            PointSet d2 = s.bs_relay_min;
            for (size_t i = n_known - j; i < n_known; ++i) d2 &= L.reach(known[i], p.params.r_min);
            Uav2Plan u2 = plan_uav2_static(sp, s, d2);
            if (!u2.ok()) continue;
            TentativeStatic t = plan_uav1_static(sp, s, u2.path);
            if (!t.ok()) continue;
            window.assign(t.path.begin() + 1, t.path.end());
            chosen = static_cast<int>(j);
            if (window.empty()) window.push_back(cur);
        }
        if (window.empty()) {
            out.any_held = true;
            window.push_back(cur);
        }
        window.resize(n_replan, window.back());
        out.chosen_j.push_back(chosen);
        out.path.insert(out.path.end(), window.begin(), window.end());
        cur = out.path.back();
    }
    out.path.resize(N);
    return out;
}

inline TimedTrajectory benchmark4(const MovingProblem& p, size_t n_replan = 15, size_t n_known = 17) {
    return timestamp_moving(to_positions(p.grid(), benchmark4_path(p, n_replan, n_known).path), p.tau);
}

// Both UAVs climb above the BS to the construction altitude z, then UAV-2 flies above the UE.
inline TimedTrajectory connection_bound_trajectory(const StaticProblem& p, const ConnectionBound& b) {
    const Position s = p.grid().position(p.Q0.q1);
    const Position up = at_height(p.q_bs, b.z);
    CombinedPath path{{s, s}, {up, up}, {up, at_height(p.q_ue, b.z)}};
    return timestamp_static(path, p.params.v_max);
}

}  // namespace relay
