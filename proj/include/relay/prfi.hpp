#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "relay/graph.hpp"
#include "relay/log.hpp"
#include "relay/problem.hpp"
#include "relay/rng.hpp"
#include "relay/tentative_moving.hpp"
#include "relay/tentative_static.hpp"

namespace relay {

struct SamplerConfig {
    int total = 2000;             // C
    int k_nn = 100;
    double checks_per_meter = 0;  // 0 selects 2 / min grid spacing
    std::uint64_t seed = 1;
    std::uint64_t realization = 0;
    int max_attempts = 1000;

    double resolution(const FlightGrid& g) const { return checks_per_meter > 0 ? checks_per_meter : 2.0 / g.min_spacing(); }
};

// Inverse-distance draw over candidates excluding the centre point.
class InverseDistanceSampler {
public:
    InverseDistanceSampler(const GridMap& g, const std::vector<PointId>& candidates, PointId center) {
        const Position& c = g.position(center);
        double acc = 0.0;
        for (PointId q : candidates) {
            if (q == center) continue;
            acc += 1.0 / distance(g.position(q), c);
            ids_.push_back(q);
            cdf_.push_back(acc);
        }
    }
    InverseDistanceSampler(const std::vector<Position>& candidates, const Position& center) {
        double acc = 0.0;
        for (size_t i = 0; i < candidates.size(); ++i) {
            const double d = distance(candidates[i], center);
            if (d == 0.0) continue;
            acc += 1.0 / d;
            ids_.push_back(static_cast<PointId>(i));
            cdf_.push_back(acc);
        }
    }
    bool empty() const { return ids_.empty(); }
    PointId draw(Rng& rng) const {
        const double u = rng.uniform() * cdf_.back();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) --it;
        return ids_[static_cast<size_t>(it - cdf_.begin())];
    }
    double probability(size_t i) const { return (cdf_[i] - (i ? cdf_[i - 1] : 0.0)) / cdf_.back(); }
    const std::vector<PointId>& ids() const { return ids_; }

private:
    std::vector<PointId> ids_;
    std::vector<double> cdf_;
};

// Draws `quota` CPs around `center` from the given candidate sets; accepted CPs keep the
// UAV-1 to UAV-2 link at r_cc. Gives up on the remaining quota after max_attempts misses.
inline std::vector<GridCP> sample_around(const LinkTable& L, const std::vector<PointId>& cand1,
                                         const std::vector<PointId>& cand2, const GridCP& center, int quota, double r_cc,
                                         int max_attempts, Rng& rng) {
    std::vector<GridCP> out;
    const GridMap& g = L.grid();
    InverseDistanceSampler s1(g, cand1, center.q1);
    InverseDistanceSampler s2(g, cand2, center.q2);
    if (s1.empty() || s2.empty()) return out;
    for (int k = 0; k < quota; ++k) {
        bool accepted = false;
        for (int a = 0; a < max_attempts; ++a) {
            const GridCP cp{s1.draw(rng), s2.draw(rng)};
            if (L.between(cp.q1, cp.q2) >= r_cc) {
                out.push_back(cp);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            log::warn("sampler: rejection cap reached, skipping ", quota - k, " CPs");
            break;
        }
    }
    return out;
}

// Tentative CPs first, then the samples; duplicates removed keeping the first occurrence.
inline std::vector<GridCP> dedup_keep_first(const std::vector<GridCP>& cps) {
    std::set<GridCP> seen;
    std::vector<GridCP> out;
    for (const auto& cp : cps)
        if (seen.insert(cp).second) out.push_back(cp);
    return out;
}

// One stream per tentative CP.
inline std::vector<GridCP> sample_cps_static(const StaticProblem& p, const StaticSets& s, const GridCombinedPath& tentative,
                                             const SamplerConfig& cfg) {
    std::vector<GridCP> out;
    if (tentative.empty()) return out;
    const int quota = cfg.total / static_cast<int>(tentative.size());
    const auto cand1 = s.bs_2cc.ids();
    const auto cand2 = s.n2.ids();
    for (size_t i = 0; i < tentative.size(); ++i) {
        Rng rng(stream_key(cfg.seed, cfg.realization, "pr-static", i));
        auto got = sample_around(p.links(), cand1, cand2, tentative[i], quota, p.params.r_cc, cfg.max_attempts, rng);
        out.insert(out.end(), got.begin(), got.end());
    }
    return out;
}

// Straight simultaneous motion between two CPs: neither UAV enters a building and the relay
// chain keeps r_cc at check points spaced by 1/resolution along the longer segment.
class SegmentChecker {
public:
    SegmentChecker(const ChannelModel& model, const GridMap& g, Position q_bs, double r_cc, double resolution)
        : model_(&model), g_(&g), q_bs_(q_bs), r_cc_(r_cc), resolution_(resolution) {}

    bool point_feasible(const Position& a, const Position& b) const {
        return model_->capacity(q_bs_, a) >= 2 * r_cc_ && model_->capacity(a, b) >= r_cc_;
    }

    int intervals(const GridCP& A, const GridCP& B) const {
        const double len = std::max(distance(g_->position(A.q1), g_->position(B.q1)),
                                    distance(g_->position(A.q2), g_->position(B.q2)));
        return std::max(1, static_cast<int>(std::ceil(len * resolution_ - 1e-9)));
    }

    bool feasible(const GridCP& A, const GridCP& B) const {
        const Environment& env = model_->env();
        const Position a1 = g_->position(A.q1), b1 = g_->position(B.q1);
        const Position a2 = g_->position(A.q2), b2 = g_->position(B.q2);
        if (segment_inside_length(env, a1, b1) > 0.0 || segment_inside_length(env, a2, b2) > 0.0) return false;
        const int m = intervals(A, B);
        if (!point_feasible(a1, a2) || !point_feasible(b1, b2)) return false;
        for (int j = 1; j < m; ++j) {
            const double s = static_cast<double>(j) / m;
            if (!point_feasible(lerp(a1, b1, s), lerp(a2, b2, s))) return false;
        }
        return true;
    }

private:
    const ChannelModel* model_;
    const GridMap* g_;
    Position q_bs_;
    double r_cc_;
    double resolution_;
};

inline double cp_metric(const GridMap& g, const GridCP& a, const GridCP& b) {
    return std::max(distance(g.position(a.q1), g.position(b.q1)), distance(g.position(a.q2), g.position(b.q2)));
}

struct PrGraphStatic {
    std::vector<GridCP> nodes;
    WeightedGraph graph;
    size_t candidate_pairs = 0;
};

inline PrGraphStatic build_pr_graph_static(const StaticProblem& p, std::vector<GridCP> nodes, const SamplerConfig& cfg) {
    const GridMap& g = p.grid();
    PrGraphStatic pr;
    pr.nodes = std::move(nodes);
    const size_t n = pr.nodes.size();
    pr.graph = WeightedGraph(n);
    const size_t k = std::min(static_cast<size_t>(std::max(cfg.k_nn, 1)), n ? n - 1 : 0);
    std::vector<std::pair<double, NodeId>> cand;
    std::set<std::pair<NodeId, NodeId>> pairs;
    for (size_t i = 0; i < n; ++i) {
        cand.clear();
        for (size_t j = 0; j < n; ++j)
            if (j != i) cand.push_back({cp_metric(g, pr.nodes[i], pr.nodes[j]), static_cast<NodeId>(j)});
        if (k < cand.size()) {
            std::nth_element(cand.begin(), cand.begin() + static_cast<long>(k), cand.end());
            cand.resize(k);
        }
        for (const auto& [d, j] : cand) pairs.insert({std::min<NodeId>(static_cast<NodeId>(i), j), std::max<NodeId>(static_cast<NodeId>(i), j)});
    }
    pr.candidate_pairs = pairs.size();
    SegmentChecker check(p.channel(), g, p.q_bs, p.params.r_cc, cfg.resolution(g.grid()));
    for (const auto& [a, b] : pairs) {
        if (!check.feasible(pr.nodes[a], pr.nodes[b])) continue;
        pr.graph.add_undirected(a, b, cp_metric(g, pr.nodes[a], pr.nodes[b]) / p.params.v_max);
    }
    return pr;
}

struct PrfiStatic {
    PlanStatus status = PlanStatus::NO_PATH;
    GridCombinedPath path;
    TentativeStatic tentative;
    GridCombinedPath tentative_truncated;
    bool fallback = false;
    double cost = 0.0;  // seconds along waypoints
    size_t nodes = 0;
    size_t edges = 0;
    bool ok() const { return status == PlanStatus::OK; }
};

inline PrfiStatic plan_prfi_static(const StaticProblem& p, const SamplerConfig& cfg, const Uav1StaticOptions& opt = {},
                                   PrGraphStatic* keep_graph = nullptr) {
    PrfiStatic out;
    StaticSets s = static_sets(p);
    Uav2Plan u2 = plan_uav2_static(p, s, s.d2);
    if (!u2.ok()) {
        out.status = out.tentative.status = u2.status;
        return out;
    }
    out.tentative = plan_uav1_static(p, s, u2.path, opt);
    if (!out.tentative.ok()) {
        out.status = out.tentative.status;
        return out;
    }
    out.tentative_truncated = truncate_at_target(p, out.tentative.path);
    std::vector<GridCP> all = out.tentative.path;
    auto samples = sample_cps_static(p, s, out.tentative.path, cfg);
    all.insert(all.end(), samples.begin(), samples.end());
    PrGraphStatic pr = build_pr_graph_static(p, dedup_keep_first(all), cfg);
    out.nodes = pr.nodes.size();
    out.edges = pr.graph.edge_count() / 2;
    std::vector<char> dest(pr.nodes.size(), 0);
    for (size_t i = 0; i < pr.nodes.size(); ++i) dest[i] = grid_chain(p, pr.nodes[i]).r_ue >= p.params.r_min;
    auto res = dijkstra(pr.graph, 0, [&](NodeId v) { return dest[v] != 0; });
    out.status = PlanStatus::OK;
    if (res) {
        out.cost = res->cost;
        for (NodeId v : res->nodes) out.path.push_back(pr.nodes[v]);
    } else {
        out.fallback = true;
        out.path = out.tentative_truncated;
    }
    if (keep_graph) *keep_graph = std::move(pr);
    return out;
}

// Per-step sets: Q[n] first, then floor(C / N_UE) samples around it; one stream per step.
inline std::vector<std::vector<GridCP>> sample_cps_moving(const MovingProblem& p, const MovingSets& s,
                                                          const GridCombinedPath& tentative, const SamplerConfig& cfg) {
    std::vector<std::vector<GridCP>> out(tentative.size());
    if (tentative.empty()) return out;
    const int quota = cfg.total / static_cast<int>(tentative.size());
    const auto cand1 = s.bs_2cc.ids();
    const auto cand2 = s.n2.ids();
    for (size_t n = 0; n < tentative.size(); ++n) {
        Rng rng(stream_key(cfg.seed, cfg.realization, "pr-moving", n));
        std::vector<GridCP> step{tentative[n]};
        auto got = sample_around(p.links(), cand1, cand2, tentative[n], quota, p.params.r_cc, cfg.max_attempts, rng);
        step.insert(step.end(), got.begin(), got.end());
        out[n] = dedup_keep_first(step);
    }
    return out;
}

enum class MovingObjective { OUTAGE, DATA };

struct PrGraphMoving {
    std::vector<std::vector<GridCP>> layers;
    std::vector<size_t> offsets;
    std::vector<double> r_ue;  // per node, against the UE at the node's step
    WeightedGraph graph;
};

inline PrGraphMoving build_pr_graph_moving(const MovingProblem& p, std::vector<std::vector<GridCP>> layers,
                                           MovingObjective objective) {
    const GridMap& g = p.grid();
    const LinkTable& L = p.links();
    PrGraphMoving pr;
    pr.layers = std::move(layers);
    pr.offsets.push_back(0);
    for (const auto& l : pr.layers) pr.offsets.push_back(pr.offsets.back() + l.size());
    pr.r_ue.resize(pr.offsets.back());
    const auto bs = L.anchor_row(p.q_bs);
    double best = 0.0;
    for (size_t n = 0; n < pr.layers.size(); ++n) {
        const auto ue = L.anchor_row(p.ue.positions[n]);
        for (size_t i = 0; i < pr.layers[n].size(); ++i) {
            const GridCP& cp = pr.layers[n][i];
            const double r = chain2((*bs)[static_cast<size_t>(cp.q1)], L.between(cp.q1, cp.q2), (*ue)[static_cast<size_t>(cp.q2)],
                                    p.params.r_cc)
                                 .r_ue;
            pr.r_ue[pr.offsets[n] + i] = r;
            best = std::max(best, r);
        }
    }
    pr.graph = WeightedGraph(pr.offsets.back());
    const double w_p = p.penalty();
    for (size_t n = 0; n + 1 < pr.layers.size(); ++n)
        for (size_t i = 0; i < pr.layers[n].size(); ++i)
            for (size_t j = 0; j < pr.layers[n + 1].size(); ++j) {
                const GridCP& a = pr.layers[n][i];
                const GridCP& b = pr.layers[n + 1][j];
                if (!g.adjacent_or_same(a.q1, b.q1) || !g.adjacent_or_same(a.q2, b.q2)) continue;
                const size_t v = pr.offsets[n + 1] + j;
                double w;
                if (objective == MovingObjective::OUTAGE)
                    w = pr.r_ue[v] >= p.params.r_min ? (a == b ? 0.0 : 1.0) : w_p;
                else
                    w = best - pr.r_ue[v];
                pr.graph.add_edge(static_cast<NodeId>(pr.offsets[n] + i), static_cast<NodeId>(v), w);
            }
    return pr;
}

struct PrfiMoving {
    PlanStatus status = PlanStatus::NO_PATH;
    GridCombinedPath path;
    TentativeMoving tentative;
    bool fallback = false;
    double cost = 0.0;
    size_t nodes = 0;
    size_t edges = 0;
    bool ok() const { return status == PlanStatus::OK; }
};

inline PrfiMoving plan_prfi_moving(const MovingProblem& p, const SamplerConfig& cfg, MovingObjective objective,
                                   PrGraphMoving* keep_graph = nullptr) {
    PrfiMoving out;
    MovingSets s = moving_sets(p);
    MovingPlan u2 = plan_uav2_moving(p, s);
    if (!u2.ok()) {
        out.status = out.tentative.status = u2.status;
        return out;
    }
    out.tentative = plan_uav1_moving(p, s, u2.path);
    out.tentative.cost_uav2 = u2.cost;
    if (!out.tentative.ok()) {
        out.status = out.tentative.status;
        return out;
    }
    PrGraphMoving pr = build_pr_graph_moving(p, sample_cps_moving(p, s, out.tentative.path, cfg), objective);
    out.nodes = pr.graph.size();
    out.edges = pr.graph.edge_count();
    const size_t last = pr.layers.size() - 1;
    auto res = dijkstra(pr.graph, 0, [&](NodeId v) { return v >= pr.offsets[last]; });
    out.status = PlanStatus::OK;
    if (res) {
        out.cost = res->cost;
        for (size_t n = 0; n < res->nodes.size(); ++n) out.path.push_back(pr.layers[n][res->nodes[n] - pr.offsets[n]]);
    } else {
        out.fallback = true;
        out.path = out.tentative.path;
    }
    if (keep_graph) *keep_graph = std::move(pr);
    return out;
}

}  // namespace relay
