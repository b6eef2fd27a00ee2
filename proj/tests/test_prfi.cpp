#include <functional>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "relay/prfi.hpp"
#include "relay/trajectory.hpp"

using namespace relay;
using namespace relay::testing;

namespace {

struct StaticScene {
    std::shared_ptr<const World> w;
    StaticProblem p;
};

StaticScene static_scene(Environment env, FlightGrid fg, Position bs, Position ue, ChannelMode mode = ChannelMode::TOMOGRAPHIC,
                         LinkBudget b = default_budget(), RelayParams params = {}) {
    StaticScene s;
    s.w = world(std::move(env), fg, mode, b);
    const PointId t = takeoff_point(*s.w->grid, bs);
    s.p = StaticProblem{s.w, params, bs, ue, {t, t}};
    return s;
}

Environment city(std::uint64_t seed) {
    Rng rng(seed);
    Environment env = random_env(rng, 7, 200, 20, 60);
    std::erase_if(env.buildings, [](const Building& b) { return b.x_min < 30 && b.y_min < 30; });
    return env;
}

double path_time(const GridMap& g, const GridCombinedPath& path, double v) {
    double t = 0;
    for (size_t i = 1; i < path.size(); ++i) t += cp_metric(g, path[i - 1], path[i]) / v;
    return t;
}

SamplerConfig small_sampler(std::uint64_t seed = 1) {
    SamplerConfig c;
    c.total = 300;
    c.k_nn = 30;
    c.seed = seed;
    return c;
}

}  // namespace

TEST(InverseDistanceSampler, TwoCandidateProbabilities) {
    InverseDistanceSampler s({{1, 0, 0}, {0, 2, 0}}, {0, 0, 0});
    EXPECT_NEAR(s.probability(0), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(s.probability(1), 1.0 / 3.0, 1e-15);
}

TEST(InverseDistanceSampler, EmpiricalFrequenciesWithinThreeSigma) {
    const std::vector<Position> cand{{1, 0, 0}, {0, 2, 0}, {3, 0, 0}, {0, 0, 4}, {5, 0, 0}};
    InverseDistanceSampler s(cand, {0, 0, 0});
    double norm = 0;
    for (const auto& c : cand) norm += 1.0 / distance(c, {0, 0, 0});
    Rng rng(stream_key(1, 0, "sampler-law"));
    const int draws = 100000;
    std::vector<int> count(cand.size(), 0);
    for (int i = 0; i < draws; ++i) ++count[static_cast<size_t>(s.draw(rng))];
    for (size_t i = 0; i < cand.size(); ++i) {
        const double p = 1.0 / distance(cand[i], {0, 0, 0}) / norm;
        const double sigma = std::sqrt(draws * p * (1 - p));
        EXPECT_NEAR(count[i], draws * p, 3 * sigma) << i;
    }
}

TEST(SampleAround, SingletonCandidatesAcceptedIffConnected) {
    Environment env({{-100, -100, 0}, {200, 200, 100}}, {{40, 60, -50, 50, 80}});
    auto w = world(env, uniform_grid(10, 1, 2, 10.0, {0, 0, 10}), ChannelMode::LOS_MAP);
    const GridMap& g = *w->grid;
    const PointId a = g.at({1, 0, 0}), clear = g.at({2, 0, 0}), hidden = g.at({8, 0, 0});
    const GridCP center{g.at({0, 0, 0}), g.at({0, 0, 1})};
    Rng rng(1);
    auto ok = sample_around(*w->links, {a}, {clear}, center, 3, 200e3, 50, rng);
    ASSERT_EQ(ok.size(), 3u);
    for (const auto& cp : ok) EXPECT_EQ(cp, (GridCP{a, clear}));
    auto none = sample_around(*w->links, {a}, {hidden}, center, 3, 200e3, 50, rng);
    EXPECT_TRUE(none.empty());
}

TEST(SampleCpsStatic, SamplesKeepRelayLink) {
    StaticScene s = static_scene(city(3), uniform_grid(9, 9, 4, 25.0, {0, 0, 15}), {0, 0, 0}, {180, 170, 0});
    StaticSets sets = static_sets(s.p);
    TentativeStatic t = plan_tentative_static(s.p);
    ASSERT_TRUE(t.ok());
    auto cps = sample_cps_static(s.p, sets, t.path, small_sampler());
    EXPECT_FALSE(cps.empty());
    for (const auto& cp : cps) {
        EXPECT_GE(s.w->links->between(cp.q1, cp.q2), s.p.params.r_cc);
        EXPECT_TRUE(sets.bs_2cc.test(cp.q1));
        EXPECT_TRUE(sets.n2.test(cp.q2));
    }
}

TEST(PrGraphStatic, EdgeWeightIsSlowestUavOverSpeed) {
    Environment env = open_env();
    auto w = world(env, uniform_grid(6, 6, 1, 1.0, {0, 0, 10}), ChannelMode::LOS_MAP);
    const GridMap& g = *w->grid;
    const GridCP a{g.at({0, 0, 0}), g.at({0, 0, 0})}, b{g.at({3, 0, 0}), g.at({0, 4, 0})};
    EXPECT_DOUBLE_EQ(cp_metric(g, a, b) / 7.0, 4.0 / 7.0);
    StaticProblem p{w, {200e3, 90e6, 7.0}, {0, 0, 0}, {5, 5, 0}, a};
    PrGraphStatic pr = build_pr_graph_static(p, {a, b}, small_sampler());
    bool found = false;
    for (const auto& e : pr.graph.out(0)) {
        EXPECT_NE(e.to, 0u);
        if (e.to == 1) {
            found = true;
            EXPECT_DOUBLE_EQ(e.weight, 4.0 / 7.0);
        }
    }
    EXPECT_TRUE(found);
}

TEST(PrGraphStatic, SegmentThroughBuildingIsRejected) {
    Environment env({{-100, -100, 0}, {200, 200, 100}}, {{12, 18, -50, 50, 15}});
    auto w = world(env, uniform_grid(4, 1, 2, 10.0, {0, 0, 10}), ChannelMode::TOMOGRAPHIC);
    const GridMap& g = *w->grid;
    StaticProblem p{w, {200e3, 90e6, 7.0}, {0, 0, 0}, {30, 0, 0}, {g.at({0, 0, 0}), g.at({0, 0, 0})}};
    SegmentChecker check(*w->channel, g, p.q_bs, p.params.r_cc, 1.0);
    const GridCP a{g.at({1, 0, 0}), g.at({1, 0, 1})}, b{g.at({2, 0, 0}), g.at({2, 0, 1})};
    // UAV-1 crosses the box at 10 m: the midpoint oracle sees it inside.
    EXPECT_TRUE(env.inside_building(lerp(g.position(a.q1), g.position(b.q1), 0.5)));
    EXPECT_FALSE(check.feasible(a, b));
    const GridCP c{g.at({1, 0, 1}), g.at({1, 0, 1})}, d{g.at({2, 0, 1}), g.at({2, 0, 1})};
    EXPECT_TRUE(check.feasible(c, d));
}

TEST(SegmentChecker, CheckPointSpacingIncludesEndpoints) {
    auto w = world(open_env(), uniform_grid(4, 1, 1, 10.0), ChannelMode::LOS_MAP);
    const GridMap& g = *w->grid;
    SegmentChecker check(*w->channel, g, {0, 0, 0}, 200e3, 2.0 / 10.0);
    const GridCP a{g.at({0, 0, 0}), g.at({0, 0, 0})}, b{g.at({3, 0, 0}), g.at({1, 0, 0})};
    EXPECT_EQ(check.intervals(a, b), 6);
    EXPECT_EQ(check.intervals(a, a), 1);
}

TEST(PlanPrfiStatic, StartAlreadyDestination) {
    StaticScene s = static_scene(open_env(), uniform_grid(4, 4, 2, 20), {0, 0, 0}, {30, 30, 0});
    PrfiStatic r = plan_prfi_static(s.p, small_sampler());
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.path.size(), 1u);
    EXPECT_EQ(r.cost, 0.0);
}

TEST(PlanPrfiStatic, NeverSlowerThanConnectedTentativeAndFeasibleAtCheckPoints) {
    int compared = 0;
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        Rng urng(seed * 7);
        Environment env = city(seed);
        const Position ue = random_free_point(urng, env, 0, 0);
        StaticScene s = static_scene(env, uniform_grid(9, 9, 4, 25.0, {0, 0, 15}), {0, 0, 0}, ue);
        const SamplerConfig cfg = small_sampler(seed);
        PrGraphStatic graph;
        PrfiStatic r = plan_prfi_static(s.p, cfg, {}, &graph);
        if (!r.ok()) continue;
        const GridMap& g = *s.w->grid;
        SegmentChecker check(*s.w->channel, g, s.p.q_bs, s.p.params.r_cc, cfg.resolution(g.grid()));
        for (size_t i = 0; i < r.path.size(); ++i) {
            const Chain2 c = grid_chain(s.p, r.path[i]);
            EXPECT_GE(c.r1, s.p.params.r_cc);
            EXPECT_GE(c.r2, s.p.params.r_cc);
            if (i) {
                EXPECT_TRUE(check.feasible(r.path[i - 1], r.path[i]));
            }
        }
        EXPECT_GE(grid_chain(s.p, r.path.back()).r_ue, s.p.params.r_min);
        // Dominance holds whenever consecutive truncated tentative CPs are joined in the PR graph.
        auto node_of = [&](const GridCP& cp) {
            return static_cast<NodeId>(std::find(graph.nodes.begin(), graph.nodes.end(), cp) - graph.nodes.begin());
        };
        bool connected = true;
        for (size_t i = 1; i < r.tentative_truncated.size() && connected; ++i) {
            const NodeId a = node_of(r.tentative_truncated[i - 1]), b = node_of(r.tentative_truncated[i]);
            if (a == b) continue;
            const auto& out = graph.graph.out(a);
            connected = std::any_of(out.begin(), out.end(), [&](const auto& e) { return e.to == b; });
        }
        if (!connected) continue;
        ++compared;
        EXPECT_FALSE(r.fallback);
        EXPECT_LE(path_time(g, r.path, s.p.params.v_max), path_time(g, r.tentative_truncated, s.p.params.v_max) + 1e-9);
    }
    EXPECT_GT(compared, 3);
}

TEST(PlanPrfiStatic, SeedDeterminism) {
    Rng urng(99);
    Environment env = city(99);
    const Position ue = random_free_point(urng, env, 0, 0);
    StaticScene s = static_scene(env, uniform_grid(9, 9, 4, 25.0, {0, 0, 15}), {0, 0, 0}, ue);
    PrGraphStatic g1, g2;
    PrfiStatic a = plan_prfi_static(s.p, small_sampler(5), {}, &g1);
    StaticScene s2 = static_scene(env, uniform_grid(9, 9, 4, 25.0, {0, 0, 15}), {0, 0, 0}, ue);
    PrfiStatic b = plan_prfi_static(s2.p, small_sampler(5), {}, &g2);
    EXPECT_EQ(a.path, b.path);
    EXPECT_EQ(g1.nodes, g2.nodes);
    ASSERT_EQ(g1.graph.size(), g2.graph.size());
    for (NodeId u = 0; u < g1.graph.size(); ++u) {
        ASSERT_EQ(g1.graph.out(u).size(), g2.graph.out(u).size());
        for (size_t k = 0; k < g1.graph.out(u).size(); ++k) {
            EXPECT_EQ(g1.graph.out(u)[k].to, g2.graph.out(u)[k].to);
            EXPECT_EQ(g1.graph.out(u)[k].weight, g2.graph.out(u)[k].weight);
        }
    }
}

namespace {

MovingProblem moving_problem(std::shared_ptr<const World> w, Position bs, std::vector<Position> ue, RelayParams params = {}) {
    MovingProblem p;
    p.world = w;
    p.params = params;
    p.tau = 1.0;
    p.q_bs = bs;
    const PointId t = takeoff_point(*w->grid, bs);
    p.Q0 = {t, t};
    p.ue.tau = 1.0;
    p.ue.positions = std::move(ue);
    return p;
}

}  // namespace

TEST(PlanPrfiMoving, CoveredStationaryUeHasZeroOutageCost) {
    auto w = world(open_env(), uniform_grid(4, 4, 2, 10.0, {0, 0, 10}), ChannelMode::LOS_MAP);
    MovingProblem p = moving_problem(w, {0, 0, 0}, std::vector<Position>(5, Position{20, 20, 0}));
    PrGraphMoving graph;
    PrfiMoving r = plan_prfi_moving(p, small_sampler(), MovingObjective::OUTAGE, &graph);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.cost, 0.0);
    EXPECT_EQ(r.path.size(), p.steps());
}

TEST(PlanPrfiMoving, DataModeMaximisesRateSumByEnumeration) {
    // Short-range budget so UE rates differ sharply across CPs.
    auto w = world(open_env(), uniform_grid(3, 3, 2, 10.0, {0, 0, 10}), ChannelMode::LOS_MAP, budget_with_constant(225.0 * 7.0));
    Rng rng(4);
    for (int t = 0; t < 10; ++t) {
        std::vector<Position> ue;
        for (int n = 0; n < 3; ++n) ue.push_back({rng.uniform(-10, 30), rng.uniform(-10, 30), 0});
        MovingProblem p = moving_problem(w, {0, 0, 0}, ue, {1e3, 3e6, 7.0});
        PrGraphMoving graph;
        PrfiMoving r = plan_prfi_moving(p, small_sampler(t + 1), MovingObjective::DATA, &graph);
        ASSERT_TRUE(r.ok());
        ASSERT_EQ(r.path.size(), 3u);
        // Exhaustive enumeration over the layered node sets with the same edge rule.
        const GridMap& g = *w->grid;
        double best = -1;
        std::function<void(size_t, size_t, double)> rec = [&](size_t n, size_t i, double acc) {
            if (n + 1 == graph.layers.size()) {
                best = std::max(best, acc);
                return;
            }
            for (size_t j = 0; j < graph.layers[n + 1].size(); ++j) {
                const GridCP& a = graph.layers[n][i];
                const GridCP& b = graph.layers[n + 1][j];
                if (!g.adjacent_or_same(a.q1, b.q1) || !g.adjacent_or_same(a.q2, b.q2)) continue;
                rec(n + 1, j, acc + graph.r_ue[graph.offsets[n + 1] + j]);
            }
        };
        rec(0, 0, 0.0);
        double got = 0;
        for (size_t n = 1; n < r.path.size(); ++n) {
            const auto& layer = graph.layers[n];
            const size_t j = static_cast<size_t>(std::find(layer.begin(), layer.end(), r.path[n]) - layer.begin());
            got += graph.r_ue[graph.offsets[n] + j];
        }
        EXPECT_NEAR(got, best, 1e-6 * std::max(1.0, best));
        // The tentative path is a layer-wise member of the graph, so PRFI cannot do worse.
        double tent = 0;
        for (size_t n = 1; n < r.tentative.path.size(); ++n) {
            const auto& layer = graph.layers[n];
            const size_t j = static_cast<size_t>(std::find(layer.begin(), layer.end(), r.tentative.path[n]) - layer.begin());
            tent += graph.r_ue[graph.offsets[n] + j];
        }
        EXPECT_GE(got, tent - 1e-6 * std::max(1.0, tent));
    }
}

TEST(PlanPrfiMoving, SeedDeterminism) {
    Environment env = city(8);
    auto w = world(env, uniform_grid(9, 9, 4, 25.0, {0, 0, 15}), ChannelMode::TOMOGRAPHIC);
    Rng rng(8);
    std::vector<Position> ue;
    Position u = random_free_point(rng, env, 0, 0);
    for (int n = 0; n < 15; ++n) ue.push_back(u);
    MovingProblem p = moving_problem(w, {0, 0, 0}, ue);
    PrfiMoving a = plan_prfi_moving(p, small_sampler(3), MovingObjective::DATA);
    PrfiMoving b = plan_prfi_moving(p, small_sampler(3), MovingObjective::DATA);
    EXPECT_EQ(a.path, b.path);
    EXPECT_EQ(a.nodes, b.nodes);
    EXPECT_EQ(a.edges, b.edges);
}
