#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <utility>
#include <type_traits>
#include <vector>

#include "relay/env.hpp"

namespace relay {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct Edge {
    NodeId to;
    double weight;
};

class WeightedGraph {
public:
    WeightedGraph() = default;
    explicit WeightedGraph(size_t n) : adj_(n) {}

    NodeId add_node() {
        adj_.emplace_back();
        return static_cast<NodeId>(adj_.size() - 1);
    }
    void add_edge(NodeId u, NodeId v, double w) {
        if (w < 0.0) throw std::invalid_argument("negative edge weight");
        adj_.at(u).push_back({v, w});
    }
    void add_undirected(NodeId u, NodeId v, double w) {
        add_edge(u, v, w);
        add_edge(v, u, w);
    }

    size_t size() const { return adj_.size(); }
    size_t edge_count() const {
        size_t n = 0;
        for (const auto& a : adj_) n += a.size();
        return n;
    }
    const std::vector<Edge>& out(NodeId u) const { return adj_[u]; }

    template <class F>
    void for_each_out(NodeId u, F&& f) const {
        for (const auto& e : adj_[u]) f(e.to, e.weight);
    }

private:
    std::vector<std::vector<Edge>> adj_;
};

struct GraphPath {
    std::vector<NodeId> nodes;
    double cost = 0.0;
};

// Graph concept: size() and for_each_out(u, f(v, w)). Ties pop the smallest NodeId first.
template <class G, class IsTarget>
    requires std::is_invocable_r_v<bool, IsTarget&, NodeId>
std::optional<GraphPath> dijkstra(const G& g, NodeId source, IsTarget&& is_target) {
    const size_t n = g.size();
    if (source >= n) throw std::out_of_range("dijkstra source not in graph");
    std::vector<double> dist(n, kInf);
    std::vector<NodeId> parent(n, kNoNode);
    std::vector<char> done(n, 0);
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[source] = 0.0;
    pq.push({0.0, source});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (done[u]) continue;
        done[u] = 1;
        if (is_target(u)) {
            GraphPath path;
            path.cost = d;
            for (NodeId v = u; v != kNoNode; v = parent[v]) path.nodes.push_back(v);
            std::reverse(path.nodes.begin(), path.nodes.end());
            return path;
        }
        g.for_each_out(u, [&](NodeId v, double w) {
            const double nd = d + w;
            if (!done[v] && nd < dist[v]) {
                dist[v] = nd;
                parent[v] = u;
                pq.push({nd, v});
            }
        });
    }
    return std::nullopt;
}

template <class G>
std::optional<GraphPath> dijkstra(const G& g, NodeId source, const std::vector<NodeId>& targets) {
    std::vector<char> mark(g.size(), 0);
    for (NodeId t : targets) mark.at(t) = 1;
    return dijkstra(g, source, [&](NodeId u) { return mark[u] != 0; });
}

template <class G, class IsTarget>
    requires std::is_invocable_r_v<bool, IsTarget&, NodeId>
bool path_exists(const G& g, NodeId source, IsTarget&& is_target) {
    const size_t n = g.size();
    if (source >= n) throw std::out_of_range("path_exists source not in graph");
    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack{source};
    seen[source] = 1;
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        if (is_target(u)) return true;
        g.for_each_out(u, [&](NodeId v, double) {
            if (!seen[v]) {
                seen[v] = 1;
                stack.push_back(v);
            }
        });
    }
    return false;
}

template <class G>
bool path_exists(const G& g, NodeId source, const std::vector<NodeId>& targets) {
    std::vector<char> mark(g.size(), 0);
    for (NodeId t : targets) mark.at(t) = 1;
    return path_exists(g, source, [&](NodeId u) { return mark[u] != 0; });
}

// Grid adjacency restricted to a point subset; weight = Euclidean hop length.
class GridSubgraph {
public:
    GridSubgraph(const GridMap& grid, const std::vector<char>& member) : grid_(&grid), member_(&member) {}
    size_t size() const { return grid_->size(); }
    template <class F>
    void for_each_out(NodeId u, F&& f) const {
        const auto pu = static_cast<PointId>(u);
        if (!(*member_)[u]) return;
        for (PointId v : grid_->neighbors(pu))
            if ((*member_)[static_cast<size_t>(v)])
                f(static_cast<NodeId>(v), distance(grid_->position(pu), grid_->position(v)));
    }

private:
    const GridMap* grid_;
    const std::vector<char>* member_;
};

enum class StepRule {
    WAIT_ALLOWED,  // n' in {n, n+1}; n' = n needs a distinct adjacent point
    STRICT,        // n' = n + 1
};

// Time-expanded graph over grid points. Node (n, q) exists iff q is in step n's candidate set.
// Edges are generated on demand: q' adjacent to q, or q' = q when the step advances.
template <class WeightRule>
class ExtendedGraph {
public:
    ExtendedGraph(const GridMap& grid, std::vector<std::vector<PointId>> steps, StepRule rule, WeightRule weight)
        : grid_(&grid), steps_(std::move(steps)), rule_(rule), weight_(std::move(weight)) {
        offsets_.push_back(0);
        local_.assign(steps_.size(), {});
        for (size_t n = 0; n < steps_.size(); ++n) {
            local_[n].assign(grid.size(), -1);
            for (size_t i = 0; i < steps_[n].size(); ++i) local_[n][static_cast<size_t>(steps_[n][i])] = static_cast<int>(i);
            offsets_.push_back(offsets_.back() + steps_[n].size());
        }
    }

    size_t size() const { return offsets_.back(); }
    size_t steps() const { return steps_.size(); }

    NodeId node(size_t n, PointId q) const {
        if (n >= steps_.size()) return kNoNode;
        const int i = local_[n][static_cast<size_t>(q)];
        return i < 0 ? kNoNode : static_cast<NodeId>(offsets_[n] + static_cast<size_t>(i));
    }
    size_t step_of(NodeId u) const {
        size_t lo = 0, hi = steps_.size();
        while (hi - lo > 1) {
            size_t mid = (lo + hi) / 2;
            (offsets_[mid] <= u ? lo : hi) = mid;
        }
        return lo;
    }
    PointId point_of(NodeId u) const {
        const size_t n = step_of(u);
        return steps_[n][u - offsets_[n]];
    }

    template <class F>
    void for_each_out(NodeId u, F&& f) const {
        const size_t n = step_of(u);
        const PointId q = steps_[n][u - offsets_[n]];
        if (rule_ == StepRule::WAIT_ALLOWED) {
            for (PointId q2 : grid_->neighbors(q)) {
                NodeId v = node(n, q2);
                if (v != kNoNode) f(v, weight_(n, q, n, q2));
            }
        }
        if (n + 1 >= steps_.size()) return;
        NodeId stay = node(n + 1, q);
        if (stay != kNoNode) f(stay, weight_(n, q, n + 1, q));
        for (PointId q2 : grid_->neighbors(q)) {
            NodeId v = node(n + 1, q2);
            if (v != kNoNode) f(v, weight_(n, q, n + 1, q2));
        }
    }

    WeightedGraph materialize() const {
        WeightedGraph g(size());
        for (NodeId u = 0; u < size(); ++u) for_each_out(u, [&](NodeId v, double w) { g.add_edge(u, v, w); });
        return g;
    }

private:
    const GridMap* grid_;
    std::vector<std::vector<PointId>> steps_;
    StepRule rule_;
    WeightRule weight_;
    std::vector<size_t> offsets_;
    std::vector<std::vector<int>> local_;
};

template <class WeightRule>
ExtendedGraph<WeightRule> build_extended_graph(const GridMap& grid, std::vector<std::vector<PointId>> steps, StepRule rule,
                                               WeightRule weight) {
    return ExtendedGraph<WeightRule>(grid, std::move(steps), rule, std::move(weight));
}

}  // namespace relay
