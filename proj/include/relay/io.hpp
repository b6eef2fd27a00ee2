#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "relay/env.hpp"
#include "relay/prfi.hpp"
#include "relay/problem.hpp"
#include "relay/trajectory.hpp"

namespace relay {

using json = nlohmann::ordered_json;

inline json to_json(const Position& p) { return json::array({p.x, p.y, p.z}); }

inline Position position_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw std::invalid_argument("position must be [x, y, z]");
    Position p{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    if (!finite(p)) throw std::invalid_argument("position must be finite");
    return p;
}

inline json environment_to_json(const Environment& env) {
    json j;
    j["region"] = {{"x", {env.region.lo.x, env.region.hi.x}},
                   {"y", {env.region.lo.y, env.region.hi.y}},
                   {"z", {env.region.lo.z, env.region.hi.z}}};
    json b = json::array();
    for (const auto& x : env.buildings)
        b.push_back({{"x_min", x.x_min}, {"x_max", x.x_max}, {"y_min", x.y_min}, {"y_max", x.y_max}, {"height", x.height}});
    j["buildings"] = b;
    return j;
}

inline Region region_from_json(const json& r) {
    auto ext = [&](const char* k) {
        const auto& a = r.at(k);
        if (!a.is_array() || a.size() != 2) throw std::invalid_argument(std::string("region.") + k + " must be [lo, hi]");
        return std::pair{a[0].get<double>(), a[1].get<double>()};
    };
    auto [x0, x1] = ext("x");
    auto [y0, y1] = ext("y");
    auto [z0, z1] = ext("z");
    return {{x0, y0, z0}, {x1, y1, z1}};
}

inline Environment environment_from_json(const json& j) {
    Environment env;
    env.region = region_from_json(j.at("region"));
    for (const auto& b : j.at("buildings"))
        env.buildings.push_back({b.at("x_min").get<double>(), b.at("x_max").get<double>(), b.at("y_min").get<double>(),
                                 b.at("y_max").get<double>(), b.at("height").get<double>()});
    env.validate();
    return env;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    return json::parse(in);
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

// Trajectory export: one entry per evaluation sample.
inline json trajectory_to_json(const TimedTrajectory& traj, const UeFunction& ue, const ChannelModel& model,
                               const RelayChainParams& params, const Position& q_bs, double horizon, double dt) {
    json samples = json::array();
    const size_t M = sample_count(horizon, dt);
    for (size_t i = 0; i < M; ++i) {
        const double t = static_cast<double>(i) * dt;
        const ConfigPoint Q = traj.at(t);
        const Position u = ue(t);
        ChainRates c = relay_chain_rates(model, params, Q, q_bs, u);
        json uavs = json::array();
        for (const auto& q : Q) uavs.push_back(to_json(q));
        json s{{"t", t}, {"uav", uavs}, {"ue", to_json(u)}, {"r_ue", c.r_ue}, {"r_1", c.r[0]}};
        s["r_2"] = c.r.size() > 1 ? json(c.r[1]) : json(nullptr);
        samples.push_back(std::move(s));
    }
    json waypoints = json::array();
    for (size_t n = 0; n < traj.size(); ++n) {
        json cols = json::array();
        for (const auto& q : traj.Q[n]) cols.push_back(to_json(q));
        waypoints.push_back({{"t", traj.t[n]}, {"uav", cols}});
    }
    return {{"waypoints", waypoints}, {"samples", samples}};
}

inline json pr_graph_to_json(const GridMap& g, const PrGraphStatic& pr) {
    json nodes = json::array();
    for (const auto& cp : pr.nodes) nodes.push_back({to_json(g.position(cp.q1)), to_json(g.position(cp.q2))});
    json edges = json::array();
    for (NodeId u = 0; u < pr.graph.size(); ++u)
        for (const auto& e : pr.graph.out(u))
            if (u < e.to) edges.push_back({u, e.to, e.weight});
    return {{"nodes", nodes}, {"edges", edges}};
}

inline json pr_graph_to_json(const GridMap& g, const PrGraphMoving& pr) {
    json nodes = json::array();
    for (size_t n = 0; n < pr.layers.size(); ++n)
        for (const auto& cp : pr.layers[n])
            nodes.push_back({{"step", n}, {"q", {to_json(g.position(cp.q1)), to_json(g.position(cp.q2))}}});
    json edges = json::array();
    for (NodeId u = 0; u < pr.graph.size(); ++u)
        for (const auto& e : pr.graph.out(u)) edges.push_back({u, e.to, e.weight});
    return {{"nodes", nodes}, {"edges", edges}};
}

// CSV rows "t,x,y,z" (header optional), resampled at multiples of tau by linear interpolation.
inline UeTrajectory ue_trajectory_from_csv(std::istream& in, double tau) {
    std::vector<double> ts;
    std::vector<Position> ps;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (ts.empty() && line.find_first_of("tT") == 0) continue;
        std::stringstream ss(line);
        std::string cell;
        double v[4];
        for (double& x : v) {
            if (!std::getline(ss, cell, ',')) throw std::invalid_argument("UE CSV rows need t,x,y,z");
            x = std::stod(cell);
        }
        if (!ts.empty() && v[0] <= ts.back()) throw std::invalid_argument("UE CSV times must increase");
        ts.push_back(v[0]);
        ps.push_back({v[1], v[2], v[3]});
    }
    if (ts.empty()) throw std::invalid_argument("UE CSV is empty");
    UeTrajectory out;
    out.tau = tau;
    size_t k = 0;
    for (size_t n = 0;; ++n) {
        const double t = ts.front() + static_cast<double>(n) * tau;
        if (t > ts.back() + 1e-9) break;
        while (k + 1 < ts.size() && ts[k + 1] < t) ++k;
        if (k + 1 >= ts.size()) {
            out.positions.push_back(ps.back());
            continue;
        }
        const double s = std::clamp((t - ts[k]) / (ts[k + 1] - ts[k]), 0.0, 1.0);
        out.positions.push_back(lerp(ps[k], ps[k + 1], s));
    }
    return out;
}

}  // namespace relay
