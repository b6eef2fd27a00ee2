#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "relay/channel.hpp"
#include "relay/problem.hpp"

namespace relay {

struct TimedTrajectory {
    std::vector<double> t;
    std::vector<ConfigPoint> Q;

    size_t size() const { return t.size(); }
    size_t uavs() const { return Q.empty() ? 0 : Q.front().size(); }
    double end_time() const { return t.empty() ? 0.0 : t.back(); }

    void push(double time, ConfigPoint cp) {
        if (!t.empty() && time < t.back()) throw std::invalid_argument("waypoint times must be nondecreasing");
        if (!t.empty() && time == t.back() && cp == Q.back()) return;
        t.push_back(time);
        Q.push_back(std::move(cp));
    }

    // Per-UAV linear interpolation; the last CP holds forever.
    ConfigPoint at(double time) const {
        if (t.empty()) throw std::logic_error("empty trajectory");
        if (time <= t.front()) return Q.front();
        if (time >= t.back()) return Q.back();
        const size_t n = static_cast<size_t>(std::upper_bound(t.begin(), t.end(), time) - t.begin());
        const double span = t[n] - t[n - 1];
        const double s = span > 0.0 ? (time - t[n - 1]) / span : 1.0;
        ConfigPoint out(Q[n].size());
        for (size_t k = 0; k < out.size(); ++k) out[k] = lerp(Q[n - 1][k], Q[n][k], s);
        return out;
    }

    // Prefix up to `time`, ending with the interpolated CP there.
    TimedTrajectory truncated(double time) const {
        TimedTrajectory out;
        for (size_t i = 0; i < t.size() && t[i] < time; ++i) out.push(t[i], Q[i]);
        out.push(std::max(time, 0.0), at(time));
        return out;
    }
};

inline double cp_step_length(const ConfigPoint& a, const ConfigPoint& b) {
    double m = 0.0;
    for (size_t k = 0; k < a.size(); ++k) m = std::max(m, distance(a[k], b[k]));
    return m;
}

inline TimedTrajectory timestamp_static(const CombinedPath& path, double v_max) {
    if (path.empty()) throw std::invalid_argument("empty combined path");
    TimedTrajectory out;
    out.push(0.0, path.front());
    double t = 0.0;
    for (size_t n = 1; n < path.size(); ++n) {
        if (path[n] == out.Q.back()) continue;
        t += cp_step_length(path[n - 1], path[n]) / v_max;
        out.push(t, path[n]);
    }
    return out;
}

inline TimedTrajectory timestamp_moving(const CombinedPath& path, double tau) {
    TimedTrajectory out;
    for (size_t n = 0; n < path.size(); ++n) {
        out.t.push_back(static_cast<double>(n) * tau);
        out.Q.push_back(path[n]);
    }
    return out;
}

struct MetricsResult {
    double connection_time = kInf;
    double bracket_lo = kInf;  // previous sample before the first hit (0 when hit at t = 0)
    double outage_time = 0.0;
    double transferred_data = 0.0;
    double dt = 0.0;
    std::vector<double> r_ue;                 // per sample
    std::vector<std::vector<double>> relays;  // per sample r_1..r_K
    bool reached() const { return std::isfinite(connection_time); }
};

using UeFunction = std::function<Position(double)>;

inline size_t sample_count(double horizon, double dt) {
    return static_cast<size_t>(std::floor(horizon / dt + 1e-9));
}

// Left Riemann sums at t_i = i dt, i = 0 .. floor(T / dt) - 1.
inline MetricsResult evaluate(const TimedTrajectory& traj, const UeFunction& ue, const ChannelModel& model,
                              const RelayChainParams& params, const Position& q_bs, double horizon, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("evaluation dt must be positive");
    MetricsResult m;
    m.dt = dt;
    const size_t M = sample_count(horizon, dt);
    m.r_ue.reserve(M);
    m.relays.reserve(M);
    for (size_t i = 0; i < M; ++i) {
        const double t = static_cast<double>(i) * dt;
        ChainRates c = relay_chain_rates(model, params, traj.at(t), q_bs, ue(t));
        if (c.r_ue >= params.r_ue_min) {
            if (!m.reached()) {
                m.connection_time = t;
                m.bracket_lo = i ? t - dt : 0.0;
            }
        } else {
            m.outage_time += dt;
        }
        m.transferred_data += dt * c.r_ue;
        m.r_ue.push_back(c.r_ue);
        m.relays.push_back(std::move(c.r));
    }
    return m;
}

inline UeFunction static_ue(const Position& q) {
    return [q](double) { return q; };
}
inline UeFunction moving_ue(const UeTrajectory& ue) {
    return [ue](double t) { return ue.at(t); };
}

inline double default_dt_static(const FlightGrid& g, double v_max) { return g.min_spacing() / v_max / 5.0; }
inline double default_dt_moving(double tau) { return tau / 5.0; }

}  // namespace relay
