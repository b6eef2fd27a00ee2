#pragma once

#include <memory>
#include <numbers>
#include <vector>

#include "relay/channel.hpp"
#include "relay/env.hpp"
#include "relay/problem.hpp"
#include "relay/rng.hpp"

namespace relay::testing {

// 6 GHz, 20 MHz, 17 dBm, 12 dBi both sides, -97 dBm noise, 1 dB/m absorption.
inline LinkBudget default_budget() { return LinkBudget::from_db(17.0, 12.0, 12.0, 6.0, 20.0, -97.0, 1.0); }

inline FlightGrid uniform_grid(int nx, int ny, int nz, double d, Position origin = {0, 0, 10}) {
    FlightGrid g;
    g.origin = origin;
    g.n_x = nx;
    g.n_y = ny;
    g.n_z = nz;
    g.dx = g.dy = g.dz = d;
    g.z_min = origin.z;
    g.z_max = origin.z + (nz - 1) * d;
    return g;
}

inline Environment open_env(Region r = {{-1000, -1000, 0}, {1000, 1000, 200}}) { return Environment(r, {}); }

inline std::shared_ptr<const World> world(Environment env, const FlightGrid& g, ChannelMode mode = ChannelMode::TOMOGRAPHIC,
                                          LinkBudget b = default_budget()) {
    return make_world(std::move(env), g, b, mode);
}

// Budget scaled so that c^-1(r) is easy to reason about at small scale: SNR constant A.
inline LinkBudget budget_with_constant(double A, double bandwidth_hz = 1e6) {
    LinkBudget b;
    b.tx_power_w = A;
    b.tx_gain = b.rx_gain = 1.0;
    b.wavelength_m = 4.0 * std::numbers::pi;
    b.bandwidth_hz = bandwidth_hz;
    b.noise_w = 1.0;
    b.absorption_db_per_m = 1.0;
    return b;
}

inline Environment random_env(Rng& rng, int count, double extent, double hmin, double hmax) {
    Environment env;
    env.region = {{0, 0, 0}, {extent, extent, 2 * hmax}};
    for (int i = 0; i < count; ++i) {
        const double w = rng.uniform(0.05, 0.25) * extent, d = rng.uniform(0.05, 0.25) * extent;
        const double x = rng.uniform(0, extent - w), y = rng.uniform(0, extent - d);
        env.buildings.push_back({x, x + w, y, y + d, rng.uniform(hmin, hmax)});
    }
    env.validate();
    return env;
}

inline Position random_free_point(Rng& rng, const Environment& env, double zlo, double zhi) {
    for (;;) {
        Position p{rng.uniform(env.region.lo.x, env.region.hi.x), rng.uniform(env.region.lo.y, env.region.hi.y),
                   rng.uniform(zlo, zhi)};
        if (!env.inside_building(p)) return p;
    }
}

}  // namespace relay::testing
