#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "relay/benchmarks.hpp"
#include "relay/io.hpp"
#include "relay/log.hpp"
#include "relay/prfi.hpp"
#include "relay/problem.hpp"
#include "relay/rng.hpp"
#include "relay/tentative_moving.hpp"
#include "relay/tentative_static.hpp"
#include "relay/trajectory.hpp"

namespace relay {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class ScenarioKind { STATIC, MOVING };

struct BuildingLaw {
    int rows = 5;
    int cols = 5;
    double side_min = 30.0;
    double side_max = 60.0;
    double gap_min = 10.0;
    double height_min = 40.0;
    double height_max = 40.0;
    bool keep_bs_clear = true;
};

struct GridSpec {
    int n_x = 12;
    int n_y = 12;
    int n_z = 8;
    double z_min = 12.5;
    double z_max = 87.5;
};

struct LinkSpec {
    double carrier_ghz = 6.0;
    double bandwidth_mhz = 20.0;
    double tx_power_dbm = 17.0;
    double tx_gain_dbi = 12.0;
    double rx_gain_dbi = 12.0;
    double noise_dbm = -97.0;
    double absorption_db_per_m = 1.0;
    ChannelMode mode = ChannelMode::TOMOGRAPHIC;

    LinkBudget budget() const {
        return LinkBudget::from_db(tx_power_dbm, tx_gain_dbi, rx_gain_dbi, carrier_ghz, bandwidth_mhz, noise_dbm,
                                   absorption_db_per_m);
    }
};

struct ScenarioConfig {
    std::string name = "scenario";
    ScenarioKind kind = ScenarioKind::STATIC;
    Region region{{0, 0, 0}, {500, 500, 100}};
    BuildingLaw buildings;
    std::optional<Environment> environment;  // fixed layout instead of the random law
    GridSpec grid;
    LinkSpec link;
    RelayParams relay;
    Position q_bs{20, 470, 0};
    double ue_d_min = 50.0;
    double ue_d_max = 650.0;
    double ue_speed = 2.0;
    double duration = 300.0;
    std::optional<Position> ue_position;
    std::optional<UeTrajectory> ue_track;
    double tau = 0.0;      // 0: max hop / v_max
    double horizon = 0.0;  // 0: 200 s static, duration moving
    double dt = 0.0;       // 0: default sampling
    double w_p = 0.0;
    int mc = 1;
    std::uint64_t seed = 1;
    std::vector<std::string> algorithms;
    SamplerConfig sampler;
    Uav1Cost uav1_cost = Uav1Cost::DISTANCE;
    size_t n_replan = 15;
    size_t n_known = 17;
    std::string sweep_parameter;  // "", "r_min", "height", "distance"
    std::vector<double> sweep_values;
    int traces = 1;

    FlightGrid flight_grid() const {
        FlightGrid g;
        g.n_x = grid.n_x;
        g.n_y = grid.n_y;
        g.n_z = grid.n_z;
        g.dx = (region.hi.x - region.lo.x) / grid.n_x;
        g.dy = (region.hi.y - region.lo.y) / grid.n_y;
        g.dz = grid.n_z > 1 ? (grid.z_max - grid.z_min) / (grid.n_z - 1) : 1.0;
        // Lattice columns pass through the BS so the take-off point sits right above it.
        auto align = [](double lo, double d, int n, double at) {
            const double k = std::min(std::floor((at - lo) / d), static_cast<double>(n - 1));
            return at - std::max(k, 0.0) * d;
        };
        g.origin = {align(region.lo.x, g.dx, g.n_x, q_bs.x), align(region.lo.y, g.dy, g.n_y, q_bs.y), grid.z_min};
        g.z_min = grid.z_min;
        g.z_max = grid.z_max;
        return g;
    }
    double effective_tau() const { return tau > 0 ? tau : max_hop_length(flight_grid()) / relay.v_max; }
    double effective_horizon() const {
        if (horizon > 0) return horizon;
        return kind == ScenarioKind::STATIC ? 200.0 : duration;
    }
    double effective_dt() const {
        if (dt > 0) return dt;
        return kind == ScenarioKind::STATIC ? default_dt_static(flight_grid(), relay.v_max) : default_dt_moving(effective_tau());
    }
    size_t ue_steps() const { return static_cast<size_t>(std::floor(duration / effective_tau() + 1e-9)) + 1; }
    std::vector<double> sweep_points() const { return sweep_values.empty() ? std::vector<double>{std::nan("")} : sweep_values; }

    std::vector<std::string> default_algorithms() const {
        if (kind == ScenarioKind::STATIC) return {"prfi", "tentative", "benchmark1", "benchmark2", "benchmark3"};
        return {"prfi_data", "prfi_outage", "tentative", "benchmark3", "benchmark4"};
    }
    // Configuration with one sweep value applied.
    ScenarioConfig at_sweep(double v) const {
        ScenarioConfig c = *this;
        if (std::isnan(v) || sweep_parameter.empty()) return c;
        if (sweep_parameter == "r_min") {
            c.relay.r_min = v;
        } else if (sweep_parameter == "height") {
            if (kind == ScenarioKind::STATIC) {
                c.buildings.height_min = c.buildings.height_max = v;
            } else {
                c.buildings.height_min = v - 20.0;
                c.buildings.height_max = v + 20.0;
            }
        } else if (sweep_parameter == "distance") {
            c.ue_d_min = v - 20.0;
            c.ue_d_max = v + 20.0;
        }
        return c;
    }

    void validate() const {
        auto fail = [](const std::string& m) { throw ConfigError(m); };
        if (!(region.lo.x < region.hi.x && region.lo.y < region.hi.y && region.lo.z < region.hi.z)) fail("empty region");
        if (grid.n_x <= 0 || grid.n_y <= 0 || grid.n_z <= 0) fail("grid counts must be positive");
        if (grid.n_z > 1 && !(grid.z_min < grid.z_max)) fail("grid z band empty");
        if (!(buildings.side_min > 0 && buildings.side_min <= buildings.side_max)) fail("building side band empty");
        if (!(buildings.height_min > 0 && buildings.height_min <= buildings.height_max)) fail("building height band empty");
        if (buildings.rows <= 0 || buildings.cols <= 0) fail("building layout needs rows and cols");
        if (!(relay.r_cc > 0 && relay.r_min > 0 && relay.v_max > 0)) fail("relay parameters must be positive");
        if (!(ue_d_min >= 0 && ue_d_min <= ue_d_max)) fail("UE distance band empty");
        if (!(duration > 0 && ue_speed >= 0)) fail("UE motion parameters invalid");
        if (mc <= 0) fail("mc must be positive");
        if (sampler.total <= 0 || sampler.k_nn <= 0) fail("sampler needs positive C and k_nn");
        if (n_replan == 0 || n_replan > n_known) fail("benchmark 4 needs 0 < n_replan <= n_known");
        if (!sweep_parameter.empty() && sweep_parameter != "r_min" && sweep_parameter != "height" && sweep_parameter != "distance")
            fail("unknown sweep parameter " + sweep_parameter);
        if (tau > 0 && tau * relay.v_max < max_hop_length(flight_grid()) - 1e-9)
            fail("tau too small for a single grid hop at v_max");
        for (const auto& a : algorithms) {
            auto d = default_algorithms();
            if (std::find(d.begin(), d.end(), a) == d.end()) fail("unknown algorithm " + a);
        }
    }
};

namespace detail {

template <class T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline std::pair<double, double> get_pair(const json& j, const char* key) {
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2) throw ConfigError(std::string(key) + " must be a two-element array");
    return {a[0].get<double>(), a[1].get<double>()};
}

}  // namespace detail

inline ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig c;
    try {
        detail::get_if(j, "name", c.name);
        if (j.contains("kind")) {
            const auto k = j.at("kind").get<std::string>();
            if (k == "static") c.kind = ScenarioKind::STATIC;
            else if (k == "moving") c.kind = ScenarioKind::MOVING;
            else throw ConfigError("kind must be static or moving");
        }
        if (j.contains("region")) c.region = region_from_json(j.at("region"));
        if (j.contains("buildings")) {
            const auto& b = j.at("buildings");
            detail::get_if(b, "rows", c.buildings.rows);
            detail::get_if(b, "cols", c.buildings.cols);
            if (b.contains("side")) std::tie(c.buildings.side_min, c.buildings.side_max) = detail::get_pair(b, "side");
            if (b.contains("height")) std::tie(c.buildings.height_min, c.buildings.height_max) = detail::get_pair(b, "height");
            detail::get_if(b, "gap_min", c.buildings.gap_min);
            detail::get_if(b, "keep_bs_clear", c.buildings.keep_bs_clear);
        }
        if (j.contains("environment")) {
            const auto& e = j.at("environment");
            c.environment = environment_from_json(e.is_string() ? read_json_file(e.get<std::string>()) : e);
            c.region = c.environment->region;
        }
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            if (g.contains("n")) {
                const auto& n = g.at("n");
                if (!n.is_array() || n.size() != 3) throw ConfigError("grid.n must be [nx, ny, nz]");
                c.grid.n_x = n[0].get<int>();
                c.grid.n_y = n[1].get<int>();
                c.grid.n_z = n[2].get<int>();
            }
            if (g.contains("z")) std::tie(c.grid.z_min, c.grid.z_max) = detail::get_pair(g, "z");
        }
        if (j.contains("link")) {
            const auto& l = j.at("link");
            detail::get_if(l, "carrier_ghz", c.link.carrier_ghz);
            detail::get_if(l, "bandwidth_mhz", c.link.bandwidth_mhz);
            detail::get_if(l, "tx_power_dbm", c.link.tx_power_dbm);
            detail::get_if(l, "tx_gain_dbi", c.link.tx_gain_dbi);
            detail::get_if(l, "rx_gain_dbi", c.link.rx_gain_dbi);
            detail::get_if(l, "noise_dbm", c.link.noise_dbm);
            detail::get_if(l, "absorption_db_per_m", c.link.absorption_db_per_m);
            if (l.contains("mode")) {
                const auto m = l.at("mode").get<std::string>();
                if (m == "tomographic") c.link.mode = ChannelMode::TOMOGRAPHIC;
                else if (m == "los_map") c.link.mode = ChannelMode::LOS_MAP;
                else throw ConfigError("link.mode must be tomographic or los_map");
            }
        }
        if (j.contains("relay")) {
            const auto& r = j.at("relay");
            detail::get_if(r, "r_cc", c.relay.r_cc);
            detail::get_if(r, "r_min", c.relay.r_min);
            detail::get_if(r, "v_max", c.relay.v_max);
        }
        if (j.contains("bs")) c.q_bs = position_from_json(j.at("bs"));
        if (j.contains("ue")) {
            const auto& u = j.at("ue");
            if (u.contains("distance")) std::tie(c.ue_d_min, c.ue_d_max) = detail::get_pair(u, "distance");
            detail::get_if(u, "speed", c.ue_speed);
            detail::get_if(u, "duration", c.duration);
            if (u.contains("position")) c.ue_position = position_from_json(u.at("position"));
        }
        detail::get_if(j, "tau", c.tau);
        detail::get_if(j, "horizon", c.horizon);
        detail::get_if(j, "dt", c.dt);
        detail::get_if(j, "w_p", c.w_p);
        detail::get_if(j, "mc", c.mc);
        detail::get_if(j, "seed", c.seed);
        detail::get_if(j, "algorithms", c.algorithms);
        detail::get_if(j, "traces", c.traces);
        if (j.contains("sampler")) {
            const auto& s = j.at("sampler");
            detail::get_if(s, "total", c.sampler.total);
            detail::get_if(s, "k_nn", c.sampler.k_nn);
            detail::get_if(s, "checks_per_meter", c.sampler.checks_per_meter);
            detail::get_if(s, "max_attempts", c.sampler.max_attempts);
        }
        if (j.contains("uav1_cost")) {
            const auto v = j.at("uav1_cost").get<std::string>();
            if (v == "distance") c.uav1_cost = Uav1Cost::DISTANCE;
            else if (v == "flight_time") c.uav1_cost = Uav1Cost::FLIGHT_TIME;
            else throw ConfigError("uav1_cost must be distance or flight_time");
        }
        if (j.contains("benchmark4")) {
            detail::get_if(j.at("benchmark4"), "n_replan", c.n_replan);
            detail::get_if(j.at("benchmark4"), "n_known", c.n_known);
        }
        if (j.contains("sweep")) {
            detail::get_if(j.at("sweep"), "parameter", c.sweep_parameter);
            detail::get_if(j.at("sweep"), "values", c.sweep_values);
        }
        if (j.contains("ue_csv")) {
            std::ifstream in(j.at("ue_csv").get<std::string>());
            if (!in) throw ConfigError("cannot open UE CSV");
            c.ue_track = ue_trajectory_from_csv(in, c.effective_tau());
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (c.algorithms.empty()) c.algorithms = c.default_algorithms();
    c.validate();
    return c;
}

struct Realization {
    Environment env;
    Position q_bs;
    Position q_ue;
    UeTrajectory ue;  // moving scenarios only
};

// Jittered rows x cols layout: one box per cell, kept gap_min/2 inside the cell border.
inline Environment generate_environment(const ScenarioConfig& cfg, Rng& rng) {
    const BuildingLaw& law = cfg.buildings;
    Environment env;
    env.region = cfg.region;
    const double cw = (cfg.region.hi.x - cfg.region.lo.x) / law.cols;
    const double ch = (cfg.region.hi.y - cfg.region.lo.y) / law.rows;
    for (int i = 0; i < law.cols; ++i)
        for (int j = 0; j < law.rows; ++j) {
            const double x0 = cfg.region.lo.x + i * cw, y0 = cfg.region.lo.y + j * ch;
            const bool bs_cell = cfg.q_bs.x >= x0 && cfg.q_bs.x <= x0 + cw && cfg.q_bs.y >= y0 && cfg.q_bs.y <= y0 + ch;
            const double sx = rng.uniform(law.side_min, std::min(law.side_max, cw - law.gap_min));
            const double sy = rng.uniform(law.side_min, std::min(law.side_max, ch - law.gap_min));
            const double ox = rng.uniform(0.0, std::max(0.0, cw - law.gap_min - sx));
            const double oy = rng.uniform(0.0, std::max(0.0, ch - law.gap_min - sy));
            const double h = rng.uniform(law.height_min, law.height_max);
            if (bs_cell && law.keep_bs_clear) continue;
            Building b{x0 + law.gap_min / 2 + ox, 0, y0 + law.gap_min / 2 + oy, 0, h};
            b.x_max = b.x_min + sx;
            b.y_max = b.y_min + sy;
            env.buildings.push_back(b);
        }
    env.validate();
    return env;
}

// UE on the ground at a uniform distance in the band, outside buildings, with c(BS, UE) <= r_min.
inline std::optional<Position> place_ue(const ScenarioConfig& cfg, const Environment& env, const ChannelModel& ch, Rng& rng) {
    for (int attempt = 0; attempt < 2000; ++attempt) {
        const double d = rng.uniform(cfg.ue_d_min, cfg.ue_d_max);
        const double th = rng.uniform(0.0, 2 * std::numbers::pi);
        const double dz = cfg.q_bs.z;
        if (d < std::abs(dz)) continue;
        const double rh = std::sqrt(d * d - dz * dz);
        Position q{cfg.q_bs.x + rh * std::cos(th), cfg.q_bs.y + rh * std::sin(th), 0.0};
        if (q.x <= env.region.lo.x || q.x >= env.region.hi.x || q.y <= env.region.lo.y || q.y >= env.region.hi.y) continue;
        if (env.inside_building(q)) continue;
        if (ch.capacity(cfg.q_bs, q) > cfg.relay.r_min) continue;
        return q;
    }
    return std::nullopt;
}

// Heading-persistent walk with 1 s substeps, reflected at the region border; headings leading into a
// building are redrawn. Returns nothing if a resampled point lands inside a building.
inline std::optional<UeTrajectory> random_walk(const ScenarioConfig& cfg, const Environment& env, Position start, Rng& rng) {
    const double step_t = 1.0;
    const size_t substeps = static_cast<size_t>(std::ceil(cfg.duration / step_t));
    std::vector<Position> track{start};
    double th = rng.uniform(0.0, 2 * std::numbers::pi);
    Position cur = start;
    const double margin = 1e-3;
    for (size_t i = 0; i < substeps; ++i) {
        Position next = cur;
        bool moved = false;
        for (int attempt = 0; attempt < 64 && !moved; ++attempt) {
            th += attempt == 0 ? rng.uniform(-std::numbers::pi / 8, std::numbers::pi / 8) : rng.uniform(0.0, 2 * std::numbers::pi);
            double vx = std::cos(th), vy = std::sin(th);
            next = {cur.x + cfg.ue_speed * step_t * vx, cur.y + cfg.ue_speed * step_t * vy, 0.0};
            if (next.x <= env.region.lo.x + margin || next.x >= env.region.hi.x - margin) vx = -vx;
            if (next.y <= env.region.lo.y + margin || next.y >= env.region.hi.y - margin) vy = -vy;
            th = std::atan2(vy, vx);
            next = {cur.x + cfg.ue_speed * step_t * vx, cur.y + cfg.ue_speed * step_t * vy, 0.0};
            if (!env.region.contains({next.x, next.y, env.region.lo.z})) continue;
            if (env.inside_building(next) || segment_inside_length(env, cur, next) > 0.0) continue;
            moved = true;
        }
        if (!moved) next = cur;
        track.push_back(next);
        cur = next;
    }
    UeTrajectory ue;
    ue.tau = cfg.effective_tau();
    const size_t N = cfg.ue_steps();
    for (size_t n = 0; n < N; ++n) {
        const double s = static_cast<double>(n) * ue.tau / step_t;
        const auto k = std::min(static_cast<size_t>(s), track.size() - 1);
        const Position p = k + 1 < track.size() ? lerp(track[k], track[k + 1], s - static_cast<double>(k)) : track.back();
        if (env.inside_building(p)) return std::nullopt;
        ue.positions.push_back(p);
    }
    return ue;
}

inline Realization generate_realization(const ScenarioConfig& cfg, std::uint64_t index, std::uint64_t sweep_index = 0) {
    if (static_cast<int>(index) >= cfg.mc) throw std::out_of_range("realization index beyond MC count");
    const LinkBudget budget = cfg.link.budget();
    for (std::uint64_t env_attempt = 0;; ++env_attempt) {
        Realization r;
        r.q_bs = cfg.q_bs;
        if (cfg.environment) {
            r.env = *cfg.environment;
        } else {
            Rng env_rng(stream_key(cfg.seed, index, "env", env_attempt));
            r.env = generate_environment(cfg, env_rng);
        }
        LinkBudget b = budget;
        b.c_zero = capacity_distance(b, cfg.flight_grid().min_spacing() / 1000.0);
        ChannelModel ch(b, cfg.link.mode, r.env);
        Rng ue_rng(stream_key(cfg.seed, index, "ue", sweep_index * 1000003ULL + env_attempt));
        if (cfg.kind == ScenarioKind::MOVING && cfg.ue_track) {
            r.ue = *cfg.ue_track;
            r.q_ue = r.ue.positions.front();
            return r;
        }
        std::optional<Position> ue = cfg.ue_position ? cfg.ue_position : place_ue(cfg, r.env, ch, ue_rng);
        if (!ue) {
            if (cfg.environment) throw std::runtime_error("no admissible UE location in the fixed environment");
            log::info("realization ", index, ": UE placement cap reached, regenerating environment");
            continue;
        }
        r.q_ue = *ue;
        if (cfg.kind == ScenarioKind::STATIC) return r;
        for (int walk = 0; walk < 100; ++walk) {
            Rng walk_rng(stream_key(cfg.seed, index, "ue-walk", (sweep_index * 1000003ULL + env_attempt) * 128 + static_cast<std::uint64_t>(walk)));
            auto track = random_walk(cfg, r.env, r.q_ue, walk_rng);
            if (track) {
                r.ue = std::move(*track);
                return r;
            }
        }
        log::info("realization ", index, ": UE walk rejected, regenerating environment");
    }
}

struct RunResult {
    std::string scenario;
    int realization = 0;
    double sweep = std::nan("");
    std::string algorithm;
    std::string status;
    double connection_time = kInf;
    double outage_time = 0.0;
    double outage_fraction = 0.0;
    double data = 0.0;
    bool failed = false;
    bool fallback = false;
    int lifts = 0;
    int waits = 0;
    double min_r1 = kInf;
    double min_r2 = kInf;
    double wall_seconds = 0.0;
    std::vector<double> trace;  // r_ue per evaluation sample
};

struct Prepared {
    std::shared_ptr<const World> world;
    StaticProblem sp;
    MovingProblem mp;
};

inline Prepared prepare(const ScenarioConfig& cfg, const Realization& r) {
    Prepared out;
    out.world = make_world(r.env, cfg.flight_grid(), cfg.link.budget(), cfg.link.mode);
    const PointId take = takeoff_point(*out.world->grid, r.q_bs);
    out.sp = StaticProblem{out.world, cfg.relay, r.q_bs, r.q_ue, {take, take}};
    out.mp.world = out.world;
    out.mp.params = cfg.relay;
    out.mp.tau = cfg.effective_tau();
    out.mp.w_p = cfg.w_p;
    out.mp.q_bs = r.q_bs;
    out.mp.Q0 = {take, take};
    out.mp.ue = r.ue;
    return out;
}

struct RunOutput {
    RunResult result;
    TimedTrajectory trajectory;
};

inline void fill_metrics(RunResult& rr, const MetricsResult& m, double horizon) {
    rr.connection_time = m.connection_time;
    rr.outage_time = m.outage_time;
    rr.outage_fraction = horizon > 0 ? m.outage_time / horizon : 0.0;
    rr.data = m.transferred_data;
    rr.trace = m.r_ue;
    for (const auto& r : m.relays) {
        if (!r.empty()) rr.min_r1 = std::min(rr.min_r1, r[0]);
        if (r.size() > 1) rr.min_r2 = std::min(rr.min_r2, r[1]);
    }
}

// All configured algorithms on one realization; tentative and PRFI share the tentative stage.
inline std::vector<RunOutput> run_realization(const ScenarioConfig& cfg, int index, double sweep, std::uint64_t sweep_index) {
    using clock = std::chrono::steady_clock;
    const Realization real = generate_realization(cfg, static_cast<std::uint64_t>(index), sweep_index);
    Prepared prep = prepare(cfg, real);
    const GridMap& g = *prep.world->grid;
    const double T = cfg.effective_horizon(), dt = cfg.effective_dt();
    SamplerConfig sc = cfg.sampler;
    sc.seed = cfg.seed;
    sc.realization = static_cast<std::uint64_t>(index) * 4096 + sweep_index;
    std::vector<RunOutput> outs;
    auto base = [&](const std::string& algo) {
        RunOutput o;
        o.result.scenario = cfg.name;
        o.result.realization = index;
        o.result.sweep = sweep;
        o.result.algorithm = algo;
        o.result.status = "ok";
        return o;
    };
    const CombinedPath hold{to_config(g, prep.sp.Q0)};
    if (cfg.kind == ScenarioKind::STATIC) {
        const StaticProblem& sp = prep.sp;
        const RelayChainParams rp2{sp.params.r_cc, sp.params.r_min, 2};
        const RelayChainParams rp1{sp.params.r_cc, sp.params.r_min, 1};
        std::optional<PrfiStatic> prfi;
        double prfi_seconds = 0.0;
        auto need_prfi = [&] {
            if (prfi) return;
            auto t0 = clock::now();
            prfi = plan_prfi_static(sp, sc, {cfg.uav1_cost});
            prfi_seconds = std::chrono::duration<double>(clock::now() - t0).count();
        };
        for (const auto& algo : cfg.algorithms) {
            RunOutput o = base(algo);
            auto t0 = clock::now();
            const RelayChainParams* rp = &rp2;
            if (algo == "prfi" || algo == "tentative") {
                need_prfi();
                const bool ok = prfi->tentative.ok();
                o.result.status = to_string(prfi->tentative.status);
                o.result.lifts = prfi->tentative.lifts;
                o.result.waits = prfi->tentative.waits;
                if (algo == "prfi") o.result.fallback = prfi->fallback;
                const CombinedPath path = !ok ? hold : to_positions(g, algo == "prfi" ? prfi->path : prfi->tentative_truncated);
                o.trajectory = timestamp_static(path, sp.params.v_max);
            } else if (algo == "benchmark1") {
                o.trajectory = benchmark1(sp, dt);
                rp = &rp1;
            } else if (algo == "benchmark2") {
                o.trajectory = benchmark2(sp, dt);
            } else if (algo == "benchmark3") {
                o.trajectory = benchmark3_static(sp, dt);
            }
            MetricsResult m = evaluate(o.trajectory, static_ue(sp.q_ue), sp.channel(), *rp, sp.q_bs, T, dt);
            fill_metrics(o.result, m, T);
            o.result.failed = !m.reached();
            o.result.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count() + (algo == "prfi" ? prfi_seconds : 0.0);
            outs.push_back(std::move(o));
        }
        return outs;
    }
    const MovingProblem& mp = prep.mp;
    const RelayChainParams rp2{mp.params.r_cc, mp.params.r_min, 2};
    std::optional<TentativeMoving> tent;
    auto need_tent = [&] {
        if (!tent) tent = plan_tentative_moving(mp);
    };
    for (const auto& algo : cfg.algorithms) {
        RunOutput o = base(algo);
        auto t0 = clock::now();
        CombinedPath path;
        if (algo == "prfi_data" || algo == "prfi_outage") {
            PrfiMoving pm = plan_prfi_moving(mp, sc, algo == "prfi_data" ? MovingObjective::DATA : MovingObjective::OUTAGE);
            o.result.status = to_string(pm.tentative.status);
            o.result.failed = !pm.ok();
            o.result.fallback = pm.fallback;
            o.result.lifts = pm.tentative.lifts;
            if (!tent) tent = pm.tentative;
            path = pm.ok() ? to_positions(g, pm.path) : hold;
        } else if (algo == "tentative") {
            need_tent();
            o.result.status = to_string(tent->status);
            o.result.failed = !tent->ok();
            o.result.lifts = tent->lifts;
            path = tent->ok() ? to_positions(g, tent->path) : hold;
        } else if (algo == "benchmark3") {
            path = to_positions(g, benchmark3_moving_path(mp));
        } else if (algo == "benchmark4") {
            Benchmark4Result b4 = benchmark4_path(mp, cfg.n_replan, cfg.n_known);
            o.result.fallback = b4.any_held;
            path = to_positions(g, b4.path);
        }
        o.trajectory = timestamp_moving(path, mp.tau);
        MetricsResult m = evaluate(o.trajectory, moving_ue(mp.ue), mp.channel(), rp2, mp.q_bs, T, dt);
        fill_metrics(o.result, m, T);
        o.result.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
        outs.push_back(std::move(o));
    }
    return outs;
}

struct Campaign {
    ScenarioConfig cfg;
    std::vector<RunResult> rows;
    std::vector<std::pair<std::string, json>> traces;  // file name, content
};

// Realizations run on up to `workers` threads; rows are merged in (sweep, realization) order.
inline Campaign run_campaign(const ScenarioConfig& cfg, int workers = 1) {
    Campaign c;
    c.cfg = cfg;
    const auto sweeps = cfg.sweep_points();
    struct Job {
        size_t sweep;
        int index;
    };
    std::vector<Job> jobs;
    for (size_t s = 0; s < sweeps.size(); ++s)
        for (int i = 0; i < cfg.mc; ++i) jobs.push_back({s, i});
    std::vector<std::vector<RunOutput>> results(jobs.size());
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t k = next++; k < jobs.size(); k = next++) {
            const Job& jb = jobs[k];
            try {
                results[k] = run_realization(cfg.at_sweep(sweeps[jb.sweep]), jb.index, sweeps[jb.sweep], jb.sweep);
            } catch (const std::exception& e) {
                log::warn("realization ", jb.index, " aborted: ", e.what());
                for (const auto& a : cfg.algorithms) {
                    RunOutput o;
                    o.result.scenario = cfg.name;
                    o.result.realization = jb.index;
                    o.result.sweep = sweeps[jb.sweep];
                    o.result.algorithm = a;
                    o.result.status = "error";
                    o.result.failed = true;
                    results[k].push_back(std::move(o));
                }
            }
        }
    };
    const int nw = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < nw; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    const double T = cfg.effective_horizon(), dt = cfg.effective_dt();
    for (size_t k = 0; k < jobs.size(); ++k) {
        for (auto& o : results[k]) {
            if (jobs[k].index < cfg.traces && !o.trajectory.t.empty()) {
                const ScenarioConfig sc = cfg.at_sweep(sweeps[jobs[k].sweep]);
                const Realization real = generate_realization(sc, static_cast<std::uint64_t>(jobs[k].index), jobs[k].sweep);
                Prepared prep = prepare(sc, real);
                RelayChainParams rp{sc.relay.r_cc, sc.relay.r_min, static_cast<int>(o.trajectory.uavs())};
                UeFunction ue = sc.kind == ScenarioKind::STATIC ? static_ue(real.q_ue) : moving_ue(real.ue);
                char name[160];
                std::snprintf(name, sizeof name, "%s_s%zu_r%d_%s.json", cfg.name.c_str(), jobs[k].sweep, jobs[k].index,
                              o.result.algorithm.c_str());
                c.traces.emplace_back(name, trajectory_to_json(o.trajectory, ue, *prep.world->channel, rp, real.q_bs, T, dt));
            }
            c.rows.push_back(std::move(o.result));
        }
    }
    return c;
}

inline constexpr const char* kResultsSchema = "relay.results.v1";
inline constexpr const char* kAggregatesSchema = "relay.aggregates.v1";

inline std::string fmt_num(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string results_csv(const std::vector<RunResult>& rows) {
    std::ostringstream os;
    os << "schema,scenario,realization,sweep,algorithm,status,connection_time,outage_time,outage_fraction,data_bits,failed,"
          "fallback,lifts,waits,min_r1,min_r2\n";
    for (const auto& r : rows)
        os << kResultsSchema << ',' << r.scenario << ',' << r.realization << ',' << fmt_num(r.sweep) << ',' << r.algorithm << ','
           << r.status << ',' << fmt_num(r.connection_time) << ',' << fmt_num(r.outage_time) << ','
           << fmt_num(r.outage_fraction) << ',' << fmt_num(r.data) << ',' << (r.failed ? 1 : 0) << ',' << (r.fallback ? 1 : 0)
           << ',' << r.lifts << ',' << r.waits << ',' << fmt_num(r.min_r1) << ',' << fmt_num(r.min_r2) << '\n';
    return os.str();
}

inline std::string timings_csv(const std::vector<RunResult>& rows) {
    std::ostringstream os;
    os << "scenario,realization,sweep,algorithm,wall_seconds\n";
    for (const auto& r : rows)
        os << r.scenario << ',' << r.realization << ',' << fmt_num(r.sweep) << ',' << r.algorithm << ',' << fmt_num(r.wall_seconds)
           << '\n';
    return os.str();
}

struct AggregateRow {
    std::string family;
    std::string algorithm;
    double sweep;
    double x;
    double value;
};

// Pure fold over rows: scalar metrics per (algorithm, sweep) plus mean rate / cumulative data curves.
inline std::vector<AggregateRow> aggregate(const std::vector<RunResult>& rows, double dt) {
    struct Acc {
        int n = 0, failed = 0, finite = 0;
        double tc_sum = 0, data_sum = 0, outage_sum = 0;
        std::vector<double> trace_sum;
        int traces = 0;
    };
    std::map<std::pair<std::string, std::string>, Acc> acc;  // key: (algorithm, sweep text)
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::string, double> sweep_value;
    for (const auto& r : rows) {
        const std::string sk = fmt_num(r.sweep);
        sweep_value[sk] = r.sweep;
        auto key = std::pair{r.algorithm, sk};
        if (!acc.count(key)) order.push_back(key);
        Acc& a = acc[key];
        ++a.n;
        if (r.failed) ++a.failed;
        if (std::isfinite(r.connection_time)) {
            ++a.finite;
            a.tc_sum += r.connection_time;
        }
        a.data_sum += r.data;
        a.outage_sum += r.outage_fraction;
        if (!r.trace.empty()) {
            if (a.trace_sum.size() < r.trace.size()) a.trace_sum.resize(r.trace.size(), 0.0);
            for (size_t i = 0; i < r.trace.size(); ++i) a.trace_sum[i] += r.trace[i];
            ++a.traces;
        }
    }
    std::vector<AggregateRow> out;
    for (const auto& key : order) {
        const Acc& a = acc[key];
        const double sv = sweep_value[key.second];
        const double x = std::isnan(sv) ? 0.0 : sv;
        out.push_back({"tc_mean", key.first, sv, x, a.finite ? a.tc_sum / a.finite : kInf});
        out.push_back({"fail_prob", key.first, sv, x, static_cast<double>(a.failed) / a.n});
        out.push_back({"data_mean", key.first, sv, x, a.data_sum / a.n});
        out.push_back({"outage_fraction", key.first, sv, x, a.outage_sum / a.n});
        double cum = 0.0;
        for (size_t i = 0; i < a.trace_sum.size(); ++i) {
            const double mean = a.trace_sum[i] / a.traces;
            out.push_back({"rate_vs_time", key.first, sv, static_cast<double>(i) * dt, mean});
            cum += dt * mean;
            out.push_back({"data_vs_time", key.first, sv, static_cast<double>(i + 1) * dt, cum});
        }
    }
    return out;
}

inline std::string aggregates_csv(const std::vector<AggregateRow>& rows, const std::string& sweep_parameter) {
    std::ostringstream os;
    os << "schema,family,algorithm,sweep_parameter,sweep,x,value\n";
    for (const auto& r : rows)
        os << kAggregatesSchema << ',' << r.family << ',' << r.algorithm << ',' << sweep_parameter << ',' << fmt_num(r.sweep) << ','
           << fmt_num(r.x) << ',' << fmt_num(r.value) << '\n';
    return os.str();
}

}  // namespace relay
