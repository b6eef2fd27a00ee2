#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relay/experiments.hpp"

namespace fs = std::filesystem;
using namespace relay;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> mc;
    std::string out = "out";
    std::string algo;
    int workers = 1;
    int realization = 0;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) out.push_back(tok);
    return out;
}

ScenarioConfig load(const Options& o, std::optional<ScenarioKind> force = std::nullopt) {
    json j = o.config.empty() ? json::object() : read_json_file(o.config);
    if (force) j["kind"] = *force == ScenarioKind::STATIC ? "static" : "moving";
    if (o.seed) j["seed"] = *o.seed;
    if (o.mc) j["mc"] = *o.mc;
    if (!o.algo.empty()) j["algorithms"] = split_list(o.algo);
    return scenario_from_json(j);
}

void write_campaign(const Campaign& c, const fs::path& out) {
    fs::create_directories(out / "traces");
    write_text((out / "results.csv").string(), results_csv(c.rows));
    write_text((out / "timings.csv").string(), timings_csv(c.rows));
    write_text((out / "aggregates.csv").string(),
               aggregates_csv(aggregate(c.rows, c.cfg.effective_dt()), c.cfg.sweep_parameter));
    for (const auto& [name, j] : c.traces) write_text((out / "traces" / name).string(), j.dump(1));
}

void dump_env(const ScenarioConfig& cfg, const fs::path& out) {
    fs::create_directories(out / "env");
    const auto sweeps = cfg.sweep_points();
    for (size_t s = 0; s < sweeps.size(); ++s)
        for (int i = 0; i < cfg.mc; ++i) {
            const ScenarioConfig sc = cfg.at_sweep(sweeps[s]);
            const Realization r = generate_realization(sc, static_cast<std::uint64_t>(i), s);
            json j = environment_to_json(r.env);
            j["bs"] = to_json(r.q_bs);
            j["ue"] = to_json(r.q_ue);
            if (sc.kind == ScenarioKind::MOVING) {
                json track = json::array();
                for (const auto& p : r.ue.positions) track.push_back(to_json(p));
                j["ue_trajectory"] = {{"tau", r.ue.tau}, {"positions", track}};
            }
            char name[128];
            std::snprintf(name, sizeof name, "%s_s%zu_r%d.json", cfg.name.c_str(), s, i);
            write_text((out / "env" / name).string(), j.dump(1));
        }
}

// One realization, one summary line per algorithm.
int plan_one(const ScenarioConfig& cfg, int realization, const fs::path& out) {
    auto outs = run_realization(cfg, realization, std::nan(""), 0);
    Campaign c;
    c.cfg = cfg;
    c.cfg.mc = realization + 1;
    for (auto& o : outs) {
        std::cout << o.result.algorithm << ": status=" << o.result.status << " T_c=" << fmt_num(o.result.connection_time)
                  << " data=" << fmt_num(o.result.data) << " outage=" << fmt_num(o.result.outage_fraction)
                  << " failed=" << o.result.failed << " fallback=" << o.result.fallback << '\n';
        c.rows.push_back(o.result);
    }
    c.cfg.traces = 0;
    write_campaign(c, out);
    const Realization real = generate_realization(cfg, static_cast<std::uint64_t>(realization));
    Prepared prep = prepare(cfg, real);
    const RelayChainParams rp2{cfg.relay.r_cc, cfg.relay.r_min, 2};
    for (auto& o : outs) {
        RelayChainParams rp = rp2;
        rp.K = static_cast<int>(o.trajectory.uavs());
        UeFunction ue = cfg.kind == ScenarioKind::STATIC ? static_ue(real.q_ue) : moving_ue(real.ue);
        write_text((out / "traces" / (cfg.name + "_" + o.result.algorithm + ".json")).string(),
                   trajectory_to_json(o.trajectory, ue, *prep.world->channel, rp, real.q_bs, cfg.effective_horizon(),
                                      cfg.effective_dt())
                       .dump(1));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-UAV aerial relay planner"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "scenario JSON");
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--mc", o.mc, "Monte-Carlo realizations");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--algo", o.algo, "comma-separated algorithm list");
        sub->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    };
    auto* ps = app.add_subcommand("plan-static", "plan one static-UE realization");
    auto* pm = app.add_subcommand("plan-moving", "plan one moving-UE realization");
    auto* bm = app.add_subcommand("benchmark", "run the benchmark planners on one realization");
    auto* cp = app.add_subcommand("campaign", "Monte-Carlo campaign");
    auto* de = app.add_subcommand("dump-env", "export generated environments");
    for (auto* s : {ps, pm, bm, cp, de}) add_common(s);
    for (auto* s : {ps, pm, bm}) s->add_option("--realization", o.realization, "realization index")->check(CLI::NonNegativeNumber);
    CLI11_PARSE(app, argc, argv);

    try {
        if (ps->parsed()) {
            auto cfg = load(o, ScenarioKind::STATIC);
            if (o.algo.empty()) cfg.algorithms = {"prfi", "tentative"};
            cfg.mc = std::max(cfg.mc, o.realization + 1);
            return plan_one(cfg, o.realization, o.out);
        }
        if (pm->parsed()) {
            auto cfg = load(o, ScenarioKind::MOVING);
            if (o.algo.empty()) cfg.algorithms = {"prfi_data", "prfi_outage", "tentative"};
            cfg.mc = std::max(cfg.mc, o.realization + 1);
            return plan_one(cfg, o.realization, o.out);
        }
        if (bm->parsed()) {
            auto cfg = load(o);
            if (o.algo.empty()) {
                cfg.algorithms.clear();
                for (const auto& a : cfg.default_algorithms())
                    if (a.rfind("benchmark", 0) == 0) cfg.algorithms.push_back(a);
            }
            cfg.mc = std::max(cfg.mc, o.realization + 1);
            return plan_one(cfg, o.realization, o.out);
        }
        if (cp->parsed()) {
            const auto cfg = load(o);
            write_campaign(run_campaign(cfg, o.workers), o.out);
            return 0;
        }
        if (de->parsed()) {
            dump_env(load(o), o.out);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
