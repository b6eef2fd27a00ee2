#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "relay/env.hpp"

namespace relay {

struct LinkBudget {
    double tx_power_w = 0.0;
    double tx_gain = 1.0;
    double rx_gain = 1.0;
    double wavelength_m = 0.0;
    double bandwidth_hz = 0.0;
    double noise_w = 0.0;
    double absorption_db_per_m = 0.0;
    double c_zero = 0.0;

    static double dbm_to_w(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
    static double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

    static LinkBudget from_db(double tx_dbm, double gain_t_dbi, double gain_r_dbi, double carrier_ghz,
                              double bandwidth_mhz, double noise_dbm, double absorption_db_per_m) {
        LinkBudget b;
        b.tx_power_w = dbm_to_w(tx_dbm);
        b.tx_gain = db_to_linear(gain_t_dbi);
        b.rx_gain = db_to_linear(gain_r_dbi);
        b.wavelength_m = 299792458.0 / (carrier_ghz * 1e9);
        b.bandwidth_hz = bandwidth_mhz * 1e6;
        b.noise_w = dbm_to_w(noise_dbm);
        b.absorption_db_per_m = absorption_db_per_m;
        return b;
    }

    // SNR(d) = A / d^2
    double snr_constant() const {
        const double k = wavelength_m / (4.0 * std::numbers::pi);
        return tx_power_w * tx_gain * rx_gain * k * k / noise_w;
    }

    void set_c_zero_for_spacing(double min_spacing);

    void validate() const {
        if (!(tx_power_w > 0 && tx_gain > 0 && rx_gain > 0 && wavelength_m > 0 && bandwidth_hz > 0 && noise_w > 0 &&
              c_zero > 0 && absorption_db_per_m >= 0))
            throw std::invalid_argument("link budget parameters must be positive");
    }
};

inline double capacity_from_snr(double bandwidth_hz, double snr) { return bandwidth_hz * std::log2(1.0 + snr); }

inline double capacity_distance(const LinkBudget& b, double d) {
    if (d == 0.0) return b.c_zero;
    return capacity_from_snr(b.bandwidth_hz, b.snr_constant() / (d * d));
}

inline void LinkBudget::set_c_zero_for_spacing(double min_spacing) {
    c_zero = 0.0;
    c_zero = capacity_distance(*this, min_spacing / 1000.0);
}

inline double capacity_inverse(const LinkBudget& b, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("capacity_inverse requires r > 0");
    const double denom = std::expm1(r / b.bandwidth_hz * std::numbers::ln2);
    return std::sqrt(b.snr_constant() / denom);
}

enum class ChannelMode { LOS_MAP, TOMOGRAPHIC };

class ChannelModel {
public:
    ChannelModel(LinkBudget budget, ChannelMode mode, const Environment& env)
        : budget_(budget), mode_(mode), env_(&env), snr_a_(budget.snr_constant()) {
        budget_.validate();
    }

    const LinkBudget& budget() const { return budget_; }
    ChannelMode mode() const { return mode_; }
    const Environment& env() const { return *env_; }

    double capacity(const Position& a, const Position& b) const {
        auto [p, q] = detail::canonical(a, b);
        const double d = distance(p, q);
        if (d == 0.0) return budget_.c_zero;
        if (mode_ == ChannelMode::LOS_MAP) {
            if (!line_of_sight(*env_, p, q)) return 0.0;
            return capacity_from_snr(budget_.bandwidth_hz, snr_a_ / (d * d));
        }
        const double inside = segment_inside_length(*env_, p, q);
        double snr = snr_a_ / (d * d);
        if (inside > 0.0) snr *= std::pow(10.0, -budget_.absorption_db_per_m * inside / 10.0);
        return capacity_from_snr(budget_.bandwidth_hz, snr);
    }

private:
    LinkBudget budget_;
    ChannelMode mode_;
    const Environment* env_;
    double snr_a_;
};

struct RelayChainParams {
    double r_cc = 0.0;
    double r_ue_min = 0.0;
    int K = 2;
    void validate() const {
        if (!(r_cc > 0.0 && r_ue_min > 0.0 && K >= 1)) throw std::invalid_argument("relay chain parameters invalid");
    }
};

struct ChainRates {
    std::vector<double> r;  // r_1..r_K
    double r_ue = 0.0;
};

// Decode-and-forward chain from per-hop capacities c_0 = c(BS,q_1), ..., c_K = c(q_K,UE).
inline ChainRates chain_from_hops(const std::vector<double>& hops, double r_cc) {
    ChainRates out;
    const size_t K = hops.size() - 1;
    out.r.resize(K);
    double prev = hops[0];
    out.r[0] = prev;
    for (size_t k = 1; k < K; ++k) {
        prev = std::max(0.0, std::min(prev - r_cc, hops[k]));
        out.r[k] = prev;
    }
    out.r_ue = std::max(0.0, std::min(prev - r_cc, hops[K]));
    return out;
}

inline ChainRates relay_chain_rates(const ChannelModel& model, const RelayChainParams& params,
                                    const std::vector<Position>& Q, const Position& q_bs, const Position& q_ue) {
    if (Q.empty()) throw std::invalid_argument("configuration point needs at least one column");
    std::vector<double> hops;
    hops.reserve(Q.size() + 1);
    hops.push_back(model.capacity(q_bs, Q[0]));
    for (size_t k = 1; k < Q.size(); ++k) hops.push_back(model.capacity(Q[k - 1], Q[k]));
    hops.push_back(model.capacity(Q.back(), q_ue));
    return chain_from_hops(hops, params.r_cc);
}

// Two-relay chain: (r_1, r_2, r_ue).
struct Chain2 {
    double r1, r2, r_ue;
};
inline Chain2 chain2(double c_b1, double c_12, double c_2u, double r_cc) {
    const double r2 = std::max(0.0, std::min(c_b1 - r_cc, c_12));
    return {c_b1, r2, std::max(0.0, std::min(r2 - r_cc, c_2u))};
}

// Bitset over grid point ids.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(size_t n, bool fill = false) : n_(n), w_((n + 63) / 64, fill ? ~std::uint64_t{0} : 0) {
        if (fill) trim();
    }

    size_t universe() const { return n_; }
    bool test(PointId i) const { return (w_[static_cast<size_t>(i) >> 6] >> (i & 63)) & 1U; }
    void set(PointId i) { w_[static_cast<size_t>(i) >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(PointId i) { w_[static_cast<size_t>(i) >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    size_t count() const {
        size_t c = 0;
        for (auto x : w_) c += static_cast<size_t>(std::popcount(x));
        return c;
    }
    bool empty() const {
        for (auto x : w_)
            if (x) return false;
        return true;
    }
    PointSet& operator&=(const PointSet& o) {
        for (size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
        return *this;
    }
    PointSet& operator|=(const PointSet& o) {
        for (size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
        return *this;
    }
    friend PointSet operator&(PointSet a, const PointSet& b) { return a &= b; }
    friend PointSet operator|(PointSet a, const PointSet& b) { return a |= b; }
    friend bool operator==(const PointSet&, const PointSet&) = default;
    bool subset_of(const PointSet& o) const {
        for (size_t i = 0; i < w_.size(); ++i)
            if (w_[i] & ~o.w_[i]) return false;
        return true;
    }

    template <class F>
    void for_each(F&& f) const {
        for (size_t wi = 0; wi < w_.size(); ++wi) {
            std::uint64_t x = w_[wi];
            while (x) {
                const int b = std::countr_zero(x);
                f(static_cast<PointId>(wi * 64 + static_cast<size_t>(b)));
                x &= x - 1;
            }
        }
    }
    std::vector<PointId> ids() const {
        std::vector<PointId> out;
        for_each([&](PointId i) { out.push_back(i); });
        return out;
    }

private:
    void trim() {
        if (n_ % 64) w_.back() &= (std::uint64_t{1} << (n_ % 64)) - 1;
    }
    size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

// Capacities between all grid point pairs plus memoised rows from arbitrary anchors.
// Rows and reach sets are safe for concurrent readers.
class LinkTable {
public:
    LinkTable(const ChannelModel& model, const GridMap& grid) : model_(&model), grid_(&grid), n_(grid.size()) {
        cap_.assign(n_ * n_, 0.0);
        for (size_t i = 0; i < n_; ++i) {
            cap_[i * n_ + i] = model.capacity(grid.position(static_cast<PointId>(i)), grid.position(static_cast<PointId>(i)));
            for (size_t j = i + 1; j < n_; ++j) {
                const double c = model.capacity(grid.position(static_cast<PointId>(i)), grid.position(static_cast<PointId>(j)));
                cap_[i * n_ + j] = c;
                cap_[j * n_ + i] = c;
            }
        }
    }

    const ChannelModel& model() const { return *model_; }
    const GridMap& grid() const { return *grid_; }
    size_t size() const { return n_; }

    double between(PointId a, PointId b) const { return cap_[static_cast<size_t>(a) * n_ + static_cast<size_t>(b)]; }
    const double* row(PointId a) const { return &cap_[static_cast<size_t>(a) * n_]; }

    // Capacity from an arbitrary position to every grid point.
    std::shared_ptr<const std::vector<double>> anchor_row(const Position& q) const {
        std::lock_guard lock(mu_);
        auto it = anchors_.find(q);
        if (it != anchors_.end()) return it->second;
        auto row = std::make_shared<std::vector<double>>(n_);
        for (size_t j = 0; j < n_; ++j) (*row)[j] = model_->capacity(q, grid_->position(static_cast<PointId>(j)));
        anchors_.emplace(q, row);
        return row;
    }

    PointSet threshold(const double* row, double r) const {
        PointSet s(n_);
        for (size_t j = 0; j < n_; ++j)
            if (row[j] >= r) s.set(static_cast<PointId>(j));
        return s;
    }

    // R(q, r)
    PointSet reach(const Position& q, double r) const {
        return memo({q, r, -1.0}, [&] { return threshold(anchor_row(q)->data(), r); });
    }
    PointSet reach(PointId q, double r) const { return threshold(row(q), r); }

    // {q'' : exists q' in first with c(q', q'') >= r2}
    PointSet expand(const PointSet& first, double r2) const {
        PointSet out(n_);
        first.for_each([&](PointId q) {
            const double* rw = row(q);
            for (size_t j = 0; j < n_; ++j)
                if (rw[j] >= r2) out.set(static_cast<PointId>(j));
        });
        return out;
    }

    // R(q, r, r2)
    PointSet reach_two_hop(const Position& q, double r, double r2) const {
        return memo({q, r, r2}, [&] { return expand(reach(q, r), r2); });
    }

private:
    struct Key {
        Position q;
        double r, r2;
        friend auto operator<=>(const Key&, const Key&) = default;
    };
    template <class F>
    PointSet memo(const Key& k, F&& make) const {
        {
            std::lock_guard lock(memo_mu_);
            auto it = reach_memo_.find(k);
            if (it != reach_memo_.end()) return it->second;
        }
        PointSet s = make();
        std::lock_guard lock(memo_mu_);
        return reach_memo_.emplace(k, std::move(s)).first->second;
    }

    const ChannelModel* model_;
    const GridMap* grid_;
    size_t n_;
    std::vector<double> cap_;
    mutable std::mutex mu_;
    mutable std::map<Position, std::shared_ptr<const std::vector<double>>> anchors_;
    mutable std::mutex memo_mu_;
    mutable std::map<Key, PointSet> reach_memo_;
};

// Uncached reference forms over an explicit point list.
inline std::vector<Position> reach_set(const ChannelModel& model, const std::vector<Position>& grid_pts, const Position& q,
                                       double r) {
    std::vector<Position> out;
    for (const auto& p : grid_pts)
        if (model.capacity(q, p) >= r) out.push_back(p);
    return out;
}

inline std::vector<Position> reach_set_two_hop(const ChannelModel& model, const std::vector<Position>& grid_pts,
                                               const Position& q, double r, double r2) {
    std::vector<Position> first = reach_set(model, grid_pts, q, r);
    std::vector<Position> out;
    for (const auto& p : grid_pts)
        for (const auto& m : first)
            if (model.capacity(m, p) >= r2) {
                out.push_back(p);
                break;
            }
    return out;
}

}  // namespace relay
