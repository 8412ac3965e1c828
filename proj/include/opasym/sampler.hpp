#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "potential.hpp"

namespace opasym {

struct SamplerOptions {
    int n = 2;
    double T = 1.0;
    long sweeps = 100000;
    long burn_in = 100000;
    int thin = 10;
    std::uint64_t seed = 0;
    /// Uniform independence proposals on [window.first, window.second]; they
    /// let particles hop between wells separated by a barrier.
    double global_move_rate = 0.0;
    std::optional<std::pair<double, double>> window;
    std::optional<std::vector<double>> initial;
    /// Histogram range and bin count.
    double hist_lo = -3.0;
    double hist_hi = 3.0;
    int bins = 40;
    /// Region boundaries for occupation fractions (e.g. gap midpoints).
    std::vector<double> region_edges;
    int batches = 50;
    bool keep_snapshots = false;
};

struct ChainState {
    std::vector<double> positions;
    double log_weight = 0.0;
    double step_scale = 0.0;
    std::uint64_t rng_seed = 0;
    long accepted = 0;
    long proposed = 0;
    long global_accepted = 0;
    long global_proposed = 0;
    double max_drift = 0.0;  // largest |incremental - recomputed| log weight per check interval

    double acceptance_rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

/// Mean and batch-means standard error of one scalar observable.
struct Estimate {
    double mean = 0.0;
    double sigma = 0.0;
};

struct GasHistogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<long> counts;
    std::vector<Estimate> fraction;  // particles per bin / n, averaged over snapshots

    int bins() const { return static_cast<int>(counts.size()); }
    double bin_lo(int k) const { return lo + (hi - lo) * k / bins(); }
    double bin_hi(int k) const { return lo + (hi - lo) * (k + 1) / bins(); }
};

struct SampleResult {
    ChainState state;
    GasHistogram histogram;
    std::vector<Estimate> occupation;  // one per region, regions split at region_edges
    Estimate mean_position;            // (1/n) sum x_i
    long snapshots = 0;
    std::vector<std::vector<double>> snapshot_positions;
};

namespace detail {

/// Per-batch averages of a fixed set of observables.
class BatchMeans {
public:
    BatchMeans(std::size_t observables, long total, int batches)
        : sums_(observables, 0.0), size_(std::max(1L, total / std::max(1, batches))) {}

    void add(const std::vector<double>& values) {
        for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += values[i];
        if (++in_batch_ == size_) {
            std::vector<double> m(sums_.size());
            for (std::size_t i = 0; i < sums_.size(); ++i) m[i] = sums_[i] / static_cast<double>(size_);
            means_.push_back(std::move(m));
            std::fill(sums_.begin(), sums_.end(), 0.0);
            in_batch_ = 0;
        }
    }

    Estimate result(std::size_t i) const {
        Estimate e;
        const std::size_t B = means_.size();
        if (B == 0) return e;
        for (const auto& m : means_) e.mean += m[i];
        e.mean /= static_cast<double>(B);
        if (B < 2) {
            e.sigma = std::numeric_limits<double>::infinity();
            return e;
        }
        double v = 0.0;
        for (const auto& m : means_) v += (m[i] - e.mean) * (m[i] - e.mean);
        e.sigma = std::sqrt(v / static_cast<double>(B - 1) / static_cast<double>(B));
        return e;
    }

private:
    std::vector<double> sums_;
    long size_;
    long in_batch_ = 0;
    std::vector<std::vector<double>> means_;
};

/// log prod_{j != i} |y - x_j|, with the running product renormalised by
/// frexp so that only one logarithm is taken.
inline double log_distance_product(const std::vector<double>& x, std::size_t i, double y) {
    double prod = 1.0;
    long expo = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (j == i) continue;
        prod *= std::abs(y - x[j]);
        if ((j & 15) == 15) {
            int e = 0;
            prod = std::frexp(prod, &e);
            expo += e;
        }
    }
    if (prod == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(prod) + static_cast<double>(expo) * std::log(2.0);
}

} // namespace detail

/// log of Delta(x)^2 prod e^{-(n/T) V(x_i)}.
inline double gas_log_weight(const Potential& pot, const std::vector<double>& x, double T) {
    const double beta = static_cast<double>(x.size()) / T;
    double lw = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lw -= beta * pot.value(x[i]);
        for (std::size_t j = i + 1; j < x.size(); ++j) lw += 2.0 * std::log(std::abs(x[i] - x[j]));
    }
    return lw;
}

/// Single-site Metropolis for the n-particle log-gas. The step scale is tuned
/// towards 30-50% acceptance during burn-in and frozen afterwards.
inline SampleResult sample_gas(const Potential& pot, const SamplerOptions& opt) {
    if (opt.n < 2) throw error("sample_gas: n must be >= 2");
    if (!(opt.T > 0)) throw error("sample_gas: T must be positive");
    if (opt.sweeps < 1 || opt.burn_in < 0 || opt.thin < 1) throw error("sample_gas: need sweeps >= 1, burn_in >= 0, thin >= 1");
    if (!(opt.hist_hi > opt.hist_lo) || opt.bins < 1) throw error("sample_gas: empty histogram range");
    if (pot.degree() < 2 || pot.coeffs().back() <= 0 || pot.degree() % 2 != 0) throw error("sample_gas: potential must be confining");
    if (opt.global_move_rate > 0 && !opt.window) throw error("sample_gas: global moves need a window");
    if (opt.window && !(opt.window->second > opt.window->first)) throw error("sample_gas: empty window");

    const auto nu = static_cast<std::size_t>(opt.n);
    const double beta = static_cast<double>(opt.n) / opt.T;
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SampleResult out;
    ChainState& st = out.state;
    st.rng_seed = opt.seed;
    if (opt.initial) {
        if (opt.initial->size() != nu) throw error("sample_gas: initial positions must have n entries");
        st.positions = *opt.initial;
    } else {
        const double lo = opt.window ? opt.window->first : pot.global_minimum().first - 1.0;
        const double hi = opt.window ? opt.window->second : pot.global_minimum().first + 1.0;
        for (std::size_t i = 0; i < nu; ++i) st.positions.push_back(lo + (hi - lo) * (static_cast<double>(i) + 0.5) / opt.n);
    }
    auto& x = st.positions;
    st.log_weight = gas_log_weight(pot, x, opt.T);
    if (!std::isfinite(st.log_weight)) throw error("sample_gas: initial configuration has zero weight");
    st.step_scale = (opt.window ? opt.window->second - opt.window->first : 2.0) / std::sqrt(static_cast<double>(opt.n)) * 0.5;

    const long snapshots = opt.sweeps / opt.thin;
    const std::size_t regions = opt.region_edges.size() + 1;
    const std::size_t bins = static_cast<std::size_t>(opt.bins);
    detail::BatchMeans stats(bins + regions + 1, snapshots, opt.batches);
    out.histogram.lo = opt.hist_lo;
    out.histogram.hi = opt.hist_hi;
    out.histogram.counts.assign(bins, 0);

    const long check_every = std::max(1L, 10000L / opt.n);  // sweeps per 10^4 single-site steps
    long tune_acc = 0, tune_prop = 0;
    std::vector<double> obs(bins + regions + 1);

    auto sweep = [&]() {
        for (std::size_t i = 0; i < nu; ++i) {
            const double old = x[i];
            double y;
            bool global = opt.global_move_rate > 0 && unif(rng) < opt.global_move_rate;
            if (global) {
                y = opt.window->first + (opt.window->second - opt.window->first) * unif(rng);
                ++st.global_proposed;
                // an independence proposal is only reversible between points of the window
                if (old < opt.window->first || old > opt.window->second) continue;
            } else {
                y = old + st.step_scale * gauss(rng);
                ++st.proposed;
                ++tune_prop;
            }
            const double d = -beta * (pot.value(y) - pot.value(old)) +
                             2.0 * (detail::log_distance_product(x, i, y) - detail::log_distance_product(x, i, old));
            if (d >= 0 || unif(rng) < std::exp(d)) {
                x[i] = y;
                st.log_weight += d;
                if (global) {
                    ++st.global_accepted;
                } else {
                    ++st.accepted;
                    ++tune_acc;
                }
            }
        }
    };

    for (long s = 0; s < opt.burn_in; ++s) {
        sweep();
        if (tune_prop >= 100L * opt.n) {
            const double r = static_cast<double>(tune_acc) / static_cast<double>(tune_prop);
            if (r < 0.3) st.step_scale *= 0.8;
            if (r > 0.5) st.step_scale *= 1.25;
            tune_acc = tune_prop = 0;
        }
    }
    st.accepted = st.proposed = st.global_accepted = st.global_proposed = 0;
    st.log_weight = gas_log_weight(pot, x, opt.T);

    for (long s = 1; s <= opt.sweeps; ++s) {
        sweep();
        if (s % check_every == 0) {
            const double full = gas_log_weight(pot, x, opt.T);
            st.max_drift = std::max(st.max_drift, std::abs(full - st.log_weight));
            st.log_weight = full;
        }
        if (s % opt.thin != 0) continue;
        std::fill(obs.begin(), obs.end(), 0.0);
        double sum = 0.0;
        for (double xi : x) {
            sum += xi;
            if (xi >= opt.hist_lo && xi < opt.hist_hi) {
                auto k = static_cast<std::size_t>((xi - opt.hist_lo) / (opt.hist_hi - opt.hist_lo) * opt.bins);
                k = std::min(k, bins - 1);
                ++out.histogram.counts[k];
                obs[k] += 1.0 / opt.n;
            }
            const auto r = static_cast<std::size_t>(std::upper_bound(opt.region_edges.begin(), opt.region_edges.end(), xi) -
                                                    opt.region_edges.begin());
            obs[bins + r] += 1.0 / opt.n;
        }
        obs[bins + regions] = sum / opt.n;
        stats.add(obs);
        if (opt.keep_snapshots) out.snapshot_positions.push_back(x);
        ++out.snapshots;
    }

    for (std::size_t k = 0; k < bins; ++k) out.histogram.fraction.push_back(stats.result(k));
    for (std::size_t r = 0; r < regions; ++r) out.occupation.push_back(stats.result(bins + r));
    out.mean_position = stats.result(bins + regions);
    return out;
}

/// Per-bin (observed - expected) / sigma. Sigma combines the batch-means error
/// with the multinomial error of the expected mass, which keeps empty tail bins finite.
inline std::vector<double> histogram_z_scores(const SampleResult& r, const std::vector<double>& expected, int n) {
    const auto& h = r.histogram;
    if (expected.size() != h.fraction.size()) throw error("histogram_z_scores: bin count mismatch");
    std::vector<double> z;
    const double draws = static_cast<double>(n) * static_cast<double>(std::max(1L, r.snapshots));
    for (std::size_t k = 0; k < expected.size(); ++k) {
        const double e = expected[k];
        const double sig = std::sqrt(h.fraction[k].sigma * h.fraction[k].sigma + e * (1.0 - e) / draws);
        const double d = h.fraction[k].mean - e;
        z.push_back(sig > 0 ? d / sig : (d == 0 ? 0.0 : std::numeric_limits<double>::infinity()));
    }
    return z;
}

/// Independent chains with seeds seed, seed+1, ...; each runs on its own task.
inline std::vector<SampleResult> sample_chains(const Potential& pot, const SamplerOptions& opt, int chains) {
    if (chains < 1) throw error("sample_chains: need at least one chain");
    std::vector<std::future<SampleResult>> jobs;
    for (int c = 0; c < chains; ++c) {
        SamplerOptions o = opt;
        o.seed = opt.seed + static_cast<std::uint64_t>(c);
        jobs.push_back(std::async(std::launch::async, [&pot, o] { return sample_gas(pot, o); }));
    }
    std::vector<SampleResult> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

struct CharPolyEstimate {
    double xi = 0.0;
    double log_abs_mean = std::numeric_limits<double>::quiet_NaN();  // ln |<prod (xi - x_i)>|
    double sigma = std::numeric_limits<double>::quiet_NaN();         // block jackknife
    int sign = 0;
    bool reliable = false;
    std::string note;
};

/// ln |<prod (xi - x_i)>| from stored snapshots, averaging the signed
/// products. Points inside the support, and averages that lose more than half
/// of their magnitude to sign cancellation, are flagged instead of estimated.
inline CharPolyEstimate estimate_char_poly(const std::vector<std::vector<double>>& snapshots, double xi,
                                           const std::vector<std::pair<double, double>>& support = {}, int blocks = 50) {
    CharPolyEstimate e;
    e.xi = xi;
    for (const auto& [a, b] : support)
        if (xi >= a && xi <= b) {
            e.note = "sign-oscillating, estimate unreliable (xi inside the support)";
            return e;
        }
    if (blocks < 2 || snapshots.size() < static_cast<std::size_t>(2 * blocks))
        throw error("estimate_char_poly: too few snapshots for the jackknife");
    std::vector<double> logs;
    std::vector<int> signs;
    logs.reserve(snapshots.size());
    for (const auto& s : snapshots) {
        double l = 0.0;
        int sg = 1;
        for (double x : s) {
            const double d = xi - x;
            if (d < 0) sg = -sg;
            l += std::log(std::abs(d));
        }
        logs.push_back(l);
        signs.push_back(sg);
    }
    const double lmax = *std::max_element(logs.begin(), logs.end());
    const std::size_t B = static_cast<std::size_t>(blocks), per = logs.size() / B, used = per * B;
    std::vector<double> block_sum(B, 0.0);
    double total = 0.0, total_abs = 0.0;
    for (std::size_t k = 0; k < used; ++k) {
        const double w = std::exp(logs[k] - lmax);
        block_sum[k / per] += signs[k] * w;
        total += signs[k] * w;
        total_abs += w;
    }
    if (std::abs(total) < 0.5 * total_abs) {
        e.note = "sign-oscillating, estimate unreliable (products cancel across snapshots)";
        return e;
    }
    e.sign = total > 0 ? 1 : -1;
    e.log_abs_mean = lmax + std::log(std::abs(total) / static_cast<double>(used));
    std::vector<double> loo(B);
    double mean = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        loo[b] = lmax + std::log(std::abs(total - block_sum[b]) / static_cast<double>(used - per));
        mean += loo[b];
    }
    mean /= static_cast<double>(B);
    double v = 0.0;
    for (double l : loo) v += (l - mean) * (l - mean);
    e.sigma = std::sqrt(v * static_cast<double>(B - 1) / static_cast<double>(B));
    e.reliable = true;
    return e;
}

} // namespace opasym
