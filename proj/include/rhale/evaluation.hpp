#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rhale/binning.hpp"
#include "rhale/error.hpp"
#include "rhale/estimator.hpp"
#include "rhale/synthetic.hpp"

namespace rhale {

// Dense-oracle statistics averaged onto one coarser bin, weighting each dense
// bin by its overlap with the coarse bin.
struct AggregatedBin {
    double lo = 0.0;
    double hi = 0.0;
    double mu = 0.0;
    double sigma2 = 0.0;
    // Overlap-weighted mean of (dense mu - aggregated mu)^2.
    double residual2 = 0.0;

    double sigma() const { return std::sqrt(sigma2); }
};

inline std::vector<AggregatedBin> aggregate_oracle(const synthetic::DenseOracle& oracle,
                                                   const Partition& p) {
    const auto& dz = oracle.partition.limits;
    std::vector<AggregatedBin> out;
    for (std::size_t k = 0; k < p.bins(); ++k) {
        AggregatedBin a{p.limits[k], p.limits[k + 1]};
        std::vector<std::pair<std::size_t, double>> overlaps;
        double total = 0.0;
        for (std::size_t d = 0; d + 1 < dz.size(); ++d) {
            const double w = std::min(a.hi, dz[d + 1]) - std::max(a.lo, dz[d]);
            if (w > 0.0) {
                overlaps.emplace_back(d, w);
                total += w;
            }
        }
        if (total <= 0.0)
            throw InputError("bin [" + format_double(a.lo) + ", " + format_double(a.hi) +
                             "] does not overlap the dense reference");
        for (auto [d, w] : overlaps) {
            a.mu += w * oracle.mu(d);
            a.sigma2 += w * oracle.sigma2(d);
        }
        a.mu /= total;
        a.sigma2 /= total;
        for (auto [d, w] : overlaps) a.residual2 += w * (oracle.mu(d) - a.mu) * (oracle.mu(d) - a.mu);
        a.residual2 /= total;
        out.push_back(a);
    }
    return out;
}

namespace detail {

inline Partition partition_of(const BinStats& est) {
    Partition p;
    for (const auto& b : est.bins) p.limits.push_back(b.lo);
    if (!est.bins.empty()) p.limits.push_back(est.bins.back().hi);
    return p;
}

}  // namespace detail

// Mean absolute error of the bin effects, normalised by |Z| - 1 (the bin count).
inline double l_mu(const synthetic::DenseOracle& gt, const BinStats& est) {
    const auto agg = aggregate_oracle(gt, detail::partition_of(est));
    double sum = 0.0;
    for (std::size_t k = 0; k < agg.size(); ++k) sum += std::abs(agg[k].mu - est.bins[k].effect);
    return sum / static_cast<double>(agg.size());
}

// As l_mu, on the bin deviations; the reference deviation is the square root of
// the overlap-weighted mean dense variance.
inline double l_sigma(const synthetic::DenseOracle& gt, const BinStats& est) {
    const auto agg = aggregate_oracle(gt, detail::partition_of(est));
    double sum = 0.0;
    for (std::size_t k = 0; k < agg.size(); ++k)
        sum += std::abs(agg[k].sigma() - est.bins[k].deviation_or_zero());
    return sum / static_cast<double>(agg.size());
}

// Mean residual error sum_k E(z_{k-1}, z_k) / |Z|, normalised by the number of limits.
inline double l_rho(const synthetic::DenseOracle& gt, const Partition& est) {
    const auto agg = aggregate_oracle(gt, est);
    double sum = 0.0;
    for (const auto& a : agg) sum += std::sqrt(a.residual2);
    return sum / static_cast<double>(est.limits.size());
}

// Bin statistics that reproduce the aggregated oracle exactly (zero error by construction).
inline BinStats oracle_as_estimate(const synthetic::DenseOracle& gt, const Partition& p) {
    BinStats out;
    for (const auto& a : aggregate_oracle(gt, p))
        out.bins.push_back(Bin{a.lo, a.hi, 0, a.mu, a.sigma(), {}});
    return out;
}

inline std::vector<std::size_t> default_k_list() {
    std::vector<std::size_t> ks;
    for (std::size_t k = 1; k <= 30; ++k) ks.push_back(k);
    for (std::size_t k : {40, 50, 75, 100}) ks.push_back(k);
    return ks;
}

// splitmix64 step; used to derive independent per-trial seeds from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

struct BenchmarkConfig {
    std::size_t feature = 0;
    std::vector<std::size_t> k_list = default_k_list();
    BinningConfig binning;
    std::size_t trials = 30;
    std::size_t n = 500;
    std::size_t n_dense = synthetic::kDenseSamples;
    std::size_t k_dense = synthetic::kDenseBins;
    std::uint64_t master_seed = 0;
};

struct TrialRow {
    std::string method;  // "auto" or "fixed"
    // Requested K for fixed rows; the chosen bin count for auto rows.
    std::size_t k = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    // False when a fixed-size partition leaves a bin with fewer than two points.
    bool feasible = true;
    double l_mu = std::numeric_limits<double>::quiet_NaN();
    double l_sigma = std::numeric_limits<double>::quiet_NaN();
    double l_rho = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> limits;
};

struct MetricSummary {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double stddev = std::numeric_limits<double>::quiet_NaN();
};

struct MethodSummary {
    std::string method;
    std::size_t k = 0;  // 0 for auto
    std::size_t feasible_trials = 0;
    MetricSummary l_mu, l_sigma, l_rho;
};

struct BenchmarkReport {
    synthetic::GeneratorSpec spec;
    BenchmarkConfig config;
    std::uint64_t oracle_seed = 0;
    std::vector<TrialRow> rows;
    std::vector<MethodSummary> summaries;

    const MethodSummary& automatic() const { return summaries.front(); }

    // Fixed-size summary with the lowest mean of a metric among the K values
    // that were feasible in every trial.
    const MethodSummary& best_fixed(MetricSummary MethodSummary::*metric) const {
        const MethodSummary* best = nullptr;
        for (const auto& s : summaries) {
            if (s.method != "fixed" || s.feasible_trials != config.trials) continue;
            if (!best || (s.*metric).mean < (best->*metric).mean) best = &s;
        }
        if (!best) throw InfeasibleError("no fixed-size partition was feasible in every trial");
        return *best;
    }
};

namespace detail {

// Mean and sample deviation, summed in sorted order so the result does not
// depend on trial order.
inline MetricSummary summarize(std::vector<double> v) {
    MetricSummary s;
    if (v.empty()) return s;
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return s;
}

inline void score(TrialRow& row, const synthetic::DenseOracle& oracle, const BinStats& stats,
                  const Partition& p) {
    row.l_mu = l_mu(oracle, stats);
    row.l_sigma = l_sigma(oracle, stats);
    row.l_rho = l_rho(oracle, p);
    row.limits = p.limits;
}

}  // namespace detail

inline std::vector<MethodSummary> summarize_rows(const std::vector<TrialRow>& rows,
                                                 const std::vector<std::size_t>& k_list) {
    auto collect = [&](const std::string& method, std::size_t k) {
        MethodSummary s{method, k};
        std::vector<double> mu, sigma, rho;
        for (const auto& r : rows) {
            if (r.method != method || (method == "fixed" && r.k != k) || !r.feasible) continue;
            mu.push_back(r.l_mu);
            sigma.push_back(r.l_sigma);
            rho.push_back(r.l_rho);
        }
        s.feasible_trials = mu.size();
        s.l_mu = detail::summarize(mu);
        s.l_sigma = detail::summarize(sigma);
        s.l_rho = detail::summarize(rho);
        return s;
    };
    std::vector<MethodSummary> out{collect("auto", 0)};
    for (auto k : k_list) out.push_back(collect("fixed", k));
    return out;
}

// For every trial: a fresh sample, automatic binning and each fixed K, scored
// against one dense oracle built once per benchmark.
inline BenchmarkReport run_benchmark(const synthetic::GeneratorSpec& spec, const BenchmarkConfig& config) {
    if (config.trials < 1) throw InputError("need at least one trial");
    config.binning.validate();
    BenchmarkReport report{spec, config};
    report.oracle_seed = derive_seed(config.master_seed, 0);
    synthetic::GeneratorSpec dense_spec = spec;
    dense_spec.seed = report.oracle_seed;
    const auto oracle = synthetic::dense_oracle(dense_spec, config.n_dense, config.k_dense, config.feature);

    for (std::size_t t = 0; t < config.trials; ++t) {
        synthetic::GeneratorSpec trial_spec = spec;
        trial_spec.n = config.n;
        trial_spec.seed = derive_seed(config.master_seed, t + 1);
        const auto data = synthetic::generate(trial_spec);
        const auto effects = local_effects_analytic(data.model, data.features, config.feature);

        TrialRow automatic{"auto", 0, t, trial_spec.seed};
        try {
            const auto result = rhale(effects, config.binning);
            automatic.k = result.partition.bins();
            detail::score(automatic, oracle, result.bins, result.partition);
        } catch (const InfeasibleError& err) {
            throw InfeasibleError("trial " + std::to_string(t) + ": " + err.what());
        }
        report.rows.push_back(std::move(automatic));

        const Range r = detail::effects_range(effects);
        for (auto k : config.k_list) {
            TrialRow row{"fixed", k, t, trial_spec.seed};
            const Partition p = fixed_partition(r.min, r.max, k);
            auto idx = assign_bins(effects.xs, p);
            std::vector<std::size_t> counts(k, 0);
            for (auto b : idx) counts[b]++;
            row.feasible = std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c >= 2; });
            if (row.feasible) detail::score(row, oracle, compute_bin_stats(effects, p), p);
            report.rows.push_back(std::move(row));
        }
    }
    report.summaries = summarize_rows(report.rows, config.k_list);
    return report;
}

}  // namespace rhale
