#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rhale/binning.hpp"
#include "rhale/effects.hpp"
#include "rhale/error.hpp"
#include "rhale/model.hpp"
#include "rhale/stats.hpp"

namespace rhale {

inline double bin_effect(std::span<const double> effects) {
    if (effects.empty()) throw EmptyBinError("bin effect of an empty bin");
    return mean_of(effects);
}

inline double bin_std(std::span<const double> effects, double mu) {
    if (effects.size() < 2)
        throw DegenerateBinError("bin deviation needs at least 2 points, got " +
                                 std::to_string(effects.size()));
    double ss = 0.0;
    for (double x : effects) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(effects.size() - 1));
}

inline constexpr std::size_t kHistogramBuckets = 32;

// Distribution of the local effects inside one bin; stands in for a violin.
struct EffectHistogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> counts;
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

namespace detail {

// Linear-interpolated quantile of sorted data (the usual "type 7" definition).
inline double quantile_sorted(const std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    return i + 1 < v.size() ? v[i] + frac * (v[i + 1] - v[i]) : v[i];
}

}  // namespace detail

inline EffectHistogram effect_histogram(std::span<const double> effects,
                                        std::size_t buckets = kHistogramBuckets) {
    EffectHistogram h;
    h.counts.assign(buckets, 0);
    if (effects.empty()) return h;
    std::vector<double> v(effects.begin(), effects.end());
    std::sort(v.begin(), v.end());
    h.min = v.front();
    h.max = v.back();
    h.q1 = detail::quantile_sorted(v, 0.25);
    h.median = detail::quantile_sorted(v, 0.5);
    h.q3 = detail::quantile_sorted(v, 0.75);
    h.lo = h.min;
    h.hi = h.max;
    if (h.lo == h.hi) {
        h.lo -= 0.5;
        h.hi += 0.5;
    }
    const double w = (h.hi - h.lo) / static_cast<double>(buckets);
    for (double x : v) {
        auto b = static_cast<std::size_t>((x - h.lo) / w);
        h.counts[std::min(b, buckets - 1)]++;
    }
    return h;
}

struct Bin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double effect = 0.0;
    // Missing when the bin holds fewer than two points.
    std::optional<double> deviation;
    EffectHistogram histogram;

    double width() const { return hi - lo; }
    double deviation_or_zero() const { return deviation.value_or(0.0); }
};

struct BinStats {
    std::vector<Bin> bins;
    std::vector<std::string> warnings;

    std::size_t size() const { return bins.size(); }
    std::size_t total_count() const {
        std::size_t n = 0;
        for (const auto& b : bins) n += b.count;
        return n;
    }
};

// Per-bin mean and sample deviation of the local effects. Bins with a single
// point get a missing deviation and a warning; empty bins are an error.
inline BinStats compute_bin_stats(const LocalEffects& e, const Partition& p,
                                  std::size_t buckets = kHistogramBuckets) {
    auto idx = assign_bins(e.xs, p);
    std::vector<std::vector<double>> members(p.bins());
    for (std::size_t i = 0; i < e.size(); ++i) members[idx[i]].push_back(e.effects[i]);
    BinStats out;
    for (std::size_t k = 0; k < p.bins(); ++k) {
        const auto& m = members[k];
        if (m.empty())
            throw EmptyBinError("bin " + std::to_string(k) + " [" + format_double(p.limits[k]) + ", " +
                                format_double(p.limits[k + 1]) + ") holds no points");
        Bin b{p.limits[k], p.limits[k + 1], m.size(), bin_effect(m), std::nullopt,
              effect_histogram(m, buckets)};
        if (m.size() >= 2) {
            b.deviation = bin_std(m, b.effect);
        } else {
            out.warnings.push_back("bin " + std::to_string(k) +
                                   " holds a single point; its deviation is treated as 0");
        }
        out.bins.push_back(std::move(b));
    }
    return out;
}

enum class Accumulation {
    // Partial contribution of the bin containing x; continuous curve.
    interpolate,
    // Whole-bin sums up to and including the bin containing x.
    literal,
};

namespace detail {

inline std::size_t locate(const BinStats& s, double x) {
    if (s.bins.empty()) throw InputError("no bins");
    if (!(x >= s.bins.front().lo && x <= s.bins.back().hi))
        throw InputError("x = " + format_double(x) + " lies outside [" +
                         format_double(s.bins.front().lo) + ", " + format_double(s.bins.back().hi) + "]");
    if (x == s.bins.back().hi) return s.bins.size() - 1;
    auto it = std::upper_bound(s.bins.begin(), s.bins.end(), x,
                               [](double v, const Bin& b) { return v < b.lo; });
    return static_cast<std::size_t>(it - s.bins.begin()) - 1;
}

}  // namespace detail

inline double accumulate_effect(const BinStats& s, double x,
                                Accumulation mode = Accumulation::interpolate) {
    const std::size_t kx = detail::locate(s, x);
    double sum = 0.0;
    for (std::size_t k = 0; k < kx; ++k) sum += s.bins[k].effect * s.bins[k].width();
    const Bin& last = s.bins[kx];
    sum += last.effect * (mode == Accumulation::interpolate ? x - last.lo : last.width());
    return sum;
}

inline double accumulate_std(const BinStats& s, double x,
                             Accumulation mode = Accumulation::interpolate) {
    const std::size_t kx = detail::locate(s, x);
    double sum = 0.0;
    for (std::size_t k = 0; k < kx; ++k) {
        const double w = s.bins[k].width() * s.bins[k].deviation_or_zero();
        sum += w * w;
    }
    const Bin& last = s.bins[kx];
    const double w = (mode == Accumulation::interpolate ? x - last.lo : last.width()) * last.deviation_or_zero();
    return std::sqrt(sum + w * w);
}

struct BinningMode {
    enum class Kind { automatic, fixed, given };
    Kind kind = Kind::automatic;
    std::size_t k = 0;
    Partition partition;

    static BinningMode automatic() { return {}; }
    static BinningMode fixed(std::size_t k) { return {Kind::fixed, k, {}}; }
    static BinningMode given(Partition p) { return {Kind::given, 0, std::move(p)}; }
};

struct RhaleOptions {
    Accumulation accumulation = Accumulation::interpolate;
    // Shift the curve so that its mean over the data is zero.
    bool center = false;
    std::size_t histogram_buckets = kHistogramBuckets;
};

struct Knot {
    double x = 0.0;
    double y = 0.0;
};

struct EffectResult {
    std::size_t feature_index = 0;
    Partition partition;
    BinStats bins;
    BinningMode::Kind binning = BinningMode::Kind::automatic;
    BinningConfig config;
    // Objective of the chosen partition; only set for automatic binning.
    std::optional<double> objective;
    Accumulation accumulation = Accumulation::interpolate;
    bool centered = false;
    double centering_offset = 0.0;
    std::vector<std::string> warnings;

    double effect(double x) const {
        return accumulate_effect(bins, x, accumulation) - (centered ? centering_offset : 0.0);
    }
    double deviation(double x) const { return accumulate_std(bins, x, accumulation); }

    // Curve and envelope evaluated at the partition limits. The curve is exactly
    // linear between knots; the envelope is not (see accumulate_std).
    std::vector<Knot> curve_knots() const {
        std::vector<Knot> out;
        for (double z : partition.limits) out.push_back({z, effect(z)});
        return out;
    }
    std::vector<Knot> envelope_knots() const {
        std::vector<Knot> out;
        for (double z : partition.limits) out.push_back({z, deviation(z)});
        return out;
    }
};

inline EffectResult rhale(const LocalEffects& e, const BinningConfig& config,
                          const BinningMode& mode = BinningMode::automatic(),
                          const RhaleOptions& options = {}) {
    config.validate();
    const Range r = detail::effects_range(e);
    EffectResult out;
    out.feature_index = e.feature_index;
    out.binning = mode.kind;
    out.config = config;
    out.accumulation = options.accumulation;
    switch (mode.kind) {
        case BinningMode::Kind::automatic: {
            auto dp = dp_optimal_partition(e, config);
            out.partition = std::move(dp.partition);
            out.objective = dp.objective;
            break;
        }
        case BinningMode::Kind::fixed:
            out.partition = fixed_partition(r.min, r.max, mode.k);
            break;
        case BinningMode::Kind::given:
            out.partition = make_partition(mode.partition.limits);
            break;
    }
    out.bins = compute_bin_stats(e, out.partition, options.histogram_buckets);
    out.warnings = out.bins.warnings;
    if (options.center) {
        double sum = 0.0;
        for (double x : e.xs) sum += accumulate_effect(out.bins, x, options.accumulation);
        out.centering_offset = sum / static_cast<double>(e.size());
        out.centered = true;
    }
    return out;
}

inline EffectResult rhale(const FeatureMatrix& data, const ModelHandle& model, std::size_t s,
                          const BinningConfig& config,
                          const BinningMode& mode = BinningMode::automatic(),
                          const RhaleOptions& options = {}) {
    data.feature_range(s);
    return rhale(local_effects(model, data, s), config, mode, options);
}

// Discrete analogue of sigma*^2 = sigma^2 + E^2 for one coarse bin, with
// population (1/n) variances over the local effects.
struct CoarseDecomposition {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double total_variance = 0.0;   // popvar of every effect in the coarse bin
    double within_variance = 0.0;  // count-weighted mean of fine-bin popvars
    double bin_error = 0.0;        // count-weighted mean of squared residuals
    // Fine-bin mean minus coarse-bin mean, one per fine bin inside this coarse bin.
    std::vector<double> residuals;
};

struct DecompositionReport {
    std::vector<CoarseDecomposition> bins;
};

inline DecompositionReport decompose_heterogeneity(const LocalEffects& e, const Partition& coarse,
                                                   const Partition& fine) {
    if (coarse.front() != fine.front() || coarse.back() != fine.back())
        throw InputError("fine partition must span the coarse partition");
    for (double z : coarse.limits)
        if (!std::binary_search(fine.limits.begin(), fine.limits.end(), z))
            throw InputError("fine partition does not refine the coarse one (missing limit " +
                             format_double(z) + ")");

    auto fine_idx = assign_bins(e.xs, fine);
    std::vector<Moments> fine_m(fine.bins());
    for (std::size_t i = 0; i < e.size(); ++i) fine_m[fine_idx[i]].add(e.effects[i]);
    for (std::size_t f = 0; f < fine.bins(); ++f)
        if (fine_m[f].n == 0)
            throw DegenerateBinError("fine bin " + std::to_string(f) + " holds no points");

    auto coarse_idx = assign_bins(e.xs, coarse);
    std::vector<std::vector<double>> coarse_members(coarse.bins());
    for (std::size_t i = 0; i < e.size(); ++i) coarse_members[coarse_idx[i]].push_back(e.effects[i]);

    DecompositionReport report;
    std::size_t f = 0;
    for (std::size_t c = 0; c < coarse.bins(); ++c) {
        CoarseDecomposition d;
        d.lo = coarse.limits[c];
        d.hi = coarse.limits[c + 1];
        const auto& m = coarse_members[c];
        d.count = m.size();
        const double coarse_mean = mean_of(m);
        d.total_variance = population_variance_of(m);
        double within = 0.0, error = 0.0;
        for (; f < fine.bins() && fine.limits[f] < d.hi; ++f) {
            const double n = static_cast<double>(fine_m[f].n);
            const double rho = fine_m[f].mean - coarse_mean;
            within += n * fine_m[f].population_variance();
            error += n * rho * rho;
            d.residuals.push_back(rho);
        }
        if (d.count > 0) {
            d.within_variance = within / static_cast<double>(d.count);
            d.bin_error = error / static_cast<double>(d.count);
        }
        report.bins.push_back(std::move(d));
    }
    return report;
}

}  // namespace rhale
