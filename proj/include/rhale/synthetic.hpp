#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rhale/binning.hpp"
#include "rhale/error.hpp"
#include "rhale/estimator.hpp"
#include "rhale/matrix.hpp"
#include "rhale/model.hpp"

namespace rhale::synthetic {

enum class Example {
    // Y = 0.2 x1 - 5 x2 + 10 x2 1{x3 > 0} + noise, x ~ U(-1, 1)^3.
    concept_demo,
    // sin(2 pi x1)(1{x1<0} - 2 1{x3<0}) + x1 x2 + x2 with x3 ~ N(x1, 0.01^2).
    running,
    // alpha x1 x3 + f1 1{f1 <= 1/2} + (1 - f1) 1{1/2 < f1 < 1}, f1 = a1 x1 + a2 x2.
    simulation,
    // g(x1) + x1 x2, g piecewise linear with slopes {2, -2, 5, -10, 0.5}.
    piecewise,
    // 4 x1^2 + x2^2 + x1 x2.
    nonlinear,
};

struct GeneratorSpec {
    Example example = Example::concept_demo;
    std::size_t n = 100;
    std::uint64_t seed = 0;
    // Only used by the simulation example.
    double alpha = 0.0;
    double a1 = 1.0;
    double a2 = 1.0;

    static GeneratorSpec simulation_case(char which, std::size_t n, std::uint64_t seed) {
        switch (which) {
            case 'a': return {Example::simulation, n, seed, 0.0, 1.0, 1.0};
            case 'b': return {Example::simulation, n, seed, 0.0, 2.0, 0.5};
            case 'c': return {Example::simulation, n, seed, 1.0, 1.0, 1.0};
        }
        throw InputError(std::string("unknown simulation case '") + which + "'");
    }
};

inline std::string to_string(Example e) {
    switch (e) {
        case Example::concept_demo: return "concept";
        case Example::running: return "running";
        case Example::simulation: return "simulation";
        case Example::piecewise: return "piecewise";
        case Example::nonlinear: return "nonlinear";
    }
    return "unknown";
}

// Accepts the example names plus "simulation-a|b|c" shorthands for the three cases.
inline GeneratorSpec parse_example(const std::string& name, std::size_t n, std::uint64_t seed) {
    if (name == "concept") return {Example::concept_demo, n, seed};
    if (name == "running") return {Example::running, n, seed};
    if (name == "piecewise") return {Example::piecewise, n, seed};
    if (name == "nonlinear") return {Example::nonlinear, n, seed};
    if (name == "simulation") return {Example::simulation, n, seed, 0.0, 1.0, 1.0};
    if (name.size() == 12 && name.rfind("simulation-", 0) == 0)
        return GeneratorSpec::simulation_case(name.back(), n, seed);
    throw InputError("unknown example '" + name + "'");
}

struct SyntheticData {
    FeatureMatrix features;
    ModelHandle model;
    // Model output, plus N(0, 1) noise for the concept example.
    std::vector<double> target;
};

namespace detail {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double indicator(bool b) { return b ? 1.0 : 0.0; }

// Breaks of the piecewise benchmark and the slope on each piece.
inline constexpr double kPiecewiseBreaks[] = {0.0, 0.2, 0.4, 0.45, 0.5};
inline constexpr double kPiecewiseSlopes[] = {2.0, -2.0, 5.0, -10.0, 0.5};

inline double piecewise_slope(double x) {
    double a = kPiecewiseSlopes[0];
    for (std::size_t i = 1; i < 5; ++i)
        if (x >= kPiecewiseBreaks[i]) a = kPiecewiseSlopes[i];
    return a;
}

// Continuous antiderivative of piecewise_slope with g(0) = 0.
inline double piecewise_integral(double x) {
    if (x <= 0.0) return kPiecewiseSlopes[0] * x;
    double acc = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        const double lo = kPiecewiseBreaks[i];
        const double hi = i + 1 < 5 ? kPiecewiseBreaks[i + 1] : std::numeric_limits<double>::infinity();
        if (x <= lo) break;
        acc += kPiecewiseSlopes[i] * (std::min(x, hi) - lo);
    }
    return acc;
}

// Sign pattern of the simulation example's clipped term as a function of f1.
inline double simulation_gate(double f1) {
    return indicator(f1 <= 0.5) - indicator(f1 > 0.5 && f1 < 1.0);
}

}  // namespace detail

inline ModelHandle make_model(const GeneratorSpec& spec) {
    using namespace detail;
    switch (spec.example) {
        case Example::concept_demo:
            return {3,
                    [](std::span<const double> x) {
                        return 0.2 * x[0] - 5.0 * x[1] + 10.0 * x[1] * indicator(x[2] > 0.0);
                    },
                    [](std::span<const double> x) {
                        return std::vector<double>{0.2, -5.0 + 10.0 * indicator(x[2] > 0.0), 0.0};
                    }};
        case Example::running:
            return {3,
                    [](std::span<const double> x) {
                        return std::sin(kTwoPi * x[0]) * (indicator(x[0] < 0.0) - 2.0 * indicator(x[2] < 0.0)) +
                               x[0] * x[1] + x[1];
                    },
                    [](std::span<const double> x) {
                        const double gate = indicator(x[0] < 0.0) - 2.0 * indicator(x[2] < 0.0);
                        return std::vector<double>{kTwoPi * std::cos(kTwoPi * x[0]) * gate + x[1], x[0] + 1.0, 0.0};
                    }};
        case Example::simulation: {
            const double alpha = spec.alpha, a1 = spec.a1, a2 = spec.a2;
            return {3,
                    [=](std::span<const double> x) {
                        const double f1 = a1 * x[0] + a2 * x[1];
                        return alpha * x[0] * x[2] + f1 * indicator(f1 <= 0.5) +
                               (1.0 - f1) * indicator(f1 > 0.5 && f1 < 1.0);
                    },
                    [=](std::span<const double> x) {
                        const double gate = simulation_gate(a1 * x[0] + a2 * x[1]);
                        return std::vector<double>{alpha * x[2] + a1 * gate, a2 * gate, alpha * x[0]};
                    }};
        }
        case Example::piecewise:
            return {2,
                    [](std::span<const double> x) { return piecewise_integral(x[0]) + x[0] * x[1]; },
                    [](std::span<const double> x) {
                        return std::vector<double>{piecewise_slope(x[0]) + x[1], x[0]};
                    }};
        case Example::nonlinear:
            return {2,
                    [](std::span<const double> x) { return 4.0 * x[0] * x[0] + x[1] * x[1] + x[0] * x[1]; },
                    [](std::span<const double> x) {
                        return std::vector<double>{8.0 * x[0] + x[1], 2.0 * x[1] + x[0]};
                    }};
    }
    throw InputError("unknown example");
}

// Deterministic for a given spec (sequential mt19937_64 stream).
inline SyntheticData generate(const GeneratorSpec& spec) {
    if (spec.n < 2) throw InputError("need at least 2 samples");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const ModelHandle model = make_model(spec);
    const std::size_t d = model.arity;
    std::vector<double> values;
    values.reserve(spec.n * d);
    std::vector<double> target;
    target.reserve(spec.n);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < spec.n; ++i) {
        double noise = 0.0;
        switch (spec.example) {
            case Example::concept_demo:
                for (auto& v : row) v = -1.0 + 2.0 * unit(rng);
                noise = normal(rng);
                break;
            case Example::running: {
                const bool left = unit(rng) < 5.0 / 6.0;
                row[0] = left ? -0.5 + 0.5 * unit(rng) : 0.5 * unit(rng);
                row[1] = 2.0 * normal(rng);
                row[2] = row[0] + 0.01 * normal(rng);
                break;
            }
            case Example::simulation:
                row[0] = unit(rng);
                row[1] = row[0] + 0.01 * normal(rng);
                row[2] = 0.5 * normal(rng);
                break;
            case Example::piecewise:
            case Example::nonlinear:
                row[0] = unit(rng);
                row[1] = row[0] + std::sqrt(0.5) * normal(rng);
                break;
        }
        values.insert(values.end(), row.begin(), row.end());
        target.push_back(model.evaluate(row) + noise);
    }
    return {FeatureMatrix(spec.n, d, std::move(values)), model, std::move(target)};
}

// Fixed-size bin statistics on a fresh, large sample: the reference that
// benchmark metrics treat as ground truth.
struct DenseOracle {
    std::size_t feature = 0;
    Partition partition;
    BinStats stats;

    // Mean local effect of dense bin k and its sample variance.
    double mu(std::size_t k) const { return stats.bins[k].effect; }
    double sigma2(std::size_t k) const {
        const double s = stats.bins[k].deviation_or_zero();
        return s * s;
    }
};

inline constexpr std::size_t kDenseSamples = 100000;
inline constexpr std::size_t kDenseBins = 200;

inline DenseOracle dense_oracle(const GeneratorSpec& spec, std::size_t n_dense, std::size_t k_dense,
                                std::size_t feature) {
    if (k_dense < 1) throw InputError("dense oracle needs at least one bin");
    GeneratorSpec big = spec;
    big.n = n_dense;
    const auto data = generate(big);
    const auto e = local_effects_analytic(data.model, data.features, feature);
    const Range r = data.features.feature_range(feature);
    DenseOracle out{feature, fixed_partition(r.min, r.max, k_dense), {}};
    auto idx = assign_bins(e.xs, out.partition);
    std::vector<std::size_t> counts(k_dense, 0);
    for (auto k : idx) counts[k]++;
    for (std::size_t k = 0; k < k_dense; ++k)
        if (counts[k] < 2)
            throw InfeasibleError("dense bin " + std::to_string(k) + " holds " + std::to_string(counts[k]) +
                                  " points; increase the dense sample or reduce its bins");
    out.stats = compute_bin_stats(e, out.partition);
    return out;
}

enum class TruthSource { closed_form, dense_oracle };

struct GroundTruth {
    // Accumulated effect; curves are compared after anchoring at a common left point.
    std::function<double(double)> effect;
    std::function<double(double)> heterogeneity;
    TruthSource source = TruthSource::closed_form;
};

namespace detail {

inline GroundTruth closed(std::function<double(double)> effect, std::function<double(double)> het) {
    return {std::move(effect), std::move(het), TruthSource::closed_form};
}

inline GroundTruth constant_truth(double slope, double het) {
    return closed([slope](double x) { return slope * x; }, [het](double) { return het; });
}

}  // namespace detail

inline GroundTruth ground_truth(const GeneratorSpec& spec, std::size_t feature) {
    using namespace detail;
    auto uncovered = [&]() -> GroundTruth {
        throw CapabilityError("no ground truth for feature " + std::to_string(feature) + " of the " +
                              to_string(spec.example) + " example");
    };
    switch (spec.example) {
        case Example::concept_demo:
            if (feature == 0) return constant_truth(0.2, 0.0);
            if (feature == 1) return constant_truth(0.0, 5.0);
            if (feature == 2) return constant_truth(0.0, 0.0);
            return uncovered();
        case Example::running:
            if (feature == 0)
                return closed([](double x) { return -std::sin(kTwoPi * x) * indicator(x < 0.0); },
                              [](double) { return 2.0; });
            return uncovered();
        case Example::simulation: {
            if (feature > 2) return uncovered();
            if (feature == 2) return constant_truth(spec.alpha * 0.5, spec.alpha * 0.25);
            // Slope +a_j while f1 <= 1/2, -a_j while 1/2 < f1 < 1, then flat, with x1 ~ x2.
            const double a = feature == 0 ? spec.a1 : spec.a2;
            const double b1 = 0.5 / (spec.a1 + spec.a2), b2 = 1.0 / (spec.a1 + spec.a2);
            const double het = feature == 0 ? spec.alpha * 0.5 : 0.0;
            return closed(
                [=](double x) {
                    if (x <= b1) return a * x;
                    if (x <= b2) return a * (2.0 * b1 - x);
                    return a * (2.0 * b1 - b2);
                },
                [het](double) { return het; });
        }
        case Example::piecewise:
            if (feature == 0)
                return closed([](double x) { return piecewise_integral(x) + 0.5 * x * x; },
                              [](double) { return std::sqrt(0.5); });
            return uncovered();
        case Example::nonlinear: {
            if (feature != 0) return uncovered();
            auto oracle = std::make_shared<DenseOracle>(dense_oracle(spec, kDenseSamples, kDenseBins, 0));
            auto clamp = [oracle](double x) {
                return std::clamp(x, oracle->partition.front(), oracle->partition.back());
            };
            return {[oracle, clamp](double x) { return accumulate_effect(oracle->stats, clamp(x)); },
                    [oracle, clamp](double x) {
                        return oracle->stats.bins[bin_of(clamp(x), oracle->partition)].deviation_or_zero();
                    },
                    TruthSource::dense_oracle};
        }
    }
    return uncovered();
}

}  // namespace rhale::synthetic
