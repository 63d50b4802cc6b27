#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rhale/estimator.hpp"
#include "rhale/synthetic.hpp"

using namespace rhale;

namespace {

LocalEffects make_effects(std::vector<double> xs, std::vector<double> effects) {
    return {0, std::move(xs), std::move(effects), EffectSource::supplied};
}

BinStats stats_of(std::vector<double> limits, std::vector<double> mus, std::vector<double> sigmas) {
    BinStats s;
    for (std::size_t k = 0; k < mus.size(); ++k)
        s.bins.push_back(Bin{limits[k], limits[k + 1], 2, mus[k], sigmas[k], {}});
    return s;
}

// DALE written out directly: whole bins before x, partial bin at x.
double dale_direct(const LocalEffects& e, const Partition& p, double x) {
    double total = 0.0;
    for (std::size_t k = 0; k < p.bins(); ++k) {
        const double lo = p.limits[k], hi = p.limits[k + 1];
        if (x < lo) break;
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            const bool in = e.xs[i] >= lo && (e.xs[i] < hi || (k + 1 == p.bins() && e.xs[i] == hi));
            if (in) {
                sum += e.effects[i];
                ++n;
            }
        }
        total += (std::min(x, hi) - lo) * sum / static_cast<double>(n);
        if (x < hi) break;
    }
    return total;
}

}  // namespace

TEST(BinEffect, Examples) {
    EXPECT_DOUBLE_EQ(bin_effect(std::vector<double>{1, 2, 3}), 2.0);
    EXPECT_EQ(bin_effect(std::vector<double>{0, 0, 0}), 0.0);
    EXPECT_THROW(bin_effect(std::vector<double>{}), EmptyBinError);
}

TEST(BinStd, Examples) {
    EXPECT_DOUBLE_EQ(bin_std(std::vector<double>{1, 2, 3}, 2.0), 1.0);
    EXPECT_EQ(bin_std(std::vector<double>{4, 4, 4}, 4.0), 0.0);
    EXPECT_THROW(bin_std(std::vector<double>{1}, 1.0), DegenerateBinError);
}

TEST(BinStats, RunningExampleWideBinDeviationNearTwo) {
    const auto d = synthetic::generate({synthetic::Example::running, 20000, 4});
    const auto e = local_effects_analytic(d.model, d.features, 0);
    const auto s = compute_bin_stats(e, make_partition({-0.5, -0.4, 0.0, 0.1, 0.5}));
    // Mean of -2 pi cos(2 pi x) over [-0.5, -0.4] is 10 sin(0.2 pi).
    EXPECT_NEAR(s.bins[0].effect, 10 * std::sin(0.2 * std::numbers::pi), 0.15);
    EXPECT_NEAR(s.bins[0].deviation_or_zero(), 2.0, 0.1);
    EXPECT_NEAR(s.bins[3].deviation_or_zero(), 2.0, 0.1);
    EXPECT_EQ(s.total_count(), 20000u);
}

TEST(AccumulateEffect, Examples) {
    const auto one = stats_of({0, 1}, {3.0}, {0.0});
    EXPECT_DOUBLE_EQ(accumulate_effect(one, 0.7), 0.7 * 3.0);
    EXPECT_EQ(accumulate_effect(one, 0.0), 0.0);
    const auto two = stats_of({0, 0.5, 1}, {1, -1}, {0, 0});
    EXPECT_EQ(accumulate_effect(two, 1.0), 0.0);
    EXPECT_THROW(accumulate_effect(two, 1.1), InputError);
    EXPECT_THROW(accumulate_effect(two, -0.1), InputError);
}

TEST(AccumulateEffect, LiteralModeSumsWholeBins) {
    const auto two = stats_of({0, 0.5, 1}, {2, 4}, {0, 0});
    EXPECT_DOUBLE_EQ(accumulate_effect(two, 0.25, Accumulation::literal), 1.0);
    EXPECT_DOUBLE_EQ(accumulate_effect(two, 0.75, Accumulation::literal), 3.0);
    EXPECT_DOUBLE_EQ(accumulate_effect(two, 0.75), 2.0);
}

TEST(AccumulateStd, Examples) {
    EXPECT_DOUBLE_EQ(accumulate_std(stats_of({0, 1}, {0}, {5}), 1.0), 5.0);
    EXPECT_DOUBLE_EQ(accumulate_std(stats_of({0, 1, 2}, {0, 0}, {3, 4}), 2.0), 5.0);
    const auto flat = stats_of({0, 1, 2}, {1, 2}, {0, 0});
    for (double x : {0.0, 0.3, 1.0, 1.9, 2.0}) EXPECT_EQ(accumulate_std(flat, x), 0.0);
}

TEST(Rhale, CurveIsContinuousAndEnvelopeMonotone) {
    const auto d = synthetic::generate({synthetic::Example::running, 1000, 2});
    const auto r = rhale::rhale(d.features, d.model, 0, BinningConfig{});
    EXPECT_EQ(r.effect(r.partition.front()), 0.0);
    for (std::size_t k = 1; k + 1 < r.partition.limits.size(); ++k) {
        const double z = r.partition.limits[k];
        const double left = accumulate_effect(r.bins, std::nextafter(z, -1e9));
        EXPECT_NEAR(left, r.effect(z), 1e-9);
    }
    double prev = 0.0;
    for (double x : fixed_partition(r.partition.front(), r.partition.back(), 500).limits) {
        const double s = r.deviation(x);
        EXPECT_GE(s, prev);
        prev = s;
    }
    ASSERT_EQ(r.curve_knots().size(), r.partition.limits.size());
    EXPECT_TRUE(r.objective.has_value());
}

TEST(Rhale, FixedBinsMatchDirectDale) {
    const auto d = synthetic::generate({synthetic::Example::running, 800, 6});
    const auto e = local_effects_analytic(d.model, d.features, 0);
    for (std::size_t k : {5u, 13u, 40u}) {
        const auto r = rhale::rhale(e, BinningConfig{}, BinningMode::fixed(k));
        ASSERT_EQ(r.partition.bins(), k);
        for (double x : fixed_partition(r.partition.front(), r.partition.back(), 97).limits)
            EXPECT_NEAR(r.effect(x), dale_direct(e, r.partition, x), 1e-10);
    }
}

TEST(Rhale, ConceptFeatureThreeHasNoHeterogeneity) {
    const auto d = synthetic::generate({synthetic::Example::concept_demo, 100, 0});
    const auto r = rhale::rhale(d.features, d.model, 2, BinningConfig{});
    for (const auto& b : r.bins.bins) {
        EXPECT_EQ(b.effect, 0.0);
        EXPECT_EQ(b.deviation_or_zero(), 0.0);
    }
    for (double x : fixed_partition(r.partition.front(), r.partition.back(), 50).limits) {
        EXPECT_EQ(r.effect(x), 0.0);
        EXPECT_EQ(r.deviation(x), 0.0);
    }
}

TEST(Rhale, GivenPartitionWithSinglePointBinWarns) {
    const auto e = make_effects({0.0, 0.1, 0.2, 0.9}, {1, 2, 3, 4});
    const auto r = rhale::rhale(e, BinningConfig{}, BinningMode::given(make_partition({0.0, 0.5, 0.9})));
    ASSERT_EQ(r.bins.size(), 2u);
    EXPECT_FALSE(r.bins.bins[1].deviation.has_value());
    EXPECT_EQ(r.warnings.size(), 1u);
    EXPECT_DOUBLE_EQ(r.deviation(0.9), 0.5 * 1.0);
    EXPECT_THROW(rhale::rhale(e, BinningConfig{}, BinningMode::given(make_partition({0.0, 0.5, 0.6, 0.9}))),
                 EmptyBinError);
    EXPECT_THROW(rhale::rhale(e, BinningConfig{}, BinningMode::given(make_partition({0.0, 0.5}))), InputError);
}

TEST(Rhale, CenteringZeroesDataMean) {
    const auto d = synthetic::generate({synthetic::Example::running, 500, 3});
    const auto e = local_effects_analytic(d.model, d.features, 0);
    RhaleOptions opt;
    opt.center = true;
    const auto r = rhale::rhale(e, BinningConfig{}, BinningMode::automatic(), opt);
    double sum = 0.0;
    for (double x : e.xs) sum += r.effect(x);
    EXPECT_NEAR(sum / static_cast<double>(e.size()), 0.0, 1e-12);
    EXPECT_TRUE(r.centered);
}

TEST(Histogram, CountsAndQuartiles) {
    const std::vector<double> v{1, 2, 3, 4, 5};
    const auto h = effect_histogram(v, 4);
    EXPECT_EQ(h.counts, (std::vector<std::size_t>{1, 1, 1, 2}));
    EXPECT_EQ(h.median, 3.0);
    EXPECT_EQ(h.q1, 2.0);
    EXPECT_EQ(h.q3, 4.0);
    const auto flat = effect_histogram(std::vector<double>{7, 7}, 8);
    EXPECT_EQ(flat.lo, 6.5);
    EXPECT_EQ(flat.counts[4], 2u);
}

TEST(Decomposition, Examples) {
    const auto e = make_effects({0.1, 0.2, 0.6, 0.7}, {0, 0, 2, 2});
    const auto r = decompose_heterogeneity(e, make_partition({0, 1}), make_partition({0, 0.5, 1}));
    ASSERT_EQ(r.bins.size(), 1u);
    EXPECT_DOUBLE_EQ(r.bins[0].total_variance, 1.0);
    EXPECT_DOUBLE_EQ(r.bins[0].within_variance, 0.0);
    EXPECT_DOUBLE_EQ(r.bins[0].bin_error, 1.0);
    EXPECT_EQ(r.bins[0].residuals, (std::vector<double>{-1.0, 1.0}));

    const auto same = make_effects({0.1, 0.2, 0.6, 0.7}, {-1, 1, 3, -3});
    const auto s = decompose_heterogeneity(same, make_partition({0, 1}), make_partition({0, 0.5, 1}));
    EXPECT_DOUBLE_EQ(s.bins[0].bin_error, 0.0);
    EXPECT_DOUBLE_EQ(s.bins[0].total_variance, s.bins[0].within_variance);
}

TEST(Decomposition, Errors) {
    const auto e = make_effects({0.1, 0.2, 0.6, 0.7}, {0, 0, 2, 2});
    EXPECT_THROW(decompose_heterogeneity(e, make_partition({0, 0.4, 1}), make_partition({0, 0.5, 1})), InputError);
    EXPECT_THROW(decompose_heterogeneity(e, make_partition({0, 1}), make_partition({0, 0.3, 0.5, 1})),
                 DegenerateBinError);
}

TEST(Decomposition, IdentityHoldsOnRandomRefinements) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    int checked = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 50 + rep * 3;
        std::vector<double> xs(n), fx(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = u(rng);
            fx[i] = 4 * std::sin(6 * xs[i]) + (0.5 + xs[i]) * g(rng);
        }
        const auto e = make_effects(xs, fx);
        const auto fine = fixed_partition(0.0, 1.0, 6 + rep % 5);
        std::vector<double> coarse{0.0};
        for (std::size_t k = 1; k < fine.bins(); ++k)
            if (u(rng) < 0.4) coarse.push_back(fine.limits[k]);
        coarse.push_back(1.0);
        try {
            for (const auto& b : decompose_heterogeneity(e, make_partition(coarse), fine).bins) {
                EXPECT_NEAR(b.total_variance, b.within_variance + b.bin_error, 1e-10 * b.total_variance);
                ++checked;
            }
        } catch (const DegenerateBinError&) {
        }
    }
    EXPECT_GT(checked, 100);
}
