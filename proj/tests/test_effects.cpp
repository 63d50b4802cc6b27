#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <thread>

#include "rhale/effects.hpp"
#include "rhale/matrix.hpp"
#include "rhale/model.hpp"
#include "rhale/synthetic.hpp"

using namespace rhale;

namespace {

ModelHandle model_of(std::size_t arity, Evaluator f, std::optional<Gradient> g = std::nullopt) {
    return {arity, std::move(f), std::move(g)};
}

FeatureMatrix grid_data() {
    return FeatureMatrix(4, 2, {-1.0, 0.5, 0.0, 2.0, 0.5, -1.0, 1.5, 3.0});
}

}  // namespace

TEST(FeatureMatrix, RejectsBadShapes) {
    EXPECT_THROW(FeatureMatrix(1, 1, {1.0}), InputError);
    EXPECT_THROW(FeatureMatrix(2, 0, {}), InputError);
    EXPECT_THROW(FeatureMatrix(2, 2, {1.0, 2.0, 3.0}), InputError);
    EXPECT_THROW(FeatureMatrix(2, 1, {1.0, NAN}), InputError);
    EXPECT_THROW(FeatureMatrix(2, 1, {1.0, 2.0}, {"a", "b"}), InputError);
}

TEST(FeatureMatrix, DefaultNamesAndConstantFeature) {
    FeatureMatrix m(3, 2, {1.0, 5.0, 2.0, 5.0, 3.0, 5.0});
    EXPECT_EQ(m.names(), (std::vector<std::string>{"x1", "x2"}));
    EXPECT_DOUBLE_EQ(m.feature_range(0).min, 1.0);
    EXPECT_DOUBLE_EQ(m.feature_range(0).max, 3.0);
    EXPECT_THROW(m.feature_range(1), InputError);
    EXPECT_THROW(m.feature_range(2), InputError);
}

TEST(Csv, RoundTripIsExact) {
    FeatureMatrix m(3, 2, {0.1, 1.0 / 3.0, -2.5e-17, 7.0, 1e300, -0.0}, {"a", "b"});
    std::stringstream ss;
    write_csv(ss, m);
    const auto back = read_csv(ss);
    EXPECT_EQ(back.names(), m.names());
    ASSERT_EQ(back.values().size(), m.values().size());
    for (std::size_t i = 0; i < m.values().size(); ++i) EXPECT_EQ(back.values()[i], m.values()[i]);
}

TEST(Csv, ReportsRowOfBadCell) {
    std::stringstream ss("a,b\n1,2\n3,oops\n");
    try {
        read_csv(ss);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
    }
    std::stringstream ragged("a,b\n1,2\n3\n");
    EXPECT_THROW(read_csv(ragged), InputError);
}

TEST(EvaluateModel, Examples) {
    const auto concept_model = synthetic::make_model({synthetic::Example::concept_demo});
    const std::vector<double> p{0.0, 1.0, 0.5};
    EXPECT_DOUBLE_EQ(concept_model.evaluate(p), 5.0);

    const auto running = synthetic::make_model({synthetic::Example::running});
    const std::vector<double> q{0.25, 1.0, 0.25};
    EXPECT_NEAR(running.evaluate(q), 1.25, 1e-15);

    const auto zero = model_of(2, [](std::span<const double>) { return 0.0; });
    for (double v : evaluate_model(zero, grid_data())) EXPECT_EQ(v, 0.0);
}

TEST(EvaluateModel, ArityAndNonFinite) {
    const auto wrong = model_of(3, [](std::span<const double>) { return 0.0; });
    EXPECT_THROW(evaluate_model(wrong, grid_data()), InputError);
    const auto bad = model_of(2, [](std::span<const double> x) { return x[0] > 1.0 ? NAN : 1.0; });
    try {
        evaluate_model(bad, grid_data());
        FAIL();
    } catch (const ModelError& e) {
        EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
    }
}

TEST(LocalEffects, AnalyticExamples) {
    const auto running = synthetic::make_model({synthetic::Example::running});
    FeatureMatrix data(3, 3, {0.3, 1.0, 0.2, -0.4, -2.0, -0.4, 0.1, 0.5, 0.1});
    const auto e = local_effects_analytic(running, data, 1);
    EXPECT_EQ(e.source, EffectSource::analytic);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(e.effects[i], data(i, 0) + 1.0);

    const auto concept_model = synthetic::make_model({synthetic::Example::concept_demo});
    FeatureMatrix c(2, 3, {0.1, 0.2, 0.5, -0.3, 0.9, -0.5});
    const auto ce = local_effects_analytic(concept_model, c, 1);
    EXPECT_EQ(ce.effects[0], 5.0);
    EXPECT_EQ(ce.effects[1], -5.0);

    const auto constant = model_of(
        2, [](std::span<const double>) { return 3.0; },
        [](std::span<const double>) { return std::vector<double>{0.0, 0.0}; });
    for (double v : local_effects_analytic(constant, grid_data(), 0).effects) EXPECT_EQ(v, 0.0);
}

TEST(LocalEffects, AnalyticNeedsGradient) {
    const auto m = model_of(2, [](std::span<const double> x) { return x[0]; });
    EXPECT_THROW(local_effects_analytic(m, grid_data(), 0), CapabilityError);
    EXPECT_EQ(local_effects(m, grid_data(), 0).source, EffectSource::finite_difference);
}

TEST(LocalEffects, FiniteDifferenceExamples) {
    const auto square = model_of(1, [](std::span<const double> x) { return x[0] * x[0]; });
    FeatureMatrix one(2, 1, {1.0, -3.0});
    const auto e = local_effects_finite_diff(square, one, 0, 1e-4);
    EXPECT_NEAR(e.effects[0], 2.0, 1e-6);
    EXPECT_NEAR(e.effects[1], -6.0, 1e-6);
    EXPECT_EQ(e.step, 1e-4);

    const auto constant = model_of(1, [](std::span<const double>) { return 4.0; });
    for (double v : local_effects_finite_diff(constant, one, 0, 1e-3).effects) EXPECT_EQ(v, 0.0);

    const auto running = synthetic::make_model({synthetic::Example::running});
    FeatureMatrix r(2, 3, {0.3, 1.0, 0.3, 0.3, -1.0, 0.3});
    for (double v : local_effects_finite_diff(running, r, 1, 1e-5).effects) EXPECT_NEAR(v, 1.3, 1e-6);
    EXPECT_THROW(local_effects_finite_diff(running, r, 1, 0.0), InputError);
}

// Central differences are exact for quadratics, up to rounding.
TEST(LocalEffects, FiniteDifferenceMatchesAnalyticOnQuadratics) {
    const auto q = model_of(
        2, [](std::span<const double> x) { return 3 * x[0] * x[0] - 2 * x[0] * x[1] + x[1] + 7; },
        [](std::span<const double> x) { return std::vector<double>{6 * x[0] - 2 * x[1], -2 * x[0] + 1}; });
    const auto data = synthetic::generate({synthetic::Example::nonlinear, 200, 3}).features;
    for (std::size_t s = 0; s < 2; ++s) {
        const auto a = local_effects_analytic(q, data, s);
        const auto f = local_effects_finite_diff(q, data, s);
        ASSERT_EQ(a.size(), data.rows());
        for (std::size_t i = 0; i < a.size(); ++i)
            EXPECT_NEAR(f.effects[i], a.effects[i], 1e-8 * std::max(1.0, std::abs(a.effects[i])));
    }
}

TEST(LocalEffects, DefaultStepScalesWithRange) {
    FeatureMatrix m(2, 1, {-10.0, 30.0});
    EXPECT_DOUBLE_EQ(default_step(m, 0), 40.0 * 1e-5);
}

TEST(LocalEffects, FromGradientsChecksShape) {
    const auto data = grid_data();
    FeatureMatrix g(4, 2, {1, 2, 3, 4, 5, 6, 7, 8});
    const auto e = local_effects_from_gradients(data, g, 1);
    EXPECT_EQ(e.effects, (std::vector<double>{2, 4, 6, 8}));
    EXPECT_EQ(e.xs, data.column(1));
    EXPECT_EQ(e.source, EffectSource::supplied);
    EXPECT_THROW(local_effects_from_gradients(data, FeatureMatrix(4, 1, {1, 2, 3, 4}), 0), InputError);
    EXPECT_THROW(local_effects_from_gradients(data, g, 2), InputError);
}

TEST(LocalEffects, RepeatedCallsAreBitwiseIdentical) {
    const auto d = synthetic::generate({synthetic::Example::running, 300, 5});
    auto model = d.model;
    model.gradient.reset();
    const auto a = local_effects(model, d.features, 0);
    const auto b = local_effects(model, d.features, 0);
    EXPECT_EQ(a.effects, b.effects);
}

TEST(EffectCache, ComputesEachFeatureOnceAcrossThreads) {
    const auto d = synthetic::generate({synthetic::Example::running, 200, 1});
    EffectCache cache(d.model, d.features);
    std::vector<std::thread> threads;
    std::vector<const LocalEffects*> seen(8);
    for (int t = 0; t < 8; ++t) threads.emplace_back([&, t] { seen[t] = &cache.get(t % 2); });
    for (auto& t : threads) t.join();
    EXPECT_EQ(cache.cached(), 2u);
    for (int t = 2; t < 8; ++t) EXPECT_EQ(seen[t], seen[t % 2]);
    EXPECT_EQ(cache.get(0).effects, local_effects_analytic(d.model, d.features, 0).effects);
}

TEST(MakeModel, AcceptsLambdasAndFunctionObjects) {
    struct Plane {
        double a, b;
        double operator()(std::span<const double> x) const { return a * x[0] + b * x[1]; }
    };
    const auto m = make_model(2, Plane{2.0, -1.0});
    EXPECT_FALSE(m.has_gradient());
    const auto g = make_model(
        2, Plane{2.0, -1.0}, [](std::span<const double>) { return std::vector<double>{2.0, -1.0}; });
    ASSERT_TRUE(g.has_gradient());
    const auto fd = local_effects(m, grid_data(), 0);
    const auto an = local_effects(g, grid_data(), 0);
    EXPECT_EQ(an.source, EffectSource::analytic);
    for (std::size_t i = 0; i < fd.size(); ++i) EXPECT_NEAR(fd.effects[i], an.effects[i], 1e-8);
    static_assert(!ScalarModel<int>);
    static_assert(GradientModel<decltype([](std::span<const double>) { return std::vector<double>{}; })>);
}
