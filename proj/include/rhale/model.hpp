#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rhale/error.hpp"
#include "rhale/matrix.hpp"

namespace rhale {

using Evaluator = std::function<double(std::span<const double>)>;
using Gradient = std::function<std::vector<double>(std::span<const double>)>;

// A black-box model: a deterministic scalar function of a D-vector, plus an
// optional analytic gradient. Without one, effects fall back to central differences.
struct ModelHandle {
    std::size_t arity = 0;
    Evaluator evaluate;
    std::optional<Gradient> gradient;

    bool has_gradient() const { return gradient.has_value() && static_cast<bool>(*gradient); }
};

template <class F>
concept ScalarModel = std::invocable<const F&, std::span<const double>> &&
                      std::convertible_to<std::invoke_result_t<const F&, std::span<const double>>, double>;

template <class G>
concept GradientModel = std::invocable<const G&, std::span<const double>> &&
                        std::convertible_to<std::invoke_result_t<const G&, std::span<const double>>,
                                            std::vector<double>>;

template <ScalarModel F>
ModelHandle make_model(std::size_t arity, F f) {
    return {arity, Evaluator(std::move(f)), std::nullopt};
}

template <ScalarModel F, GradientModel G>
ModelHandle make_model(std::size_t arity, F f, G g) {
    return {arity, Evaluator(std::move(f)), Gradient(std::move(g))};
}

inline void check_arity(const ModelHandle& model, const FeatureMatrix& points) {
    if (points.cols() != model.arity)
        throw InputError("model expects " + std::to_string(model.arity) + " features, data has " +
                         std::to_string(points.cols()));
}

inline std::vector<double> evaluate_model(const ModelHandle& model, const FeatureMatrix& points) {
    check_arity(model, points);
    std::vector<double> out(points.rows());
    for (std::size_t i = 0; i < points.rows(); ++i) {
        out[i] = model.evaluate(points.row(i));
        if (!std::isfinite(out[i]))
            throw ModelError("model returned a non-finite value at row " + std::to_string(i));
    }
    return out;
}

}  // namespace rhale
