#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "rhale/error.hpp"
#include "rhale/matrix.hpp"
#include "rhale/model.hpp"

namespace rhale {

enum class EffectSource { analytic, finite_difference, supplied };

// Instance-level effects df/dx_s for one feature, aligned with the feature values.
struct LocalEffects {
    std::size_t feature_index = 0;
    std::vector<double> xs;
    std::vector<double> effects;
    EffectSource source = EffectSource::analytic;
    double step = 0.0;  // only meaningful for finite differences

    std::size_t size() const { return xs.size(); }
};

inline std::string to_string(EffectSource s) {
    switch (s) {
        case EffectSource::analytic: return "analytic";
        case EffectSource::finite_difference: return "finite_difference";
        case EffectSource::supplied: return "supplied";
    }
    return "unknown";
}

inline LocalEffects local_effects_analytic(const ModelHandle& model, const FeatureMatrix& data,
                                           std::size_t s) {
    if (!model.has_gradient()) throw CapabilityError("model has no analytic gradient");
    check_arity(model, data);
    data.check_feature(s);
    LocalEffects out{s, data.column(s), std::vector<double>(data.rows()), EffectSource::analytic};
    for (std::size_t i = 0; i < data.rows(); ++i) {
        auto g = (*model.gradient)(data.row(i));
        if (g.size() != data.cols())
            throw ModelError("gradient has " + std::to_string(g.size()) + " entries, expected " +
                             std::to_string(data.cols()));
        if (!std::isfinite(g[s]))
            throw ModelError("non-finite gradient at row " + std::to_string(i));
        out.effects[i] = g[s];
    }
    return out;
}

// 1e-5 of the feature's range.
inline double default_step(const FeatureMatrix& data, std::size_t s) {
    return 1e-5 * data.feature_range(s).width();
}

inline LocalEffects local_effects_finite_diff(const ModelHandle& model, const FeatureMatrix& data,
                                              std::size_t s, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw InputError("finite-difference step must be positive");
    check_arity(model, data);
    data.check_feature(s);
    LocalEffects out{s, data.column(s), std::vector<double>(data.rows()),
                     EffectSource::finite_difference, h};
    std::vector<double> point(data.cols());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        auto r = data.row(i);
        point.assign(r.begin(), r.end());
        point[s] = r[s] + h;
        const double up = model.evaluate(point);
        point[s] = r[s] - h;
        const double down = model.evaluate(point);
        if (!std::isfinite(up) || !std::isfinite(down))
            throw ModelError("model returned a non-finite value around row " + std::to_string(i));
        out.effects[i] = (up - down) / (2.0 * h);
    }
    return out;
}

inline LocalEffects local_effects_finite_diff(const ModelHandle& model, const FeatureMatrix& data,
                                              std::size_t s) {
    return local_effects_finite_diff(model, data, s, default_step(data, s));
}

// Effects taken from a precomputed gradient table of the same shape as the data.
inline LocalEffects local_effects_from_gradients(const FeatureMatrix& data,
                                                 const FeatureMatrix& gradients, std::size_t s) {
    if (gradients.rows() != data.rows() || gradients.cols() != data.cols())
        throw InputError("gradients table must have the same shape as the data");
    data.check_feature(s);
    return {s, data.column(s), gradients.column(s), EffectSource::supplied};
}

inline LocalEffects local_effects(const ModelHandle& model, const FeatureMatrix& data, std::size_t s) {
    return model.has_gradient() ? local_effects_analytic(model, data, s)
                                : local_effects_finite_diff(model, data, s);
}

// Computes the effects of each feature at most once; bin splitting then reuses them.
// The referenced model and data must outlive the cache.
class EffectCache {
public:
    EffectCache(const ModelHandle& model, const FeatureMatrix& data) : model_(model), data_(data) {}

    const LocalEffects& get(std::size_t s) {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(s);
        if (it == cache_.end()) it = cache_.emplace(s, local_effects(model_, data_, s)).first;
        return it->second;
    }

    std::size_t cached() const {
        std::lock_guard lock(mutex_);
        return cache_.size();
    }

private:
    const ModelHandle& model_;
    const FeatureMatrix& data_;
    mutable std::mutex mutex_;
    std::map<std::size_t, LocalEffects> cache_;
};

}  // namespace rhale
