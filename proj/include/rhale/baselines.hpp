#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rhale/binning.hpp"
#include "rhale/error.hpp"
#include "rhale/matrix.hpp"
#include "rhale/model.hpp"

namespace rhale {

inline constexpr std::size_t kDefaultGridPoints = 101;

// Values of a curve on a strictly increasing grid; linear in between.
struct GridCurve {
    std::vector<double> grid;
    std::vector<double> values;

    double operator()(double x) const {
        if (grid.empty()) throw InputError("empty curve");
        if (x <= grid.front()) return values.front();
        if (x >= grid.back()) return values.back();
        auto it = std::upper_bound(grid.begin(), grid.end(), x);
        const auto k = static_cast<std::size_t>(it - grid.begin());
        const double t = (x - grid[k - 1]) / (grid[k] - grid[k - 1]);
        return values[k - 1] + t * (values[k] - values[k - 1]);
    }
};

// One curve per instance: curves[i * grid.size() + t] = f(grid[t], x_c^i).
struct ICEBundle {
    std::vector<double> grid;
    std::vector<double> curves;
    std::size_t rows = 0;
    bool centered = false;

    double at(std::size_t i, std::size_t t) const { return curves[i * grid.size() + t]; }
};

inline std::vector<double> default_grid(const Range& r, std::size_t points = kDefaultGridPoints) {
    if (points < 2) throw InputError("a grid needs at least two points");
    return fixed_partition(r.min, r.max, points - 1).limits;
}

namespace detail {

inline void check_grid(const FeatureMatrix& data, std::size_t s, const std::vector<double>& grid) {
    const Range r = data.feature_range(s);
    if (grid.empty()) throw InputError("empty grid");
    for (std::size_t t = 0; t < grid.size(); ++t) {
        if (t > 0 && !(grid[t - 1] < grid[t])) throw InputError("grid must be strictly increasing");
        if (grid[t] < r.min || grid[t] > r.max)
            throw InputError("grid point " + format_double(grid[t]) + " lies outside the feature range");
    }
}

}  // namespace detail

inline ICEBundle ice(const ModelHandle& model, const FeatureMatrix& data, std::size_t s,
                     const std::vector<double>& grid, bool center) {
    check_arity(model, data);
    detail::check_grid(data, s, grid);
    ICEBundle out{grid, std::vector<double>(data.rows() * grid.size()), data.rows(), center};
    std::vector<double> point(data.cols());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        auto r = data.row(i);
        point.assign(r.begin(), r.end());
        for (std::size_t t = 0; t < grid.size(); ++t) {
            point[s] = grid[t];
            const double y = model.evaluate(point);
            if (!std::isfinite(y))
                throw ModelError("model returned a non-finite value for row " + std::to_string(i));
            out.curves[i * grid.size() + t] = y;
        }
        if (center) {
            const double base = out.curves[i * grid.size()];
            for (std::size_t t = 0; t < grid.size(); ++t) out.curves[i * grid.size() + t] -= base;
        }
    }
    return out;
}

// Average of the ICE rows at each grid point.
inline GridCurve pdp_from_ice(const ICEBundle& bundle) {
    GridCurve out{bundle.grid, std::vector<double>(bundle.grid.size(), 0.0)};
    for (std::size_t t = 0; t < bundle.grid.size(); ++t) {
        double sum = 0.0;
        for (std::size_t i = 0; i < bundle.rows; ++i) sum += bundle.at(i, t);
        out.values[t] = sum / static_cast<double>(bundle.rows);
    }
    return out;
}

inline GridCurve pdp(const ModelHandle& model, const FeatureMatrix& data, std::size_t s,
                     const std::vector<double>& grid) {
    return pdp_from_ice(ice(model, data, s, grid, false));
}

struct ClassicAle {
    Partition partition;
    // Accumulated curve at the partition limits, starting at 0.
    GridCurve curve;
    std::vector<double> bin_effects;
    std::vector<std::size_t> counts;
    // Bins without points: their effect is set to 0.
    std::vector<bool> empty;

    bool any_empty() const { return std::find(empty.begin(), empty.end(), true) != empty.end(); }
};

// Endpoint-difference ALE over K equal-width bins:
// mean_i [f(z_k, x_c^i) - f(z_{k-1}, x_c^i)] / (z_k - z_{k-1}) per bin, accumulated.
inline ClassicAle ale_classic(const ModelHandle& model, const FeatureMatrix& data, std::size_t s,
                              std::size_t k) {
    check_arity(model, data);
    const Range r = data.feature_range(s);
    ClassicAle out;
    out.partition = fixed_partition(r.min, r.max, k);
    out.bin_effects.assign(k, 0.0);
    out.counts.assign(k, 0);
    out.empty.assign(k, false);
    std::vector<double> sums(k, 0.0);
    std::vector<double> point(data.cols());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        auto row = data.row(i);
        const std::size_t b = bin_of(row[s], out.partition);
        point.assign(row.begin(), row.end());
        point[s] = out.partition.limits[b + 1];
        const double hi = model.evaluate(point);
        point[s] = out.partition.limits[b];
        const double lo = model.evaluate(point);
        if (!std::isfinite(hi) || !std::isfinite(lo))
            throw ModelError("model returned a non-finite value for row " + std::to_string(i));
        sums[b] += hi - lo;
        out.counts[b]++;
    }
    out.curve.grid = out.partition.limits;
    out.curve.values.assign(k + 1, 0.0);
    for (std::size_t b = 0; b < k; ++b) {
        if (out.counts[b] == 0) {
            out.empty[b] = true;
        } else {
            out.bin_effects[b] = sums[b] / static_cast<double>(out.counts[b]) / out.partition.width(b);
        }
        out.curve.values[b + 1] =
            out.curve.values[b] + (out.counts[b] ? sums[b] / static_cast<double>(out.counts[b]) : 0.0);
    }
    return out;
}

}  // namespace rhale
