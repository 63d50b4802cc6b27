#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rhale/effects.hpp"
#include "rhale/error.hpp"
#include "rhale/stats.hpp"

namespace rhale {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Ordered bin limits z_0 < z_1 < ... < z_K.
struct Partition {
    std::vector<double> limits;

    std::size_t bins() const { return limits.empty() ? 0 : limits.size() - 1; }
    double front() const { return limits.front(); }
    double back() const { return limits.back(); }
    double width(std::size_t k) const { return limits[k + 1] - limits[k]; }

    bool operator==(const Partition&) const = default;
};

inline Partition make_partition(std::vector<double> limits) {
    if (limits.size() < 2) throw InputError("a partition needs at least two limits");
    for (std::size_t k = 0; k < limits.size(); ++k) {
        if (!std::isfinite(limits[k])) throw InputError("partition limits must be finite");
        if (k > 0 && !(limits[k - 1] < limits[k]))
            throw InputError("partition limits must be strictly increasing (index " +
                             std::to_string(k) + ")");
    }
    return Partition{std::move(limits)};
}

struct BinningConfig {
    std::size_t k_max = 50;
    double alpha = 0.2;
    // Minimum points per bin; unset means max(2, ceil(N / 20)).
    std::optional<std::size_t> n_ppb;

    void validate() const {
        if (k_max < 1) throw InputError("k_max must be at least 1");
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in [0, 1]");
        if (n_ppb && *n_ppb < 1) throw InputError("n_ppb must be positive");
    }

    // Bins with a single point have no sample deviation, so the minimum is at least 2.
    std::size_t points_per_bin(std::size_t n) const {
        const std::size_t fallback = (n + 19) / 20;
        return std::max<std::size_t>(2, n_ppb.value_or(fallback));
    }
};

// limits[k] = x_min + k (x_max - x_min) / K, with the last limit pinned to x_max.
inline Partition fixed_partition(double x_min, double x_max, std::size_t k) {
    if (k == 0) throw InputError("number of bins must be positive");
    if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max))
        throw InputError("degenerate range for a fixed partition");
    std::vector<double> limits(k + 1);
    const double step = (x_max - x_min) / static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i) limits[i] = x_min + static_cast<double>(i) * step;
    limits[k] = x_max;
    return Partition{std::move(limits)};
}

// Bin of a single value: half-open [z_{k}, z_{k+1}), last bin closed. Zero-based.
inline std::size_t bin_of(double x, const Partition& p) {
    const auto& z = p.limits;
    if (x == z.back()) return p.bins() - 1;
    auto it = std::upper_bound(z.begin(), z.end(), x);
    return static_cast<std::size_t>(it - z.begin()) - 1;
}

// Zero-based bin index of every value; values outside [z_0, z_K] are rejected.
inline std::vector<std::size_t> assign_bins(std::span<const double> xs, const Partition& p) {
    if (p.bins() < 1) throw InputError("empty partition");
    std::vector<std::size_t> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] >= p.front() && xs[i] <= p.back()))
            throw InputError("value " + format_double(xs[i]) + " at row " + std::to_string(i) +
                             " lies outside the partition range");
        out[i] = bin_of(xs[i], p);
    }
    return out;
}

namespace detail {

inline Range effects_range(const LocalEffects& e) {
    if (e.xs.size() != e.effects.size())
        throw InputError("feature values and effects differ in length");
    if (e.xs.empty()) throw InputError("no local effects");
    auto [lo, hi] = std::minmax_element(e.xs.begin(), e.xs.end());
    if (!(*lo < *hi)) throw InputError("feature is constant; nothing to partition");
    return {*lo, *hi};
}

inline double discounted_cost(std::size_t count, double sample_var, double width, double alpha,
                              std::size_t total, std::size_t n_ppb) {
    if (count < n_ppb) return kInfinity;
    const double tau = 1.0 - alpha * static_cast<double>(count) / static_cast<double>(total);
    return tau * sample_var * width;
}

}  // namespace detail

// The candidate limits x_min + k * dx, k = 0..K_max, of a feature's effects.
inline Partition candidate_grid(const LocalEffects& e, std::size_t k_max) {
    const Range r = detail::effects_range(e);
    return fixed_partition(r.min, r.max, k_max);
}

// Cost of the single bin [x_l, x_j) of the candidate grid, computed directly
// from the points it holds: (1 - alpha |S| / N) * sample variance * width, or
// +inf when the bin holds fewer than n_ppb points. A zero-width bin costs 0.
inline double bin_cost(const LocalEffects& e, std::size_t l, std::size_t j,
                       const BinningConfig& config, std::size_t total) {
    config.validate();
    if (j > config.k_max || l > j) throw InputError("bin_cost needs l <= j <= k_max");
    if (l == j) return 0.0;
    const Partition grid = candidate_grid(e, config.k_max);
    const double lo = grid.limits[l], hi = grid.limits[j];
    const bool closed = j == config.k_max;
    std::vector<double> members;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double x = e.xs[i];
        if (x >= lo && (x < hi || (closed && x == hi))) members.push_back(e.effects[i]);
    }
    return detail::discounted_cost(members.size(), sample_variance_of(members), hi - lo,
                                   config.alpha, total, config.points_per_bin(total));
}

// All bin costs B(l, j) on the candidate grid, built from mergeable per-cell
// moments in O(N + K_max^2).
class BinCostTable {
public:
    BinCostTable(const LocalEffects& e, const BinningConfig& config)
        : k_(config.k_max), grid_(candidate_grid(e, config.k_max)),
          cost_((k_ + 1) * (k_ + 1), kInfinity), count_((k_ + 1) * (k_ + 1), 0) {
        config.validate();
        const std::size_t total = e.size();
        const std::size_t n_ppb = config.points_per_bin(total);
        std::vector<Moments> cells(k_);
        for (std::size_t i = 0; i < total; ++i) cells[bin_of(e.xs[i], grid_)].add(e.effects[i]);
        for (std::size_t l = 0; l <= k_; ++l) {
            cost_[index(l, l)] = 0.0;
            Moments acc;
            for (std::size_t j = l + 1; j <= k_; ++j) {
                acc.merge(cells[j - 1]);
                count_[index(l, j)] = acc.n;
                cost_[index(l, j)] = detail::discounted_cost(acc.n, acc.sample_variance(),
                                                          grid_.limits[j] - grid_.limits[l],
                                                          config.alpha, total, n_ppb);
            }
        }
    }

    std::size_t k_max() const { return k_; }
    const Partition& grid() const { return grid_; }
    double cost(std::size_t l, std::size_t j) const { return cost_[index(l, j)]; }
    std::size_t count(std::size_t l, std::size_t j) const { return count_[index(l, j)]; }

private:
    std::size_t index(std::size_t l, std::size_t j) const { return l * (k_ + 1) + j; }

    std::size_t k_;
    Partition grid_;
    std::vector<double> cost_;
    std::vector<std::size_t> count_;
};

// Objective sum_k tau_k sigma_k^2 dz_k of an arbitrary partition, recomputed
// from the member points of each bin. +inf if any bin violates n_ppb.
inline double partition_objective(const LocalEffects& e, const Partition& p,
                                  const BinningConfig& config) {
    config.validate();
    const std::size_t total = e.size();
    const std::size_t n_ppb = config.points_per_bin(total);
    auto idx = assign_bins(e.xs, p);
    std::vector<std::vector<double>> members(p.bins());
    for (std::size_t i = 0; i < total; ++i) members[idx[i]].push_back(e.effects[i]);
    double sum = 0.0;
    for (std::size_t k = 0; k < p.bins(); ++k)
        sum += detail::discounted_cost(members[k].size(), sample_variance_of(members[k]),
                                       p.width(k), config.alpha, total, n_ppb);
    return sum;
}

// cost(i, j): least cost of reaching grid point j with i bins (zero-width bins
// allowed); back(i, j): the chosen predecessor grid point.
struct DPTables {
    std::size_t size = 0;
    std::vector<double> cost;
    std::vector<std::size_t> back;

    double cost_at(std::size_t i, std::size_t j) const { return cost[i * size + j]; }
    std::size_t back_at(std::size_t i, std::size_t j) const { return back[i * size + j]; }
};

struct PartitionResult {
    Partition partition;
    // Recomputed from the returned partition's member points.
    double objective = 0.0;
    // Value read off the search (DP table or enumeration) on the grid costs.
    double search_objective = 0.0;
    std::vector<std::size_t> grid_indices;
};

struct DPResult : PartitionResult {
    DPTables tables;
};

namespace detail {

inline void require_feasible(const LocalEffects& e, const BinningConfig& config) {
    const std::size_t n_ppb = config.points_per_bin(e.size());
    if (e.size() < n_ppb)
        throw InfeasibleError("need at least " + std::to_string(n_ppb) + " points per bin but only " +
                              std::to_string(e.size()) + " points are available");
}

inline PartitionResult finish(const LocalEffects& e, const BinningConfig& config,
                              const BinCostTable& table, std::vector<std::size_t> indices,
                              double search_value) {
    PartitionResult r;
    r.grid_indices = std::move(indices);
    for (auto k : r.grid_indices) r.partition.limits.push_back(table.grid().limits[k]);
    r.objective = partition_objective(e, r.partition, config);
    r.search_objective = search_value;
    return r;
}

}  // namespace detail

// Minimises the discounted objective over every partition whose limits lie on
// the K_max-grid, by the recursion T(i, j) = min_l T(i-1, l) + B(l, j).
// Ties go to the smallest l, i.e. the widest final bin.
inline DPResult dp_optimal_partition(const LocalEffects& e, const BinningConfig& config,
                                     const BinCostTable& table) {
    config.validate();
    detail::require_feasible(e, config);
    const std::size_t k = table.k_max();
    const std::size_t size = k + 1;
    DPTables t{size, std::vector<double>(size * size, kInfinity),
               std::vector<std::size_t>(size * size, 0)};
    t.cost[0] = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
        for (std::size_t j = 0; j <= k; ++j) {
            double best = kInfinity;
            std::size_t arg = 0;
            for (std::size_t l = 0; l <= j; ++l) {
                const double prev = t.cost_at(i - 1, l);
                if (prev == kInfinity) continue;
                const double c = prev + table.cost(l, j);
                if (c < best) {
                    best = c;
                    arg = l;
                }
            }
            t.cost[i * size + j] = best;
            t.back[i * size + j] = arg;
        }
    }
    const double value = t.cost_at(k, k);
    if (value == kInfinity) throw InfeasibleError("no partition satisfies the points-per-bin constraint");

    std::vector<std::size_t> indices{k};
    std::size_t j = k;
    for (std::size_t i = k; i >= 1; --i) {
        j = t.back_at(i, j);
        indices.push_back(j);
    }
    std::reverse(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());

    DPResult out;
    static_cast<PartitionResult&>(out) = detail::finish(e, config, table, std::move(indices), value);
    out.tables = std::move(t);
    return out;
}

inline DPResult dp_optimal_partition(const LocalEffects& e, const BinningConfig& config) {
    config.validate();
    detail::require_feasible(e, config);
    return dp_optimal_partition(e, config, BinCostTable(e, config));
}

inline constexpr std::size_t kBruteForceMaxK = 16;

// Exhaustive search over all 2^(K_max - 1) subsets of interior grid points.
// Equal objectives resolve to the partition with the fewest bins.
inline PartitionResult brute_force_partition(const LocalEffects& e, const BinningConfig& config) {
    config.validate();
    if (config.k_max > kBruteForceMaxK)
        throw CapabilityError("brute-force enumeration supports k_max <= " +
                              std::to_string(kBruteForceMaxK));
    detail::require_feasible(e, config);
    const BinCostTable table(e, config);
    const std::size_t k = config.k_max;
    const std::uint32_t subsets = 1u << (k - 1);

    double best = kInfinity;
    std::size_t best_bins = 0;
    std::uint32_t best_mask = 0;
    for (std::uint32_t mask = 0; mask < subsets; ++mask) {
        double sum = 0.0;
        std::size_t prev = 0, bins = 0;
        for (std::size_t g = 1; g <= k && sum != kInfinity; ++g) {
            if (g < k && !(mask & (1u << (g - 1)))) continue;
            sum += table.cost(prev, g);
            prev = g;
            ++bins;
        }
        if (sum < best || (sum == best && sum != kInfinity && bins < best_bins)) {
            best = sum;
            best_bins = bins;
            best_mask = mask;
        }
    }
    if (best == kInfinity) throw InfeasibleError("no partition satisfies the points-per-bin constraint");

    std::vector<std::size_t> indices{0};
    for (std::size_t g = 1; g < k; ++g)
        if (best_mask & (1u << (g - 1))) indices.push_back(g);
    indices.push_back(k);
    return detail::finish(e, config, table, std::move(indices), best);
}

}  // namespace rhale
