#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhale/baselines.hpp"
#include "rhale/binning.hpp"
#include "rhale/error.hpp"
#include "rhale/estimator.hpp"
#include "rhale/evaluation.hpp"
#include "rhale/synthetic.hpp"

namespace rhale {

using json = nlohmann::ordered_json;

namespace detail {

// NaN and infinities become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json numbers(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(number(x));
    return out;
}

inline std::string to_string(BinningMode::Kind k) {
    switch (k) {
        case BinningMode::Kind::automatic: return "auto";
        case BinningMode::Kind::fixed: return "fixed";
        case BinningMode::Kind::given: return "given";
    }
    return "unknown";
}

inline std::string to_string(Accumulation a) {
    return a == Accumulation::interpolate ? "interpolate" : "literal";
}

}  // namespace detail

inline json to_json(const Partition& p) { return detail::numbers(p.limits); }

// Either a bare array of limits or an object with a "limits" array.
inline Partition partition_from_json(const json& j) {
    const json& arr = j.is_object() && j.contains("limits") ? j.at("limits") : j;
    if (!arr.is_array()) throw InputError("partition must be a JSON array of limits");
    std::vector<double> limits;
    for (const auto& v : arr) {
        if (!v.is_number()) throw InputError("partition limits must be numbers");
        limits.push_back(v.get<double>());
    }
    return make_partition(std::move(limits));
}

inline Partition read_partition_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open partition file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("partition file '" + path + "': " + e.what());
    }
    return partition_from_json(j);
}

inline json to_json(const EffectHistogram& h) {
    return {{"lo", h.lo},         {"hi", h.hi},     {"counts", h.counts}, {"min", h.min},
            {"q1", h.q1},         {"median", h.median}, {"q3", h.q3},     {"max", h.max}};
}

inline json to_json(const Bin& b) {
    return {{"lo", b.lo},
            {"hi", b.hi},
            {"count", b.count},
            {"effect", detail::number(b.effect)},
            {"deviation", b.deviation ? detail::number(*b.deviation) : json(nullptr)},
            {"histogram", to_json(b.histogram)}};
}

inline json to_json(const BinningConfig& c, std::size_t n) {
    return {{"k_max", c.k_max}, {"alpha", c.alpha}, {"n_ppb", c.points_per_bin(n)}};
}

// The curve and envelope are also sampled on an evenly spaced grid so that
// consumers need not reimplement the accumulation.
inline json to_json(const EffectResult& r, const std::string& feature_name, EffectSource source,
                    std::size_t grid_points = kDefaultGridPoints) {
    json bins = json::array();
    for (const auto& b : r.bins.bins) bins.push_back(to_json(b));
    const auto grid = default_grid({r.partition.front(), r.partition.back()}, grid_points);
    std::vector<double> curve, envelope;
    for (double x : grid) {
        curve.push_back(r.effect(x));
        envelope.push_back(r.deviation(x));
    }
    return {{"feature", {{"index", r.feature_index}, {"name", feature_name}}},
            {"effect_source", to_string(source)},
            {"binning", detail::to_string(r.binning)},
            {"config", to_json(r.config, r.bins.total_count())},
            {"objective", r.objective ? detail::number(*r.objective) : json(nullptr)},
            {"accumulation", detail::to_string(r.accumulation)},
            {"centered", r.centered},
            {"centering_offset", r.centering_offset},
            {"partition", to_json(r.partition)},
            {"bins", bins},
            {"grid", detail::numbers(grid)},
            {"curve", detail::numbers(curve)},
            {"std", detail::numbers(envelope)},
            {"warnings", r.warnings}};
}

inline json to_json(const ICEBundle& ice, const GridCurve& pdp, std::size_t feature,
                    const std::string& feature_name) {
    json rows = json::array();
    for (std::size_t i = 0; i < ice.rows; ++i) {
        std::vector<double> row(ice.curves.begin() + static_cast<std::ptrdiff_t>(i * ice.grid.size()),
                                ice.curves.begin() + static_cast<std::ptrdiff_t>((i + 1) * ice.grid.size()));
        rows.push_back(detail::numbers(row));
    }
    return {{"feature", {{"index", feature}, {"name", feature_name}}},
            {"grid", detail::numbers(ice.grid)},
            {"pdp", detail::numbers(pdp.values)},
            {"ice", {{"rows", ice.rows}, {"centered", ice.centered}, {"curves", rows}}}};
}

inline json to_json(const synthetic::GeneratorSpec& s) {
    json j = {{"example", synthetic::to_string(s.example)}, {"n", s.n}, {"seed", s.seed}};
    if (s.example == synthetic::Example::simulation)
        j["parameters"] = {{"alpha", s.alpha}, {"a1", s.a1}, {"a2", s.a2}};
    return j;
}

inline std::string to_string(synthetic::TruthSource s) {
    return s == synthetic::TruthSource::closed_form ? "closed_form" : "dense_oracle";
}

// Ground truth sampled on an evenly spaced grid over each feature's observed
// range; features without a known truth are listed with "covered": false.
inline json ground_truth_json(const synthetic::GeneratorSpec& spec, const FeatureMatrix& data,
                              std::size_t grid_points = kDefaultGridPoints) {
    json features = json::array();
    for (std::size_t s = 0; s < data.cols(); ++s) {
        json f = {{"index", s}, {"name", data.names()[s]}};
        try {
            const auto gt = synthetic::ground_truth(spec, s);
            const auto grid = default_grid(data.feature_range(s), grid_points);
            std::vector<double> effect, het;
            for (double x : grid) {
                effect.push_back(gt.effect(x));
                het.push_back(gt.heterogeneity(x));
            }
            f["covered"] = true;
            f["source"] = to_string(gt.source);
            f["grid"] = detail::numbers(grid);
            f["effect"] = detail::numbers(effect);
            f["heterogeneity"] = detail::numbers(het);
        } catch (const CapabilityError&) {
            f["covered"] = false;
        }
        features.push_back(std::move(f));
    }
    return {{"spec", to_json(spec)}, {"features", features}};
}

inline json to_json(const MetricSummary& m) {
    return {{"mean", detail::number(m.mean)}, {"stddev", detail::number(m.stddev)}};
}

inline json to_json(const BenchmarkReport& r) {
    json summaries = json::array();
    for (const auto& s : r.summaries)
        summaries.push_back({{"method", s.method},
                             {"k", s.k},
                             {"feasible_trials", s.feasible_trials},
                             {"l_mu", to_json(s.l_mu)},
                             {"l_sigma", to_json(s.l_sigma)},
                             {"l_rho", to_json(s.l_rho)}});
    const auto& c = r.config;
    return {{"spec", to_json(r.spec)},
            {"config",
             {{"feature", c.feature},
              {"trials", c.trials},
              {"n", c.n},
              {"k_list", c.k_list},
              {"binning", to_json(c.binning, c.n)},
              {"n_dense", c.n_dense},
              {"k_dense", c.k_dense},
              {"master_seed", c.master_seed}}},
            {"oracle_seed", r.oracle_seed},
            {"summaries", summaries}};
}

// One row per (method, K, trial); limits are ';'-separated.
inline void write_benchmark_csv(std::ostream& out, const BenchmarkReport& r) {
    out << "method,k,trial,seed,feasible,l_mu,l_sigma,l_rho,limits\n";
    auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
    for (const auto& row : r.rows) {
        out << row.method << ',' << row.k << ',' << row.trial << ',' << row.seed << ','
            << (row.feasible ? 1 : 0) << ',' << num(row.l_mu) << ',' << num(row.l_sigma) << ','
            << num(row.l_rho) << ',';
        for (std::size_t i = 0; i < row.limits.size(); ++i) out << (i ? ";" : "") << format_double(row.limits[i]);
        out << '\n';
    }
}

// Curve and envelope on the same grid as the JSON output.
inline void write_effect_csv(std::ostream& out, const EffectResult& r,
                             std::size_t grid_points = kDefaultGridPoints) {
    out << "x,effect,std\n";
    for (double x : default_grid({r.partition.front(), r.partition.back()}, grid_points))
        out << format_double(x) << ',' << format_double(r.effect(x)) << ',' << format_double(r.deviation(x))
            << '\n';
}

}  // namespace rhale
