// rhale: synthetic data, effect explanations and binning benchmarks.
//
//   rhale synth   --example running --n 1000 --seed 7 --out data/
//   rhale explain --example running --n 1000 --feature 0 --baseline pdp-ice --out run/
//   rhale explain --data data/data.csv --gradients data/gradients.csv --feature x1 --out run/
//   rhale bench   --example piecewise --trials 30 --n 500 --out bench/
//
// Exit codes: 0 ok, 2 usage or input error, 3 infeasible binning, 4 internal error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "rhale/rhale.hpp"

namespace fs = std::filesystem;
using namespace rhale;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240417;

struct Options {
    std::string example;
    std::string data;
    std::string gradients;
    std::string feature = "0";
    std::string binning = "auto";
    std::optional<double> alpha;
    std::optional<std::size_t> n_ppb;
    std::optional<std::size_t> k_max;
    std::string baseline = "none";
    std::size_t trials = 30;
    std::optional<std::size_t> n;
    std::uint64_t seed = kDefaultSeed;
    std::string out = ".";
    std::string format;
};

struct Formats {
    bool json = false, csv = false, svg = false;
};

Formats parse_formats(const std::string& spec, const std::string& fallback) {
    Formats f;
    std::stringstream ss(spec.empty() ? fallback : spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "json") f.json = true;
        else if (item == "csv") f.csv = true;
        else if (item == "svg") f.svg = true;
        else throw InputError("unknown format '" + item + "' (expected json, csv or svg)");
    }
    return f;
}

BinningConfig binning_config(const Options& o) {
    BinningConfig c;
    if (o.alpha) c.alpha = *o.alpha;
    if (o.k_max) c.k_max = *o.k_max;
    c.n_ppb = o.n_ppb;
    c.validate();
    return c;
}

BinningMode binning_mode(const std::string& spec) {
    if (spec == "auto") return BinningMode::automatic();
    if (spec.rfind("fixed:", 0) == 0) {
        const std::string k = spec.substr(6);
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(k, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != k.size() || v == 0)
            throw InputError("--binning fixed:K needs a positive integer K, got '" + k + "'");
        return BinningMode::fixed(v);
    }
    if (spec.rfind("file:", 0) == 0) return BinningMode::given(read_partition_file(spec.substr(5)));
    throw InputError("--binning must be auto, fixed:K or file:PATH, got '" + spec + "'");
}

// A column index or a header name.
std::size_t resolve_feature(const FeatureMatrix& data, const std::string& f) {
    if (!f.empty() && f.find_first_not_of("0123456789") == std::string::npos) {
        const auto s = static_cast<std::size_t>(std::stoull(f));
        data.check_feature(s);
        return s;
    }
    const auto& names = data.names();
    for (std::size_t s = 0; s < names.size(); ++s)
        if (names[s] == f) return s;
    throw InputError("no feature named '" + f + "'");
}

fs::path output_dir(const std::string& out) {
    fs::path p(out);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec || !fs::is_directory(p)) throw InputError("cannot create output directory '" + out + "'");
    return p;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path.string());
    f << content;
    if (!f) throw InputError("failed writing " + path.string());
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_synth(const Options& o) {
    if (o.example.empty()) throw InputError("synth needs --example");
    const auto spec = synthetic::parse_example(o.example, o.n.value_or(1000), o.seed);
    const auto data = synthetic::generate(spec);
    const auto dir = output_dir(o.out);

    std::ostringstream features, gradients;
    write_csv(features, data.features);
    const auto& x = data.features;
    std::vector<double> grad;
    grad.reserve(x.rows() * x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto g = (*data.model.gradient)(x.row(i));
        grad.insert(grad.end(), g.begin(), g.end());
    }
    write_csv(gradients, FeatureMatrix(x.rows(), x.cols(), std::move(grad), x.names()));
    write_file(dir / "data.csv", features.str());
    write_file(dir / "gradients.csv", gradients.str());
    write_file(dir / "ground_truth.json", dump(ground_truth_json(spec, x)));
    std::cerr << "wrote " << x.rows() << " rows to " << dir.string() << "\n";
    return 0;
}

int cmd_explain(const Options& o) {
    if (o.example.empty() && o.data.empty()) throw InputError("explain needs --data or --example");
    if (!o.example.empty() && !o.gradients.empty())
        throw InputError("--gradients cannot be combined with a built-in --example model");
    const Formats fmt = parse_formats(o.format, "json,svg");

    // Data comes from --data when given, otherwise from the generator; the model
    // is the built-in example's, if any.
    std::optional<synthetic::SyntheticData> generated;
    std::optional<FeatureMatrix> loaded;
    std::optional<ModelHandle> model;
    if (!o.example.empty()) {
        generated = synthetic::generate(synthetic::parse_example(o.example, o.n.value_or(1000), o.seed));
        model = generated->model;
    }
    if (!o.data.empty()) loaded = read_csv_file(o.data);
    const FeatureMatrix& data = loaded ? *loaded : generated->features;
    if (model) check_arity(*model, data);

    const std::size_t s = resolve_feature(data, o.feature);
    LocalEffects effects;
    if (model) {
        effects = local_effects(*model, data, s);
    } else {
        if (o.gradients.empty()) throw InputError("--data without a built-in --example model needs --gradients");
        effects = local_effects_from_gradients(data, read_csv_file(o.gradients), s);
    }
    if (o.baseline != "none" && o.baseline != "pdp-ice")
        throw InputError("--baseline must be none or pdp-ice, got '" + o.baseline + "'");
    if (o.baseline == "pdp-ice" && !model) throw InputError("--baseline pdp-ice needs a model (--example)");

    const auto result = rhale::rhale(effects, binning_config(o), binning_mode(o.binning));
    const std::string& name = data.names()[s];
    const auto dir = output_dir(o.out);
    if (fmt.json) write_file(dir / "effect.json", dump(to_json(result, name, effects.source)));
    if (fmt.csv) {
        std::ostringstream csv;
        write_effect_csv(csv, result);
        write_file(dir / "effect.csv", csv.str());
    }
    if (fmt.svg) write_file(dir / "effect.svg", svg::effect_plot(result, name));
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

    if (o.baseline == "pdp-ice") {
        const auto bundle = ice(*model, data, s, default_grid(data.feature_range(s)), false);
        const auto curve = pdp_from_ice(bundle);
        if (fmt.json) write_file(dir / "pdp_ice.json", dump(to_json(bundle, curve, s, name)));
        if (fmt.svg) write_file(dir / "pdp_ice.svg", svg::pdp_ice_plot(bundle, curve, name));
    }
    std::cerr << name << ": " << result.partition.bins() << " bins\n";
    return 0;
}

int cmd_bench(const Options& o) {
    if (o.example.empty()) throw InputError("bench needs --example (a generator to resample)");
    if (!o.data.empty()) throw InputError("bench resamples from a generator; --data is not supported");
    const Formats fmt = parse_formats(o.format, "json,csv,svg");
    BenchmarkConfig c;
    c.trials = o.trials;
    c.n = o.n.value_or(500);
    c.binning = binning_config(o);
    c.master_seed = o.seed;
    const auto spec = synthetic::parse_example(o.example, c.n, o.seed);
    if (o.feature.empty() || o.feature.find_first_not_of("0123456789") != std::string::npos)
        throw InputError("bench --feature must be a column index");
    c.feature = std::stoull(o.feature);

    const auto report = run_benchmark(spec, c);
    const auto dir = output_dir(o.out);
    if (fmt.csv) {
        std::ostringstream csv;
        write_benchmark_csv(csv, report);
        write_file(dir / "bench.csv", csv.str());
    }
    if (fmt.json) write_file(dir / "bench.json", dump(to_json(report)));
    if (fmt.svg) {
        write_file(dir / "bench_l_mu.svg", svg::benchmark_plot(report, &MethodSummary::l_mu, "L_mu"));
        write_file(dir / "bench_l_sigma.svg", svg::benchmark_plot(report, &MethodSummary::l_sigma, "L_sigma"));
        write_file(dir / "bench_l_rho.svg", svg::benchmark_plot(report, &MethodSummary::l_rho, "L_rho"));
    }
    const auto& a = report.automatic();
    std::cerr << "auto: L_mu " << a.l_mu.mean << ", L_sigma " << a.l_sigma.mean << ", L_rho " << a.l_rho.mean
              << " over " << c.trials << " trials\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heterogeneity-aware accumulated local effects with automatic bin splitting"};
    app.require_subcommand(1);
    Options o;

    auto add_model = [&](CLI::App* cmd) {
        cmd->add_option("--example", o.example,
                        "built-in example: concept, running, simulation[-a|-b|-c], piecewise, nonlinear");
        cmd->add_option("--n", o.n, "samples to generate");
        cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
        cmd->add_option("--out", o.out, "output directory")->capture_default_str();
    };
    auto add_binning = [&](CLI::App* cmd) {
        cmd->add_option("--feature", o.feature, "feature index or column name")->capture_default_str();
        cmd->add_option("--alpha", o.alpha, "discount for populous bins (default 0.2)");
        cmd->add_option("--n-ppb", o.n_ppb, "minimum points per bin (default max(2, ceil(N/20)))");
        cmd->add_option("--k-max", o.k_max, "candidate grid resolution (default 50)");
        cmd->add_option("--format", o.format, "comma-separated subset of json,csv,svg");
    };

    auto* synth = app.add_subcommand("synth", "write data.csv, gradients.csv and ground_truth.json");
    add_model(synth);

    auto* explain = app.add_subcommand("explain", "estimate the effect of one feature");
    add_model(explain);
    add_binning(explain);
    explain->add_option("--data", o.data, "feature CSV with a header row");
    explain->add_option("--gradients", o.gradients, "gradient CSV of the same shape as --data");
    explain->add_option("--binning", o.binning, "auto, fixed:K or file:PATH")->capture_default_str();
    explain->add_option("--baseline", o.baseline, "none or pdp-ice")->capture_default_str();

    auto* bench = app.add_subcommand("bench", "compare automatic and fixed-size binning over repeated trials");
    add_model(bench);
    add_binning(bench);
    bench->add_option("--trials", o.trials, "independent trials")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*synth) return cmd_synth(o);
        if (*explain) return cmd_explain(o);
        return cmd_bench(o);
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
