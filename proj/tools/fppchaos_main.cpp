#include <cstdio>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "fpp/experiments.hpp"

namespace {

struct Cli {
    std::string config_path;
    // (key, value) assignments in command-line order, applied on top of the
    // config file so explicit flags win.
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_common_options(CLI::App* sub, Cli& cli) {
    sub->add_option_function<std::string>(
        "--config", [&cli](const std::string& s) { cli.config_path = s; },
        "key = value configuration file");
    auto keyed = [&cli, sub](const std::string& flag, const std::string& key,
                             const std::string& help) {
        sub->add_option_function<std::string>(
            flag, [&cli, key](const std::string& s) { cli.overrides.emplace_back(key, s); },
            help);
    };
    keyed("--seed", "seed", "master seed");
    keyed("--d", "d", "lattice dimension (2..4)");
    keyed("--v", "v", "target vertex, comma separated (overrides --sizes)");
    keyed("--dist", "dist",
          "weight law: uniform:a,b | exp:rate=..,shift=.. | atomic:v=p,... | table:x=F,...");
    keyed("--t-grid", "t_grid", "times: a:b:n or comma list");
    keyed("--sizes", "sizes", "comma list of |v| values (targets size * e1)");
    keyed("--samples", "n_samples", "Monte Carlo samples per size");
    keyed("--k", "k", "replica count");
    keyed("--t", "t", "replica resampling time");
    keyed("--padding", "padding", "box margin (0 = default rule)");
    keyed("--workers", "workers", "worker threads (results identical for any count)");
    keyed("--out", "out", "output path prefix");
    keyed("--eps", "eps", "low-weight / inequality threshold offset");
    keyed("--gamma", "gamma", "flat-height threshold");
    sub->add_flag_callback(
        "--coinfluence", [&cli]() { cli.overrides.emplace_back("coinfluence", "true"); },
        "also estimate the summed co-influence (slower)");
    sub->add_flag_callback(
        "--plot", [&cli]() { cli.overrides.emplace_back("plot_script", "true"); },
        "emit a gnuplot script next to the CSV");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamical first-passage percolation: geodesic overlap, covariance and "
                 "chaos experiments"};
    app.require_subcommand(1);
    Cli cli;

    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {
        {"scan", "sizes x t-grid sweep of Var, Cov, corr and geodesic overlap"},
        {"transition", "correlation/overlap at t = alpha Var(T)/|v|, alpha in 1/8..8"},
        {"valleys", "k replica geodesics: maximum overlap O_k and time difference dT_k"},
        {"var-scaling", "Var(T) log|v|/|v| and low-weight geodesic edge counts"},
        {"lemmas", "randomized profile-inequality checks with negative controls"},
        {"oracle", "exact enumeration checks: covariance identity, monotonicity, bounds"},
    };
    for (const auto& s : subs) add_common_options(app.add_subcommand(s.name, s.help), cli);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help lands here too (exit 0); real usage errors all map to 1
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        fpp::ExperimentConfig cfg;
        if (!cli.config_path.empty()) cfg = fpp::ExperimentConfig::from_file(cli.config_path);
        cfg.experiment = app.get_subcommands().front()->get_name();
        for (const auto& [key, value] : cli.overrides) cfg.set(key, value);

        const fpp::ExperimentResult res = fpp::run_experiment(cfg);
        std::printf("%s\n", res.summary.c_str());
        if (!res.csv_path.empty()) std::printf("csv: %s\n", res.csv_path.c_str());
        if (!res.json_path.empty()) std::printf("json: %s\n", res.json_path.c_str());
        if (!res.plot_path.empty()) std::printf("plot: %s\n", res.plot_path.c_str());
        if (cfg.experiment == "oracle" || cfg.experiment == "lemmas")
            std::printf("result: %s\n", res.exit_code == 0 ? "pass" : "fail");
        return res.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
