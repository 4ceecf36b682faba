#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace fpp {

/// Flat key = value configuration shared by every experiment and the CLI.
/// Unknown keys fail loudly.
struct ExperimentConfig {
    std::string experiment;      // scan | transition | valleys | var-scaling | lemmas | oracle
    int d = 2;
    std::vector<int> v;          // explicit target; empty -> size * e1 per entry of sizes
    std::string dist = "uniform:0,1";
    std::vector<double> t_grid = {0.1, 0.25, 0.5, 0.75, 1.0};
    std::vector<int> sizes = {16, 32, 64};
    std::int64_t n_samples = 200;
    int k = 4;                   // replica count (valleys)
    double t = 0.3;              // replica resampling time (valleys)
    std::uint64_t seed = 1;
    int padding = 0;             // 0 -> default rule
    std::string out;             // output path prefix; empty -> experiment name
    double eps = std::numeric_limits<double>::quiet_NaN();
    double gamma = std::numeric_limits<double>::quiet_NaN();
    int workers = 1;
    bool coinfluence = false;
    bool plot_script = false;

    static ExperimentConfig from_file(const std::string& path);
    /// Apply one assignment; throws std::invalid_argument on unknown keys or
    /// unparsable values.
    void set(const std::string& key, const std::string& value);
};

/// "a:b:n" -> n evenly spaced points on [a, b]; otherwise a comma list.
std::vector<double> parse_time_grid(const std::string& spec);
std::vector<int> parse_int_list(const std::string& spec);

struct ExperimentResult {
    int exit_code = 0; // 0 ok, 2 verification failure, 3 censoring overflow
    std::string csv_path;
    std::string json_path;
    std::string plot_path; // empty unless a plot script was requested
    std::string summary;   // short human-readable outcome
};

/// Dispatch on cfg.experiment. Censoring overflow is reported as exit code
/// 3 in the result; other errors propagate as exceptions.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Sizes x t_grid sweep of the coupled estimators (chaos onset).
ExperimentResult run_scan(const ExperimentConfig& cfg);
/// Correlation/overlap at t = alpha * Var(T)/|v| for alpha in 1/8..8
/// (stability window around the transition scale).
ExperimentResult run_transition(const ExperimentConfig& cfg);
/// k replica geodesics at time t: maximum overlap O_k and maximum time
/// difference Delta T_k, with the sublinearity schedule as advisory output.
ExperimentResult run_valleys(const ExperimentConfig& cfg);
/// Var(T) * log|v| / |v| and low-weight geodesic edge counts across sizes.
ExperimentResult run_var_scaling(const ExperimentConfig& cfg);
/// Randomized profile-inequality checks plus negative controls; exit 2 on
/// any real failure or an undetected control.
ExperimentResult run_lemma_suite(const ExperimentConfig& cfg);
/// Exact verification corpus (covariance identity, monotonicity, influence
/// bounds, coupling laws); exit 2 unless everything passes.
ExperimentResult run_oracle(const ExperimentConfig& cfg);

} // namespace fpp
