#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fpp/distribution.hpp"
#include "fpp/lattice.hpp"

namespace fpp {

/// Thrown when the fraction of truncation-censored samples exceeds the
/// budget: results would be biased, so the run fails loudly instead.
class CensoringOverflow : public std::runtime_error {
public:
    CensoringOverflow(double fraction, double budget)
        : std::runtime_error("censored fraction " + std::to_string(fraction) +
                             " exceeds budget " + std::to_string(budget)),
          fraction_(fraction) {}
    [[nodiscard]] double fraction() const { return fraction_; }

private:
    double fraction_;
};

struct EstimateOptions {
    int d = 2;
    Vertex target{};
    /// Box margin around {0, target}; <= 0 selects the default rule. A
    /// sample whose geodesics touch the boundary is recomputed with doubled
    /// padding (same realization, extended) up to max_retries times, then
    /// marked censored and excluded from every aggregate.
    int padding = 0;
    WeightDistribution dist = WeightDistribution::uniform_interval(0.0, 1.0);
    std::vector<double> t_grid;
    std::int64_t n_samples = 100;
    std::uint64_t seed = 1;
    int workers = 1;
    bool with_overlap = true;
    bool with_coinfluence = false;
    bool with_low_weight = false;
    /// Threshold offset for low-weight geodesic edges; NaN selects the
    /// largest probed eps with F(r + eps) <= 1/2.
    double low_weight_eps = std::numeric_limits<double>::quiet_NaN();
    int max_retries = 2;
    double censor_budget = 0.01;
    /// When false the box is taken as given and boundary contact is
    /// accepted (exact small-box studies).
    bool grow_on_boundary = true;
};

/// Raw outcomes of one sample, in grid order. Kept so that paired
/// statistics (common-random-number comparisons across t) stay possible.
struct SampleRecord {
    bool censored = false;
    double T0 = 0.0;
    double pi0_size = 0.0;
    double low_weight_count = 0.0;
    std::vector<double> Tt;
    std::vector<double> overlap;
    std::vector<double> coinfluence;
};

struct SeriesPoint {
    double t = 0.0;
    double value = 0.0;
    double se = 0.0;
    std::int64_t n = 0;
};

struct EstimatorReport {
    std::uint64_t seed = 0;
    int d = 2;
    Vertex target{};
    int padding = 0;
    std::string dist_spec;
    std::int64_t n_samples = 0;
    std::int64_t censored = 0;
    double low_weight_eps = 0.0;
    std::vector<double> t_grid;
    /// Quantity name -> series over t, in a fixed emission order. Scalar
    /// quantities (var_T, pi0_size, ...) are single points at t = 0.
    std::vector<std::pair<std::string, std::vector<SeriesPoint>>> series;
    std::vector<SampleRecord> samples;

    [[nodiscard]] const std::vector<SeriesPoint>* find(const std::string& name) const;
    /// RFC-4180 rows: quantity,t,estimate,stderr,n_samples,censored.
    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] std::string to_json() const;
};

/// Monte Carlo estimation of the coupled passage-time quantities between 0
/// and target: Var(T), Cov(T_0, T_t), correlation (clipped, pre-clip kept),
/// geodesic overlap |pi_0 ^ pi_t|, and optionally the summed co-influence
/// of candidate edges and the low-weight geodesic edge count. Results are
/// bit-identical for any worker count: samples are keyed by index and
/// reduced in index order.
EstimatorReport estimate(const EstimateOptions& opt);

} // namespace fpp
