#pragma once

#include <cstdint>
#include <span>

namespace fpp::stats {

struct Estimate {
    double value = 0.0;
    double se = 0.0;
    std::int64_t n = 0;
};

Estimate mean_se(std::span<const double> x);
/// Unbiased sample variance; standard error from the fourth central moment.
Estimate variance_se(std::span<const double> x);
/// Paired-sample covariance; standard error from the spread of the
/// per-sample cross products.
Estimate covariance_se(std::span<const double> x, std::span<const double> y);

struct CorrEstimate {
    double value = 0.0;   // clipped to [-1, 1]
    double preclip = 0.0; // raw ratio before clipping
    double se = 0.0;      // delta-method standard error
    std::int64_t n = 0;
    bool defined = true;  // false when either marginal variance vanishes
};

CorrEstimate correlation_se(std::span<const double> x, std::span<const double> y);

/// Upper regularized incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);
/// Upper-tail p-value of a chi-square statistic.
double chi_square_pvalue(double stat, int dof);

} // namespace fpp::stats
