#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fpp {

/// Edge-weight distribution F on [0, inf). Immutable after construction.
///
/// Supported kinds: finite atomic laws, uniform intervals, shifted
/// exponentials, and tabulated piecewise-linear CDFs. All quantities the
/// influence calculus needs (CDF, partial moments up to order 2, the
/// positive-part expectation E(z - Y)_+ and the generalized inverse) are
/// exposed as closed forms; user tables fall back to adaptive quadrature.
class WeightDistribution {
public:
    enum class Kind { atomic, uniform_interval, shifted_exponential, user_table };

    static WeightDistribution atomic(std::vector<std::pair<double, double>> atoms);
    static WeightDistribution uniform_interval(double a, double b);
    static WeightDistribution shifted_exponential(double rate, double shift);
    /// Piecewise-linear CDF through the given (x, F(x)) knots; first knot must
    /// have F=0 and last F=1.
    static WeightDistribution user_table(std::vector<std::pair<double, double>> knots);

    /// Parse "atomic:1=0.5,2=0.5", "uniform:0,1" or "exp:rate=1,shift=0".
    static WeightDistribution parse(std::string_view spec);
    /// Round-trip spec string (used in output metadata).
    [[nodiscard]] const std::string& spec_string() const { return spec_; }

    [[nodiscard]] Kind kind() const { return kind_; }
    /// Infimum r of the support.
    [[nodiscard]] double support_min() const { return r_; }
    [[nodiscard]] double mean() const { return mu_; }
    [[nodiscard]] double second_moment() const { return m2_; }

    /// True when the law is atomic with integer-valued atoms; geodesy then
    /// runs with exact integer sums and zero tie tolerance.
    [[nodiscard]] bool integer_atomic() const { return integer_atomic_; }

    /// Atoms in increasing value order (atomic kind only).
    [[nodiscard]] const std::vector<std::pair<double, double>>& atoms() const;

    [[nodiscard]] double cdf(double x) const;
    /// Integral of y^order dF(y) over [support_min, x]; order in {0,1,2}.
    /// x may be +infinity, yielding 1, mean, second_moment respectively.
    [[nodiscard]] double partial_moment(int order, double x) const;
    /// E (z - Y)_+ = z F(z) - partial_moment(1, z) for z >= r, else 0.
    [[nodiscard]] double expect_positive_part(double z) const;
    /// Generalized inverse CDF: inf { x : F(x) >= u }, u in [0, 1).
    [[nodiscard]] double sample(double u) const;

    /// True when F(0) >= p_c(d), i.e. zero weights percolate and passage
    /// times degenerate. Advisory only; callers may warn but must not abort.
    [[nodiscard]] bool percolation_degenerate(int d) const;

private:
    WeightDistribution() = default;

    Kind kind_ = Kind::atomic;
    double r_ = 0.0;
    double mu_ = 0.0;
    double m2_ = 0.0;
    bool integer_atomic_ = false;
    std::string spec_;
    // atomic: (value, prob) sorted; user_table: (x, F(x)) knots.
    std::vector<std::pair<double, double>> points_;
    std::vector<double> cum_; // atomic: cumulative probabilities
    double a_ = 0.0, b_ = 0.0; // uniform bounds / exp (shift, shift+1/rate unused)
    double rate_ = 0.0, shift_ = 0.0;
};

} // namespace fpp
