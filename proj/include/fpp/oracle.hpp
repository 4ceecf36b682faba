#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fpp/distribution.hpp"

namespace fpp::oracle {

/// Function of m coordinates, each carrying an i.i.d. atomic weight.
/// evaluate must be total on (atom values)^m and deterministic.
struct FiniteFunction {
    int m = 0;
    std::function<double(std::span<const double>)> evaluate;
};

/// Dense polynomial in the resampling fraction s, as coefficients c_0..c_d.
struct PolynomialInS {
    std::vector<double> coeff;

    [[nodiscard]] double operator()(double s) const;
    [[nodiscard]] PolynomialInS antiderivative() const;
    [[nodiscard]] PolynomialInS derivative() const;
};

/// Enumeration guard: m <= 8 and |atoms|^m <= 1e6, atomic law required.
/// Throws std::invalid_argument when violated.
void check_enumeration_guard(const FiniteFunction& f, const WeightDistribution& dist);

/// Exact autocorrelation polynomial
///   Q_s(f) = sum over subsets S of s^|S| (1-s)^(m-|S|} E[f(omega) f(omega^S)]
/// where omega^S resamples the coordinates in S, every expectation computed
/// by exhaustive enumeration over the atoms.
PolynomialInS q_polynomial(const FiniteFunction& f, const WeightDistribution& dist);

/// Exact co-influence of coordinate i as a polynomial in s:
///   Inf_i(s) = sum_x p_x Q_s(D_i^x f),
/// with D_i^x f(omega) = f(omega with coord i := x) - sum_y p_y f(omega with coord i := y).
PolynomialInS influence_polynomial(const FiniteFunction& f, int coord,
                                   const WeightDistribution& dist);
/// All m per-coordinate co-influence polynomials from a single enumeration.
std::vector<PolynomialInS> influence_polynomials(const FiniteFunction& f,
                                                 const WeightDistribution& dist);
double influence_exact(const FiniteFunction& f, int coord, const WeightDistribution& dist,
                       double s);

/// Both sides of the covariance identity
///   Cov(f(omega_0), f(omega_t)) = int_t^1 sum_i Inf_i(s) ds
/// as exact polynomials: lhs via Q, rhs via polynomial integration.
struct CovarianceVerification {
    PolynomialInS q;             // Q_s(f)
    PolynomialInS influence_sum; // sum_i Inf_i(s)

    /// (Q_t - Q_1) - int_t^1 influence_sum(s) ds; zero up to rounding.
    [[nodiscard]] double residual(double t) const;
};

CovarianceVerification analyze_cov_formula(const FiniteFunction& f,
                                           const WeightDistribution& dist);
double verify_cov_formula(const FiniteFunction& f, const WeightDistribution& dist, double t);

/// Monotone-coupling parameters for times s <= t:
/// p = 1 - sqrt(1-s), q = 1 - sqrt(1-t), rho = (q-p)/(1-p).
struct CouplingParams {
    double s = 0.0, t = 0.0;
    double p = 0.0, q = 0.0, rho = 0.0;

    static CouplingParams make(double s, double t);
};

/// One draw of the three-way coupling: X, Y, Z are m-vectors with
/// (X, Y) ~ (omega_0, omega_s) and (X, Z) ~ (omega_0, omega_t).
/// Construction: V' resamples V from W with prob rho per coordinate;
/// X and Y resample V' independently (W', W'') with prob p;
/// Z resamples V from W''' with prob q.
struct CouplingDraw {
    std::vector<double> x, y, z;
};

CouplingDraw coupling_draw(const CouplingParams& params, const WeightDistribution& dist,
                           int m, std::uint64_t seed, std::uint64_t index);

/// Time at which two independently-resampled replicas of one trajectory look
/// like a coupled pair: s = 2t - t^2.
double effective_time(double t);

} // namespace fpp::oracle
