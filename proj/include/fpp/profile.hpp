#pragma once

#include <string>
#include <vector>

#include "fpp/distribution.hpp"
#include "fpp/geodesic.hpp"

namespace fpp {

/// Substitution response of the passage time at one edge, derived from the
/// replacement values (A, B): substituting weight x yields min(A, B + x).
///
///   Z = max(r, A - B)   largest weight at which the edge still matters
///   H = E (Z - Y)_+     height of the flat part of the difference profile
///   Y = max(r, Z - H)   zero crossing of the difference profile
///
/// The centered difference D(x) = min(A,B+x) - E min(A,B+Y) collapses to
/// H - (Z - x)_+ on the support, is nonpositive below Y, flat at H above Z,
/// and integrates to zero against F.
struct EdgeProfile {
    double A = 0.0;
    double B = 0.0;
    double Z = 0.0;
    double H = 0.0;
    double Y = 0.0;

    /// D(x) = H - (Z - x)_+.
    [[nodiscard]] double value(double x) const;
    /// Identically-zero profile (Z at the support infimum).
    [[nodiscard]] bool flat() const { return H == 0.0; }
};

/// Build the profile from replacement values. A must be finite (an infinite
/// A marks a censored edge whose deletion disconnects the endpoints);
/// B = +infinity is allowed and yields a flat profile.
EdgeProfile edge_profile(const ReplacementValues& rv, const WeightDistribution& dist);
EdgeProfile edge_profile(double A, double B, const WeightDistribution& dist);

/// E min(A, B + Y) under F, in closed form via partial moments.
double expected_substituted_time(double A, double B, const WeightDistribution& dist);

/// Co-influence term of one edge across two coupled configurations:
/// integral of D_0(x) D_t(x) dF(x), exact piecewise closed form.
double co_influence_term(const EdgeProfile& p0, const EdgeProfile& pt,
                         const WeightDistribution& dist);

/// Integral of the product of negative parts (D_0)_-(x) (D_t)_-(x) dF(x).
double negative_part_product_integral(const EdgeProfile& p0, const EdgeProfile& pt,
                                      const WeightDistribution& dist);

enum class CheckStatus { pass, fail, skipped };

struct LemmaCheck {
    std::string id;
    CheckStatus status = CheckStatus::pass;
    double slack = 0.0; // >= 0 on pass; margin by which the inequality holds
    std::string reason; // skip reason or "vacuous"
};

/// Deterministic per-configuration checks on a coupled profile pair:
///  - negpart_product_bound: int D_0 D_t dF >= int (D_0)_-(D_t)_- dF
///  - zero_gap_bound:        Z >= r + eps implies Y >= r + eps/2
///                           (needs F(r + eps) <= 1/2)
///  - flat_height_bound:     Z <= gamma implies H <= F(Y)
///                           (needs gamma in (r, r + 1/2), F(gamma) <= 1/2)
/// Preconditions are validated; unmet ones yield skipped with a reason.
/// eps/gamma may be NaN to skip the corresponding checks.
std::vector<LemmaCheck> check_lemma_suite(const EdgeProfile& p0, const EdgeProfile& pt,
                                          const WeightDistribution& dist,
                                          double eps, double gamma);

/// Largest eps on a 64-point probe grid with F(r + eps) <= 1/2; NaN if the
/// distribution puts mass more than 1/2 at its infimum.
double default_eps(const WeightDistribution& dist);
/// min(r + 0.49, r + eps), validated against gamma in (r, r+1/2) and
/// F(gamma) <= 1/2; NaN when eps is NaN.
double default_gamma(const WeightDistribution& dist, double eps);

} // namespace fpp
