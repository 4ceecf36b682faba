#include "fpp/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fpp {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double rounding_tol(double a, double b) {
    return 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace

double EdgeProfile::value(double x) const {
    return H - std::max(Z - x, 0.0);
}

EdgeProfile edge_profile(double A, double B, const WeightDistribution& dist) {
    if (std::isinf(A)) throw std::domain_error("censored edge: deletion disconnects the endpoints");
    EdgeProfile p;
    p.A = A;
    p.B = B;
    const double r = dist.support_min();
    p.Z = std::max(r, A - B);
    p.H = dist.expect_positive_part(p.Z);
    p.Y = std::max(r, p.Z - p.H);
    return p;
}

EdgeProfile edge_profile(const ReplacementValues& rv, const WeightDistribution& dist) {
    return edge_profile(rv.A, rv.B, dist);
}

double expected_substituted_time(double A, double B, const WeightDistribution& dist) {
    if (std::isinf(A)) throw std::domain_error("censored edge: deletion disconnects the endpoints");
    const double z = A - B; // min(A, B+x) = A - (z - x)_+
    if (std::isinf(B) || z <= dist.support_min()) return A;
    return B * dist.cdf(z) + dist.partial_moment(1, z) + A * (1.0 - dist.cdf(z));
}

namespace {

/// Integral of (x + c0)(x + c1) dF over [support_min, hi].
double quadratic_partial(double c0, double c1, double hi, const WeightDistribution& dist) {
    return dist.partial_moment(2, hi) + (c0 + c1) * dist.partial_moment(1, hi) +
           c0 * c1 * dist.partial_moment(0, hi);
}

} // namespace

double co_influence_term(const EdgeProfile& p0, const EdgeProfile& pt,
                         const WeightDistribution& dist) {
    if (p0.flat() || pt.flat()) return 0.0;
    const bool first_smaller = p0.Z <= pt.Z;
    const EdgeProfile& lo = first_smaller ? p0 : pt;
    const EdgeProfile& hi = first_smaller ? pt : p0;
    const double a0 = p0.H - p0.Z, at = pt.H - pt.Z;
    // Below both Z's the integrand is the full quadratic; between them the
    // smaller profile is already flat at its H; above both it is constant.
    // The integrand is continuous, so atoms at the break points are safe.
    double total = quadratic_partial(a0, at, lo.Z, dist);
    if (hi.Z > lo.Z) {
        const double ahi = hi.H - hi.Z;
        total += lo.H * (dist.partial_moment(1, hi.Z) - dist.partial_moment(1, lo.Z) +
                         ahi * (dist.partial_moment(0, hi.Z) - dist.partial_moment(0, lo.Z)));
    }
    total += p0.H * pt.H * (1.0 - dist.partial_moment(0, hi.Z));
    return total;
}

double negative_part_product_integral(const EdgeProfile& p0, const EdgeProfile& pt,
                                      const WeightDistribution& dist) {
    if (p0.flat() || pt.flat()) return 0.0;
    const double r = dist.support_min();
    const double ymin = std::min(p0.Y, pt.Y);
    // A profile with Y = r has no negative part at all.
    if (!(ymin > r)) return 0.0;
    return quadratic_partial(p0.H - p0.Z, pt.H - pt.Z, ymin, dist);
}

std::vector<LemmaCheck> check_lemma_suite(const EdgeProfile& p0, const EdgeProfile& pt,
                                          const WeightDistribution& dist,
                                          double eps, double gamma) {
    std::vector<LemmaCheck> out;
    const double r = dist.support_min();

    {
        LemmaCheck c;
        c.id = "negpart_product_bound";
        const double lhs = co_influence_term(p0, pt, dist);
        const double rhs = negative_part_product_integral(p0, pt, dist);
        c.slack = lhs - rhs;
        c.status = c.slack >= -rounding_tol(lhs, rhs) ? CheckStatus::pass : CheckStatus::fail;
        out.push_back(std::move(c));
    }

    {
        LemmaCheck c;
        c.id = "zero_gap_bound";
        if (std::isnan(eps) || !(eps > 0.0)) {
            c.status = CheckStatus::skipped;
            c.reason = "no valid eps (distribution mass at the infimum exceeds 1/2)";
        } else if (dist.cdf(r + eps) > 0.5) {
            c.status = CheckStatus::skipped;
            c.reason = "precondition F(r+eps) <= 1/2 fails";
        } else {
            bool applicable = false;
            double slack = std::numeric_limits<double>::infinity();
            for (const EdgeProfile* p : {&p0, &pt}) {
                if (p->Z >= r + eps) {
                    applicable = true;
                    slack = std::min(slack, p->Y - (r + eps / 2.0));
                }
            }
            if (!applicable) {
                c.reason = "vacuous: neither profile has Z >= r + eps";
                c.slack = 0.0;
            } else {
                c.slack = slack;
                if (slack < -rounding_tol(r + eps, slack)) c.status = CheckStatus::fail;
            }
        }
        out.push_back(std::move(c));
    }

    {
        LemmaCheck c;
        c.id = "flat_height_bound";
        if (std::isnan(gamma)) {
            c.status = CheckStatus::skipped;
            c.reason = "no valid gamma";
        } else if (!(gamma > r && gamma < r + 0.5)) {
            c.status = CheckStatus::skipped;
            c.reason = "precondition gamma in (r, r+1/2) fails";
        } else if (dist.cdf(gamma) > 0.5) {
            c.status = CheckStatus::skipped;
            c.reason = "precondition F(gamma) <= 1/2 fails";
        } else {
            bool applicable = false;
            double slack = std::numeric_limits<double>::infinity();
            for (const EdgeProfile* p : {&p0, &pt}) {
                if (p->Z <= gamma) {
                    applicable = true;
                    slack = std::min(slack, dist.cdf(p->Y) - p->H);
                }
            }
            if (!applicable) {
                c.reason = "vacuous: neither profile has Z <= gamma";
                c.slack = 0.0;
            } else {
                c.slack = slack;
                if (slack < -rounding_tol(1.0, slack)) c.status = CheckStatus::fail;
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

double default_eps(const WeightDistribution& dist) {
    const double r = dist.support_min();
    const double hi = dist.sample(0.75) - r;
    if (!(hi > 0.0)) return kNaN;
    double best = kNaN;
    for (int j = 1; j <= 64; ++j) {
        const double eps = hi * j / 64.0;
        if (dist.cdf(r + eps) <= 0.5) best = eps;
    }
    return best;
}

double default_gamma(const WeightDistribution& dist, double eps) {
    if (std::isnan(eps) || !(eps > 0.0)) return kNaN;
    const double r = dist.support_min();
    const double g = std::min(r + 0.49, r + eps);
    if (!(g > r) || dist.cdf(g) > 0.5) return kNaN;
    return g;
}

} // namespace fpp
