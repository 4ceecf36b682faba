#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fpp/field.hpp"
#include "fpp/geodesic.hpp"
#include "fpp/lattice.hpp"
#include "fpp/profile.hpp"
#include "fpp/rng.hpp"

using namespace fpp;

namespace {

// E (Z - X)_+ by composite Simpson of the CDF over [r, Z] (integration by
// parts; exact tail). Atomic laws use the finite sum. Independent of the
// partial-moment closed forms under test.
double quad_positive_part(const WeightDistribution& dist, double Z) {
    const double r = dist.support_min();
    if (Z <= r) return 0.0;
    if (dist.kind() == WeightDistribution::Kind::atomic) {
        double s = 0.0;
        for (const auto& [v, p] : dist.atoms()) s += p * std::max(0.0, Z - v);
        return s;
    }
    // Find where F saturates so the Simpson rule never straddles that kink;
    // above it the integrand is exactly 1.
    double hi = Z;
    if (dist.cdf(Z) >= 1.0) {
        double lo = r;
        for (int i = 0; i < 100; ++i) {
            const double mid = 0.5 * (lo + hi);
            (dist.cdf(mid) >= 1.0 ? hi : lo) = mid;
        }
    }
    const int n = 4096; // even
    const double h = (hi - r) / n;
    double acc = dist.cdf(r) + dist.cdf(hi);
    for (int i = 1; i < n; ++i) acc += dist.cdf(r + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0 + (Z - hi);
}

// integral of g(x) dF(x) for g constant above `flat_from`, by midpoint rule
// in the quantile domain plus the exact constant tail.
template <typename G>
double quad_against_f(const WeightDistribution& dist, double flat_from, double flat_value, G&& g,
                      int n) {
    if (dist.kind() == WeightDistribution::Kind::atomic) {
        double s = 0.0;
        for (const auto& [v, p] : dist.atoms()) s += p * g(v);
        return s;
    }
    const double ucut = dist.cdf(flat_from);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += g(dist.sample(ucut * (i + 0.5) / n));
    return acc * ucut / n + flat_value * (1.0 - ucut);
}

std::vector<WeightDistribution> laws() {
    return {WeightDistribution::parse("atomic:1=0.5,2=0.5"),
            WeightDistribution::uniform_interval(0.0, 1.0),
            WeightDistribution::shifted_exponential(1.0, 0.0)};
}

} // namespace

TEST_CASE("profile thresholds on the frozen examples") {
    const auto atoms = WeightDistribution::parse("atomic:1=0.5,2=0.5");
    const auto p = edge_profile(3.0, 0.0, atoms);
    CHECK(p.Z == 3.0);
    CHECK(p.H == doctest::Approx(1.5));
    CHECK(p.Y == doctest::Approx(1.5));
    CHECK(p.value(1.0) == doctest::Approx(-0.5));
    CHECK(p.value(2.0) == doctest::Approx(0.5));
    CHECK_FALSE(p.flat());
    CHECK(co_influence_term(p, p, atoms) == doctest::Approx(0.25));
    CHECK(expected_substituted_time(3.0, 0.0, atoms) == doctest::Approx(1.5));

    // point mass: D vanishes on the support even though H > 0
    const auto point = WeightDistribution::parse("atomic:1=1");
    const auto q = edge_profile(3.0, 0.0, point);
    CHECK(q.Z == 3.0);
    CHECK(q.H == doctest::Approx(2.0));
    CHECK(q.Y == doctest::Approx(1.0));
    CHECK(q.value(1.0) == doctest::Approx(0.0));

    // A - B at or below the support infimum: identically zero profile
    const auto flat = edge_profile(1.0, 2.0, atoms);
    CHECK(flat.Z == 1.0);
    CHECK(flat.H == 0.0);
    CHECK(flat.flat());
    CHECK(flat.value(1.7) == 0.0);
    CHECK(co_influence_term(flat, p, atoms) == 0.0);
}

TEST_CASE("uniform co-influence against high-resolution quadrature") {
    const auto uni = WeightDistribution::uniform_interval(0.0, 1.0);
    const auto p = edge_profile(0.8, 0.0, uni);
    CHECK(p.Z == doctest::Approx(0.8));
    CHECK(p.H == doctest::Approx(0.32));
    CHECK(p.Y == doctest::Approx(0.48));
    CHECK(co_influence_term(p, p, uni) == doctest::Approx(0.06826666666666667).epsilon(1e-9));
    CHECK(negative_part_product_integral(p, p, uni) == doctest::Approx(0.036864).epsilon(1e-9));

    // 1e6-point quadrature oracle for the same integrals
    const int n = 1000000;
    double prod = 0.0, neg = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) / n;
        const double d = p.value(x);
        prod += d * d;
        neg += std::min(d, 0.0) * std::min(d, 0.0);
    }
    CHECK(co_influence_term(p, p, uni) == doctest::Approx(prod / n).epsilon(1e-8));
    CHECK(negative_part_product_integral(p, p, uni) == doctest::Approx(neg / n).epsilon(1e-8));
}

TEST_CASE("closed forms match quadrature on random profile pairs") {
    for (const auto& dist : laws()) {
        const double r = dist.support_min();
        for (int trial = 0; trial < 200; ++trial) {
            const std::uint64_t s =
                rng::key(2024, {static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(dist.kind())});
            const double B0 = 2.0 * rng::unit_from(s, {1});
            const double A0 = B0 + r + 3.0 * rng::unit_from(s, {2}) - 0.5;
            const double Bt = 2.0 * rng::unit_from(s, {3});
            const double At = Bt + r + 3.0 * rng::unit_from(s, {4}) - 0.5;
            const auto p0 = edge_profile(std::max(A0, 0.0), B0, dist);
            const auto pt = edge_profile(std::max(At, 0.0), Bt, dist);

            CHECK(p0.Y >= r);
            CHECK(p0.Y <= p0.Z);
            CHECK(std::isfinite(p0.Z));
            CHECK((p0.H == 0.0) == (p0.Z == r));

            // H against Simpson, E min(A, B+X) = A - H
            CHECK(p0.H == doctest::Approx(quad_positive_part(dist, p0.Z)).epsilon(1e-9));
            CHECK(expected_substituted_time(std::max(A0, 0.0), B0, dist) ==
                  doctest::Approx(std::max(A0, 0.0) - p0.H).epsilon(1e-9));

            const double zmax = std::max(p0.Z, pt.Z);
            const double quad = quad_against_f(
                dist, zmax, p0.H * pt.H, [&](double x) { return p0.value(x) * pt.value(x); },
                200000);
            const double closed = co_influence_term(p0, pt, dist);
            CHECK(closed == doctest::Approx(quad).epsilon(2e-7));

            const double quad_neg = quad_against_f(
                dist, zmax, 0.0,
                [&](double x) { return std::min(p0.value(x), 0.0) * std::min(pt.value(x), 0.0); },
                200000);
            const double closed_neg = negative_part_product_integral(p0, pt, dist);
            CHECK(closed_neg == doctest::Approx(quad_neg).epsilon(2e-7));
            // positive-part comparison holds per configuration
            CHECK(closed >= closed_neg - 1e-12);

            // zero mean of D against F, via the independent quadrature
            const double mean_d =
                quad_against_f(dist, p0.Z, p0.H, [&](double x) { return p0.value(x); }, 200000);
            CHECK(std::abs(mean_d) <= 1e-5); // midpoint-rule accuracy
            CHECK(std::abs(p0.H - quad_positive_part(dist, p0.Z)) <= 1e-9);
        }
    }
}

TEST_CASE("difference profile matches direct recomputation on real configurations") {
    const Region box(make_vertex({0, 0}), make_vertex({3, 2}), 2);
    const Vertex u = make_vertex({0, 0}), v = make_vertex({3, 2});
    for (const auto& dist : laws()) {
        for (int trial = 0; trial < 40; ++trial) {
            const std::uint64_t s = rng::key(87, {static_cast<std::uint64_t>(trial)});
            const DynamicalField f(s, dist, box);
            const auto cfg = f.slice(0.0);
            const auto edges = box.all_edges();
            const std::int64_t eid = edges[rng::key(s, {5}) % edges.size()];
            const auto rv = replacement_values(cfg, box.edge_at(eid), u, v);
            const auto prof = edge_profile(rv, dist);
            const double emean = dist.kind() == WeightDistribution::Kind::atomic
                                     ? quad_against_f(dist, 0, 0,
                                                      [&](double x) { return std::min(rv.A, rv.B + x); }, 1)
                                     : rv.A - quad_positive_part(dist, prof.Z);
            for (int j = 0; j < 20; ++j) {
                const double x = dist.sample(rng::unit_from(s, {10 + static_cast<std::uint64_t>(j)}));
                const double direct =
                    shortest_path(cfg.with_override(box.edge_at(eid), x), u, v).T - emean;
                CHECK(prof.value(x) == doctest::Approx(direct).epsilon(1e-9));
                CHECK(prof.value(x) >= -dist.mean() - 1e-12);
                CHECK(std::abs(prof.value(x)) <=
                      (prof.Z > dist.support_min() ? (dist.mean() + x) + 1e-12 : 1e-12));
            }
        }
    }
}

TEST_CASE("deterministic lemma checks: defaults, skips, and controls") {
    const auto uni = WeightDistribution::uniform_interval(0.0, 1.0);
    const double eps = default_eps(uni);
    CHECK(eps == doctest::Approx(0.4921875));
    CHECK(uni.cdf(uni.support_min() + eps) <= 0.5);
    const double gamma = default_gamma(uni, eps);
    CHECK(gamma == doctest::Approx(0.49));

    const auto atoms = WeightDistribution::parse("atomic:1=0.5,2=0.5");
    CHECK(default_eps(atoms) == doctest::Approx(63.0 / 64.0));
    CHECK(std::isnan(default_eps(WeightDistribution::parse("atomic:0=0.6,1=0.4"))));
    CHECK(std::isnan(default_gamma(uni, std::numeric_limits<double>::quiet_NaN())));

    // zero profiles pass everything
    const auto zero = edge_profile(0.3, 1.0, uni);
    REQUIRE(zero.flat());
    for (const auto& c : check_lemma_suite(zero, zero, uni, eps, gamma))
        CHECK(c.status == CheckStatus::pass);

    // violated preconditions are skips, not failures
    const auto some = edge_profile(1.4, 0.2, uni);
    const auto skipped = check_lemma_suite(some, some, uni, 0.9, 0.6);
    bool saw_gap_skip = false, saw_height_skip = false;
    for (const auto& c : skipped) {
        if (c.id == "zero_gap_bound" && c.status == CheckStatus::skipped) saw_gap_skip = true;
        if (c.id == "flat_height_bound" && c.status == CheckStatus::skipped) saw_height_skip = true;
        if (c.status == CheckStatus::skipped) CHECK_FALSE(c.reason.empty());
    }
    CHECK(saw_gap_skip);
    CHECK(saw_height_skip);

    // adversarial synthetic profiles must be caught (harness self-test)
    EdgeProfile bad_gap{2.0, 1.5, 0.5, 0.45, 0.05};
    bool caught = false;
    for (const auto& c : check_lemma_suite(bad_gap, bad_gap, uni, 0.4, std::numeric_limits<double>::quiet_NaN()))
        if (c.id == "zero_gap_bound" && c.status == CheckStatus::fail) caught = true;
    CHECK(caught);
    EdgeProfile bad_height{1.4, 1.0, 0.4, 0.39, 0.01};
    caught = false;
    for (const auto& c : check_lemma_suite(bad_height, bad_height, uni,
                                           std::numeric_limits<double>::quiet_NaN(), 0.45))
        if (c.id == "flat_height_bound" && c.status == CheckStatus::fail) caught = true;
    CHECK(caught);
}

TEST_CASE("lemma suite holds on a thousand real profile pairs") {
    const auto uni = WeightDistribution::uniform_interval(0.0, 1.0);
    const double eps = default_eps(uni), gamma = default_gamma(uni, eps);
    const Region box(make_vertex({0, 0}), make_vertex({4, 4}), 2);
    const Vertex u = make_vertex({0, 0}), v = make_vertex({4, 4});
    int evaluated = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::uint64_t s = rng::key(55, {static_cast<std::uint64_t>(trial)});
        const DynamicalField f(s, uni, box);
        const double t = rng::unit_from(s, {1});
        GeodesicAnalysis a0(f.slice(0.0), u, v);
        GeodesicAnalysis at(f.slice(t), u, v);
        const auto edges = box.all_edges();
        const std::int64_t eid = edges[rng::key(s, {2}) % edges.size()];
        const auto p0 = edge_profile(a0.replacement(eid), uni);
        const auto pt = edge_profile(at.replacement(eid), uni);
        for (const auto& c : check_lemma_suite(p0, pt, uni, eps, gamma)) {
            CHECK(c.status != CheckStatus::fail);
            ++evaluated;
        }
    }
    CHECK(evaluated == 3000);
}

TEST_CASE("co-influence bounds for continuous laws hold in expectation") {
    const auto uni = WeightDistribution::uniform_interval(0.0, 1.0);
    const double r = uni.support_min();
    const double eps = default_eps(uni);
    const double gamma = default_gamma(uni, eps);
    const double t = 0.3;
    const Region box(make_vertex({-1, -2}), make_vertex({4, 2}), 2);
    const Vertex u = make_vertex({0, 0}), v = make_vertex({3, 0});
    const std::int64_t eid = box.edge_id(Edge{make_vertex({1, 0}), 0});

    const int n = 20000;
    double sum_inf = 0.0, sum_inf2 = 0.0;
    double n_z = 0.0, n_pi = 0.0;
    for (int i = 0; i < n; ++i) {
        const DynamicalField f(rng::key(3003, {static_cast<std::uint64_t>(i)}), uni, box);
        GeodesicAnalysis a0(f.slice(0.0), u, v);
        GeodesicAnalysis at(f.slice(t), u, v);
        const auto p0 = edge_profile(a0.replacement(eid), uni);
        const auto pt = edge_profile(at.replacement(eid), uni);
        const double term = co_influence_term(p0, pt, uni);
        sum_inf += term;
        sum_inf2 += term * term;
        if (p0.Z > r + eps && pt.Z > r + eps) n_z += 1.0;
        const bool in0 = std::binary_search(a0.pi().begin(), a0.pi().end(), eid);
        const bool int_ = std::binary_search(at.pi().begin(), at.pi().end(), eid);
        if (in0 && int_) n_pi += 1.0;
    }
    const double inf_hat = sum_inf / n;
    const double inf_se = std::sqrt((sum_inf2 / n - inf_hat * inf_hat) / n);
    const double pz = n_z / n, pz_se = std::sqrt(pz * (1 - pz) / n);
    const double ppi = n_pi / n, ppi_se = std::sqrt(ppi * (1 - ppi) / n);

    // lower: (eps/4)^2 F(r + eps/4) P(Z_0, Z_t > r + eps)
    const double c_lo = (eps / 4) * (eps / 4) * uni.cdf(r + eps / 4);
    CHECK(inf_hat + 3 * inf_se >= c_lo * (pz - 3 * pz_se));
    // upper: [int (mu+x)^2 dF / F(gamma)^2 + (mu^2 + 2 mu)/(1-t)] P(e in both geodesics)
    const double m2term = 3 * uni.mean() * uni.mean() + uni.second_moment();
    const double c_up = m2term / (uni.cdf(gamma) * uni.cdf(gamma)) +
                        (uni.mean() * uni.mean() + 2 * uni.mean()) / (1 - t);
    CHECK(inf_hat - 3 * inf_se <= c_up * (ppi + 3 * ppi_se));
    CHECK(pz > 0.0); // the lower bound must not hold vacuously
}
