#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "fpp/oracle.hpp"
#include "fpp/rng.hpp"
#include "fpp/stats.hpp"
#include "fpp/verify.hpp"

using namespace fpp;
using oracle::FiniteFunction;
using oracle::PolynomialInS;

namespace {

const WeightDistribution kFair = WeightDistribution::parse("atomic:0=0.5,1=0.5");
const WeightDistribution kThree = WeightDistribution::atomic({{0.0, 0.2}, {1.0, 0.5}, {3.0, 0.3}});

// direct subset-expansion evaluation of Q_s(f), independent of the
// polynomial assembly under test
double brute_q(const FiniteFunction& f, const WeightDistribution& dist, double s) {
    const auto& atoms = dist.atoms();
    const int m = f.m;
    const int na = static_cast<int>(atoms.size());
    std::vector<int> idx(static_cast<std::size_t>(m));
    double total = 0.0;
    for (int S = 0; S < (1 << m); ++S) {
        int bits = 0;
        for (int i = 0; i < m; ++i)
            if (S & (1 << i)) ++bits;
        // E[f(w) f(w with coords in S resampled)]
        double ef = 0.0;
        std::vector<double> w(static_cast<std::size_t>(m)), w2(static_cast<std::size_t>(m));
        const std::int64_t total_w = static_cast<std::int64_t>(std::pow(na, m));
        for (std::int64_t a = 0; a < total_w; ++a) {
            std::int64_t aa = a;
            double pw = 1.0;
            for (int i = 0; i < m; ++i) {
                const auto& [v, p] = atoms[static_cast<std::size_t>(aa % na)];
                w[static_cast<std::size_t>(i)] = v;
                pw *= p;
                aa /= na;
            }
            const std::int64_t total_r = static_cast<std::int64_t>(std::pow(na, bits));
            for (std::int64_t b = 0; b < total_r; ++b) {
                std::int64_t bb = b;
                double pr = 1.0;
                w2 = w;
                for (int i = 0; i < m; ++i) {
                    if (!(S & (1 << i))) continue;
                    const auto& [v, p] = atoms[static_cast<std::size_t>(bb % na)];
                    w2[static_cast<std::size_t>(i)] = v;
                    pr *= p;
                    bb /= na;
                }
                ef += pw * pr * f.evaluate(w) * f.evaluate(w2);
            }
        }
        total += std::pow(s, bits) * std::pow(1.0 - s, m - bits) * ef;
    }
    return total;
}

} // namespace

TEST_CASE("polynomial arithmetic") {
    const PolynomialInS p{{1.0, 2.0, 3.0}};
    CHECK(p(0.5) == doctest::Approx(2.75));
    CHECK(p(0.0) == 1.0);
    const auto d = p.derivative();
    REQUIRE(d.coeff.size() == 2);
    CHECK(d.coeff[0] == 2.0);
    CHECK(d.coeff[1] == 6.0);
    const auto a = p.antiderivative();
    REQUIRE(a.coeff.size() == 4);
    CHECK(a.coeff[0] == 0.0);
    CHECK(a.coeff[2] == doctest::Approx(1.0));
    CHECK(a(1.0) - a(0.5) == doctest::Approx(1.0 * 0.5 + (1.0 - 0.25) + (1.0 - 0.125)));
}

TEST_CASE("hand-enumerated identity function") {
    const FiniteFunction f{1, [](std::span<const double> w) { return w[0]; }};
    const auto q = oracle::q_polynomial(f, kFair);
    REQUIRE(q.coeff.size() == 2);
    CHECK(q.coeff[0] == doctest::Approx(0.5));
    CHECK(q.coeff[1] == doctest::Approx(-0.25));

    const auto inf = oracle::influence_polynomial(f, 0, kFair);
    for (double s : {0.0, 0.3, 1.0}) CHECK(inf(s) == doctest::Approx(0.25));
    CHECK(oracle::influence_exact(f, 0, kFair, 0.55) == doctest::Approx(0.25));
    CHECK(oracle::verify_cov_formula(f, kFair, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
    // Cov(f_0, f_s) = Q_s - Q_1 = (1-s)/4
    CHECK(q(0.4) - q(1.0) == doctest::Approx(0.6 / 4.0));
}

TEST_CASE("constants and irrelevant coordinates") {
    const FiniteFunction c{2, [](std::span<const double>) { return 3.0; }};
    const auto q = oracle::q_polynomial(c, kFair);
    CHECK(q(0.37) == doctest::Approx(9.0));
    CHECK(oracle::influence_exact(c, 0, kFair, 0.2) == doctest::Approx(0.0));

    const FiniteFunction proj{2, [](std::span<const double> w) { return w[0]; }};
    const auto inf1 = oracle::influence_polynomial(proj, 1, kFair);
    for (double s : {0.0, 0.5, 1.0}) CHECK(inf1(s) == doctest::Approx(0.0));
}

TEST_CASE("enumeration guard") {
    const auto ok = [](int m) { return FiniteFunction{m, [](std::span<const double>) { return 0.0; }}; };
    CHECK_THROWS_AS(oracle::check_enumeration_guard(ok(9), kFair), std::invalid_argument);
    CHECK_THROWS_AS(oracle::check_enumeration_guard(ok(2), WeightDistribution::uniform_interval(0, 1)),
                    std::invalid_argument);
    std::vector<std::pair<double, double>> six;
    for (int i = 0; i < 6; ++i) six.push_back({static_cast<double>(i), 1.0 / 6.0});
    CHECK_THROWS_AS(oracle::check_enumeration_guard(ok(8), WeightDistribution::atomic(six)),
                    std::invalid_argument); // 6^8 > 1e6
    CHECK_NOTHROW(oracle::check_enumeration_guard(ok(8), kFair));
}

TEST_CASE("polynomials agree with direct subset enumeration") {
    const FiniteFunction f{3, [](std::span<const double> w) {
                               return w[0] * w[1] - 2.0 * w[2] + 0.5 * w[0] * w[2] * w[2] + 1.0;
                           }};
    const auto q = oracle::q_polynomial(f, kThree);
    for (double s : {0.0, 0.13, 0.5, 0.87, 1.0})
        CHECK(q(s) == doctest::Approx(brute_q(f, kThree, s)).epsilon(1e-12));

    // influence via its definition: sum_x p_x Q_s(D^x f)
    const int coord = 1;
    const auto inf = oracle::influence_polynomial(f, coord, kThree);
    for (double s : {0.0, 0.4, 0.9}) {
        double want = 0.0;
        for (const auto& [x, px] : kThree.atoms()) {
            FiniteFunction dxf{3, [&, x = x](std::span<const double> w) {
                                   std::vector<double> ww(w.begin(), w.end());
                                   ww[coord] = x;
                                   double centered = f.evaluate(ww);
                                   for (const auto& [y, py] : kThree.atoms()) {
                                       ww[coord] = y;
                                       centered -= py * f.evaluate(ww);
                                   }
                                   return centered;
                               }};
            want += px * brute_q(dxf, kThree, s);
        }
        CHECK(inf(s) == doctest::Approx(want).epsilon(1e-11));
    }

    const auto all = oracle::influence_polynomials(f, kThree);
    REQUIRE(all.size() == 3);
    for (int i = 0; i < 3; ++i) {
        const auto one = oracle::influence_polynomial(f, i, kThree);
        REQUIRE(all[static_cast<std::size_t>(i)].coeff.size() == one.coeff.size());
        for (std::size_t k = 0; k < one.coeff.size(); ++k)
            CHECK(all[static_cast<std::size_t>(i)].coeff[k] == doctest::Approx(one.coeff[k]));
    }
}

TEST_CASE("covariance identity: polynomial structure") {
    const auto box = verify::box2(1, 1);
    const auto f = verify::box_passage_time(box, make_vertex({0, 0}), make_vertex({1, 1}));
    const auto dist = WeightDistribution::parse("atomic:1=0.5,2=0.5");
    REQUIRE(f.m == 4);

    const auto ver = oracle::analyze_cov_formula(f, dist);
    for (double t : {0.0, 0.3, 0.7, 1.0})
        CHECK(std::abs(ver.residual(t)) <= 1e-9);
    for (double t : {0.0, 0.3, 0.7})
        CHECK(std::abs(oracle::verify_cov_formula(f, dist, t)) <= 1e-9);

    // pointwise form: sum of influences equals -dQ/ds, coefficient by coefficient
    const auto dq = ver.q.derivative();
    REQUIRE(ver.influence_sum.coeff.size() >= dq.coeff.size());
    for (std::size_t k = 0; k < ver.influence_sum.coeff.size(); ++k) {
        const double lhs = ver.influence_sum.coeff[k];
        const double rhs = k < dq.coeff.size() ? -dq.coeff[k] : 0.0;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
    // Q_1 = (E f)^2 and Q is a genuine degree <= m polynomial
    CHECK(ver.q(1.0) >= 0.0);
    CHECK(ver.q.coeff.size() <= static_cast<std::size_t>(f.m) + 1);
}

TEST_CASE("monotone coupling parameters and draws") {
    const auto par = oracle::CouplingParams::make(0.3, 0.7);
    CHECK((1 - par.p) * (1 - par.p) == doctest::Approx(0.7));
    CHECK((1 - par.q) * (1 - par.q) == doctest::Approx(0.3));
    CHECK((1 - par.p) * (1 - par.rho) == doctest::Approx(1 - par.q));
    CHECK(par.rho >= 0.0);
    CHECK(par.rho <= 1.0);
    CHECK(oracle::CouplingParams::make(0.0, 0.4).p == 0.0);

    // s = 0: X = Y always
    const auto none = oracle::CouplingParams::make(0.0, 0.5);
    for (int i = 0; i < 200; ++i) {
        const auto d = oracle::coupling_draw(none, kFair, 3, 42, static_cast<std::uint64_t>(i));
        CHECK(d.x == d.y);
    }

    // s = t: agreement rate of (X,Y) and (X,Z) is 1 - s/2 for the fair law
    const auto eq = oracle::CouplingParams::make(0.4, 0.4);
    CHECK(eq.rho == doctest::Approx(0.0));
    int agree_y = 0, agree_z = 0;
    const int n = 5000, m = 2;
    for (int i = 0; i < n; ++i) {
        const auto d = oracle::coupling_draw(eq, kFair, m, 43, static_cast<std::uint64_t>(i));
        for (int j = 0; j < m; ++j) {
            if (d.x[static_cast<std::size_t>(j)] == d.y[static_cast<std::size_t>(j)]) ++agree_y;
            if (d.x[static_cast<std::size_t>(j)] == d.z[static_cast<std::size_t>(j)]) ++agree_z;
        }
    }
    const double cnt = n * m, expect = 1.0 - 0.4 / 2.0;
    const double se = std::sqrt(expect * (1 - expect) / cnt);
    CHECK(std::abs(agree_y / cnt - expect) <= 4 * se);
    CHECK(std::abs(agree_z / cnt - expect) <= 4 * se);

    // joint 2x2 table of (X_i, Y_i) at s=0.5 < t=0.75 matches the coupled-pair law
    const auto par2 = oracle::CouplingParams::make(0.5, 0.75);
    double table[2][2] = {{0, 0}, {0, 0}};
    const int n2 = 10000;
    for (int i = 0; i < n2; ++i) {
        const auto d = oracle::coupling_draw(par2, kFair, m, 44, static_cast<std::uint64_t>(i));
        for (int j = 0; j < m; ++j)
            table[d.x[static_cast<std::size_t>(j)] > 0.5][d.y[static_cast<std::size_t>(j)] > 0.5] += 1.0;
    }
    const double tot = n2 * m;
    double stat = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const double want = tot * (0.5 * 0.5 * (a == b) + 0.5 * 0.25);
            stat += (table[a][b] - want) * (table[a][b] - want) / want;
        }
    CHECK(stats::chi_square_pvalue(stat, 3) > 0.001);
}

TEST_CASE("effective time of independent replica resampling") {
    CHECK(oracle::effective_time(0.0) == 0.0);
    CHECK(oracle::effective_time(1.0) == 1.0);
    CHECK(oracle::effective_time(0.5) == doctest::Approx(0.75));
    CHECK(oracle::effective_time(0.25) == doctest::Approx(0.4375));
}

TEST_CASE("verification corpus is stable and well-formed") {
    const auto corpus = verify::verification_corpus(1);
    CHECK(corpus.size() == 50);
    for (std::size_t i = 0; i < corpus.size(); ++i)
        for (std::size_t j = i + 1; j < corpus.size(); ++j)
            CHECK(corpus[i].name != corpus[j].name);
    const auto dists = verify::corpus_distributions();
    CHECK(dists.size() == 3);
    for (const auto& entry : corpus)
        for (const auto& d : dists) CHECK_NOTHROW(oracle::check_enumeration_guard(entry.f, d));
}
