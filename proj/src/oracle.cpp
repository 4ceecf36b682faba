#include "fpp/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "fpp/rng.hpp"

namespace fpp::oracle {

double PolynomialInS::operator()(double s) const {
    double v = 0.0;
    for (auto it = coeff.rbegin(); it != coeff.rend(); ++it) v = v * s + *it;
    return v;
}

PolynomialInS PolynomialInS::antiderivative() const {
    PolynomialInS out;
    out.coeff.assign(coeff.size() + 1, 0.0);
    for (std::size_t k = 0; k < coeff.size(); ++k)
        out.coeff[k + 1] = coeff[k] / static_cast<double>(k + 1);
    return out;
}

PolynomialInS PolynomialInS::derivative() const {
    PolynomialInS out;
    if (coeff.size() <= 1) {
        out.coeff = {0.0};
        return out;
    }
    out.coeff.assign(coeff.size() - 1, 0.0);
    for (std::size_t k = 1; k < coeff.size(); ++k)
        out.coeff[k - 1] = coeff[k] * static_cast<double>(k);
    return out;
}

namespace {

constexpr std::int64_t kMaxConfigs = 1'000'000;

struct Tabulated {
    int m = 0;
    int a = 0;
    std::int64_t n = 0;                // a^m
    std::vector<std::int64_t> pw;      // a^j
    std::vector<double> probs;         // atom probabilities
    std::vector<double> f;             // function values per config index
    std::vector<double> cprob;         // config probabilities
    std::vector<std::uint8_t> digits;  // n * m digit table
};

Tabulated tabulate(const FiniteFunction& fn, const WeightDistribution& dist) {
    check_enumeration_guard(fn, dist);
    const auto& atoms = dist.atoms();
    Tabulated t;
    t.m = fn.m;
    t.a = static_cast<int>(atoms.size());
    t.pw.assign(static_cast<std::size_t>(t.m) + 1, 1);
    for (int j = 0; j < t.m; ++j)
        t.pw[static_cast<std::size_t>(j) + 1] = t.pw[static_cast<std::size_t>(j)] * t.a;
    t.n = t.pw[static_cast<std::size_t>(t.m)];
    t.probs.reserve(static_cast<std::size_t>(t.a));
    std::vector<double> values;
    for (const auto& [v, p] : atoms) {
        values.push_back(v);
        t.probs.push_back(p);
    }
    t.f.resize(static_cast<std::size_t>(t.n));
    t.cprob.resize(static_cast<std::size_t>(t.n));
    t.digits.resize(static_cast<std::size_t>(t.n * t.m));
    std::vector<double> buf(static_cast<std::size_t>(t.m));
    for (std::int64_t idx = 0; idx < t.n; ++idx) {
        double p = 1.0;
        std::int64_t rest = idx;
        for (int j = 0; j < t.m; ++j) {
            const auto d = static_cast<int>(rest % t.a);
            rest /= t.a;
            t.digits[static_cast<std::size_t>(idx * t.m + j)] = static_cast<std::uint8_t>(d);
            buf[static_cast<std::size_t>(j)] = values[static_cast<std::size_t>(d)];
            p *= t.probs[static_cast<std::size_t>(d)];
        }
        t.f[static_cast<std::size_t>(idx)] = fn.evaluate(buf);
        t.cprob[static_cast<std::size_t>(idx)] = p;
    }
    return t;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
    return v;
}

/// Subset-enumeration engine on a prepared table. `table` may be the raw
/// function or a difference table sharing the same digit layout.
PolynomialInS q_poly_from_table(const Tabulated& t, const std::vector<double>& table) {
    std::vector<double> level(static_cast<std::size_t>(t.m) + 1, 0.0); // A_k = sum over |S| = k
    std::vector<double> h(static_cast<std::size_t>(t.n));
    std::vector<std::pair<std::int64_t, double>> codes, next;

    const auto strip = [&](std::int64_t idx, unsigned S) {
        std::int64_t s = idx;
        for (int j = 0; j < t.m; ++j)
            if (S & (1u << j))
                s -= static_cast<std::int64_t>(t.digits[static_cast<std::size_t>(idx * t.m + j)]) *
                     t.pw[static_cast<std::size_t>(j)];
        return s;
    };

    for (unsigned S = 0; S < (1u << t.m); ++S) {
        codes.assign(1, {0, 1.0});
        for (int j = 0; j < t.m; ++j) {
            if (!(S & (1u << j))) continue;
            next.clear();
            next.reserve(codes.size() * static_cast<std::size_t>(t.a));
            for (const auto& [off, p] : codes)
                for (int d = 0; d < t.a; ++d)
                    next.emplace_back(off + d * t.pw[static_cast<std::size_t>(j)],
                                      p * t.probs[static_cast<std::size_t>(d)]);
            codes.swap(next);
        }
        // h over stripped indices: expectation of the table over the resampled
        // coordinates, then E_S as the weighted inner product with the table.
        for (std::int64_t idx = 0; idx < t.n; ++idx) {
            if (strip(idx, S) != idx) continue;
            double acc = 0.0;
            for (const auto& [off, p] : codes) acc += p * table[static_cast<std::size_t>(idx + off)];
            h[static_cast<std::size_t>(idx)] = acc;
        }
        double es = 0.0;
        for (std::int64_t idx = 0; idx < t.n; ++idx)
            es += t.cprob[static_cast<std::size_t>(idx)] * table[static_cast<std::size_t>(idx)] *
                  h[static_cast<std::size_t>(strip(idx, S))];
        level[static_cast<std::size_t>(__builtin_popcount(S))] += es;
    }

    // Expand sum_k A_k s^k (1-s)^(m-k) into the power basis.
    PolynomialInS out;
    out.coeff.assign(static_cast<std::size_t>(t.m) + 1, 0.0);
    for (int n = 0; n <= t.m; ++n) {
        double c = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double sign = ((n - k) % 2 == 0) ? 1.0 : -1.0;
            c += level[static_cast<std::size_t>(k)] * binomial(t.m - k, n - k) * sign;
        }
        out.coeff[static_cast<std::size_t>(n)] = c;
    }
    return out;
}

std::vector<double> difference_table(const Tabulated& t, int coord, int atom_index) {
    std::vector<double> d(static_cast<std::size_t>(t.n));
    for (std::int64_t idx = 0; idx < t.n; ++idx) {
        const auto cur = static_cast<std::int64_t>(
            t.digits[static_cast<std::size_t>(idx * t.m + coord)]);
        const std::int64_t base = idx - cur * t.pw[static_cast<std::size_t>(coord)];
        double mean = 0.0;
        for (int y = 0; y < t.a; ++y)
            mean += t.probs[static_cast<std::size_t>(y)] *
                   t.f[static_cast<std::size_t>(base + y * t.pw[static_cast<std::size_t>(coord)])];
        d[static_cast<std::size_t>(idx)] =
            t.f[static_cast<std::size_t>(base + atom_index * t.pw[static_cast<std::size_t>(coord)])] -
            mean;
    }
    return d;
}

PolynomialInS influence_from_table(const Tabulated& t, int coord) {
    PolynomialInS total;
    total.coeff.assign(static_cast<std::size_t>(t.m) + 1, 0.0);
    for (int x = 0; x < t.a; ++x) {
        const auto d = difference_table(t, coord, x);
        const auto poly = q_poly_from_table(t, d);
        for (std::size_t k = 0; k < poly.coeff.size(); ++k)
            total.coeff[k] += t.probs[static_cast<std::size_t>(x)] * poly.coeff[k];
    }
    return total;
}

} // namespace

void check_enumeration_guard(const FiniteFunction& f, const WeightDistribution& dist) {
    if (dist.kind() != WeightDistribution::Kind::atomic)
        throw std::invalid_argument("exact enumeration requires an atomic law");
    if (f.m < 1 || f.m > 8)
        throw std::invalid_argument("exact enumeration requires 1 <= m <= 8");
    const auto a = static_cast<std::int64_t>(dist.atoms().size());
    std::int64_t n = 1;
    for (int j = 0; j < f.m; ++j) {
        n *= a;
        if (n > kMaxConfigs) throw std::invalid_argument("exact enumeration exceeds 1e6 configurations");
    }
    if (!f.evaluate) throw std::invalid_argument("FiniteFunction::evaluate must be set");
}

PolynomialInS q_polynomial(const FiniteFunction& f, const WeightDistribution& dist) {
    const auto t = tabulate(f, dist);
    return q_poly_from_table(t, t.f);
}

PolynomialInS influence_polynomial(const FiniteFunction& f, int coord,
                                   const WeightDistribution& dist) {
    if (coord < 0 || coord >= f.m) throw std::invalid_argument("coordinate out of range");
    const auto t = tabulate(f, dist);
    return influence_from_table(t, coord);
}

std::vector<PolynomialInS> influence_polynomials(const FiniteFunction& f,
                                                 const WeightDistribution& dist) {
    const auto t = tabulate(f, dist);
    std::vector<PolynomialInS> out;
    out.reserve(static_cast<std::size_t>(t.m));
    for (int i = 0; i < t.m; ++i) out.push_back(influence_from_table(t, i));
    return out;
}

double influence_exact(const FiniteFunction& f, int coord, const WeightDistribution& dist,
                       double s) {
    return influence_polynomial(f, coord, dist)(s);
}

double CovarianceVerification::residual(double t) const {
    const double lhs = q(t) - q(1.0);
    const auto anti = influence_sum.antiderivative();
    const double rhs = anti(1.0) - anti(t);
    return lhs - rhs;
}

CovarianceVerification analyze_cov_formula(const FiniteFunction& f,
                                           const WeightDistribution& dist) {
    const auto tab = tabulate(f, dist);
    CovarianceVerification out;
    out.q = q_poly_from_table(tab, tab.f);
    out.influence_sum.coeff.assign(static_cast<std::size_t>(tab.m) + 1, 0.0);
    for (int i = 0; i < tab.m; ++i) {
        const auto poly = influence_from_table(tab, i);
        for (std::size_t k = 0; k < poly.coeff.size(); ++k)
            out.influence_sum.coeff[k] += poly.coeff[k];
    }
    return out;
}

double verify_cov_formula(const FiniteFunction& f, const WeightDistribution& dist, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("time must lie in [0,1]");
    return analyze_cov_formula(f, dist).residual(t);
}

CouplingParams CouplingParams::make(double s, double t) {
    if (!(s >= 0.0 && s <= t && t <= 1.0))
        throw std::invalid_argument("coupling needs 0 <= s <= t <= 1");
    CouplingParams c;
    c.s = s;
    c.t = t;
    c.p = 1.0 - std::sqrt(1.0 - s);
    c.q = 1.0 - std::sqrt(1.0 - t);
    c.rho = c.p < 1.0 ? (c.q - c.p) / (1.0 - c.p) : 0.0;
    return c;
}

CouplingDraw coupling_draw(const CouplingParams& params, const WeightDistribution& dist,
                           int m, std::uint64_t seed, std::uint64_t index) {
    if (m < 1) throw std::invalid_argument("coupling needs m >= 1");
    enum Role : std::uint64_t {
        kV = 1, kW = 2, kW1 = 3, kW2 = 4, kW3 = 5,
        kCoinRho = 6, kCoinP1 = 7, kCoinP2 = 8, kCoinQ = 9,
    };
    const auto unit = [&](std::uint64_t role, int coord) {
        return rng::unit_from(seed, {0x636f7570ULL, index, role, static_cast<std::uint64_t>(coord)});
    };
    const auto draw = [&](std::uint64_t role, int coord) { return dist.sample(unit(role, coord)); };

    CouplingDraw out;
    out.x.resize(static_cast<std::size_t>(m));
    out.y.resize(static_cast<std::size_t>(m));
    out.z.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const double v = draw(kV, i);
        const double vprime = unit(kCoinRho, i) < params.rho ? draw(kW, i) : v;
        const auto idx = static_cast<std::size_t>(i);
        out.x[idx] = unit(kCoinP1, i) < params.p ? draw(kW1, i) : vprime;
        out.y[idx] = unit(kCoinP2, i) < params.p ? draw(kW2, i) : vprime;
        out.z[idx] = unit(kCoinQ, i) < params.q ? draw(kW3, i) : v;
    }
    return out;
}

double effective_time(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("time must lie in [0,1]");
    return 2.0 * t - t * t;
}

} // namespace fpp::oracle
