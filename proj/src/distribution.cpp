#include "fpp/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>

namespace fpp {
namespace {

constexpr double kProbTol = 1e-12;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Adaptive Simpson on [a,b] with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

// Site percolation-style threshold for zero-weight degeneracy warnings.
// Only d=2 has a rigorously known bond value; higher d use standard
// numerical values, which is fine for an advisory check.
double p_critical(int d) {
    switch (d) {
        case 2: return 0.5;
        case 3: return 0.2488;
        default: return 0.1601; // d >= 4
    }
}

} // namespace

WeightDistribution WeightDistribution::atomic(std::vector<std::pair<double, double>> atoms) {
    if (atoms.empty()) throw std::invalid_argument("atomic law needs at least one atom");
    std::sort(atoms.begin(), atoms.end());
    double total = 0.0;
    bool integers = true;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        auto [v, p] = atoms[i];
        if (!(v >= 0.0)) throw std::invalid_argument("atom values must be nonnegative");
        if (!(p > 0.0)) throw std::invalid_argument("atom probabilities must be positive");
        if (i > 0 && atoms[i - 1].first == v) throw std::invalid_argument("duplicate atom value");
        total += p;
        if (v != std::floor(v)) integers = false;
    }
    if (std::abs(total - 1.0) > kProbTol)
        throw std::invalid_argument("atom probabilities must sum to 1 within 1e-12");

    WeightDistribution d;
    d.kind_ = Kind::atomic;
    d.points_ = std::move(atoms);
    d.integer_atomic_ = integers;
    d.r_ = d.points_.front().first;
    double cum = 0.0;
    for (auto& [v, p] : d.points_) {
        d.mu_ += v * p;
        d.m2_ += v * v * p;
        cum += p;
        d.cum_.push_back(cum);
    }
    d.cum_.back() = 1.0;
    std::string s = "atomic:";
    for (std::size_t i = 0; i < d.points_.size(); ++i) {
        if (i) s += ',';
        s += format_double(d.points_[i].first) + "=" + format_double(d.points_[i].second);
    }
    d.spec_ = std::move(s);
    return d;
}

WeightDistribution WeightDistribution::uniform_interval(double a, double b) {
    if (!(a >= 0.0) || !(b > a)) throw std::invalid_argument("uniform interval needs 0 <= a < b");
    WeightDistribution d;
    d.kind_ = Kind::uniform_interval;
    d.a_ = a;
    d.b_ = b;
    d.r_ = a;
    d.mu_ = 0.5 * (a + b);
    d.m2_ = (a * a + a * b + b * b) / 3.0;
    d.spec_ = "uniform:" + format_double(a) + "," + format_double(b);
    return d;
}

WeightDistribution WeightDistribution::shifted_exponential(double rate, double shift) {
    if (!(rate > 0.0) || !(shift >= 0.0))
        throw std::invalid_argument("shifted exponential needs rate > 0, shift >= 0");
    WeightDistribution d;
    d.kind_ = Kind::shifted_exponential;
    d.rate_ = rate;
    d.shift_ = shift;
    d.r_ = shift;
    d.mu_ = shift + 1.0 / rate;
    d.m2_ = shift * shift + 2.0 * shift / rate + 2.0 / (rate * rate);
    d.spec_ = "exp:rate=" + format_double(rate) + ",shift=" + format_double(shift);
    return d;
}

WeightDistribution WeightDistribution::user_table(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) throw std::invalid_argument("user table needs at least two knots");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (!(knots[i].first >= 0.0)) throw std::invalid_argument("table x values must be nonnegative");
        if (i > 0 && !(knots[i].first > knots[i - 1].first && knots[i].second >= knots[i - 1].second))
            throw std::invalid_argument("table knots must be strictly increasing in x, nondecreasing in F");
    }
    if (std::abs(knots.front().second) > kProbTol || std::abs(knots.back().second - 1.0) > kProbTol)
        throw std::invalid_argument("table CDF must start at 0 and end at 1");
    knots.front().second = 0.0;
    knots.back().second = 1.0;

    WeightDistribution d;
    d.kind_ = Kind::user_table;
    d.points_ = std::move(knots);
    d.r_ = d.points_.front().first;
    // Moments via quadrature on the piecewise-constant density.
    d.mu_ = d.partial_moment(1, std::numeric_limits<double>::infinity());
    d.m2_ = d.partial_moment(2, std::numeric_limits<double>::infinity());
    std::string s = "table:";
    for (std::size_t i = 0; i < d.points_.size(); ++i) {
        if (i) s += ',';
        s += format_double(d.points_[i].first) + "=" + format_double(d.points_[i].second);
    }
    d.spec_ = std::move(s);
    return d;
}

const std::vector<std::pair<double, double>>& WeightDistribution::atoms() const {
    if (kind_ != Kind::atomic) throw std::logic_error("atoms() requires an atomic law");
    return points_;
}

double WeightDistribution::cdf(double x) const {
    switch (kind_) {
        case Kind::atomic: {
            double c = 0.0;
            for (std::size_t i = 0; i < points_.size() && points_[i].first <= x; ++i) c = cum_[i];
            return c;
        }
        case Kind::uniform_interval:
            if (x < a_) return 0.0;
            if (x >= b_) return 1.0;
            return (x - a_) / (b_ - a_);
        case Kind::shifted_exponential:
            return x <= shift_ ? 0.0 : 1.0 - std::exp(-rate_ * (x - shift_));
        case Kind::user_table: {
            if (x <= points_.front().first) return x < points_.front().first ? 0.0 : points_.front().second;
            if (x >= points_.back().first) return 1.0;
            auto it = std::upper_bound(points_.begin(), points_.end(), x,
                                       [](double v, const auto& k) { return v < k.first; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            return lo.second + (hi.second - lo.second) * (x - lo.first) / (hi.first - lo.first);
        }
    }
    return 0.0;
}

double WeightDistribution::partial_moment(int order, double x) const {
    if (order < 0 || order > 2) throw std::invalid_argument("partial_moment order must be 0, 1 or 2");
    if (std::isinf(x) && x > 0) {
        if (kind_ != Kind::user_table) return order == 0 ? 1.0 : (order == 1 ? mu_ : m2_);
        x = points_.back().first;
    }
    if (x < r_) return 0.0;
    switch (kind_) {
        case Kind::atomic: {
            double s = 0.0;
            for (const auto& [v, p] : points_) {
                if (v > x) break;
                s += p * (order == 0 ? 1.0 : (order == 1 ? v : v * v));
            }
            return s;
        }
        case Kind::uniform_interval: {
            const double hi = std::min(x, b_);
            const double inv = 1.0 / (b_ - a_);
            switch (order) {
                case 0: return (hi - a_) * inv;
                case 1: return 0.5 * (hi * hi - a_ * a_) * inv;
                default: return (hi * hi * hi - a_ * a_ * a_) / 3.0 * inv;
            }
        }
        case Kind::shifted_exponential: {
            // integral over [shift, x] of (z+shift)^k against rate exp(-rate z) dz,
            // written with w = x - shift.
            const double w = x - shift_;
            const double ew = std::exp(-rate_ * w);
            const double F = 1.0 - ew;
            const double i1 = (F - rate_ * w * ew) / rate_; // int z rate e^{-rate z}, [0,w]
            if (order == 0) return F;
            if (order == 1) return shift_ * F + i1;
            const double i2 = -w * w * ew + 2.0 * i1 / rate_; // int z^2 rate e^{-rate z}
            return shift_ * shift_ * F + 2.0 * shift_ * i1 + i2;
        }
        case Kind::user_table: {
            double s = 0.0;
            for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
                const double x0 = points_[i].first, x1 = points_[i + 1].first;
                const double f0 = points_[i].second, f1 = points_[i + 1].second;
                const double lo = x0, hi = std::min(x, x1);
                if (hi <= lo) break;
                const double density = (f1 - f0) / (x1 - x0);
                if (density == 0.0) continue;
                s += integrate([order, density](double y) {
                    return density * (order == 0 ? 1.0 : (order == 1 ? y : y * y));
                }, lo, hi, 1e-10);
            }
            return s;
        }
    }
    return 0.0;
}

double WeightDistribution::expect_positive_part(double z) const {
    if (!(z > r_)) return 0.0;
    return z * cdf(z) - partial_moment(1, z);
}

double WeightDistribution::sample(double u) const {
    if (!(u >= 0.0) || !(u < 1.0)) throw std::invalid_argument("sample() needs u in [0,1)");
    switch (kind_) {
        case Kind::atomic: {
            auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
            if (it == cum_.end()) --it;
            if (u == 0.0) it = cum_.begin();
            return points_[static_cast<std::size_t>(it - cum_.begin())].first;
        }
        case Kind::uniform_interval:
            return a_ + u * (b_ - a_);
        case Kind::shifted_exponential:
            return shift_ - std::log1p(-u) / rate_;
        case Kind::user_table: {
            auto it = std::lower_bound(points_.begin(), points_.end(), u,
                                       [](const auto& k, double v) { return k.second < v; });
            if (it == points_.begin()) return points_.front().first;
            if (it == points_.end()) return points_.back().first;
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            if (hi.second == lo.second) return hi.first;
            return lo.first + (hi.first - lo.first) * (u - lo.second) / (hi.second - lo.second);
        }
    }
    return r_;
}

bool WeightDistribution::percolation_degenerate(int d) const {
    return cdf(0.0) >= p_critical(d);
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    while (true) {
        auto pos = s.find(sep);
        out.push_back(s.substr(0, pos));
        if (pos == std::string_view::npos) break;
        s.remove_prefix(pos + 1);
    }
    return out;
}

double parse_num(std::string_view s) {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used != s.size()) throw std::invalid_argument("bad number in distribution spec: " + std::string(s));
    return v;
}

} // namespace

WeightDistribution WeightDistribution::parse(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos)
        throw std::invalid_argument("distribution spec needs kind prefix, e.g. uniform:0,1");
    const auto kind = spec.substr(0, colon);
    const auto body = spec.substr(colon + 1);
    if (kind == "atomic") {
        std::vector<std::pair<double, double>> atoms;
        for (auto part : split(body, ',')) {
            const auto eq = part.find('=');
            if (eq == std::string_view::npos)
                throw std::invalid_argument("atomic spec entries look like value=prob");
            atoms.emplace_back(parse_num(part.substr(0, eq)), parse_num(part.substr(eq + 1)));
        }
        return atomic(std::move(atoms));
    }
    if (kind == "uniform") {
        const auto parts = split(body, ',');
        if (parts.size() != 2) throw std::invalid_argument("uniform spec is uniform:a,b");
        return uniform_interval(parse_num(parts[0]), parse_num(parts[1]));
    }
    if (kind == "exp") {
        double rate = 1.0, shift = 0.0;
        for (auto part : split(body, ',')) {
            const auto eq = part.find('=');
            if (eq == std::string_view::npos) throw std::invalid_argument("exp spec is exp:rate=..,shift=..");
            const auto key = part.substr(0, eq);
            const double v = parse_num(part.substr(eq + 1));
            if (key == "rate") rate = v;
            else if (key == "shift") shift = v;
            else throw std::invalid_argument("unknown exp parameter: " + std::string(key));
        }
        return shifted_exponential(rate, shift);
    }
    if (kind == "table") {
        std::vector<std::pair<double, double>> knots;
        for (auto part : split(body, ',')) {
            const auto eq = part.find('=');
            if (eq == std::string_view::npos) throw std::invalid_argument("table spec entries look like x=F");
            knots.emplace_back(parse_num(part.substr(0, eq)), parse_num(part.substr(eq + 1)));
        }
        return user_table(std::move(knots));
    }
    throw std::invalid_argument("unknown distribution kind: " + std::string(kind));
}

} // namespace fpp
