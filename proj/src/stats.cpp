#include "fpp/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fpp::stats {
namespace {

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

} // namespace

Estimate mean_se(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean_se needs samples");
    const auto n = static_cast<double>(x.size());
    const double m = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    Estimate e;
    e.value = m;
    e.se = x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    e.n = static_cast<std::int64_t>(x.size());
    return e;
}

Estimate variance_se(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("variance_se needs at least two samples");
    const auto n = static_cast<double>(x.size());
    const double m = mean_of(x);
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    Estimate e;
    e.value = m2 * n / (n - 1.0);
    const double var_of_var = (m4 - (n - 3.0) / (n - 1.0) * m2 * m2) / n;
    e.se = std::sqrt(std::max(0.0, var_of_var));
    e.n = static_cast<std::int64_t>(x.size());
    return e;
}

Estimate covariance_se(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("covariance_se needs paired samples");
    const auto n = static_cast<double>(x.size());
    const double mx = mean_of(x), my = mean_of(y);
    std::vector<double> cross(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) cross[i] = (x[i] - mx) * (y[i] - my);
    const auto cm = mean_se(cross);
    Estimate e;
    e.value = cm.value * n / (n - 1.0);
    e.se = cm.se * n / (n - 1.0);
    e.n = static_cast<std::int64_t>(x.size());
    return e;
}

CorrEstimate correlation_se(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("correlation_se needs paired samples");
    const auto n = static_cast<double>(x.size());
    const double mx = mean_of(x), my = mean_of(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    CorrEstimate e;
    e.n = static_cast<std::int64_t>(x.size());
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        e.defined = false;
        e.value = e.preclip = e.se = std::nan("");
        return e;
    }
    const double r = sxy / std::sqrt(sxx * syy);
    e.preclip = r;
    e.value = std::min(1.0, std::max(-1.0, r));
    // Delta method on standardized coordinates: the influence function of the
    // correlation is psi = x~ y~ - (r/2)(x~^2 + y~^2).
    const double sx = std::sqrt(sxx / n), sy = std::sqrt(syy / n);
    double psi2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xs = (x[i] - mx) / sx, ys = (y[i] - my) / sy;
        const double psi = xs * ys - 0.5 * r * (xs * xs + ys * ys);
        psi2 += psi * psi;
    }
    e.se = std::sqrt(psi2 / n) / std::sqrt(n);
    return e;
}

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_q needs a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) {
        // Series for the lower function P, then Q = 1 - P.
        double ap = a, del = 1.0 / a, sum = del;
        for (int i = 0; i < 1000; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    // Lentz continued fraction for Q.
    double b = x + 1.0 - a, c = 1e308, d = 1.0 / b, h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double chi_square_pvalue(double stat, int dof) {
    if (dof <= 0) throw std::invalid_argument("chi-square dof must be positive");
    if (stat <= 0.0) return 1.0;
    return regularized_gamma_q(0.5 * dof, 0.5 * stat);
}

} // namespace fpp::stats
