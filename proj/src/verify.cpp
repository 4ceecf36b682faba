#include "fpp/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fpp/field.hpp"
#include "fpp/geodesic.hpp"
#include "fpp/rng.hpp"
#include "fpp/stats.hpp"

namespace fpp::verify {
namespace {

constexpr std::uint64_t kTableTag = 0x7461626cULL;   // "tabl"
constexpr std::uint64_t kWsumTag = 0x7773756dULL;    // "wsum"
constexpr std::uint64_t kLevelTag = 0x6c65766cULL;   // "levl"
constexpr std::uint64_t kCouplingTag = 0x636f7570ULL;

std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

Region box2(int nx, int ny) {
    return Region(make_vertex({0, 0}), make_vertex({nx, ny}), 2);
}

oracle::FiniteFunction box_passage_time(const Region& region, const Vertex& source,
                                        const Vertex& target) {
    oracle::FiniteFunction f;
    const auto eids = region.all_edges();
    f.m = static_cast<int>(eids.size());
    f.evaluate = [region, eids, source, target](std::span<const double> values) {
        std::vector<double> table(static_cast<std::size_t>(region.edge_slots()), kInfiniteWeight);
        for (std::size_t k = 0; k < eids.size(); ++k)
            table[static_cast<std::size_t>(eids[k])] = values[k];
        const auto cfg = WeightConfig::from_table(region, std::move(table));
        return shortest_path(cfg, source, target).T;
    };
    return f;
}

oracle::FiniteFunction box_geodesic_indicator(const Region& region, const Vertex& source,
                                              const Vertex& target, int coordinate) {
    oracle::FiniteFunction f;
    const auto eids = region.all_edges();
    if (coordinate < 0 || coordinate >= static_cast<int>(eids.size()))
        throw std::invalid_argument("edge coordinate out of range");
    const std::int64_t eid = eids[static_cast<std::size_t>(coordinate)];
    f.m = static_cast<int>(eids.size());
    f.evaluate = [region, eids, source, target, eid](std::span<const double> values) {
        std::vector<double> table(static_cast<std::size_t>(region.edge_slots()), kInfiniteWeight);
        for (std::size_t k = 0; k < eids.size(); ++k)
            table[static_cast<std::size_t>(eids[k])] = values[k];
        const auto cfg = WeightConfig::from_table(region, std::move(table));
        const auto pi = geodesic_intersection(cfg, source, target);
        return std::binary_search(pi.begin(), pi.end(), eid) ? 1.0 : 0.0;
    };
    return f;
}

std::vector<CorpusEntry> verification_corpus(std::uint64_t seed) {
    std::vector<CorpusEntry> out;
    out.reserve(50);

    {
        const Region r = box2(1, 1);
        out.push_back({"box_T_2x2", box_passage_time(r, make_vertex({0, 0}), make_vertex({1, 1}))});
    }
    {
        const Region r = box2(1, 2);
        out.push_back({"box_T_2x3", box_passage_time(r, make_vertex({0, 0}), make_vertex({1, 2}))});
    }

    // Hashed lookup tables: generic, sign-changing functions of the weights.
    for (int m = 1; m <= 6; ++m) {
        for (int k = 0; k < 4; ++k) {
            oracle::FiniteFunction f;
            f.m = m;
            f.evaluate = [seed, m, k](std::span<const double> values) {
                rng::KeyChain kc(seed);
                kc.fold(kTableTag).fold(static_cast<std::uint64_t>(m)).fold(static_cast<std::uint64_t>(k));
                for (const double v : values) kc.fold(std::bit_cast<std::uint64_t>(v));
                return 2.0 * rng::to_unit(kc.value()) - 1.0;
            };
            char name[32];
            std::snprintf(name, sizeof(name), "table_m%d_k%d", m, k);
            out.push_back({name, std::move(f)});
        }
    }

    // Monotone families.
    for (int m = 2; m <= 6; ++m) {
        {
            std::vector<double> coeff(static_cast<std::size_t>(m));
            for (int j = 0; j < m; ++j)
                coeff[static_cast<std::size_t>(j)] =
                    0.5 + rng::unit_from(seed, {kWsumTag, static_cast<std::uint64_t>(m),
                                                static_cast<std::uint64_t>(j)});
            oracle::FiniteFunction f;
            f.m = m;
            f.evaluate = [coeff](std::span<const double> values) {
                double s = 0.0;
                for (std::size_t j = 0; j < coeff.size(); ++j) s += coeff[j] * values[j];
                return s;
            };
            char name[32];
            std::snprintf(name, sizeof(name), "wsum_m%d", m);
            out.push_back({name, std::move(f)});
        }
        {
            oracle::FiniteFunction f;
            f.m = m;
            f.evaluate = [](std::span<const double> values) {
                return *std::max_element(values.begin(), values.end());
            };
            char name[32];
            std::snprintf(name, sizeof(name), "max_m%d", m);
            out.push_back({name, std::move(f)});
        }
        {
            oracle::FiniteFunction f;
            f.m = m;
            f.evaluate = [](std::span<const double> values) {
                return *std::min_element(values.begin(), values.end());
            };
            char name[32];
            std::snprintf(name, sizeof(name), "min_m%d", m);
            out.push_back({name, std::move(f)});
        }
        {
            const double theta =
                m * (0.4 + 0.5 * rng::unit_from(seed, {kLevelTag, 0, static_cast<std::uint64_t>(m)}));
            oracle::FiniteFunction f;
            f.m = m;
            f.evaluate = [theta](std::span<const double> values) {
                double s = 0.0;
                for (const double v : values) s += v;
                return s >= theta ? 1.0 : 0.0;
            };
            char name[32];
            std::snprintf(name, sizeof(name), "level_lo_m%d", m);
            out.push_back({name, std::move(f)});
        }
    }
    for (int m = 2; m <= 5; ++m) {
        const double theta =
            m * (1.0 + 0.5 * rng::unit_from(seed, {kLevelTag, 1, static_cast<std::uint64_t>(m)}));
        oracle::FiniteFunction f;
        f.m = m;
        f.evaluate = [theta](std::span<const double> values) {
            double s = 0.0;
            for (const double v : values) s += v;
            return s >= theta ? 1.0 : 0.0;
        };
        char name[32];
        std::snprintf(name, sizeof(name), "level_hi_m%d", m);
        out.push_back({name, std::move(f)});
    }

    if (out.size() != 50) throw std::logic_error("corpus must have exactly 50 entries");
    return out;
}

std::vector<WeightDistribution> corpus_distributions() {
    return {
        WeightDistribution::atomic({{1.0, 0.5}, {2.0, 0.5}}),
        WeightDistribution::atomic({{0.0, 0.5}, {1.0, 0.5}}),
        WeightDistribution::atomic({{0.0, 0.25}, {1.0, 0.5}, {2.0, 0.25}}),
    };
}

std::vector<CheckResult> covariance_formula_checks(std::uint64_t seed) {
    std::vector<CheckResult> out;
    const auto corpus = verification_corpus(seed);
    const auto dists = corpus_distributions();
    const double t_probe[] = {0.0, 0.25, 0.5, 0.9};
    for (const auto& entry : corpus) {
        for (std::size_t di = 0; di < dists.size(); ++di) {
            const auto ver = oracle::analyze_cov_formula(entry.f, dists[di]);
            double worst = 0.0;
            for (const double t : t_probe) worst = std::max(worst, std::abs(ver.residual(t)));
            // Pointwise form: the influence sum equals -dQ/ds identically.
            const auto dq = ver.q.derivative();
            for (int g = 0; g <= 20; ++g) {
                const double s = g / 20.0;
                worst = std::max(worst, std::abs(ver.influence_sum(s) + dq(s)));
            }
            CheckResult r;
            r.id = "cov_formula/" + entry.name + "/dist" + std::to_string(di);
            r.value = worst;
            r.bound = 1e-9;
            r.pass = worst <= r.bound;
            r.details = "max residual over t in {0,0.25,0.5,0.9} and 21-point derivative grid";
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<CheckResult> monotonicity_checks(std::uint64_t seed) {
    std::vector<CheckResult> out;
    const auto corpus = verification_corpus(seed);
    const auto dists = corpus_distributions();
    for (const auto& entry : corpus) {
        for (std::size_t di = 0; di < dists.size(); ++di) {
            const auto q = oracle::q_polynomial(entry.f, dists[di]);
            const auto infs = oracle::influence_polynomials(entry.f, dists[di]);
            const double tol = 1e-12 * std::max(1.0, std::abs(q(0.0)));
            double margin = kInfiniteWeight;
            std::string worst_what = "none";
            auto scan = [&](const oracle::PolynomialInS& poly, const std::string& what) {
                double prev = 0.0;
                for (int g = 0; g <= 100; ++g) {
                    const double s = g / 100.0;
                    const double val = poly(s);
                    if (g > 0 && prev - val < margin) {
                        margin = prev - val;
                        worst_what = what + " monotone";
                    }
                    if (val < margin) {
                        margin = val;
                        worst_what = what + " nonneg";
                    }
                    prev = val;
                }
            };
            scan(q, "Q");
            for (std::size_t i = 0; i < infs.size(); ++i)
                scan(infs[i], "Inf" + std::to_string(i));
            CheckResult r;
            r.id = "monotone/" + entry.name + "/dist" + std::to_string(di);
            r.value = margin;
            r.bound = -tol;
            r.pass = margin >= r.bound;
            r.details = "worst margin: " + worst_what + " (tol " + format_g(tol) + ")";
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<CheckResult> geodesic_bound_checks() {
    std::vector<CheckResult> out;
    struct BoxCase {
        const char* name;
        int nx, ny;
    };
    const BoxCase boxes[] = {{"2x2", 1, 1}, {"2x3", 1, 2}};
    const auto dists = std::vector<WeightDistribution>{
        WeightDistribution::atomic({{1.0, 0.5}, {2.0, 0.5}}),
        WeightDistribution::atomic({{0.0, 0.5}, {1.0, 0.5}}),
    };
    const double t_probe[] = {0.0, 0.5, 1.0};
    for (const auto& box : boxes) {
        const Region region = box2(box.nx, box.ny);
        const Vertex source = make_vertex({0, 0});
        const Vertex target = make_vertex({box.nx, box.ny});
        const auto f_T = box_passage_time(region, source, target);
        for (std::size_t di = 0; di < dists.size(); ++di) {
            const auto& dist = dists[di];
            const double fr = dist.cdf(dist.support_min());
            const double mu = dist.mean();
            const double second = dist.second_moment();
            const double lower_const = fr * (1.0 - fr) * (1.0 - fr);
            const double upper_const = (3.0 * mu * mu + second) / (fr * fr);
            const auto infs = oracle::influence_polynomials(f_T, dist);
            double margin = kInfiniteWeight;
            std::string worst = "none";
            for (int k = 0; k < f_T.m; ++k) {
                const auto p_poly =
                    oracle::q_polynomial(box_geodesic_indicator(region, source, target, k), dist);
                for (const double t : t_probe) {
                    const double inf = infs[static_cast<std::size_t>(k)](t);
                    const double p = p_poly(t);
                    const double tol = 1e-9 * std::max(1.0, upper_const * p);
                    const double lo_margin = inf - lower_const * p + tol;
                    const double hi_margin = upper_const * p - inf + tol;
                    if (lo_margin < margin) {
                        margin = lo_margin;
                        worst = "lower bound, edge " + std::to_string(k) + ", t=" + format_g(t);
                    }
                    if (hi_margin < margin) {
                        margin = hi_margin;
                        worst = "upper bound, edge " + std::to_string(k) + ", t=" + format_g(t);
                    }
                }
            }
            CheckResult r;
            r.id = std::string("influence_bounds/") + box.name + "/dist" + std::to_string(di);
            r.value = margin;
            r.bound = 0.0;
            r.pass = margin >= 0.0;
            r.details = "worst margin: " + worst + "; consts " + format_g(lower_const) + " / " +
                        format_g(upper_const);
            out.push_back(std::move(r));
        }
    }
    return out;
}

namespace {

struct ChiSquare {
    double stat = 0.0;
    int dof = 0;
    double pvalue = 1.0;
    bool valid = true;
};

ChiSquare chi_square(std::span<const double> observed, std::span<const double> expected) {
    ChiSquare c;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) {
            if (observed[i] != 0.0) c.valid = false;
            continue;
        }
        const double d = observed[i] - expected[i];
        c.stat += d * d / expected[i];
        ++c.dof;
    }
    c.dof -= 1;
    if (!c.valid || c.dof < 1) {
        c.pvalue = c.valid ? 1.0 : 0.0;
        return c;
    }
    c.pvalue = stats::chi_square_pvalue(c.stat, c.dof);
    return c;
}

CheckResult chi_result(const std::string& id, const ChiSquare& c) {
    CheckResult r;
    r.id = id;
    r.value = c.pvalue;
    r.bound = 1e-3;
    r.pass = c.valid && c.pvalue > r.bound;
    r.details = "chi2=" + format_g(c.stat) + " dof=" + std::to_string(c.dof);
    return r;
}

int atom_index(const WeightDistribution& dist, double v) {
    const auto& atoms = dist.atoms();
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (atoms[i].first == v) return static_cast<int>(i);
    throw std::logic_error("sampled value is not an atom");
}

/// Expected joint counts for the resampling pair law at fraction s:
/// P(a, b) = (1-s) p_a 1{a=b} + s p_a p_b.
std::vector<double> pair_law(const WeightDistribution& dist, double s, double n) {
    const auto& atoms = dist.atoms();
    const std::size_t a = atoms.size();
    std::vector<double> exp(a * a, 0.0);
    for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < a; ++j) {
            double p = s * atoms[i].second * atoms[j].second;
            if (i == j) p += (1.0 - s) * atoms[i].second;
            exp[i * a + j] = n * p;
        }
    return exp;
}

} // namespace

std::vector<CheckResult> coupling_checks(std::uint64_t seed) {
    std::vector<CheckResult> out;
    const auto atomic3 = WeightDistribution::atomic({{0.0, 0.25}, {1.0, 0.5}, {2.0, 0.25}});
    const int m = 4;
    const std::int64_t n_draws = 25000;
    const double n_obs = static_cast<double>(n_draws) * m;

    {
        // Atomic law: exact marginals and joints of the three-way coupling.
        const auto params = oracle::CouplingParams::make(0.3, 0.7);
        std::vector<double> cx(3, 0.0), cy(3, 0.0), cz(3, 0.0);
        std::vector<double> jxy(9, 0.0), jxz(9, 0.0);
        const std::uint64_t sub_seed = rng::key(seed, {kCouplingTag, 1});
        for (std::int64_t i = 0; i < n_draws; ++i) {
            const auto d = oracle::coupling_draw(params, atomic3, m, sub_seed,
                                                 static_cast<std::uint64_t>(i));
            for (int j = 0; j < m; ++j) {
                const int ax = atom_index(atomic3, d.x[static_cast<std::size_t>(j)]);
                const int ay = atom_index(atomic3, d.y[static_cast<std::size_t>(j)]);
                const int az = atom_index(atomic3, d.z[static_cast<std::size_t>(j)]);
                cx[static_cast<std::size_t>(ax)] += 1.0;
                cy[static_cast<std::size_t>(ay)] += 1.0;
                cz[static_cast<std::size_t>(az)] += 1.0;
                jxy[static_cast<std::size_t>(ax * 3 + ay)] += 1.0;
                jxz[static_cast<std::size_t>(ax * 3 + az)] += 1.0;
            }
        }
        std::vector<double> marginal = {0.25 * n_obs, 0.5 * n_obs, 0.25 * n_obs};
        out.push_back(chi_result("coupling/marginal_x", chi_square(cx, marginal)));
        out.push_back(chi_result("coupling/marginal_y", chi_square(cy, marginal)));
        out.push_back(chi_result("coupling/marginal_z", chi_square(cz, marginal)));
        out.push_back(
            chi_result("coupling/joint_xy", chi_square(jxy, pair_law(atomic3, params.s, n_obs))));
        out.push_back(
            chi_result("coupling/joint_xz", chi_square(jxz, pair_law(atomic3, params.t, n_obs))));
    }

    {
        // Atomless law: agreement rates are exactly 1-s / 1-t, and each
        // marginal is uniform.
        const auto uniform = WeightDistribution::uniform_interval(0.0, 1.0);
        const auto params = oracle::CouplingParams::make(0.3, 0.7);
        const std::uint64_t sub_seed = rng::key(seed, {kCouplingTag, 2});
        double agree_y = 0.0, agree_z = 0.0;
        std::vector<double> bx(10, 0.0), by(10, 0.0), bz(10, 0.0);
        auto bin = [](double v) { return std::min<std::size_t>(9, static_cast<std::size_t>(v * 10.0)); };
        for (std::int64_t i = 0; i < n_draws; ++i) {
            const auto d = oracle::coupling_draw(params, uniform, m, sub_seed,
                                                 static_cast<std::uint64_t>(i));
            for (int j = 0; j < m; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                if (d.x[ju] == d.y[ju]) agree_y += 1.0;
                if (d.x[ju] == d.z[ju]) agree_z += 1.0;
                bx[bin(d.x[ju])] += 1.0;
                by[bin(d.y[ju])] += 1.0;
                bz[bin(d.z[ju])] += 1.0;
            }
        }
        auto rate_check = [&](const char* id, double count, double p0) {
            const double phat = count / n_obs;
            const double z = (phat - p0) / std::sqrt(p0 * (1.0 - p0) / n_obs);
            CheckResult r;
            r.id = id;
            r.value = std::abs(z);
            r.bound = 4.0;
            r.pass = r.value <= r.bound;
            r.details = "rate " + format_g(phat) + " vs " + format_g(p0);
            return r;
        };
        out.push_back(rate_check("coupling/agree_rate_s", agree_y, 1.0 - params.s));
        out.push_back(rate_check("coupling/agree_rate_t", agree_z, 1.0 - params.t));
        std::vector<double> flat(10, n_obs / 10.0);
        out.push_back(chi_result("coupling/uniform_x", chi_square(bx, flat)));
        out.push_back(chi_result("coupling/uniform_y", chi_square(by, flat)));
        out.push_back(chi_result("coupling/uniform_z", chi_square(bz, flat)));
    }

    {
        // Field slices: (omega_0, omega_t) follows the pair law at s = t;
        // at t = 1 the pair is independent. Replica slices at time t are
        // mutually a pair at the effective fraction 2t - t^2, and each is a
        // plain resampling pair against the base time-0 slice.
        const Region region(make_vertex({0, 0}), make_vertex({249, 199}), 2);
        const DynamicalField field(rng::key(seed, {kCouplingTag, 3}), atomic3, region, 2);
        const double t = 0.35;
        const auto eids = region.all_edges();
        const double n_edges = static_cast<double>(eids.size());
        std::vector<double> j0t(9, 0.0), j01(9, 0.0), jrep(9, 0.0), jbase(9, 0.0);
        for (const auto eid : eids) {
            const Edge e = region.edge_at(eid);
            const int w0 = atom_index(atomic3, field.weight_at(e, 0.0));
            const int wt = atom_index(atomic3, field.weight_at(e, t));
            const int w1 = atom_index(atomic3, field.weight_at(e, 1.0));
            const int r1 = atom_index(atomic3, field.replica_weight_at(1, e, t));
            const int r2 = atom_index(atomic3, field.replica_weight_at(2, e, t));
            j0t[static_cast<std::size_t>(w0 * 3 + wt)] += 1.0;
            j01[static_cast<std::size_t>(w0 * 3 + w1)] += 1.0;
            jrep[static_cast<std::size_t>(r1 * 3 + r2)] += 1.0;
            jbase[static_cast<std::size_t>(w0 * 3 + r1)] += 1.0;
        }
        out.push_back(
            chi_result("field/slice_pair", chi_square(j0t, pair_law(atomic3, t, n_edges))));
        out.push_back(
            chi_result("field/slice_t1", chi_square(j01, pair_law(atomic3, 1.0, n_edges))));
        out.push_back(chi_result(
            "field/replica_pair",
            chi_square(jrep, pair_law(atomic3, oracle::effective_time(t), n_edges))));
        out.push_back(
            chi_result("field/replica_base", chi_square(jbase, pair_law(atomic3, t, n_edges))));
    }

    return out;
}

std::vector<CheckResult> run_all_checks(std::uint64_t seed) {
    std::vector<CheckResult> out = covariance_formula_checks(seed);
    auto append = [&out](std::vector<CheckResult> more) {
        for (auto& r : more) out.push_back(std::move(r));
    };
    append(monotonicity_checks(seed));
    append(geodesic_bound_checks());
    append(coupling_checks(seed));
    return out;
}

bool all_pass(const std::vector<CheckResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const CheckResult& r) { return r.pass; });
}

} // namespace fpp::verify
