#include "fpp/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "fpp/field.hpp"
#include "fpp/geodesic.hpp"
#include "fpp/profile.hpp"
#include "fpp/rng.hpp"
#include "fpp/stats.hpp"

namespace fpp {
namespace {

constexpr std::uint64_t kSampleTag = 0x73616d70ULL; // per-sample seed stream

std::string g17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double intersection_size(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    std::size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++n;
            ++i;
            ++j;
        }
    }
    return static_cast<double>(n);
}

std::vector<std::int64_t> intersect_sorted(const std::vector<std::int64_t>& a,
                                           const std::vector<std::int64_t>& b) {
    std::vector<std::int64_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

SampleRecord run_sample(const EstimateOptions& opt, int base_padding, double eps,
                        std::int64_t idx) {
    const std::uint64_t sample_seed =
        rng::key(opt.seed, {kSampleTag, static_cast<std::uint64_t>(idx)});
    const Vertex origin{};
    const std::size_t nt = opt.t_grid.size();
    const double r = opt.dist.support_min();
    const bool full = opt.with_overlap || opt.with_coinfluence;
    const int retries = opt.grow_on_boundary ? std::max(0, opt.max_retries) : 0;

    SampleRecord rec;
    rec.Tt.assign(nt, 0.0);
    rec.overlap.assign(nt, 0.0);
    rec.coinfluence.assign(nt, 0.0);

    for (int attempt = 0;; ++attempt) {
        const int pad = base_padding << attempt;
        const Region region = Region::around(opt.target, opt.d, pad);
        const DynamicalField field(sample_seed, opt.dist, region);
        bool touched = false;

        if (full) {
            GeodesicAnalysis a0(field.slice(0.0), origin, opt.target);
            touched = a0.touched_boundary();
            std::vector<GeodesicAnalysis> at;
            at.reserve(nt);
            for (const double t : opt.t_grid) {
                if (touched && opt.grow_on_boundary) break;
                at.emplace_back(field.slice(t), origin, opt.target);
                touched = touched || at.back().touched_boundary();
            }
            if (touched && opt.grow_on_boundary) {
                if (attempt < retries) continue;
                rec.censored = true;
                return rec;
            }
            rec.T0 = a0.T();
            rec.pi0_size = static_cast<double>(a0.pi().size());
            if (opt.with_low_weight) {
                double count = 0.0;
                for (const auto eid : a0.witness())
                    if (a0.weight(eid) <= r + eps) count += 1.0;
                rec.low_weight_count = count;
            }
            std::vector<std::int64_t> cands0;
            std::map<std::int64_t, EdgeProfile> prof0;
            if (opt.with_coinfluence) cands0 = a0.through_candidates(r);
            for (std::size_t k = 0; k < nt; ++k) {
                rec.Tt[k] = at[k].T();
                rec.overlap[k] = intersection_size(a0.pi(), at[k].pi());
                if (!opt.with_coinfluence) continue;
                double sum = 0.0;
                for (const auto eid : intersect_sorted(cands0, at[k].through_candidates(r))) {
                    auto it = prof0.find(eid);
                    if (it == prof0.end())
                        it = prof0.emplace(eid, edge_profile(a0.replacement(eid), opt.dist)).first;
                    const EdgeProfile pt = edge_profile(at[k].replacement(eid), opt.dist);
                    sum += co_influence_term(it->second, pt, opt.dist);
                }
                rec.coinfluence[k] = sum;
            }
        } else {
            const auto slice0 = field.slice(0.0);
            const PathResult p0 = shortest_path(slice0, origin, opt.target);
            touched = p0.touched_boundary;
            std::vector<double> times(nt, 0.0);
            for (std::size_t k = 0; k < nt && !(touched && opt.grow_on_boundary); ++k) {
                const PathResult pk = shortest_path(field.slice(opt.t_grid[k]), origin, opt.target);
                touched = touched || pk.touched_boundary;
                times[k] = pk.T;
            }
            if (touched && opt.grow_on_boundary) {
                if (attempt < retries) continue;
                rec.censored = true;
                return rec;
            }
            rec.T0 = p0.T;
            for (std::size_t k = 0; k < nt; ++k) rec.Tt[k] = times[k];
            if (opt.with_low_weight) {
                double count = 0.0;
                for (const auto eid : p0.witness)
                    if (slice0.weight(eid) <= r + eps) count += 1.0;
                rec.low_weight_count = count;
            }
        }
        return rec;
    }
}

} // namespace

const std::vector<SeriesPoint>* EstimatorReport::find(const std::string& name) const {
    for (const auto& [key, points] : series)
        if (key == name) return &points;
    return nullptr;
}

std::string EstimatorReport::to_csv() const {
    std::string out = "quantity,t,estimate,stderr,n_samples,censored\n";
    for (const auto& [name, points] : series)
        for (const auto& p : points)
            out += name + "," + g17(p.t) + "," + g17(p.value) + "," + g17(p.se) + "," +
                   std::to_string(p.n) + "," + std::to_string(censored) + "\n";
    return out;
}

std::string EstimatorReport::to_json() const {
    nlohmann::json j;
    nlohmann::json meta;
    meta["seed"] = seed;
    meta["d"] = d;
    std::vector<int> tv;
    for (int a = 0; a < d; ++a) tv.push_back(target.c[static_cast<std::size_t>(a)]);
    meta["target"] = tv;
    meta["padding"] = padding;
    meta["dist"] = dist_spec;
    meta["n_samples"] = n_samples;
    meta["censored"] = censored;
    meta["t_grid"] = t_grid;
    if (std::isfinite(low_weight_eps) && low_weight_eps > 0.0)
        meta["low_weight_eps"] = low_weight_eps;
    j["meta"] = meta;
    nlohmann::json q;
    for (const auto& [name, points] : series) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : points)
            arr.push_back({{"t", p.t}, {"value", p.value}, {"se", p.se}, {"n", p.n}});
        q[name] = arr;
    }
    j["quantities"] = q;
    return j.dump(2) + "\n";
}

EstimatorReport estimate(const EstimateOptions& opt) {
    if (opt.n_samples < 2) throw std::invalid_argument("need at least two samples");
    if (opt.d < 2 || opt.d > kMaxDim) throw std::invalid_argument("dimension out of range");
    for (const double t : opt.t_grid)
        if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("times must lie in [0,1]");

    const int base_padding =
        opt.padding > 0 ? opt.padding : Region::default_padding(opt.target);
    double eps = opt.low_weight_eps;
    if (opt.with_low_weight && !(eps > 0.0)) {
        eps = default_eps(opt.dist);
        if (!(eps > 0.0))
            throw std::invalid_argument("no eps with F(r + eps) <= 1/2 for this law");
    }

    std::vector<SampleRecord> records(static_cast<std::size_t>(opt.n_samples));
    std::atomic<std::int64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        try {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= opt.n_samples || failed.load()) break;
                records[static_cast<std::size_t>(i)] = run_sample(opt, base_padding, eps, i);
            }
        } catch (...) {
            {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
            failed.store(true);
        }
    };
    const int n_threads = static_cast<int>(
        std::min<std::int64_t>(std::max(1, opt.workers), opt.n_samples));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    EstimatorReport rep;
    rep.seed = opt.seed;
    rep.d = opt.d;
    rep.target = opt.target;
    rep.padding = base_padding;
    rep.dist_spec = opt.dist.spec_string();
    rep.n_samples = opt.n_samples;
    rep.t_grid = opt.t_grid;
    rep.low_weight_eps = opt.with_low_weight ? eps : 0.0;
    for (const auto& rec : records)
        if (rec.censored) ++rep.censored;
    const double frac =
        static_cast<double>(rep.censored) / static_cast<double>(opt.n_samples);
    if (frac > opt.censor_budget) throw CensoringOverflow(frac, opt.censor_budget);

    std::vector<double> T0s;
    std::vector<double> pi0s, lows;
    for (const auto& rec : records) {
        if (rec.censored) continue;
        T0s.push_back(rec.T0);
        pi0s.push_back(rec.pi0_size);
        lows.push_back(rec.low_weight_count);
    }
    const std::size_t nt = opt.t_grid.size();

    auto single = [](double t, stats::Estimate e) {
        return std::vector<SeriesPoint>{{t, e.value, e.se, e.n}};
    };
    rep.series.emplace_back("mean_T", single(0.0, stats::mean_se(T0s)));
    rep.series.emplace_back("var_T", single(0.0, stats::variance_se(T0s)));

    std::vector<SeriesPoint> cov_pts, corr_pts, preclip_pts, overlap_pts, coinf_pts;
    for (std::size_t k = 0; k < nt; ++k) {
        std::vector<double> Tts, ovs, cis;
        for (const auto& rec : records) {
            if (rec.censored) continue;
            Tts.push_back(rec.Tt[k]);
            ovs.push_back(rec.overlap[k]);
            cis.push_back(rec.coinfluence[k]);
        }
        const double t = opt.t_grid[k];
        const auto cov = stats::covariance_se(T0s, Tts);
        cov_pts.push_back({t, cov.value, cov.se, cov.n});
        const auto corr = stats::correlation_se(T0s, Tts);
        corr_pts.push_back({t, corr.value, corr.se, corr.n});
        preclip_pts.push_back({t, corr.preclip, corr.se, corr.n});
        const auto ov = stats::mean_se(ovs);
        overlap_pts.push_back({t, ov.value, ov.se, ov.n});
        const auto ci = stats::mean_se(cis);
        coinf_pts.push_back({t, ci.value, ci.se, ci.n});
    }
    rep.series.emplace_back("cov_T", std::move(cov_pts));
    rep.series.emplace_back("corr_T", std::move(corr_pts));
    rep.series.emplace_back("corr_T_preclip", std::move(preclip_pts));
    if (opt.with_overlap) {
        rep.series.emplace_back("overlap", std::move(overlap_pts));
        rep.series.emplace_back("pi0_size", single(0.0, stats::mean_se(pi0s)));
    }
    if (opt.with_coinfluence) rep.series.emplace_back("coinfluence_sum", std::move(coinf_pts));
    if (opt.with_low_weight)
        rep.series.emplace_back("low_weight_count", single(0.0, stats::mean_se(lows)));

    rep.samples = std::move(records);
    return rep;
}

} // namespace fpp
