#include "fpp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "fpp/estimator.hpp"
#include "fpp/field.hpp"
#include "fpp/geodesic.hpp"
#include "fpp/profile.hpp"
#include "fpp/rng.hpp"
#include "fpp/stats.hpp"
#include "fpp/verify.hpp"

namespace fpp {
namespace {

constexpr std::uint64_t kScanTag = 0x7363616eULL;
constexpr std::uint64_t kTransitionTag = 0x7472616eULL;
constexpr std::uint64_t kValleyTag = 0x76616c79ULL;
constexpr std::uint64_t kVarTag = 0x76617273ULL;
constexpr std::uint64_t kLemmaTag = 0x6c656d61ULL;

std::string g17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    std::size_t e = s.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument("not a boolean: " + v);
}

Vertex vertex_from(const std::vector<int>& coords, int d) {
    if (static_cast<int>(coords.size()) != d)
        throw std::invalid_argument("target needs exactly d coordinates");
    Vertex v{};
    for (int a = 0; a < d; ++a) v.c[static_cast<std::size_t>(a)] = coords[static_cast<std::size_t>(a)];
    return v;
}

/// Target vertices of one run: either the explicit cfg.v or size * e1 per
/// configured size.
std::vector<Vertex> targets_of(const ExperimentConfig& cfg) {
    std::vector<Vertex> out;
    if (!cfg.v.empty()) {
        out.push_back(vertex_from(cfg.v, cfg.d));
        return out;
    }
    for (const int size : cfg.sizes) {
        if (size < 1) throw std::invalid_argument("sizes must be positive");
        Vertex v{};
        v.c[0] = size;
        out.push_back(v);
    }
    return out;
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["experiment"] = cfg.experiment;
    j["d"] = cfg.d;
    j["v"] = cfg.v;
    j["dist"] = cfg.dist;
    j["t_grid"] = cfg.t_grid;
    j["sizes"] = cfg.sizes;
    j["n_samples"] = cfg.n_samples;
    j["k"] = cfg.k;
    j["t"] = cfg.t;
    j["seed"] = cfg.seed;
    j["padding"] = cfg.padding;
    j["eps"] = cfg.eps;
    j["gamma"] = cfg.gamma;
    j["coinfluence"] = cfg.coinfluence;
    // workers and the output path are execution details, not part of the
    // statistical configuration; results are identical for any worker count.
    return j;
}

std::string out_prefix(const ExperimentConfig& cfg) {
    if (!cfg.out.empty()) return cfg.out;
    std::string name = cfg.experiment;
    std::replace(name.begin(), name.end(), '-', '_');
    return name;
}

const SeriesPoint& point_at(const EstimatorReport& rep, const std::string& name, std::size_t k) {
    const auto* pts = rep.find(name);
    if (pts == nullptr || k >= pts->size())
        throw std::logic_error("missing series " + name);
    return (*pts)[k];
}

/// Index-keyed parallel loop with deterministic result slots.
template <typename Fn>
void parallel_for(std::int64_t n, int workers, Fn&& fn) {
    std::atomic<std::int64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        try {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= n || failed.load()) break;
                fn(i);
            }
        } catch (...) {
            {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
            failed.store(true);
        }
    };
    const int n_threads = static_cast<int>(std::min<std::int64_t>(std::max(1, workers), n));
    if (n_threads <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
}

} // namespace

std::vector<double> parse_time_grid(const std::string& spec) {
    std::vector<double> out;
    const auto colon1 = spec.find(':');
    if (colon1 != std::string::npos) {
        const auto colon2 = spec.find(':', colon1 + 1);
        if (colon2 == std::string::npos)
            throw std::invalid_argument("time grid needs a:b:n or a comma list");
        const double a = std::stod(spec.substr(0, colon1));
        const double b = std::stod(spec.substr(colon1 + 1, colon2 - colon1 - 1));
        const long n = std::stol(spec.substr(colon2 + 1));
        if (n < 1) throw std::invalid_argument("time grid needs at least one point");
        for (long i = 0; i < n; ++i)
            out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
        return out;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stod(item));
    }
    if (out.empty()) throw std::invalid_argument("empty time grid");
    return out;
}

std::vector<int> parse_int_list(const std::string& spec) {
    std::vector<int> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    if (out.empty()) throw std::invalid_argument("empty integer list");
    return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key == "experiment") {
        experiment = v;
    } else if (key == "d") {
        d = std::stoi(v);
    } else if (key == "v") {
        this->v = parse_int_list(v);
    } else if (key == "dist") {
        dist = v;
    } else if (key == "t_grid") {
        t_grid = parse_time_grid(v);
    } else if (key == "sizes") {
        sizes = parse_int_list(v);
    } else if (key == "n_samples") {
        n_samples = std::stoll(v);
    } else if (key == "k") {
        k = std::stoi(v);
    } else if (key == "t") {
        t = std::stod(v);
    } else if (key == "seed") {
        seed = std::stoull(v);
    } else if (key == "padding") {
        padding = std::stoi(v);
    } else if (key == "out") {
        out = v;
    } else if (key == "eps") {
        eps = std::stod(v);
    } else if (key == "gamma") {
        gamma = std::stod(v);
    } else if (key == "workers") {
        workers = std::stoi(v);
    } else if (key == "coinfluence") {
        coinfluence = parse_bool(v);
    } else if (key == "plot_script") {
        plot_script = parse_bool(v);
    } else {
        throw std::invalid_argument("unknown configuration key: " + key);
    }
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

// --------------------------------------------------------------------------
// scan

ExperimentResult run_scan(const ExperimentConfig& cfg) {
    const auto dist = WeightDistribution::parse(cfg.dist);
    const auto targets = targets_of(cfg);
    const std::string prefix = out_prefix(cfg);

    std::string csv =
        "size,vnorm,t,var_T,var_T_se,cov_T,cov_T_se,corr_T,corr_T_se,corr_T_preclip,"
        "overlap,overlap_se,overlap_per_v,overlap_per_v_se,coinfluence_sum,"
        "coinfluence_sum_se,n_effective,censored,seed\n";
    nlohmann::json rows = nlohmann::json::array();
    std::vector<std::vector<double>> overlap_per_v_by_t(cfg.t_grid.size());
    std::int64_t total_censored = 0;

    for (const auto& target : targets) {
        const double vnorm = static_cast<double>(l1_norm(target));
        EstimateOptions opt;
        opt.d = cfg.d;
        opt.target = target;
        opt.padding = cfg.padding;
        opt.dist = dist;
        opt.t_grid = cfg.t_grid;
        opt.n_samples = cfg.n_samples;
        opt.seed = rng::key(cfg.seed, {kScanTag, static_cast<std::uint64_t>(l1_norm(target))});
        opt.workers = cfg.workers;
        opt.with_overlap = true;
        opt.with_coinfluence = cfg.coinfluence;
        const EstimatorReport rep = estimate(opt);
        total_censored += rep.censored;

        const auto& var = point_at(rep, "var_T", 0);
        for (std::size_t k = 0; k < cfg.t_grid.size(); ++k) {
            const auto& cov = point_at(rep, "cov_T", k);
            const auto& corr = point_at(rep, "corr_T", k);
            const auto& preclip = point_at(rep, "corr_T_preclip", k);
            const auto& ov = point_at(rep, "overlap", k);
            double ci = std::numeric_limits<double>::quiet_NaN();
            double ci_se = std::numeric_limits<double>::quiet_NaN();
            if (cfg.coinfluence) {
                const auto& cip = point_at(rep, "coinfluence_sum", k);
                ci = cip.value;
                ci_se = cip.se;
            }
            overlap_per_v_by_t[k].push_back(ov.value / vnorm);
            csv += std::to_string(l1_norm(target)) + "," + g17(vnorm) + "," +
                   g17(cfg.t_grid[k]) + "," + g17(var.value) + "," + g17(var.se) + "," +
                   g17(cov.value) + "," + g17(cov.se) + "," + g17(corr.value) + "," +
                   g17(corr.se) + "," + g17(preclip.value) + "," + g17(ov.value) + "," +
                   g17(ov.se) + "," + g17(ov.value / vnorm) + "," + g17(ov.se / vnorm) + "," +
                   g17(ci) + "," + g17(ci_se) + "," + std::to_string(ov.n) + "," +
                   std::to_string(rep.censored) + "," + std::to_string(opt.seed) + "\n";
            nlohmann::json row;
            row["size"] = l1_norm(target);
            row["t"] = cfg.t_grid[k];
            row["var_T"] = var.value;
            row["var_T_se"] = var.se;
            row["cov_T"] = cov.value;
            row["cov_T_se"] = cov.se;
            row["corr_T"] = corr.value;
            row["corr_T_se"] = corr.se;
            row["corr_T_preclip"] = preclip.value;
            row["overlap"] = ov.value;
            row["overlap_se"] = ov.se;
            row["overlap_per_v"] = ov.value / vnorm;
            row["coinfluence_sum"] = ci;
            row["coinfluence_sum_se"] = ci_se;
            row["n_effective"] = ov.n;
            row["censored"] = rep.censored;
            rows.push_back(row);
        }
    }

    nlohmann::json j;
    j["config"] = config_json(cfg);
    j["rows"] = rows;
    nlohmann::json trends;
    nlohmann::json dec = nlohmann::json::array();
    for (std::size_t k = 0; k < cfg.t_grid.size(); ++k) {
        const auto& seq = overlap_per_v_by_t[k];
        bool strictly = seq.size() >= 2;
        for (std::size_t i = 0; i + 1 < seq.size(); ++i)
            if (!(seq[i + 1] < seq[i])) strictly = false;
        dec.push_back({{"t", cfg.t_grid[k]}, {"decreasing_in_size", strictly}});
    }
    trends["overlap_per_v"] = dec;
    j["trends"] = trends;

    ExperimentResult res;
    res.csv_path = prefix + ".csv";
    res.json_path = prefix + ".json";
    write_file(res.csv_path, csv);
    write_file(res.json_path, j.dump(2) + "\n");
    if (cfg.plot_script) {
        std::string sizes_str;
        for (const auto& target : targets)
            sizes_str += (sizes_str.empty() ? "" : " ") + std::to_string(l1_norm(target));
        std::string gp;
        gp += "set datafile separator ','\n";
        gp += "set key autotitle columnhead\n";
        gp += "set terminal pngcairo size 900,600\n";
        gp += "set output '" + prefix + "_overlap.png'\n";
        gp += "set xlabel 't'\nset ylabel 'overlap / |v|'\n";
        gp += "plot for [s in \"" + sizes_str + "\"] '" + res.csv_path +
              "' using ($1==real(s)?$3:1/0):13 with linespoints title 'size '.s\n";
        gp += "set output '" + prefix + "_corr.png'\n";
        gp += "set ylabel 'corr(T_0, T_t)'\n";
        gp += "plot for [s in \"" + sizes_str + "\"] '" + res.csv_path +
              "' using ($1==real(s)?$3:1/0):8 with linespoints title 'size '.s\n";
        res.plot_path = prefix + ".gp";
        write_file(res.plot_path, gp);
    }
    res.summary = "scan: " + std::to_string(targets.size()) + " sizes x " +
                  std::to_string(cfg.t_grid.size()) + " times, " +
                  std::to_string(total_censored) + " censored samples";
    return res;
}

// --------------------------------------------------------------------------
// transition

ExperimentResult run_transition(const ExperimentConfig& cfg) {
    const auto dist = WeightDistribution::parse(cfg.dist);
    const auto targets = targets_of(cfg);
    const std::string prefix = out_prefix(cfg);
    const std::vector<double> alphas = {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};

    std::string csv =
        "size,vnorm,alpha,t,var_hat,corr_T,corr_T_se,corr_T_preclip,overlap,overlap_se,"
        "c_a,c_b,n_effective,censored,seed\n";
    nlohmann::json rows = nlohmann::json::array();
    nlohmann::json per_size = nlohmann::json::array();
    std::int64_t total_censored = 0;

    for (const auto& target : targets) {
        const double vnorm = static_cast<double>(l1_norm(target));
        EstimateOptions base;
        base.d = cfg.d;
        base.target = target;
        base.padding = cfg.padding;
        base.dist = dist;
        base.n_samples = cfg.n_samples;
        base.workers = cfg.workers;

        EstimateOptions optA = base;
        optA.with_overlap = false;
        optA.seed = rng::key(cfg.seed, {kTransitionTag, static_cast<std::uint64_t>(l1_norm(target)), 0});
        const EstimatorReport repA = estimate(optA);
        const double var_hat = point_at(repA, "var_T", 0).value;

        EstimateOptions optB = base;
        optB.with_overlap = true;
        optB.seed = rng::key(cfg.seed, {kTransitionTag, static_cast<std::uint64_t>(l1_norm(target)), 1});
        for (const double alpha : alphas)
            optB.t_grid.push_back(std::clamp(alpha * var_hat / vnorm, 0.0, 1.0));
        const EstimatorReport repB = estimate(optB);
        total_censored += repA.censored + repB.censored;

        double c_a_max = 0.0, c_b_min = kInfiniteWeight, c_b_max = 0.0;
        for (std::size_t k = 0; k < alphas.size(); ++k) {
            const double alpha = alphas[k];
            const auto& corr = point_at(repB, "corr_T", k);
            const auto& preclip = point_at(repB, "corr_T_preclip", k);
            const auto& ov = point_at(repB, "overlap", k);
            const double c_a = (1.0 - corr.value) / alpha;
            const double c_b = ov.value * alpha / vnorm;
            c_a_max = std::max(c_a_max, c_a);
            if (alpha >= 2.0) {
                c_b_min = std::min(c_b_min, c_b);
                c_b_max = std::max(c_b_max, c_b);
            }
            csv += std::to_string(l1_norm(target)) + "," + g17(vnorm) + "," + g17(alpha) + "," +
                   g17(optB.t_grid[k]) + "," + g17(var_hat) + "," + g17(corr.value) + "," +
                   g17(corr.se) + "," + g17(preclip.value) + "," + g17(ov.value) + "," +
                   g17(ov.se) + "," + g17(c_a) + "," + g17(c_b) + "," + std::to_string(ov.n) +
                   "," + std::to_string(repB.censored) + "," + std::to_string(optB.seed) + "\n";
            nlohmann::json row;
            row["size"] = l1_norm(target);
            row["alpha"] = alpha;
            row["t"] = optB.t_grid[k];
            row["var_hat"] = var_hat;
            row["corr_T"] = corr.value;
            row["corr_T_se"] = corr.se;
            row["overlap"] = ov.value;
            row["overlap_se"] = ov.se;
            row["c_a"] = c_a;
            row["c_b"] = c_b;
            rows.push_back(row);
        }
        per_size.push_back({{"size", l1_norm(target)},
                            {"var_hat", var_hat},
                            {"t_scale", var_hat / vnorm},
                            {"c_a_max", c_a_max},
                            {"c_b_ratio", c_b_min > 0.0 ? c_b_max / c_b_min : kInfiniteWeight}});
    }

    nlohmann::json j;
    j["config"] = config_json(cfg);
    j["alphas"] = alphas;
    j["rows"] = rows;
    j["per_size"] = per_size;
    if (!per_size.empty()) {
        double ca_lo = kInfiniteWeight, ca_hi = 0.0, cb_lo = kInfiniteWeight, cb_hi = 0.0;
        for (const auto& p : per_size) {
            const double ca = p["c_a_max"].get<double>();
            const double cb = p["c_b_ratio"].get<double>();
            ca_lo = std::min(ca_lo, ca);
            ca_hi = std::max(ca_hi, ca);
            cb_lo = std::min(cb_lo, cb);
            cb_hi = std::max(cb_hi, cb);
        }
        nlohmann::json fits;
        fits["c_a_spread"] = ca_lo > 0.0 ? ca_hi / ca_lo : kInfiniteWeight;
        fits["c_a_stable_factor2"] = ca_lo > 0.0 && ca_hi <= 2.0 * ca_lo;
        fits["c_b_spread"] = cb_lo > 0.0 ? cb_hi / cb_lo : kInfiniteWeight;
        fits["c_b_stable_factor2"] = cb_lo > 0.0 && cb_hi <= 2.0 * cb_lo;
        j["fit_stability"] = fits;
    }

    ExperimentResult res;
    res.csv_path = prefix + ".csv";
    res.json_path = prefix + ".json";
    write_file(res.csv_path, csv);
    write_file(res.json_path, j.dump(2) + "\n");
    if (cfg.plot_script) {
        std::string gp;
        gp += "set datafile separator ','\n";
        gp += "set key autotitle columnhead\n";
        gp += "set terminal pngcairo size 900,600\n";
        gp += "set logscale x 2\n";
        gp += "set output '" + prefix + "_corr.png'\n";
        gp += "set xlabel 'alpha = t |v| / Var(T)'\nset ylabel 'corr(T_0, T_t)'\n";
        gp += "plot '" + res.csv_path + "' using 3:6 with linespoints\n";
        res.plot_path = prefix + ".gp";
        write_file(res.plot_path, gp);
    }
    res.summary = "transition: " + std::to_string(targets.size()) + " sizes x " +
                  std::to_string(alphas.size()) + " alphas, " +
                  std::to_string(total_censored) + " censored samples";
    return res;
}

// --------------------------------------------------------------------------
// valleys

ExperimentResult run_valleys(const ExperimentConfig& cfg) {
    const auto dist = WeightDistribution::parse(cfg.dist);
    const auto targets = targets_of(cfg);
    const std::string prefix = out_prefix(cfg);
    if (cfg.k < 1) throw std::invalid_argument("valleys needs k >= 1");
    if (!(cfg.t >= 0.0 && cfg.t <= 1.0)) throw std::invalid_argument("t must lie in [0,1]");

    std::string csv =
        "size,vnorm,k,t,o_k,o_k_se,o_k_per_v,o_k_per_v_se,dt_k,dt_k_se,dt_k_per_v,"
        "dt_k_per_v_se,n_effective,censored,seed\n";
    nlohmann::json rows = nlohmann::json::array();
    nlohmann::json schedule = nlohmann::json::array();
    std::int64_t total_censored = 0;

    const double eps_s = std::isnan(cfg.eps) ? default_eps(dist) : cfg.eps;

    for (const auto& target : targets) {
        const double vnorm = static_cast<double>(l1_norm(target));
        const std::uint64_t size_seed =
            rng::key(cfg.seed, {kValleyTag, static_cast<std::uint64_t>(l1_norm(target))});
        const int base_padding = cfg.padding > 0 ? cfg.padding : Region::default_padding(target);
        const std::int64_t n = cfg.n_samples;

        struct Rec {
            bool censored = false;
            double o_k = 0.0, dt_k = 0.0;
        };
        std::vector<Rec> recs(static_cast<std::size_t>(n));
        parallel_for(n, cfg.workers, [&](std::int64_t i) {
            const std::uint64_t sample_seed = rng::key(size_seed, {static_cast<std::uint64_t>(i)});
            Rec rec;
            for (int attempt = 0;; ++attempt) {
                const Region region = Region::around(target, cfg.d, base_padding << attempt);
                const DynamicalField field(sample_seed, dist, region, cfg.k);
                const Vertex origin{};
                GeodesicAnalysis base(field.slice(0.0), origin, target);
                bool touched = base.touched_boundary();
                std::vector<std::vector<std::int64_t>> pis;
                std::vector<double> dts;
                for (int rix = 1; rix <= cfg.k && !touched; ++rix) {
                    GeodesicAnalysis rep(field.replica_slice(rix, cfg.t), origin, target);
                    touched = touched || rep.touched_boundary();
                    if (touched) break;
                    pis.push_back(rep.pi());
                    double along = 0.0;
                    for (const auto eid : rep.witness()) along += base.weight(eid);
                    dts.push_back(along - base.T());
                }
                if (touched) {
                    if (attempt < 2) continue;
                    rec.censored = true;
                    break;
                }
                double o_k = 0.0;
                for (std::size_t a = 0; a < pis.size(); ++a) {
                    std::vector<std::int64_t> common;
                    std::set_intersection(base.pi().begin(), base.pi().end(), pis[a].begin(),
                                          pis[a].end(), std::back_inserter(common));
                    o_k = std::max(o_k, static_cast<double>(common.size()));
                    for (std::size_t b = a + 1; b < pis.size(); ++b) {
                        common.clear();
                        std::set_intersection(pis[a].begin(), pis[a].end(), pis[b].begin(),
                                              pis[b].end(), std::back_inserter(common));
                        o_k = std::max(o_k, static_cast<double>(common.size()));
                    }
                }
                rec.o_k = o_k;
                rec.dt_k = dts.empty() ? 0.0 : *std::max_element(dts.begin(), dts.end());
                break;
            }
            recs[static_cast<std::size_t>(i)] = rec;
        });

        std::int64_t censored = 0;
        std::vector<double> oks, dts;
        for (const auto& rec : recs) {
            if (rec.censored) {
                ++censored;
                continue;
            }
            oks.push_back(rec.o_k);
            dts.push_back(rec.dt_k);
        }
        total_censored += censored;
        const double frac = static_cast<double>(censored) / static_cast<double>(n);
        if (frac > 0.01) throw CensoringOverflow(frac, 0.01);

        const auto ok = stats::mean_se(oks);
        const auto dt = stats::mean_se(dts);
        csv += std::to_string(l1_norm(target)) + "," + g17(vnorm) + "," + std::to_string(cfg.k) +
               "," + g17(cfg.t) + "," + g17(ok.value) + "," + g17(ok.se) + "," +
               g17(ok.value / vnorm) + "," + g17(ok.se / vnorm) + "," + g17(dt.value) + "," +
               g17(dt.se) + "," + g17(dt.value / vnorm) + "," + g17(dt.se / vnorm) + "," +
               std::to_string(ok.n) + "," + std::to_string(censored) + "," +
               std::to_string(size_seed) + "\n";
        nlohmann::json row;
        row["size"] = l1_norm(target);
        row["k"] = cfg.k;
        row["t"] = cfg.t;
        row["o_k"] = ok.value;
        row["o_k_se"] = ok.se;
        row["o_k_per_v"] = ok.value / vnorm;
        row["dt_k"] = dt.value;
        row["dt_k_se"] = dt.se;
        row["dt_k_per_v"] = dt.value / vnorm;
        row["n_effective"] = ok.n;
        row["censored"] = censored;
        rows.push_back(row);

        // Advisory sublinearity schedule with proxy constants C = C' = 1:
        // t(v) = F(r+eps)^{1/2d}, psi = |v|/(t log|v|) + |v| F(r+eps)^{1/d}/t,
        // k* = (|v|/psi)^{1/4} - 1, alpha = |v|^{3/4} psi^{1/4},
        // k = floor(min(t^{-1/2}, k*)), beta = t^{1/4} |v|.
        nlohmann::json sched;
        sched["size"] = l1_norm(target);
        sched["eps"] = eps_s;
        if (eps_s > 0.0) {
            const double feps = dist.cdf(dist.support_min() + eps_s);
            const double t_v = std::pow(feps, 1.0 / (2.0 * cfg.d));
            sched["F_eps"] = feps;
            sched["t"] = t_v;
            if (t_v > 0.0 && vnorm > 1.0) {
                const double psi = vnorm / (t_v * std::log(vnorm)) +
                                   vnorm * std::pow(feps, 1.0 / cfg.d) / t_v;
                const double k_star = std::pow(vnorm / psi, 0.25) - 1.0;
                sched["psi"] = psi;
                sched["k_star"] = k_star;
                sched["alpha"] = std::pow(vnorm, 0.75) * std::pow(psi, 0.25);
                sched["k"] = std::floor(std::min(1.0 / std::sqrt(t_v), std::max(0.0, k_star)));
                sched["beta"] = std::pow(t_v, 0.25) * vnorm;
            }
        }
        schedule.push_back(sched);
    }

    nlohmann::json j;
    j["config"] = config_json(cfg);
    j["rows"] = rows;
    j["schedule"] = schedule;

    ExperimentResult res;
    res.csv_path = prefix + ".csv";
    res.json_path = prefix + ".json";
    write_file(res.csv_path, csv);
    write_file(res.json_path, j.dump(2) + "\n");
    if (cfg.plot_script) {
        std::string gp;
        gp += "set datafile separator ','\n";
        gp += "set key autotitle columnhead\n";
        gp += "set terminal pngcairo size 900,600\n";
        gp += "set logscale x 2\n";
        gp += "set output '" + prefix + ".png'\n";
        gp += "set xlabel '|v|'\nset ylabel 'normalized by |v|'\n";
        gp += "plot '" + res.csv_path + "' using 2:7 with linespoints title 'O_k/|v|', '" +
              res.csv_path + "' using 2:11 with linespoints title 'dT_k/|v|'\n";
        res.plot_path = prefix + ".gp";
        write_file(res.plot_path, gp);
    }
    res.summary = "valleys: k=" + std::to_string(cfg.k) + ", t=" + g17(cfg.t) + ", " +
                  std::to_string(targets.size()) + " sizes, " + std::to_string(total_censored) +
                  " censored samples";
    return res;
}

// --------------------------------------------------------------------------
// var-scaling

ExperimentResult run_var_scaling(const ExperimentConfig& cfg) {
    const auto dist = WeightDistribution::parse(cfg.dist);
    const auto targets = targets_of(cfg);
    const std::string prefix = out_prefix(cfg);

    std::string csv =
        "size,vnorm,var_T,var_T_se,var_norm,var_norm_se,low_weight_count,"
        "low_weight_count_se,low_weight_ratio,eps,n_effective,censored,seed\n";
    nlohmann::json rows = nlohmann::json::array();
    std::int64_t total_censored = 0;
    std::vector<double> var_pv, var_pv_se, ratios;

    for (const auto& target : targets) {
        const double vnorm = static_cast<double>(l1_norm(target));
        EstimateOptions opt;
        opt.d = cfg.d;
        opt.target = target;
        opt.padding = cfg.padding;
        opt.dist = dist;
        opt.n_samples = cfg.n_samples;
        opt.seed = rng::key(cfg.seed, {kVarTag, static_cast<std::uint64_t>(l1_norm(target))});
        opt.workers = cfg.workers;
        opt.with_overlap = false;
        opt.with_low_weight = true;
        opt.low_weight_eps = cfg.eps;
        const EstimatorReport rep = estimate(opt);
        total_censored += rep.censored;

        const auto& var = point_at(rep, "var_T", 0);
        const auto& low = point_at(rep, "low_weight_count", 0);
        const double lg = std::log(vnorm);
        const double feps = dist.cdf(dist.support_min() + rep.low_weight_eps);
        const double denom = vnorm * std::pow(feps, 1.0 / cfg.d);
        const double ratio = denom > 0.0 ? low.value / denom : kInfiniteWeight;
        csv += std::to_string(l1_norm(target)) + "," + g17(vnorm) + "," + g17(var.value) + "," +
               g17(var.se) + "," + g17(var.value * lg / vnorm) + "," +
               g17(var.se * lg / vnorm) + "," + g17(low.value) + "," + g17(low.se) + "," +
               g17(ratio) + "," + g17(rep.low_weight_eps) + "," + std::to_string(var.n) + "," +
               std::to_string(rep.censored) + "," + std::to_string(opt.seed) + "\n";
        nlohmann::json row;
        row["size"] = l1_norm(target);
        row["var_T"] = var.value;
        row["var_T_se"] = var.se;
        row["var_norm"] = var.value * lg / vnorm;
        row["low_weight_count"] = low.value;
        row["low_weight_count_se"] = low.se;
        row["low_weight_ratio"] = ratio;
        row["eps"] = rep.low_weight_eps;
        row["n_effective"] = var.n;
        row["censored"] = rep.censored;
        rows.push_back(row);
        var_pv.push_back(var.value / vnorm);
        var_pv_se.push_back(var.se / vnorm);
        ratios.push_back(ratio);
    }

    nlohmann::json j;
    j["config"] = config_json(cfg);
    j["rows"] = rows;
    if (var_pv.size() >= 2) {
        // trend report: boundedness signatures only, no universal constants asserted
        bool noninc = true;
        for (std::size_t i = 0; i + 1 < var_pv.size(); ++i) {
            const double slack = 3.0 * std::hypot(var_pv_se[i], var_pv_se[i + 1]);
            if (var_pv[i + 1] > var_pv[i] + slack) noninc = false;
        }
        const auto [rlo, rhi] = std::minmax_element(ratios.begin(), ratios.end());
        nlohmann::json trends;
        trends["var_per_v_nonincreasing_3se"] = noninc;
        trends["low_weight_ratio_spread"] = *rlo > 0.0 ? *rhi / *rlo : kInfiniteWeight;
        trends["low_weight_ratio_bounded_factor4"] = *rlo > 0.0 && *rhi <= 4.0 * *rlo;
        j["trends"] = trends;
    }

    ExperimentResult res;
    res.csv_path = prefix + ".csv";
    res.json_path = prefix + ".json";
    write_file(res.csv_path, csv);
    write_file(res.json_path, j.dump(2) + "\n");
    if (cfg.plot_script) {
        std::string gp;
        gp += "set datafile separator ','\n";
        gp += "set key autotitle columnhead\n";
        gp += "set terminal pngcairo size 900,600\n";
        gp += "set logscale x 2\n";
        gp += "set output '" + prefix + ".png'\n";
        gp += "set xlabel '|v|'\nset ylabel 'Var(T) log|v| / |v|'\n";
        gp += "plot '" + res.csv_path + "' using 2:5 with linespoints\n";
        res.plot_path = prefix + ".gp";
        write_file(res.plot_path, gp);
    }
    res.summary = "var-scaling: " + std::to_string(targets.size()) + " sizes, " +
                  std::to_string(total_censored) + " censored samples";
    return res;
}

// --------------------------------------------------------------------------
// lemmas

namespace {

struct LemmaTally {
    std::int64_t total = 0, pass = 0, fail = 0, skipped = 0, vacuous = 0;
    double min_slack = kInfiniteWeight;
};

} // namespace

ExperimentResult run_lemma_suite(const ExperimentConfig& cfg) {
    const std::string prefix = out_prefix(cfg);
    std::vector<std::string> law_specs = {"uniform:0,1", "exp:rate=1,shift=0"};
    if (std::find(law_specs.begin(), law_specs.end(), cfg.dist) == law_specs.end())
        law_specs.push_back(cfg.dist);

    std::string csv = "law,check_id,total,pass,fail,skipped,vacuous,min_slack\n";
    nlohmann::json laws_json = nlohmann::json::array();
    std::int64_t real_failures = 0;

    for (std::size_t li = 0; li < law_specs.size(); ++li) {
        const auto law = WeightDistribution::parse(law_specs[li]);
        const double eps_l = std::isnan(cfg.eps) ? default_eps(law) : cfg.eps;
        const double gamma_l = std::isnan(cfg.gamma) ? default_gamma(law, eps_l) : cfg.gamma;
        std::map<std::string, LemmaTally> tally;
        nlohmann::json failures = nlohmann::json::array();

        const std::int64_t n = cfg.n_samples;
        std::vector<std::vector<LemmaCheck>> all(static_cast<std::size_t>(n));
        parallel_for(n, cfg.workers, [&](std::int64_t i) {
            const std::uint64_t seed_i =
                rng::key(cfg.seed, {kLemmaTag, static_cast<std::uint64_t>(li),
                                    static_cast<std::uint64_t>(i)});
            const double t = rng::unit_from(seed_i, {1});
            Vertex target{};
            target.c[0] = 6 + static_cast<std::int32_t>(rng::key(seed_i, {2}) % 5);
            target.c[1] = static_cast<std::int32_t>(rng::key(seed_i, {3}) % 4);
            const Region region = Region::around(target, 2, 6);
            const DynamicalField field(seed_i, law, region);
            const Vertex origin{};
            GeodesicAnalysis a0(field.slice(0.0), origin, target);
            GeodesicAnalysis at(field.slice(t), origin, target);
            const double r = law.support_min();
            auto cands = a0.through_candidates(r);
            for (const auto eid : at.through_candidates(r))
                if (!std::binary_search(cands.begin(), cands.end(), eid)) cands.push_back(eid);
            std::sort(cands.begin(), cands.end());
            const std::int64_t eid =
                cands[static_cast<std::size_t>(rng::key(seed_i, {4}) % cands.size())];
            const EdgeProfile p0 = edge_profile(a0.replacement(eid), law);
            const EdgeProfile pt = edge_profile(at.replacement(eid), law);
            all[static_cast<std::size_t>(i)] = check_lemma_suite(p0, pt, law, eps_l, gamma_l);
        });

        for (std::int64_t i = 0; i < n; ++i) {
            for (const auto& c : all[static_cast<std::size_t>(i)]) {
                auto& t = tally[c.id];
                ++t.total;
                if (c.status == CheckStatus::fail) {
                    ++t.fail;
                    ++real_failures;
                    if (failures.size() < 10)
                        failures.push_back({{"config", i}, {"check", c.id}, {"slack", c.slack}});
                } else if (c.status == CheckStatus::skipped) {
                    ++t.skipped;
                } else if (!c.reason.empty()) {
                    ++t.pass;
                    ++t.vacuous;
                } else {
                    ++t.pass;
                    t.min_slack = std::min(t.min_slack, c.slack);
                }
            }
        }

        nlohmann::json law_json;
        law_json["law"] = law_specs[li];
        law_json["eps"] = eps_l;
        law_json["gamma"] = gamma_l;
        law_json["n_configs"] = n;
        nlohmann::json checks = nlohmann::json::array();
        for (const auto& [id, t] : tally) {
            csv += csv_escape(law_specs[li]) + "," + id + "," + std::to_string(t.total) + "," +
                   std::to_string(t.pass) + "," + std::to_string(t.fail) + "," +
                   std::to_string(t.skipped) + "," + std::to_string(t.vacuous) + "," +
                   g17(t.min_slack == kInfiniteWeight ? std::numeric_limits<double>::quiet_NaN()
                                                      : t.min_slack) +
                   "\n";
            checks.push_back({{"id", id},
                              {"total", t.total},
                              {"pass", t.pass},
                              {"fail", t.fail},
                              {"skipped", t.skipped},
                              {"vacuous", t.vacuous}});
        }
        law_json["checks"] = checks;
        law_json["failures"] = failures;
        laws_json.push_back(law_json);
    }

    // Negative controls: deliberately broken inputs that the checks must
    // flag. An undetected control means the harness itself is broken.
    const auto uniform = WeightDistribution::uniform_interval(0.0, 1.0);
    nlohmann::json controls = nlohmann::json::array();
    bool controls_ok = true;
    {
        // Gap violation: Z >= r + eps but Y < r + eps/2.
        EdgeProfile bad;
        bad.A = 2.0;
        bad.B = 1.5;
        bad.Z = 0.5;
        bad.H = 0.45;
        bad.Y = 0.05;
        const auto checks = check_lemma_suite(bad, bad, uniform, 0.4,
                                              std::numeric_limits<double>::quiet_NaN());
        bool detected = false;
        for (const auto& c : checks)
            if (c.id == "zero_gap_bound" && c.status == CheckStatus::fail) detected = true;
        controls_ok = controls_ok && detected;
        controls.push_back({{"id", "zero_gap_injected"}, {"detected", detected}});
        csv += "control,zero_gap_injected,1," + std::string(detected ? "1" : "0") + "," +
               (detected ? "0" : "1") + ",0,0,nan\n";
    }
    {
        // Flat-height violation: Z <= gamma but H > F(Y).
        EdgeProfile bad;
        bad.A = 1.4;
        bad.B = 1.0;
        bad.Z = 0.4;
        bad.H = 0.39;
        bad.Y = 0.01;
        const auto checks = check_lemma_suite(bad, bad, uniform,
                                              std::numeric_limits<double>::quiet_NaN(), 0.45);
        bool detected = false;
        for (const auto& c : checks)
            if (c.id == "flat_height_bound" && c.status == CheckStatus::fail) detected = true;
        controls_ok = controls_ok && detected;
        controls.push_back({{"id", "flat_height_injected"}, {"detected", detected}});
        csv += "control,flat_height_injected,1," + std::string(detected ? "1" : "0") + "," +
               (detected ? "0" : "1") + ",0,0,nan\n";
    }
    {
        // Sign-flip mutant of the product integral: the comparator must
        // reject a negated co-influence term.
        EdgeProfile p;
        p.A = 1.8;
        p.B = 1.0;
        p.Z = 0.8;
        p.H = 0.32;
        p.Y = 0.48;
        const double tau = co_influence_term(p, p, uniform);
        const double neg = negative_part_product_integral(p, p, uniform);
        const bool detected = !(-tau + 1e-12 >= neg);
        controls_ok = controls_ok && detected;
        controls.push_back({{"id", "negpart_sign_flip"}, {"detected", detected}});
        csv += "control,negpart_sign_flip,1," + std::string(detected ? "1" : "0") + "," +
               (detected ? "0" : "1") + ",0,0,nan\n";
    }

    // Exact-identity backstop: the enumeration corpus must still verify the
    // covariance formula.
    const auto corpus_checks = verify::covariance_formula_checks(cfg.seed);
    std::int64_t corpus_fail = 0;
    for (const auto& c : corpus_checks)
        if (!c.pass) ++corpus_fail;
    csv += "oracle,cov_formula_corpus," + std::to_string(corpus_checks.size()) + "," +
           std::to_string(static_cast<std::int64_t>(corpus_checks.size()) - corpus_fail) + "," +
           std::to_string(corpus_fail) + ",0,0,nan\n";

    nlohmann::json j;
    j["config"] = config_json(cfg);
    j["laws"] = laws_json;
    j["controls"] = controls;
    j["oracle_corpus"] = {{"total", corpus_checks.size()}, {"failures", corpus_fail}};
    const bool ok = real_failures == 0 && controls_ok && corpus_fail == 0;
    j["pass"] = ok;

    ExperimentResult res;
    res.exit_code = ok ? 0 : 2;
    res.csv_path = prefix + ".csv";
    res.json_path = prefix + ".json";
    write_file(res.csv_path, csv);
    write_file(res.json_path, j.dump(2) + "\n");
    res.summary = std::string("lemmas: ") + (ok ? "all checks passed" : "FAILURES detected") +
                  " (" + std::to_string(real_failures) + " failures, controls " +
                  (controls_ok ? "detected" : "MISSED") + ", corpus failures " +
                  std::to_string(corpus_fail) + ")";
    return res;
}

// --------------------------------------------------------------------------
// oracle

ExperimentResult run_oracle(const ExperimentConfig& cfg) {
    const std::string prefix = out_prefix(cfg);
    const auto results = verify::run_all_checks(cfg.seed);

    std::string csv = "check_id,pass,value,bound,details\n";
    nlohmann::json rows = nlohmann::json::array();
    std::int64_t failures = 0;
    for (const auto& r : results) {
        if (!r.pass) ++failures;
        csv += csv_escape(r.id) + "," + (r.pass ? "1" : "0") + "," + g17(r.value) + "," +
               g17(r.bound) + "," + csv_escape(r.details) + "\n";
        rows.push_back({{"id", r.id},
                        {"pass", r.pass},
                        {"value", r.value},
                        {"bound", r.bound},
                        {"details", r.details}});
    }

    nlohmann::json j;
    j["config"] = config_json(cfg);
    j["checks"] = rows;
    j["total"] = results.size();
    j["failures"] = failures;
    j["pass"] = failures == 0;

    ExperimentResult res;
    res.exit_code = failures == 0 ? 0 : 2;
    res.csv_path = prefix + ".csv";
    res.json_path = prefix + ".json";
    write_file(res.csv_path, csv);
    write_file(res.json_path, j.dump(2) + "\n");
    res.summary = "oracle: " + std::to_string(results.size() - failures) + "/" +
                  std::to_string(results.size()) + " checks passed";
    return res;
}

// --------------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    try {
        if (cfg.experiment == "scan") return run_scan(cfg);
        if (cfg.experiment == "transition") return run_transition(cfg);
        if (cfg.experiment == "valleys") return run_valleys(cfg);
        if (cfg.experiment == "var-scaling" || cfg.experiment == "var_scaling")
            return run_var_scaling(cfg);
        if (cfg.experiment == "lemmas") return run_lemma_suite(cfg);
        if (cfg.experiment == "oracle") return run_oracle(cfg);
    } catch (const CensoringOverflow& e) {
        ExperimentResult res;
        res.exit_code = 3;
        res.summary = std::string("aborted: ") + e.what();
        return res;
    }
    throw std::invalid_argument("unknown experiment: " + cfg.experiment);
}

} // namespace fpp
