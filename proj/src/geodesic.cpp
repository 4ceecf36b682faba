#include "fpp/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace fpp {
namespace {

double compute_tie_tolerance(const WeightConfig& config, double T) {
    return config.integer_exact() ? 0.0 : 1e-12 * std::max(1.0, std::abs(T));
}

std::vector<std::int64_t> backtrack(const Region& region, const DijkstraResult& run,
                                    std::int64_t from_vid, std::int64_t to_vid,
                                    bool* touched = nullptr) {
    std::vector<std::int64_t> edges;
    std::int64_t cur = to_vid;
    if (touched) *touched = region.on_boundary(region.vertex_at(cur));
    while (cur != from_vid) {
        const std::int64_t prev = run.pred[static_cast<std::size_t>(cur)];
        if (prev < 0) throw std::logic_error("witness backtrack hit an unreachable vertex");
        const std::int64_t lo = std::min(prev, cur), hi = std::max(prev, cur);
        std::int64_t eid = -1;
        for (int a = 0; a < region.dim(); ++a) {
            if (hi - lo != region.stride(a)) continue;
            const std::int64_t candidate = a * region.vertex_count() + lo;
            if (region.edge_slot_valid(candidate)) { eid = candidate; break; }
        }
        if (eid < 0) throw std::logic_error("predecessor is not a lattice neighbour");
        edges.push_back(eid);
        if (touched && region.on_boundary(region.vertex_at(prev))) *touched = true;
        cur = prev;
    }
    std::reverse(edges.begin(), edges.end());
    return edges;
}

} // namespace

DijkstraResult dijkstra(const Region& region, std::span<const double> weights,
                        std::int64_t source_vid, std::int64_t stop_vid) {
    const std::int64_t V = region.vertex_count();
    const int dim = region.dim();
    DijkstraResult out;
    out.dist.assign(static_cast<std::size_t>(V), kInfiniteWeight);
    out.pred.assign(static_cast<std::size_t>(V), -1);
    std::vector<char> done(static_cast<std::size_t>(V), 0);

    using Item = std::pair<double, std::int64_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    out.dist[static_cast<std::size_t>(source_vid)] = 0.0;
    heap.emplace(0.0, source_vid);

    std::int64_t stride[kMaxDim];
    std::int32_t extent[kMaxDim];
    for (int a = 0; a < dim; ++a) {
        stride[a] = region.stride(a);
        extent[a] = region.extent(a);
    }

    const auto relax = [&](std::int64_t x, std::int64_t y, double w) {
        if (done[static_cast<std::size_t>(y)] || std::isinf(w)) return;
        const double nd = out.dist[static_cast<std::size_t>(x)] + w;
        double& dy = out.dist[static_cast<std::size_t>(y)];
        if (nd < dy) {
            dy = nd;
            out.pred[static_cast<std::size_t>(y)] = x;
            heap.emplace(nd, y);
        } else if (nd == dy) {
            // Deterministic witness: lexicographically smallest predecessor
            // among finalized tight parents.
            std::int64_t& py = out.pred[static_cast<std::size_t>(y)];
            if (py >= 0 && region.vertex_at(x) < region.vertex_at(py)) py = x;
        }
    };

    while (!heap.empty()) {
        const std::int64_t x = heap.top().second;
        heap.pop();
        if (done[static_cast<std::size_t>(x)]) continue;
        done[static_cast<std::size_t>(x)] = 1;
        if (x == stop_vid) break;
        for (int a = 0; a < dim; ++a) {
            const auto coord = (x / stride[a]) % extent[a];
            if (coord + 1 < extent[a])
                relax(x, x + stride[a], weights[static_cast<std::size_t>(a * V + x)]);
            if (coord > 0)
                relax(x, x - stride[a], weights[static_cast<std::size_t>(a * V + x - stride[a])]);
        }
    }
    return out;
}

PathResult shortest_path(const WeightConfig& config, const Vertex& u, const Vertex& v) {
    const Region& region = config.region();
    if (!region.contains(u) || !region.contains(v))
        throw std::out_of_range("endpoints must lie in the region");
    const auto weights = config.materialize();
    const auto uid = region.vertex_id(u), vid = region.vertex_id(v);
    const auto run = dijkstra(region, weights, uid, vid);
    PathResult out;
    out.T = run.dist[static_cast<std::size_t>(vid)];
    if (std::isinf(out.T)) throw std::runtime_error("endpoints disconnected within region");
    out.witness = backtrack(region, run, uid, vid, &out.touched_boundary);
    return out;
}

ReplacementValues replacement_values(const WeightConfig& config, const Edge& e,
                                     const Vertex& u, const Vertex& v) {
    const Region& region = config.region();
    if (!region.contains(e)) throw std::out_of_range("edge outside region");
    if (!region.contains(u) || !region.contains(v))
        throw std::out_of_range("endpoints must lie in the region");
    auto weights = config.materialize();
    const auto eid = region.edge_id(e);
    weights[static_cast<std::size_t>(eid)] = kInfiniteWeight;
    const auto uid = region.vertex_id(u), vid = region.vertex_id(v);
    const auto du = dijkstra(region, weights, uid);
    const auto dv = dijkstra(region, weights, vid);
    const auto a = region.vertex_id(e.base);
    const auto b = region.vertex_id(offset(e.base, e.axis, 1));
    ReplacementValues out;
    out.A = du.dist[static_cast<std::size_t>(vid)];
    out.B = std::min(du.dist[static_cast<std::size_t>(a)] + dv.dist[static_cast<std::size_t>(b)],
                     du.dist[static_cast<std::size_t>(b)] + dv.dist[static_cast<std::size_t>(a)]);
    return out;
}

GeodesicAnalysis::GeodesicAnalysis(const WeightConfig& config, const Vertex& u, const Vertex& v)
    : region_(config.region()), weights_(config.materialize()) {
    if (!region_.contains(u) || !region_.contains(v))
        throw std::out_of_range("endpoints must lie in the region");
    uid_ = region_.vertex_id(u);
    vid_ = region_.vertex_id(v);
    du_ = dijkstra(region_, weights_, uid_);
    dv_ = dijkstra(region_, weights_, vid_);
    T_ = du_.dist[static_cast<std::size_t>(vid_)];
    if (std::isinf(T_)) throw std::runtime_error("endpoints disconnected within region");
    tol_ = compute_tie_tolerance(config, T_);
    witness_ = backtrack(region_, du_, uid_, vid_);

    const std::int64_t V = region_.vertex_count();
    for (std::int64_t eid = 0; eid < region_.edge_slots(); ++eid) {
        if (!region_.edge_slot_valid(eid)) continue;
        const double w = weights_[static_cast<std::size_t>(eid)];
        if (std::isinf(w)) continue;
        const std::int64_t a = eid % V;
        const std::int64_t b = a + region_.stride(static_cast<int>(eid / V));
        const double through =
            std::min(du_.dist[static_cast<std::size_t>(a)] + dv_.dist[static_cast<std::size_t>(b)],
                     du_.dist[static_cast<std::size_t>(b)] + dv_.dist[static_cast<std::size_t>(a)]) + w;
        if (through <= T_ + tol_) {
            tight_.push_back(eid);
            if (!touched_ &&
                (region_.on_boundary(region_.vertex_at(a)) || region_.on_boundary(region_.vertex_at(b))))
                touched_ = true;
        }
    }

    unique_ = tight_.size() == witness_.size();
    if (unique_) {
        pi_ = witness_;
        std::sort(pi_.begin(), pi_.end());
    } else {
        // Ties: keep exactly the tight edges whose deletion makes u-v strictly
        // more expensive, i.e. the edges every geodesic uses.
        for (const auto eid : tight_) {
            double& slot = weights_[static_cast<std::size_t>(eid)];
            const double saved = slot;
            slot = kInfiniteWeight;
            const auto run = dijkstra(region_, weights_, uid_, vid_);
            slot = saved;
            if (run.dist[static_cast<std::size_t>(vid_)] > T_ + tol_) pi_.push_back(eid);
        }
    }
}

std::vector<std::int64_t> GeodesicAnalysis::through_candidates(double slack) const {
    std::vector<std::int64_t> out;
    const std::int64_t V = region_.vertex_count();
    for (std::int64_t eid = 0; eid < region_.edge_slots(); ++eid) {
        if (!region_.edge_slot_valid(eid)) continue;
        if (std::isinf(weights_[static_cast<std::size_t>(eid)])) continue;
        const std::int64_t a = eid % V;
        const std::int64_t b = a + region_.stride(static_cast<int>(eid / V));
        const double btilde =
            std::min(du_.dist[static_cast<std::size_t>(a)] + dv_.dist[static_cast<std::size_t>(b)],
                     du_.dist[static_cast<std::size_t>(b)] + dv_.dist[static_cast<std::size_t>(a)]);
        if (btilde + slack <= T_ + tol_) out.push_back(eid);
    }
    return out;
}

ReplacementValues GeodesicAnalysis::replacement(std::int64_t eid) {
    double& slot = weights_[static_cast<std::size_t>(eid)];
    const double saved = slot;
    slot = kInfiniteWeight;
    const auto du = dijkstra(region_, weights_, uid_);
    const auto dv = dijkstra(region_, weights_, vid_);
    slot = saved;
    const std::int64_t V = region_.vertex_count();
    const std::int64_t a = eid % V;
    const std::int64_t b = a + region_.stride(static_cast<int>(eid / V));
    ReplacementValues out;
    out.A = du.dist[static_cast<std::size_t>(vid_)];
    out.B = std::min(du.dist[static_cast<std::size_t>(a)] + dv.dist[static_cast<std::size_t>(b)],
                     du.dist[static_cast<std::size_t>(b)] + dv.dist[static_cast<std::size_t>(a)]);
    return out;
}

GeodesicResult geodesic(const WeightConfig& config, const Vertex& u, const Vertex& v) {
    GeodesicAnalysis analysis(config, u, v);
    GeodesicResult out;
    out.T = analysis.T();
    out.witness = analysis.witness();
    out.pi = analysis.pi();
    out.touched_boundary = analysis.touched_boundary();
    return out;
}

std::vector<std::int64_t> geodesic_intersection(const WeightConfig& config,
                                                const Vertex& u, const Vertex& v) {
    return geodesic(config, u, v).pi;
}

std::vector<std::vector<std::int64_t>> enumerate_all_geodesics(const WeightConfig& config,
                                                               const Vertex& u, const Vertex& v) {
    const Region& region = config.region();
    if (region.valid_edge_count() > 40)
        throw std::invalid_argument("geodesic enumeration is limited to regions with <= 40 edges");
    if (!region.contains(u) || !region.contains(v))
        throw std::out_of_range("endpoints must lie in the region");

    const auto weights = config.materialize();
    const auto uid = region.vertex_id(u), vid = region.vertex_id(v);
    const auto dv = dijkstra(region, weights, vid);
    const double T = dv.dist[static_cast<std::size_t>(uid)];
    if (std::isinf(T)) throw std::runtime_error("endpoints disconnected within region");
    const double tol = compute_tie_tolerance(config, T);

    const std::int64_t V = region.vertex_count();
    std::vector<std::vector<std::int64_t>> found;
    std::vector<char> visited(static_cast<std::size_t>(V), 0);
    std::vector<std::int64_t> path;

    // Depth-first over tight continuations: a partial path of weight `cur`
    // at vertex x can only reach T if cur + w(x,y) + dist(y,v) stays at T.
    const auto dfs = [&](auto&& self, std::int64_t x, double cur) -> void {
        if (x == vid) {
            found.push_back(path);
            return;
        }
        visited[static_cast<std::size_t>(x)] = 1;
        for (int a = 0; a < region.dim(); ++a) {
            const auto coord = (x / region.stride(a)) % region.extent(a);
            for (int dir = -1; dir <= 1; dir += 2) {
                if (dir > 0 && coord + 1 >= region.extent(a)) continue;
                if (dir < 0 && coord <= 0) continue;
                const std::int64_t y = x + dir * region.stride(a);
                if (visited[static_cast<std::size_t>(y)]) continue;
                const std::int64_t eid = a * V + std::min(x, y);
                const double w = weights[static_cast<std::size_t>(eid)];
                if (std::isinf(w)) continue;
                if (cur + w + dv.dist[static_cast<std::size_t>(y)] > T + tol) continue;
                path.push_back(eid);
                self(self, y, cur + w);
                path.pop_back();
            }
        }
        visited[static_cast<std::size_t>(x)] = 0;
    };
    dfs(dfs, uid, 0.0);
    return found;
}

} // namespace fpp
