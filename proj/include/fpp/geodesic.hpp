#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fpp/field.hpp"
#include "fpp/lattice.hpp"

namespace fpp {

/// Shortest-path tree from one source. pred[v] is the predecessor vertex id
/// on a canonical geodesic (ties resolved toward the lexicographically
/// smallest finalized predecessor), -1 at the source / unreachable vertices.
struct DijkstraResult {
    std::vector<double> dist;
    std::vector<std::int64_t> pred;
};

/// Label-setting run over materialized weights. `stop_vid` >= 0 finalizes
/// that vertex and returns early (distances beyond it stay +infinity).
DijkstraResult dijkstra(const Region& region, std::span<const double> weights,
                        std::int64_t source_vid, std::int64_t stop_vid = -1);

struct PathResult {
    double T = 0.0;
    std::vector<std::int64_t> witness; // edge ids along a canonical geodesic
    bool touched_boundary = false;     // some witness vertex on the region boundary
};

/// Replacement values of an edge: T restricted to paths avoiding e (A) and
/// the best through-e path weight with e's own weight removed (B), so that
/// T after substituting weight x on e equals min(A, B + x).
struct ReplacementValues {
    double A = 0.0;
    double B = 0.0;
};

struct GeodesicResult {
    double T = 0.0;
    std::vector<std::int64_t> witness;
    std::vector<std::int64_t> pi; // edges common to every geodesic, ascending
    bool touched_boundary = false;
};

PathResult shortest_path(const WeightConfig& config, const Vertex& u, const Vertex& v);
ReplacementValues replacement_values(const WeightConfig& config, const Edge& e,
                                     const Vertex& u, const Vertex& v);
GeodesicResult geodesic(const WeightConfig& config, const Vertex& u, const Vertex& v);
std::vector<std::int64_t> geodesic_intersection(const WeightConfig& config,
                                                const Vertex& u, const Vertex& v);
/// All simple u-v paths attaining T, as edge-id lists in traversal order.
/// Requires a region with at most 40 edges (exhaustive oracle).
std::vector<std::vector<std::int64_t>> enumerate_all_geodesics(const WeightConfig& config,
                                                               const Vertex& u, const Vertex& v);

/// One materialized configuration with both label-setting runs cached.
/// Serves the estimators: geodesic intersection, the through-path candidate
/// prefilter, and per-edge replacement values computed as deleted-graph
/// corrections on the shared scratch buffer.
class GeodesicAnalysis {
public:
    GeodesicAnalysis(const WeightConfig& config, const Vertex& u, const Vertex& v);

    [[nodiscard]] double T() const { return T_; }
    [[nodiscard]] const std::vector<std::int64_t>& witness() const { return witness_; }
    [[nodiscard]] const std::vector<std::int64_t>& pi() const { return pi_; }
    /// Edges lying on at least one geodesic.
    [[nodiscard]] const std::vector<std::int64_t>& tight_edges() const { return tight_; }
    [[nodiscard]] bool unique_geodesic() const { return unique_; }
    /// True when some edge of some geodesic touches the region boundary,
    /// i.e. the in-box passage time may be truncation-censored.
    [[nodiscard]] bool touched_boundary() const { return touched_; }
    [[nodiscard]] const Region& region() const { return region_; }
    [[nodiscard]] double weight(std::int64_t eid) const { return weights_[static_cast<std::size_t>(eid)]; }
    [[nodiscard]] double tie_tolerance() const { return tol_; }

    /// Edges whose best through-path (own weight excluded, undeleted runs)
    /// stays within `slack` of T: {e : du(a) + dv(b) + slack <= T + tol}.
    /// With slack = support_min this contains every edge whose profile is
    /// not flat, since Btilde <= B and B + r < A forces Btilde + r <= T.
    [[nodiscard]] std::vector<std::int64_t> through_candidates(double slack) const;

    /// Deleted-graph replacement values for one edge (two label-setting runs
    /// with the edge masked out of the shared buffer).
    ReplacementValues replacement(std::int64_t eid);

private:
    Region region_;
    std::vector<double> weights_;
    std::int64_t uid_, vid_;
    DijkstraResult du_, dv_;
    double T_ = 0.0;
    double tol_ = 0.0;
    std::vector<std::int64_t> witness_, tight_, pi_;
    bool unique_ = false;
    bool touched_ = false;
};

} // namespace fpp
