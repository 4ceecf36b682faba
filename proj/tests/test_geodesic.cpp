#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "fpp/field.hpp"
#include "fpp/geodesic.hpp"
#include "fpp/lattice.hpp"
#include "fpp/rng.hpp"

using namespace fpp;

namespace {

WeightConfig fill_config(const Region& box, double w) {
    std::vector<double> t(static_cast<std::size_t>(box.edge_slots()), 0.0);
    for (const std::int64_t eid : box.all_edges()) t[static_cast<std::size_t>(eid)] = w;
    return WeightConfig::from_table(box, t);
}

// unit square [0,1]^2: 4 edges
const Region kSquare(make_vertex({0, 0}), make_vertex({1, 1}), 2);
const Edge kBottom{make_vertex({0, 0}), 0};
const Edge kTop{make_vertex({0, 1}), 0};
const Edge kLeft{make_vertex({0, 0}), 1};
const Edge kRight{make_vertex({1, 0}), 1};

std::set<std::int64_t> as_set(const std::vector<std::int64_t>& v) { return {v.begin(), v.end()}; }

WeightConfig random_config(const Region& box, std::uint64_t seed, bool integer_atoms) {
    std::vector<double> t(static_cast<std::size_t>(box.edge_slots()), 0.0);
    for (const std::int64_t eid : box.all_edges()) {
        const double u = rng::unit_from(seed, {static_cast<std::uint64_t>(eid)});
        t[static_cast<std::size_t>(eid)] = integer_atoms ? 1.0 + std::floor(u * 3.0) : 0.05 + u;
    }
    return WeightConfig::from_table(box, t);
}

} // namespace

TEST_CASE("shortest paths on constant configurations") {
    const Region box = Region::around(make_vertex({3, 0}), 2, 2);
    const auto one = fill_config(box, 1.0);
    const auto res = shortest_path(one, make_vertex({0, 0}), make_vertex({3, 0}));
    CHECK(res.T == 3.0);
    CHECK(res.witness.size() == 3);
    CHECK_FALSE(res.touched_boundary);
    const auto c = fill_config(box, 2.5);
    CHECK(shortest_path(c, make_vertex({0, 0}), make_vertex({3, 0})).T == doctest::Approx(7.5));
    CHECK(shortest_path(one, make_vertex({1, 1}), make_vertex({1, 1})).T == 0.0);
    CHECK_THROWS(shortest_path(one, make_vertex({0, 0}), make_vertex({50, 50})));
}

TEST_CASE("a cheap detour beats an expensive direct edge") {
    auto cfg = fill_config(kSquare, 1.0).with_override(kBottom, 5.0);
    const auto res = shortest_path(cfg, make_vertex({0, 0}), make_vertex({1, 0}));
    CHECK(res.T == 3.0);
    CHECK(res.witness.size() == 3);
    const auto all = enumerate_all_geodesics(cfg, make_vertex({0, 0}), make_vertex({1, 0}));
    REQUIRE(all.size() == 1);
    CHECK(all[0].size() == 3);
}

TEST_CASE("replacement values on the unit square") {
    const auto one = fill_config(kSquare, 1.0);
    const Vertex u = make_vertex({0, 0}), v = make_vertex({1, 0});

    const auto direct = replacement_values(one, kBottom, u, v);
    CHECK(direct.A == 3.0); // three-edge detour
    CHECK(direct.B == 0.0); // empty through-path stubs
    const auto top = replacement_values(one, kTop, u, v);
    CHECK(top.A == 1.0);
    CHECK(top.B == 2.0);
    // T = min(A, B + w(e)) in both decompositions
    CHECK(shortest_path(one, u, v).T == std::min(direct.A, direct.B + 1.0));
    CHECK(shortest_path(one, u, v).T == std::min(top.A, top.B + 1.0));
    CHECK_THROWS(replacement_values(one, Edge{make_vertex({5, 5}), 0}, u, v));
}

TEST_CASE("deleting a bridge yields the infinite-A sentinel") {
    const Region strip(make_vertex({0, 0}), make_vertex({2, 0}), 2);
    const auto cfg = fill_config(strip, 2.0);
    const auto rv = replacement_values(cfg, Edge{make_vertex({1, 0}), 0}, make_vertex({0, 0}),
                                       make_vertex({2, 0}));
    CHECK(rv.A == kInfiniteWeight);
    CHECK(rv.B == 2.0);
}

TEST_CASE("replacement identity against fresh solves") {
    const Region box(make_vertex({0, 0}), make_vertex({3, 2}), 2);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::uint64_t s = rng::key(404, {static_cast<std::uint64_t>(trial)});
        const bool atoms = trial % 2 == 0;
        const auto cfg = random_config(box, s, atoms);
        const auto edges = box.all_edges();
        const Edge e = box.edge_at(edges[rng::key(s, {1}) % edges.size()]);
        const double x = atoms ? 1.0 + static_cast<double>(rng::key(s, {2}) % 3)
                               : 3.0 * rng::unit_from(s, {2});
        const auto rv = replacement_values(cfg, e, make_vertex({0, 0}), make_vertex({3, 2}));
        const double direct = shortest_path(cfg.with_override(e, x), make_vertex({0, 0}),
                                            make_vertex({3, 2})).T;
        const double predicted = std::min(rv.A, rv.B + x);
        if (atoms && x == std::floor(x)) {
            CHECK(direct == predicted);
        } else {
            CHECK(std::abs(direct - predicted) <= 1e-12 * std::max(1.0, std::abs(predicted)));
        }
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("geodesic intersection on the unit square") {
    const Vertex u = make_vertex({0, 0}), v = make_vertex({1, 0});
    const auto strict = fill_config(kSquare, 1.0);
    CHECK(geodesic_intersection(strict, u, v) ==
          std::vector<std::int64_t>{kSquare.edge_id(kBottom)});

    const auto tied = fill_config(kSquare, 1.0).with_override(kBottom, 3.0);
    const auto gr = geodesic(tied, u, v);
    CHECK(gr.T == 3.0);
    CHECK(gr.pi.empty());
    CHECK_FALSE(GeodesicAnalysis(tied, u, v).unique_geodesic());
    const auto all = enumerate_all_geodesics(tied, u, v);
    CHECK(all.size() == 2); // direct edge and the three-edge detour

    CHECK(GeodesicAnalysis(strict, u, v).unique_geodesic());
    CHECK(enumerate_all_geodesics(strict, u, v).size() == 1);
}

TEST_CASE("point-mass weights, v = (2,0): the straight path is the unique geodesic") {
    // 5x5 vertex box centered so the 40-edge enumeration guard is met
    const Region box(make_vertex({-2, -2}), make_vertex({2, 2}), 2);
    REQUIRE(box.valid_edge_count() == 40);
    const auto cfg = fill_config(box, 1.0);
    const Vertex u = make_vertex({0, 0}), v = make_vertex({2, 0});
    const auto all = enumerate_all_geodesics(cfg, u, v);
    CHECK(all.size() == 1); // only the 2-step path attains T = 2
    const auto pi = geodesic_intersection(cfg, u, v);
    CHECK(as_set(pi) == std::set<std::int64_t>{box.edge_id(Edge{make_vertex({0, 0}), 0}),
                                               box.edge_id(Edge{make_vertex({1, 0}), 0})});
}

TEST_CASE("point-mass weights, v = (1,1): two staircases, empty intersection") {
    const auto cfg = fill_config(kSquare, 1.0);
    const Vertex u = make_vertex({0, 0}), v = make_vertex({1, 1});
    const auto all = enumerate_all_geodesics(cfg, u, v);
    CHECK(all.size() == 2);
    CHECK(geodesic(cfg, u, v).T == 2.0);
    CHECK(geodesic_intersection(cfg, u, v).empty());
}

TEST_CASE("pi equals the intersection of all enumerated geodesics") {
    const Region box(make_vertex({0, 0}), make_vertex({3, 2}), 2); // 17 edges
    for (int trial = 0; trial < 60; ++trial) {
        const std::uint64_t s = rng::key(777, {static_cast<std::uint64_t>(trial)});
        const auto cfg = random_config(box, s, trial % 3 != 0);
        const Vertex u = make_vertex({0, 0}), v = make_vertex({3, 2});
        const GeodesicAnalysis an(cfg, u, v);
        const auto all = enumerate_all_geodesics(cfg, u, v);
        REQUIRE(!all.empty());

        std::set<std::int64_t> inter(all[0].begin(), all[0].end());
        std::set<std::int64_t> uni;
        for (const auto& path : all) {
            const std::set<std::int64_t> p(path.begin(), path.end());
            std::set<std::int64_t> keep;
            std::set_intersection(inter.begin(), inter.end(), p.begin(), p.end(),
                                  std::inserter(keep, keep.end()));
            inter = keep;
            uni.insert(p.begin(), p.end());
            // every enumerated path attains T exactly
            double tw = 0.0;
            for (const std::int64_t eid : path) tw += cfg.weight(eid);
            CHECK(std::abs(tw - an.T()) <= an.tie_tolerance() + 1e-15);
        }
        CHECK(as_set(an.pi()) == inter);
        CHECK(as_set(an.tight_edges()) == uni);
        CHECK(as_set(geodesic_intersection(cfg, u, v)) == inter);
        CHECK((all.size() == 1) == an.unique_geodesic());

        // membership criterion: e in pi  <=>  omega(e) < A_e - B_e
        for (const std::int64_t eid : an.tight_edges()) {
            const auto rv = replacement_values(cfg, box.edge_at(eid), u, v);
            const bool in_pi = inter.count(eid) > 0;
            CHECK(in_pi == (cfg.weight(eid) < rv.A - rv.B - an.tie_tolerance()));
        }
    }
}

TEST_CASE("analysis object agrees with the free functions") {
    const Region box(make_vertex({0, 0}), make_vertex({4, 3}), 2);
    const auto cfg = random_config(box, 31337, false);
    const Vertex u = make_vertex({0, 0}), v = make_vertex({4, 3});
    GeodesicAnalysis an(cfg, u, v);
    const auto free_res = geodesic(cfg, u, v);
    CHECK(an.T() == free_res.T);
    CHECK(an.witness() == free_res.witness);
    CHECK(an.pi() == free_res.pi);
    CHECK(an.touched_boundary() == free_res.touched_boundary);

    double tw = 0.0;
    for (const std::int64_t eid : an.witness()) tw += cfg.weight(eid);
    CHECK(tw == doctest::Approx(an.T()).epsilon(1e-12));
    CHECK(an.T() >= cfg.support_min() * static_cast<double>(an.witness().size()) - 1e-12);
    for (const std::int64_t eid : an.pi())
        CHECK(std::count(an.witness().begin(), an.witness().end(), eid) == 1);

    // replacement via the shared scratch buffer matches the naive recomputation
    for (const std::int64_t eid : box.all_edges()) {
        const auto fast = an.replacement(eid);
        const auto naive = replacement_values(cfg, box.edge_at(eid), u, v);
        CHECK(fast.A == doctest::Approx(naive.A).epsilon(1e-12));
        CHECK(fast.B == doctest::Approx(naive.B).epsilon(1e-12));
        CHECK(fast.A >= an.T() - 1e-12);
        CHECK(fast.B + cfg.weight(eid) >= an.T() - 1e-12);
    }
}

TEST_CASE("through-path candidates cover every tight edge") {
    const auto one = fill_config(kSquare, 1.0);
    GeodesicAnalysis an(one, make_vertex({0, 0}), make_vertex({1, 0}));
    CHECK(an.through_candidates(1.0) ==
          std::vector<std::int64_t>{kSquare.edge_id(kBottom)});

    const Region box(make_vertex({0, 0}), make_vertex({4, 3}), 2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto cfg = random_config(box, rng::key(51, {static_cast<std::uint64_t>(trial)}), false);
        GeodesicAnalysis a2(cfg, make_vertex({0, 0}), make_vertex({4, 3}));
        const auto cands = as_set(a2.through_candidates(cfg.support_min()));
        for (const std::int64_t eid : a2.tight_edges()) CHECK(cands.count(eid) == 1);
    }
}

TEST_CASE("raising one weight never shortens the passage time") {
    const Region box(make_vertex({0, 0}), make_vertex({3, 3}), 2);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::uint64_t s = rng::key(90, {static_cast<std::uint64_t>(trial)});
        const auto cfg = random_config(box, s, trial % 2 == 0);
        const auto edges = box.all_edges();
        const Edge e = box.edge_at(edges[rng::key(s, {1}) % edges.size()]);
        const double bump = 0.25 + rng::unit_from(s, {2});
        const double before = shortest_path(cfg, make_vertex({0, 0}), make_vertex({3, 3})).T;
        const double after =
            shortest_path(cfg.with_override(e, cfg.weight(e) + bump), make_vertex({0, 0}),
                          make_vertex({3, 3})).T;
        CHECK(after >= before - 1e-12);
    }
}

TEST_CASE("early-stopping label runs agree at the stop vertex") {
    const Region box(make_vertex({0, 0}), make_vertex({6, 6}), 2);
    const auto cfg = random_config(box, 1234, false);
    const auto w = cfg.materialize();
    const std::int64_t src = box.vertex_id(make_vertex({0, 0}));
    const std::int64_t stop = box.vertex_id(make_vertex({6, 6}));
    const auto full = dijkstra(box, w, src);
    const auto early = dijkstra(box, w, src, stop);
    CHECK(early.dist[static_cast<std::size_t>(stop)] ==
          doctest::Approx(full.dist[static_cast<std::size_t>(stop)]));
}

TEST_CASE("witness length per unit distance stays in the calibration band") {
    const char* specs[] = {"uniform:0,1", "exp:rate=1,shift=0", "atomic:1=0.5,2=0.5"};
    for (const char* spec : specs) {
        const auto dist = WeightDistribution::parse(spec);
        for (const int size : {16, 32, 64, 128}) {
            const Vertex target = make_vertex({size, 0});
            const Region box = Region::around(target, 2, 0);
            double total = 0.0;
            const int n = 30;
            for (int i = 0; i < n; ++i) {
                const DynamicalField f(rng::key(606, {static_cast<std::uint64_t>(size),
                                                      static_cast<std::uint64_t>(i)}),
                                       dist, box);
                GeodesicAnalysis an(f.slice(0.0), make_vertex({0, 0}), target);
                total += static_cast<double>(an.witness().size());
            }
            const double ratio = total / n / static_cast<double>(size);
            CAPTURE(spec);
            CAPTURE(size);
            CHECK(ratio >= 0.9);
            CHECK(ratio <= 3.0);
        }
    }
}
