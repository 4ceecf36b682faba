#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpp/distribution.hpp"
#include "fpp/lattice.hpp"
#include "fpp/oracle.hpp"

namespace fpp::verify {

/// Vertex box [0,nx] x [0,ny].
Region box2(int nx, int ny);

/// In-box passage time T(source, target) as a function of the edge weights,
/// coordinate k of the function <-> k-th valid edge id of the region.
oracle::FiniteFunction box_passage_time(const Region& region, const Vertex& source,
                                        const Vertex& target);
/// Indicator that the coordinate-th valid edge lies on every geodesic.
oracle::FiniteFunction box_geodesic_indicator(const Region& region, const Vertex& source,
                                              const Vertex& target, int coordinate);

struct CorpusEntry {
    std::string name;
    oracle::FiniteFunction f;
};

/// Deterministic function corpus: two in-box passage times plus hashed
/// random tables and monotone families (weighted sums, max, min, level
/// indicators) over 1..7 coordinates. Exactly 50 entries.
std::vector<CorpusEntry> verification_corpus(std::uint64_t seed);

/// Atomic laws the corpus checks run against.
std::vector<WeightDistribution> corpus_distributions();

struct CheckResult {
    std::string id;
    bool pass = false;
    double value = 0.0; // measured quantity (worst residual / margin / p-value)
    double bound = 0.0; // threshold it was compared against
    std::string details;
};

/// Covariance identity on the corpus: for every (function, law) pair the
/// residual (Q_t - Q_1) - int_t^1 sum_i Inf_i(s) ds at t in {0, 0.25, 0.5,
/// 0.9}, plus the pointwise derivative identity sum_i Inf_i = -Q' on a grid.
/// value = worst absolute residual.
std::vector<CheckResult> covariance_formula_checks(std::uint64_t seed);

/// Exact monotonicity on a 101-point grid: Q nonincreasing and >= Q(1),
/// every per-coordinate co-influence nonnegative and nonincreasing.
/// value = worst signed violation (negative = violated beyond rounding).
std::vector<CheckResult> monotonicity_checks(std::uint64_t seed);

/// Two-sided influence bounds for integer-valued laws on small boxes:
///   F(r)(1-F(r))^2 P(e in pi_0 ^ pi_t) <= Inf_e(t)
///   Inf_e(t) <= F(r)^{-2} int (mu+x)^2 dF P(e in pi_0 ^ pi_t)
/// with both sides evaluated exactly. value = worst margin.
std::vector<CheckResult> geodesic_bound_checks();

/// Distributional checks of the sampling layer against exact laws:
/// chi-square tests of coupled-draw marginals and joints, the slice pair
/// law (omega_0, omega_t), replica pairs at the effective time 2t - t^2,
/// and agreement rates for an atomless law. value = p-value or |z|.
std::vector<CheckResult> coupling_checks(std::uint64_t seed);

std::vector<CheckResult> run_all_checks(std::uint64_t seed);
bool all_pass(const std::vector<CheckResult>& results);

} // namespace fpp::verify
