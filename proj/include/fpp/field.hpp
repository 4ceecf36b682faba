#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "fpp/distribution.hpp"
#include "fpp/lattice.hpp"

namespace fpp {

class DynamicalField;

/// Read-only weight configuration: either a time slice of a dynamical field
/// (evaluated lazily, per edge, from the field's hash streams) or an explicit
/// per-edge table. A single-edge override models the substitution sigma_e^x;
/// overriding with +infinity deletes the edge.
class WeightConfig {
public:
    static WeightConfig from_table(Region region, std::vector<double> weights_by_eid);

    [[nodiscard]] const Region& region() const { return region_; }
    [[nodiscard]] double weight(std::int64_t eid) const;
    [[nodiscard]] double weight(const Edge& e) const;

    /// sigma_e^x: same configuration with w(e) := x.
    [[nodiscard]] WeightConfig with_override(const Edge& e, double x) const;
    /// Edge deletion (weight +infinity).
    [[nodiscard]] WeightConfig without_edge(const Edge& e) const;

    /// True when every reachable weight is an exactly representable integer,
    /// enabling exact sums and zero tie tolerance in the solvers.
    [[nodiscard]] bool integer_exact() const { return integer_exact_; }
    /// Infimum of the single-edge weight law (table configs: min entry).
    [[nodiscard]] double support_min() const { return support_min_; }

    /// Dense weight table indexed by edge id; invalid slots are +infinity.
    [[nodiscard]] std::vector<double> materialize() const;

private:
    friend class DynamicalField;
    WeightConfig(const DynamicalField* field, Region region, double t, int replica);
    explicit WeightConfig(Region region);

    Region region_;
    const DynamicalField* field_ = nullptr; // must outlive the view
    double t_ = 0.0;
    int replica_ = -1;
    std::vector<double> table_;
    std::int64_t override_eid_ = -1;
    double override_x_ = 0.0;
    bool integer_exact_ = false;
    double support_min_ = 0.0;
};

/// Coupled dynamical weight field on a finite region. Every random quantity
/// is a pure function of (seed, stream, edge coordinates), so queries are
/// reproducible bit for bit regardless of evaluation order or thread count,
/// and enlarging the region extends the same realization.
///
/// Streams per edge: the initial weights omega, the refresh weights omega',
/// the resampling clock U, and per replica i an independent pair
/// (omega^(i), U^(i)). A slice at time t shows omega(e) while U(e) > t and
/// omega'(e) once U(e) <= t, so two slices of one field realize the coupled
/// pair (omega_0, omega_t); replica slices at time t are mutually
/// distributed as (omega_0, omega_s) with s = 2t - t^2.
class DynamicalField {
public:
    DynamicalField(std::uint64_t seed, WeightDistribution dist, Region region, int replica_count = 0);

    [[nodiscard]] const Region& region() const { return region_; }
    [[nodiscard]] const WeightDistribution& distribution() const { return dist_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] int replica_count() const { return replica_count_; }

    [[nodiscard]] double omega(const Edge& e) const;
    [[nodiscard]] double omega_prime(const Edge& e) const;
    /// Resampling clock U(e), uniform on [0,1).
    [[nodiscard]] double clock(const Edge& e) const;
    [[nodiscard]] double replica_omega(int i, const Edge& e) const;
    [[nodiscard]] double replica_clock(int i, const Edge& e) const;

    /// omega_t(e): omega(e) if U(e) > t, else omega'(e).
    [[nodiscard]] double weight_at(const Edge& e, double t) const;
    [[nodiscard]] double replica_weight_at(int i, const Edge& e, double t) const;

    [[nodiscard]] WeightConfig slice(double t) const;
    /// Replica i in 1..replica_count; replica 0 is the base trajectory.
    [[nodiscard]] WeightConfig replica_slice(int i, double t) const;

private:
    void check_edge(const Edge& e) const;
    void check_time(double t) const;
    [[nodiscard]] double stream_unit(std::uint64_t stream, std::uint64_t sub, const Edge& e) const;

    std::uint64_t seed_;
    WeightDistribution dist_;
    Region region_;
    int replica_count_;
};

inline constexpr double kInfiniteWeight = std::numeric_limits<double>::infinity();

} // namespace fpp
