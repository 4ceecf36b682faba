#include "fpp/field.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "fpp/rng.hpp"

namespace fpp {
namespace {

enum Stream : std::uint64_t {
    kOmega = 0x01,
    kOmegaPrime = 0x02,
    kClock = 0x03,
    kReplicaOmega = 0x04,
    kReplicaClock = 0x05,
};

} // namespace

WeightConfig::WeightConfig(const DynamicalField* field, Region region, double t, int replica)
    : region_(region), field_(field), t_(t), replica_(replica) {
    integer_exact_ = field->distribution().integer_atomic();
    support_min_ = field->distribution().support_min();
}

WeightConfig::WeightConfig(Region region) : region_(std::move(region)) {}

WeightConfig WeightConfig::from_table(Region region, std::vector<double> weights_by_eid) {
    if (static_cast<std::int64_t>(weights_by_eid.size()) != region.edge_slots())
        throw std::invalid_argument("weight table must have one slot per edge id");
    WeightConfig c(region);
    bool integers = true;
    double lo = kInfiniteWeight;
    for (std::int64_t eid = 0; eid < region.edge_slots(); ++eid) {
        if (!region.edge_slot_valid(eid)) continue;
        const double w = weights_by_eid[static_cast<std::size_t>(eid)];
        if (!(w >= 0.0)) throw std::invalid_argument("edge weights must be nonnegative");
        if (w != std::floor(w) || std::isinf(w)) integers = false;
        lo = std::min(lo, w);
    }
    c.table_ = std::move(weights_by_eid);
    c.integer_exact_ = integers;
    c.support_min_ = lo;
    return c;
}

double WeightConfig::weight(std::int64_t eid) const {
    if (eid == override_eid_) return override_x_;
    if (!table_.empty()) return table_[static_cast<std::size_t>(eid)];
    if (replica_ >= 1) return field_->replica_weight_at(replica_, region_.edge_at(eid), t_);
    return field_->weight_at(region_.edge_at(eid), t_);
}

double WeightConfig::weight(const Edge& e) const {
    if (!region_.contains(e)) throw std::out_of_range("edge outside region");
    return weight(region_.edge_id(e));
}

WeightConfig WeightConfig::with_override(const Edge& e, double x) const {
    if (!region_.contains(e)) throw std::out_of_range("edge outside region");
    if (!(x >= 0.0)) throw std::invalid_argument("override weight must be nonnegative");
    WeightConfig c(*this);
    c.override_eid_ = region_.edge_id(e);
    c.override_x_ = x;
    if (std::isinf(x) || x != std::floor(x)) c.integer_exact_ = false;
    return c;
}

WeightConfig WeightConfig::without_edge(const Edge& e) const {
    if (!region_.contains(e)) throw std::out_of_range("edge outside region");
    WeightConfig c(*this);
    c.override_eid_ = region_.edge_id(e);
    c.override_x_ = kInfiniteWeight;
    // Deletion keeps integer sums exact: the slot never enters a finite sum.
    return c;
}

std::vector<double> WeightConfig::materialize() const {
    std::vector<double> w(static_cast<std::size_t>(region_.edge_slots()), kInfiniteWeight);
    for (std::int64_t eid = 0; eid < region_.edge_slots(); ++eid)
        if (region_.edge_slot_valid(eid)) w[static_cast<std::size_t>(eid)] = weight(eid);
    return w;
}

DynamicalField::DynamicalField(std::uint64_t seed, WeightDistribution dist, Region region,
                               int replica_count)
    : seed_(seed), dist_(std::move(dist)), region_(std::move(region)), replica_count_(replica_count) {
    if (replica_count < 0) throw std::invalid_argument("replica_count must be >= 0");
}

void DynamicalField::check_edge(const Edge& e) const {
    if (!region_.contains(e))
        throw std::out_of_range("edge outside field region (truncation bug)");
}

void DynamicalField::check_time(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("time must lie in [0,1]");
}

double DynamicalField::stream_unit(std::uint64_t stream, std::uint64_t sub, const Edge& e) const {
    rng::KeyChain k(seed_);
    k.fold(stream).fold(sub).fold(static_cast<std::uint64_t>(e.axis));
    for (int i = 0; i < region_.dim(); ++i)
        k.fold_signed(e.base.c[static_cast<std::size_t>(i)]);
    return rng::to_unit(k.value());
}

double DynamicalField::omega(const Edge& e) const {
    check_edge(e);
    return dist_.sample(stream_unit(kOmega, 0, e));
}

double DynamicalField::omega_prime(const Edge& e) const {
    check_edge(e);
    return dist_.sample(stream_unit(kOmegaPrime, 0, e));
}

double DynamicalField::clock(const Edge& e) const {
    check_edge(e);
    return stream_unit(kClock, 0, e);
}

double DynamicalField::replica_omega(int i, const Edge& e) const {
    check_edge(e);
    if (i < 1 || i > replica_count_) throw std::out_of_range("replica index out of range");
    return dist_.sample(stream_unit(kReplicaOmega, static_cast<std::uint64_t>(i), e));
}

double DynamicalField::replica_clock(int i, const Edge& e) const {
    check_edge(e);
    if (i < 1 || i > replica_count_) throw std::out_of_range("replica index out of range");
    return stream_unit(kReplicaClock, static_cast<std::uint64_t>(i), e);
}

double DynamicalField::weight_at(const Edge& e, double t) const {
    check_time(t);
    // Resample exactly when U(e) <= t, so the t=0 slice refreshes only the
    // measure-zero set {U = 0}.
    return clock(e) <= t ? omega_prime(e) : omega(e);
}

double DynamicalField::replica_weight_at(int i, const Edge& e, double t) const {
    check_time(t);
    if (i == 0) return weight_at(e, t); // replica 0 is the base trajectory
    return replica_clock(i, e) <= t ? replica_omega(i, e) : omega(e);
}

WeightConfig DynamicalField::slice(double t) const {
    check_time(t);
    return WeightConfig(this, region_, t, -1);
}

WeightConfig DynamicalField::replica_slice(int i, double t) const {
    check_time(t);
    if (i == 0) return slice(t);
    if (i < 1 || i > replica_count_) throw std::out_of_range("replica index out of range");
    return WeightConfig(this, region_, t, i);
}

} // namespace fpp
