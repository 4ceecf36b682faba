#include "fpp/lattice.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace fpp {

Vertex make_vertex(std::initializer_list<int> coords) {
    if (coords.size() > kMaxDim) throw std::invalid_argument("too many coordinates");
    Vertex v;
    int i = 0;
    for (int c : coords) v.c[static_cast<std::size_t>(i++)] = c;
    return v;
}

Vertex offset(Vertex v, int axis, int delta) {
    v.c[static_cast<std::size_t>(axis)] += delta;
    return v;
}

std::int64_t l1_norm(const Vertex& v) {
    std::int64_t s = 0;
    for (auto c : v.c) s += std::abs(static_cast<std::int64_t>(c));
    return s;
}

Region::Region(Vertex lo, Vertex hi, int dim) : lo_(lo), hi_(hi), dim_(dim) {
    if (dim < 2 || dim > kMaxDim) throw std::invalid_argument("dimension must be in [2, 4]");
    for (int i = dim; i < kMaxDim; ++i)
        if (lo.c[static_cast<std::size_t>(i)] != 0 || hi.c[static_cast<std::size_t>(i)] != 0)
            throw std::invalid_argument("coordinates beyond the dimension must be zero");
    vertex_count_ = 1;
    for (int i = 0; i < dim; ++i) {
        const auto w = static_cast<std::int64_t>(hi.c[static_cast<std::size_t>(i)]) -
                       lo.c[static_cast<std::size_t>(i)] + 1;
        if (w < 1) throw std::invalid_argument("region must be nonempty in every axis");
        extent_[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(w);
        stride_[static_cast<std::size_t>(i)] = vertex_count_;
        vertex_count_ *= w;
        if (vertex_count_ > (std::int64_t{1} << 31))
            throw std::invalid_argument("region too large");
    }
}

int Region::default_padding(const Vertex& target) {
    const auto n = l1_norm(target);
    return static_cast<int>(std::max<std::int64_t>((3 * n + 3) / 4, 16));
}

Region Region::around(const Vertex& target, int dim, int padding) {
    if (padding <= 0) padding = default_padding(target);
    Vertex lo, hi;
    for (int i = 0; i < dim; ++i) {
        const auto t = target.c[static_cast<std::size_t>(i)];
        lo.c[static_cast<std::size_t>(i)] = std::min<std::int32_t>(0, t) - padding;
        hi.c[static_cast<std::size_t>(i)] = std::max<std::int32_t>(0, t) + padding;
    }
    return Region(lo, hi, dim);
}

bool Region::contains(const Vertex& v) const {
    for (int i = 0; i < dim_; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (v.c[idx] < lo_.c[idx] || v.c[idx] > hi_.c[idx]) return false;
    }
    for (int i = dim_; i < kMaxDim; ++i)
        if (v.c[static_cast<std::size_t>(i)] != 0) return false;
    return true;
}

bool Region::contains(const Edge& e) const {
    if (e.axis < 0 || e.axis >= dim_) return false;
    return contains(e.base) && contains(offset(e.base, e.axis, 1));
}

bool Region::on_boundary(const Vertex& v) const {
    for (int i = 0; i < dim_; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (v.c[idx] == lo_.c[idx] || v.c[idx] == hi_.c[idx]) return true;
    }
    return false;
}

std::int64_t Region::vertex_id(const Vertex& v) const {
    std::int64_t id = 0;
    for (int i = 0; i < dim_; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        id += (v.c[idx] - lo_.c[idx]) * stride_[idx];
    }
    return id;
}

Vertex Region::vertex_at(std::int64_t vid) const {
    Vertex v;
    for (int i = 0; i < dim_; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        v.c[idx] = static_cast<std::int32_t>(vid % extent_[idx]) + lo_.c[idx];
        vid /= extent_[idx];
    }
    return v;
}

std::int64_t Region::edge_id(const Edge& e) const {
    return e.axis * vertex_count_ + vertex_id(e.base);
}

Edge Region::edge_at(std::int64_t eid) const {
    Edge e;
    e.axis = static_cast<std::int32_t>(eid / vertex_count_);
    e.base = vertex_at(eid % vertex_count_);
    return e;
}

bool Region::edge_slot_valid(std::int64_t eid) const {
    if (eid < 0 || eid >= edge_slots()) return false;
    const auto axis = static_cast<std::size_t>(eid / vertex_count_);
    const auto vid = eid % vertex_count_;
    const auto coord = (vid / stride_[axis]) % extent_[axis];
    return coord + 1 < extent_[axis];
}

std::vector<std::int64_t> Region::all_edges() const {
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(edge_slots()));
    for (std::int64_t eid = 0; eid < edge_slots(); ++eid)
        if (edge_slot_valid(eid)) out.push_back(eid);
    return out;
}

std::int64_t Region::valid_edge_count() const {
    std::int64_t n = 0;
    for (int a = 0; a < dim_; ++a) {
        std::int64_t axis_edges = 1;
        for (int i = 0; i < dim_; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            axis_edges *= (i == a) ? extent_[idx] - 1 : extent_[idx];
        }
        n += axis_edges;
    }
    return n;
}

} // namespace fpp
