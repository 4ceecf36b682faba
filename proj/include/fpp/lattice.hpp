#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace fpp {

inline constexpr int kMaxDim = 4;

/// Lattice site. Coordinates beyond the active dimension stay zero, so
/// comparisons and hashing are dimension-agnostic.
struct Vertex {
    std::array<std::int32_t, kMaxDim> c{};

    friend auto operator<=>(const Vertex&, const Vertex&) = default;
};

Vertex make_vertex(std::initializer_list<int> coords);
Vertex offset(Vertex v, int axis, int delta);
/// L1 norm of the coordinate vector.
std::int64_t l1_norm(const Vertex& v);

/// Canonical nearest-neighbour edge {base, base + e_axis}.
struct Edge {
    Vertex base;
    std::int32_t axis = 0;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Axis-aligned box of lattice sites, inclusive on both ends. Provides the
/// dense vertex/edge indexing used by the solvers: vertex ids are row-major
/// over the box, edge ids are axis * vertex_count + base vertex id (slots
/// whose head leaves the box are invalid).
class Region {
public:
    Region(Vertex lo, Vertex hi, int dim);

    /// Smallest box containing {0, target} grown by `padding` in every
    /// direction. padding <= 0 selects the default max(ceil(0.75*|v|_1), 16).
    static Region around(const Vertex& target, int dim, int padding);
    static int default_padding(const Vertex& target);

    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] const Vertex& lo() const { return lo_; }
    [[nodiscard]] const Vertex& hi() const { return hi_; }
    [[nodiscard]] std::int64_t vertex_count() const { return vertex_count_; }
    /// Size of per-edge arrays (includes invalid slots).
    [[nodiscard]] std::int64_t edge_slots() const { return dim_ * vertex_count_; }
    [[nodiscard]] std::int64_t stride(int axis) const { return stride_[static_cast<std::size_t>(axis)]; }
    [[nodiscard]] std::int32_t extent(int axis) const { return extent_[static_cast<std::size_t>(axis)]; }

    [[nodiscard]] bool contains(const Vertex& v) const;
    [[nodiscard]] bool contains(const Edge& e) const;
    [[nodiscard]] bool on_boundary(const Vertex& v) const;

    [[nodiscard]] std::int64_t vertex_id(const Vertex& v) const;
    [[nodiscard]] Vertex vertex_at(std::int64_t vid) const;
    [[nodiscard]] std::int64_t edge_id(const Edge& e) const;
    [[nodiscard]] Edge edge_at(std::int64_t eid) const;
    [[nodiscard]] bool edge_slot_valid(std::int64_t eid) const;

    /// All valid edge ids in increasing order.
    [[nodiscard]] std::vector<std::int64_t> all_edges() const;
    [[nodiscard]] std::int64_t valid_edge_count() const;

    friend bool operator==(const Region&, const Region&) = default;

private:
    Vertex lo_, hi_;
    int dim_ = 2;
    std::array<std::int32_t, kMaxDim> extent_{};
    std::array<std::int64_t, kMaxDim> stride_{};
    std::int64_t vertex_count_ = 0;
};

} // namespace fpp
