#pragma once

#include <cfm/vec2.hpp>

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfm {

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class BoundaryKind : std::uint8_t { loop, cut };

/// Boundary edge tag. For loops: id = loop tag (0 outer, 1..m holes), part = arc
/// between marked points (0 when the loop is unmarked). For cuts: id = cut arc
/// id, part = side (0 = left of the arc direction, 1 = right).
struct EdgeTag {
    BoundaryKind kind{BoundaryKind::loop};
    int id{0};
    int part{0};

    static constexpr EdgeTag loop(int id, int part = 0) { return {BoundaryKind::loop, id, part}; }
    static constexpr EdgeTag cut_side(int arc, int side) { return {BoundaryKind::cut, arc, side}; }
    [[nodiscard]] bool is_cut() const noexcept { return kind == BoundaryKind::cut; }

    auto operator<=>(const EdgeTag&) const = default;
};

std::string to_string(const EdgeTag& tag);

/// Directed so that the domain lies on the left of a -> b.
struct BoundaryEdge {
    int a{};
    int b{};
    EdgeTag tag;
};

/// Node chain of an embedded cut arc, ordered along the arc direction.
struct EmbeddedPolyline {
    int id{};
    std::vector<int> nodes;
};

struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles;  // counterclockwise
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<EmbeddedPolyline> polylines;
    /// Only for meshes opened along cuts: the joined-mesh node each node copies.
    std::vector<int> parent;

    [[nodiscard]] int node_count() const noexcept { return static_cast<int>(nodes.size()); }
    [[nodiscard]] int triangle_count() const noexcept { return static_cast<int>(triangles.size()); }
    [[nodiscard]] double triangle_area(int t) const;
    [[nodiscard]] BBox bbox() const;
};

struct MeshStats {
    int nodes{};
    int edges{};
    int triangles{};
    int boundary_edges{};
    int boundary_cycles{};
    int euler_characteristic{};
    double min_angle_deg{};
    double min_edge{};
    double max_edge{};
};

[[nodiscard]] MeshStats mesh_statistics(const Mesh& mesh);

/// Boundary edges grouped into closed walks (indices into mesh.boundary_edges,
/// in traversal order). Throws MeshError when the boundary is not a union of cycles.
[[nodiscard]] std::vector<std::vector<int>> boundary_cycles(const Mesh& mesh);

/// Positive orientation, conformity (each edge in at most two triangles, no
/// hanging nodes along edges) and boundary-edge consistency.
void check_mesh(const Mesh& mesh);

// Plain-text exchange format (see README).
void write_mesh(std::ostream& os, const Mesh& mesh);
[[nodiscard]] Mesh read_mesh(std::istream& is);

}  // namespace cfm
