#pragma once

// Constrained Delaunay meshing of validated domains: size-graded refinement
// around declared singular points and exact embedding of cut polylines.

#include <cfm/geometry.hpp>
#include <cfm/mesh.hpp>

#include <span>
#include <vector>

namespace cfm {

/// Geometric grading toward `center`: element size shrinks linearly with the
/// distance to the center down to h * ratio^levels.
struct RefinementRule {
    Vec2 center{};
    int levels{12};
    double ratio{0.15};
};

struct MeshOptions {
    double h{0.1};
    std::vector<RefinementRule> rules;
    /// Chord-curve tolerance for curved boundaries; <= 0 selects 1e-5 * diameter.
    double boundary_tol{0.0};
    double min_angle_deg{20.0};
    /// Four points on the outer loop splitting it into arcs (part 0..3), or empty.
    std::vector<Vec2> marked_points;
    std::size_t max_nodes{3'000'000};
};

/// A polyline to embed as mesh edges. Endpoints may lie on boundary loops;
/// interior vertices must lie strictly inside the domain.
struct CutPolyline {
    int id{};
    std::vector<Vec2> points;
};

void validate_rule(const RefinementRule& rule);

/// Local target edge length implied by h and the refinement rules.
[[nodiscard]] SizeFunction size_function(const MeshOptions& options);

[[nodiscard]] double effective_boundary_tol(const DomainSpec& spec, const MeshOptions& options);

[[nodiscard]] Mesh triangulate(const DomainSpec& spec, const MeshOptions& options);

/// Triangulation in which every cut polyline is a chain of mesh edges; the
/// mesh is not opened (see open_along_cuts).
[[nodiscard]] Mesh triangulate(const DomainSpec& spec, const MeshOptions& options,
                               std::span<const CutPolyline> cuts);

/// Duplicates nodes topologically along embedded polylines so that every cut
/// contributes two oppositely directed boundary sides.
[[nodiscard]] Mesh open_along_cuts(const Mesh& joined);

/// triangulate(spec, options, cuts) followed by open_along_cuts.
[[nodiscard]] Mesh embed_polyline(const DomainSpec& spec, std::span<const CutPolyline> cuts,
                                  const MeshOptions& options);

}  // namespace cfm
