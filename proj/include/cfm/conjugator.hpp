#pragma once

// Conjugate problem: cuts through the saddle points, the boundary walk of the
// opened domain, its Dirichlet values and the conjugate potential.

#include <cfm/config.hpp>
#include <cfm/field_analysis.hpp>
#include <cfm/laplace.hpp>
#include <cfm/mesher.hpp>

#include <optional>
#include <string>
#include <vector>

namespace cfm {

class ConjugateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// cuts
// ---------------------------------------------------------------------------

/// The arcs leaving one saddle (or the single arc from the outer loop).
struct Cut {
    std::vector<int> arcs;
    int saddle{-1};
};

struct CutSet {
    std::vector<CutArc> arcs;  // arc 0 starts on the outer loop
    std::vector<Cut> cuts;
    std::vector<Vec2> saddles;
    double ball_radius{};
    std::vector<std::string> notes;

    [[nodiscard]] std::vector<CutPolyline> polylines() const;
};

struct CutOptions {
    std::optional<Vec2> gamma0_start;
    std::optional<SymmetryAxis> symmetry;
    /// Refine each saddle arc by bisecting its start on the hole boundary.
    bool bisect_starts{false};
    double eps3{1e-8};
};

/// Traces the cut from the outer loop and the ascent arcs of every saddle.
/// Throws ConjugateError when an arc ends elsewhere than on a hole or when the
/// arcs do not connect every hole to the outer loop exactly once.
[[nodiscard]] CutSet build_cuts(const PotentialField& u1, const SaddleSearch& saddles,
                                const CutOptions& options = {});

struct CutStart {
    Vec2 boundary_point;
    DescentPath path;  // descent from boundary_point
    bool reached_ball{false};
    int iterations{};
};

/// Bisection on the boundary of `hole` for the point whose descent path runs
/// into the ball around `saddle`, starting from a bracket around `guess`.
/// `ascent` is the saddle's ascent direction toward the hole.
[[nodiscard]] CutStart bisect_cut_start(const PotentialField& u1, int hole, Vec2 guess, Vec2 saddle,
                                        Vec2 ascent, double ball, double eps3);

// ---------------------------------------------------------------------------
// boundary walk
// ---------------------------------------------------------------------------

/// A maximal stretch of the opened boundary with one tag.
struct WalkRun {
    EdgeTag tag;
    std::vector<int> edges;  // indices into mesh.boundary_edges, in walk order
    double length{};
    bool dirichlet{false};
    double value{};
};

struct ConjugateSpec {
    std::vector<WalkRun> walk;
    std::vector<HoleRun> hole_runs;  // walk order
    std::vector<int> hole_run_index;  // position of each hole run in `walk`
};

/// Walks the single boundary cycle of the opened mesh starting at side 0 of
/// arc 0 and checks the structure: every arc used once per side, every loop
/// present, the outer loop last.
[[nodiscard]] ConjugateSpec assemble_conjugate_boundary(const Mesh& opened, const CutSet& cuts);

/// Cumulative cut-side values from per-hole-run jumps; the last cut side gets
/// their sum, which must equal `d` within 1e-6 relative.
void assign_cut_values(ConjugateSpec& spec, std::span<const double> jumps, double d);

/// Dirichlet on cut sides, Neumann on every loop; values divided by d when normalized.
[[nodiscard]] BoundaryCondition conjugate_bc(const ConjugateSpec& spec, const Mesh& opened, double d,
                                             bool normalized);

[[nodiscard]] PotentialField solve_conjugate(const ConjugateSpec& spec, std::shared_ptr<const Mesh> opened,
                                             int order, double d, bool normalized,
                                             const SolveOptions& options = {});

/// Boundary conditions of the conjugate quadrilateral problem: the roles of
/// the marked arcs swap.
[[nodiscard]] BoundaryCondition quadrilateral_bc(bool conjugate);

// ---------------------------------------------------------------------------
// reciprocal check
// ---------------------------------------------------------------------------

struct ReciprocalErrors {
    double direct{};      // |1 - M / M~|
    double normalized{};  // |1 - M * M~'|, M~' the energy of the unit-range conjugate
    int direct_order{};
    int normalized_order{};
};

/// |ceil(log10 e)|, 16 for e = 0.
[[nodiscard]] int error_order(double e);

/// `conjugate_energy` is the energy of the conjugate with values in [0, d].
[[nodiscard]] ReciprocalErrors reciprocal_errors(double d, double conjugate_energy);

}  // namespace cfm
