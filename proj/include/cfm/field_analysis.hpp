#pragma once

// Quantities read off a potential: level curves, flux integrals, saddle
// points, steepest ascent/descent paths and the jump decomposition.

#include <cfm/laplace.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cfm {

class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// contours and flux
// ---------------------------------------------------------------------------

/// One component of a level set, traversed with larger values on the left
/// (closed contours around a hole run counterclockwise).
struct ContourLine {
    double level{};
    std::vector<Vec2> points;
    bool closed{false};
    /// Hole tags inside a closed contour (empty for open contours).
    std::vector<int> encloses;
};

/// Marching triangles on the order-p sub-lattice of every element; crossing
/// points are projected onto the level of the finite-element field.
[[nodiscard]] std::vector<ContourLine> extract_contours(const PotentialField& field, double level);

/// Integral of grad u . n ds along a polyline, n the left normal, by Gauss
/// quadrature on each segment. Along a contour this equals the integral of |grad u|.
[[nodiscard]] double flux_integral(const PotentialField& field, std::span<const Vec2> points, bool closed,
                                   int gauss_points = 6);

/// Integral of |grad u| ds along a polyline.
[[nodiscard]] double gradient_norm_integral(const PotentialField& field, std::span<const Vec2> points,
                                            bool closed, int gauss_points = 6);

/// A representative point inside each hole of an unopened mesh, keyed by loop tag.
[[nodiscard]] std::map<int, Vec2> hole_points(const Mesh& mesh);

// ---------------------------------------------------------------------------
// saddles
// ---------------------------------------------------------------------------

struct SaddlePoint {
    Vec2 location;
    double value{};
    double gradient_norm{};
    /// Unit directions along which u increases / decreases away from the point.
    std::vector<Vec2> ascent;
    std::vector<Vec2> descent;
    /// Number of ordinary saddles this point stands for (ascent count - 1).
    [[nodiscard]] int multiplicity() const noexcept { return static_cast<int>(ascent.size()) - 1; }
};

struct SaddleOptions {
    /// Gradient tolerance relative to the largest probed |grad u|.
    double eps2_relative{1e-6};
    /// Probe spacing as a fraction of the median element size.
    double probe_fraction{0.5};
    /// Candidates closer than this (relative to the local element size) merge.
    double merge_factor{1.5};
    Exec exec{Exec::parallel};
};

struct SaddleSearch {
    std::vector<SaddlePoint> saddles;
    double eps2{};
    double max_gradient{};
    int probe_points{};
    int candidates{};
    /// Radius of the exclusion ball around each saddle.
    double ball_radius{};
};

/// Local minima of |grad u| on a probe grid refined by Newton's method on
/// grad u = 0 with the element Hessian; kept when the Hessian is indefinite
/// and the value lies strictly between the Dirichlet extremes. Nearby
/// candidates merge into one degenerate saddle classified by sector count.
[[nodiscard]] SaddleSearch find_saddles(const PotentialField& field, const SaddleOptions& options = {});

/// Sign pattern of u - u(s) on a small circle: the directions of the centres of
/// the positive and negative sectors.
void classify_sectors(const PotentialField& field, Vec2 s, double radius, std::vector<Vec2>& ascent,
                      std::vector<Vec2>& descent);

// ---------------------------------------------------------------------------
// steepest paths
// ---------------------------------------------------------------------------

enum class Direction { descent, ascent };
enum class Termination { boundary, saddle, level, max_steps, stalled };

struct DescentPath {
    std::vector<Vec2> points;
    std::vector<double> values;
    Direction direction{Direction::descent};
    Termination end{Termination::stalled};
    /// Loop tag of the boundary reached (boundary or level termination) or -1.
    int loop{-1};
    /// Saddle index entered (saddle termination) or -1.
    int saddle{-1};

    [[nodiscard]] bool reached_boundary() const noexcept {
        return end == Termination::boundary || end == Termination::level;
    }
};

struct TraceOptions {
    /// Largest step; <= 0 picks a fraction of the mean element size.
    double max_step{0.0};
    /// Local error tolerance of the step-doubling controller.
    double tolerance{1e-9};
    int max_steps{200'000};
    std::vector<Vec2> saddles;
    double saddle_radius{0.0};
    /// Saddle (by index) that the path is allowed to start inside.
    int ignore_saddle{-1};
    double level_tolerance{1e-12};
};

/// Integrates x' = +-grad u / |grad u| with adaptive RK4 until the path leaves
/// the mesh, enters a saddle ball, or reaches a Dirichlet extreme.
[[nodiscard]] DescentPath trace_path(const PotentialField& field, Vec2 start, Direction direction,
                                     const TraceOptions& options = {});

// ---------------------------------------------------------------------------
// cuts and jumps
// ---------------------------------------------------------------------------

/// One traced piece of a cut, from `from` (a boundary point or a saddle) to a
/// hole boundary. Cut arcs are the units embedded in the mesh.
struct CutArc {
    int id{};
    std::vector<Vec2> points;
    int from_loop{-1};  // 0 for the outer loop, -1 when the arc starts at a saddle
    int to_loop{-1};    // hole tag at the end of the arc
    int saddle{-1};
};

/// A hole arc of the conjugate boundary walk, between the cut arc that
/// arrives at the hole and the one that leaves it.
struct HoleRun {
    int hole{};
    int arc_in{};
    int arc_out{};
};

struct JumpResult {
    std::vector<double> jumps;  // one per hole run, walk order
    std::map<int, double> hole_flux;
    std::map<int, double> levels;
    std::vector<ContourLine> contours;
};

/// Flux of u across pieces of per-hole contours between consecutive cut crossings.
/// `levels` gives the contour level per hole; levels that fail to produce a
/// contour enclosing just that hole are moved once toward 1.
[[nodiscard]] JumpResult jump_decomposition(const PotentialField& field, std::span<const CutArc> arcs,
                                            std::span<const HoleRun> runs, std::map<int, double> levels);

}  // namespace cfm
