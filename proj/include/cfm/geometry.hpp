#pragma once

// Exact domain description: parametric boundary curves assembled into oriented
// loops, plus the polygon utilities the rest of the library leans on.

#include <cfm/vec2.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfm {

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CurveKind { line, arc, bezier, polar };

/// Polar graph around `center`: p(t) = center + r(t) (cos theta(t), sin theta(t)).
struct PolarGraph {
    std::function<double(double)> radius;
    std::function<double(double)> angle;
    Vec2 center{};
};

class CurveSegment {
public:
    static CurveSegment line(Vec2 a, Vec2 b);
    /// Circular arc; counterclockwise when angle1 > angle0.
    static CurveSegment arc(Vec2 center, double radius, double angle0, double angle1);
    static CurveSegment bezier(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3);
    static CurveSegment polar(PolarGraph graph, double t0, double t1, bool cusp_at_start = false,
                              bool cusp_at_end = false);

    [[nodiscard]] CurveKind kind() const noexcept { return kind_; }
    [[nodiscard]] double t0() const noexcept { return t0_; }
    [[nodiscard]] double t1() const noexcept { return t1_; }

    /// Throws GeometryError when t is outside [t0, t1].
    [[nodiscard]] Vec2 evaluate(double t) const;
    [[nodiscard]] Vec2 derivative(double t) const;
    [[nodiscard]] Vec2 start() const { return evaluate(t0_); }
    [[nodiscard]] Vec2 end() const { return evaluate(t1_); }
    [[nodiscard]] bool cusp_at_start() const noexcept { return reversed_ ? cusp_end_ : cusp_start_; }
    [[nodiscard]] bool cusp_at_end() const noexcept { return reversed_ ? cusp_start_ : cusp_end_; }

    /// Same point set traversed the other way over the same parameter interval.
    [[nodiscard]] CurveSegment reversed() const;

    // Raw parameters, mostly for serialization and tests.
    [[nodiscard]] const std::vector<Vec2>& points() const noexcept { return pts_; }
    [[nodiscard]] double radius() const noexcept { return radius_; }

private:
    CurveSegment() = default;
    [[nodiscard]] Vec2 eval_raw(double s) const;
    [[nodiscard]] double to_raw(double t) const noexcept { return reversed_ ? t0_ + t1_ - t : t; }

    CurveKind kind_{CurveKind::line};
    std::vector<Vec2> pts_;  // line: a, b; arc: center; bezier: 4 control points
    double radius_{};
    std::shared_ptr<const PolarGraph> polar_;
    double t0_{0.0};
    double t1_{1.0};
    bool reversed_{false};
    bool cusp_start_{false};
    bool cusp_end_{false};
};

struct BoundaryLoop {
    std::vector<CurveSegment> segments;
    int tag{0};  // 0 = outer boundary E_0, 1..m = holes
};

struct DomainSpec {
    BoundaryLoop outer;
    std::vector<BoundaryLoop> holes;

    [[nodiscard]] int hole_count() const noexcept { return static_cast<int>(holes.size()); }
    [[nodiscard]] int connectivity() const noexcept { return hole_count() + 1; }
    [[nodiscard]] const BoundaryLoop& loop(int tag) const;
    [[nodiscard]] BBox bbox() const;
};

/// Discretized closed curve. `source` records which segment (and curve parameter)
/// each vertex came from; the closing vertex is not repeated.
struct Polyline {
    std::vector<Vec2> points;
    struct Source {
        int segment{-1};
        double t{};
    };
    std::vector<Source> source;
    bool closed{false};
};

using SizeFunction = std::function<double(Vec2)>;

[[nodiscard]] Vec2 evaluate_segment(const CurveSegment& seg, double t);

/// Adaptive bisection until the chord-curve deviation is at most `tol`; when
/// `max_length` is given, chords are also split until shorter than max_length(mid).
[[nodiscard]] Polyline discretize_loop(const BoundaryLoop& loop, double tol,
                                       const SizeFunction& max_length = {});

/// Checks closure, simplicity, nesting and clearance; flips loops that are
/// supplied with the wrong orientation.
[[nodiscard]] DomainSpec validate_domain(DomainSpec spec);

[[nodiscard]] double closure_tolerance(const DomainSpec& spec);

// ---------------------------------------------------------------------------
// polygon utilities
// ---------------------------------------------------------------------------

[[nodiscard]] double signed_area(std::span<const Vec2> polygon);
[[nodiscard]] bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon);
[[nodiscard]] double point_segment_distance(Vec2 p, Vec2 a, Vec2 b, double* t_out = nullptr);
/// Proper or touching intersection of segments ab and cd; returns parameters along each.
[[nodiscard]] std::optional<std::pair<double, double>> segment_intersection(Vec2 a, Vec2 b, Vec2 c,
                                                                           Vec2 d);
[[nodiscard]] double polyline_length(std::span<const Vec2> pts, bool closed = false);
/// A point strictly inside a simple polygon.
[[nodiscard]] Vec2 interior_point(std::span<const Vec2> polygon);
[[nodiscard]] bool polygon_is_simple(std::span<const Vec2> polygon);

}  // namespace cfm
