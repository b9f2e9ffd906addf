#include <cfm/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cfm {

namespace {

constexpr double kPi = std::numbers::pi;

std::string loop_name(int tag) {
    return tag == 0 ? std::string("E0 (outer)") : "E" + std::to_string(tag);
}

}  // namespace

// ---------------------------------------------------------------------------
// CurveSegment
// ---------------------------------------------------------------------------

CurveSegment CurveSegment::line(Vec2 a, Vec2 b) {
    CurveSegment s;
    s.kind_ = CurveKind::line;
    s.pts_ = {a, b};
    return s;
}

CurveSegment CurveSegment::arc(Vec2 center, double radius, double angle0, double angle1) {
    if (!(radius > 0.0)) throw GeometryError("arc radius must be positive");
    CurveSegment s;
    s.kind_ = CurveKind::arc;
    s.pts_ = {center};
    s.radius_ = radius;
    if (angle1 >= angle0) {
        s.t0_ = angle0;
        s.t1_ = angle1;
    } else {
        s.t0_ = angle1;
        s.t1_ = angle0;
        s.reversed_ = true;
    }
    return s;
}

CurveSegment CurveSegment::bezier(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3) {
    CurveSegment s;
    s.kind_ = CurveKind::bezier;
    s.pts_ = {p0, p1, p2, p3};
    return s;
}

CurveSegment CurveSegment::polar(PolarGraph graph, double t0, double t1, bool cusp_at_start,
                                 bool cusp_at_end) {
    if (!graph.radius || !graph.angle) throw GeometryError("polar graph needs radius and angle");
    if (!(t1 > t0)) throw GeometryError("polar graph needs t1 > t0");
    CurveSegment s;
    s.kind_ = CurveKind::polar;
    s.polar_ = std::make_shared<const PolarGraph>(std::move(graph));
    s.t0_ = t0;
    s.t1_ = t1;
    s.cusp_start_ = cusp_at_start;
    s.cusp_end_ = cusp_at_end;
    return s;
}

Vec2 CurveSegment::eval_raw(double s) const {
    switch (kind_) {
        case CurveKind::line:
            return pts_[0] + (pts_[1] - pts_[0]) * s;
        case CurveKind::arc:
            return pts_[0] + Vec2{std::cos(s), std::sin(s)} * radius_;
        case CurveKind::bezier: {
            const double u = 1.0 - s;
            return pts_[0] * (u * u * u) + pts_[1] * (3.0 * u * u * s) + pts_[2] * (3.0 * u * s * s) +
                   pts_[3] * (s * s * s);
        }
        case CurveKind::polar: {
            const double r = polar_->radius(s);
            const double th = polar_->angle(s);
            return polar_->center + Vec2{std::cos(th), std::sin(th)} * r;
        }
    }
    return {};
}

Vec2 CurveSegment::evaluate(double t) const {
    const double slack = 1e-12 * std::max(1.0, std::abs(t1_ - t0_));
    if (!(t >= t0_ - slack && t <= t1_ + slack)) {
        std::ostringstream os;
        os << "curve parameter " << t << " outside [" << t0_ << ", " << t1_ << "]";
        throw GeometryError(os.str());
    }
    t = std::clamp(t, t0_, t1_);
    return eval_raw(to_raw(t));
}

Vec2 CurveSegment::derivative(double t) const {
    t = std::clamp(t, t0_, t1_);
    const double sign = reversed_ ? -1.0 : 1.0;
    const double s = to_raw(t);
    switch (kind_) {
        case CurveKind::line:
            return (pts_[1] - pts_[0]) * sign;
        case CurveKind::arc:
            return Vec2{-std::sin(s), std::cos(s)} * (radius_ * sign);
        case CurveKind::bezier: {
            const double u = 1.0 - s;
            const Vec2 d = (pts_[1] - pts_[0]) * (3.0 * u * u) + (pts_[2] - pts_[1]) * (6.0 * u * s) +
                           (pts_[3] - pts_[2]) * (3.0 * s * s);
            return d * sign;
        }
        case CurveKind::polar: {
            const double h = 1e-6 * (t1_ - t0_);
            const double a = std::max(t0_, s - h);
            const double b = std::min(t1_, s + h);
            return (eval_raw(b) - eval_raw(a)) * (sign / (b - a));
        }
    }
    return {};
}

CurveSegment CurveSegment::reversed() const {
    CurveSegment s = *this;
    s.reversed_ = !reversed_;
    return s;
}

// ---------------------------------------------------------------------------
// DomainSpec
// ---------------------------------------------------------------------------

const BoundaryLoop& DomainSpec::loop(int tag) const {
    if (tag == 0) return outer;
    if (tag < 1 || tag > hole_count()) throw GeometryError("no boundary loop with tag " + std::to_string(tag));
    return holes[static_cast<std::size_t>(tag - 1)];
}

BBox DomainSpec::bbox() const {
    BBox box;
    auto add_loop = [&](const BoundaryLoop& l) {
        for (const auto& seg : l.segments) {
            constexpr int n = 64;
            for (int i = 0; i <= n; ++i) box.add(seg.evaluate(seg.t0() + (seg.t1() - seg.t0()) * i / n));
        }
    };
    add_loop(outer);
    for (const auto& h : holes) add_loop(h);
    return box;
}

double closure_tolerance(const DomainSpec& spec) { return 1e-9 * spec.bbox().diameter(); }

Vec2 evaluate_segment(const CurveSegment& seg, double t) { return seg.evaluate(t); }

// ---------------------------------------------------------------------------
// discretization
// ---------------------------------------------------------------------------

namespace {

struct Subdivider {
    const CurveSegment& seg;
    double tol;
    const SizeFunction& max_length;
    double scale;
    std::vector<Vec2>& out;
    std::vector<Polyline::Source>& src;
    int index;

    double deviation(double ta, Vec2 pa, double tb, Vec2 pb) const {
        double dev = 0.0;
        for (double f : {0.25, 0.5, 0.75}) {
            const Vec2 q = seg.evaluate(ta + (tb - ta) * f);
            dev = std::max(dev, point_segment_distance(q, pa, pb));
        }
        return dev;
    }

    // Emits the vertices in (ta, tb], i.e. excluding pa.
    void run(double ta, Vec2 pa, double tb, Vec2 pb, int depth) {
        const double tm = 0.5 * (ta + tb);
        const Vec2 pm = seg.evaluate(tm);
        bool split = false;
        if (depth < 60 && distance(pa, pb) > 1e-13 * scale) {
            if (deviation(ta, pa, tb, pb) > tol) split = true;
            // below ~1e-6 of the extent, curve samples near a cusp stop being resolvable;
            // the mesher splits the remaining chords instead
            if (!split && max_length && distance(pa, pb) > std::max(max_length(pm), 1e-6 * scale)) split = true;
        }
        if (split) {
            run(ta, pa, tm, pm, depth + 1);
            run(tm, pm, tb, pb, depth + 1);
        } else {
            out.push_back(pb);
            src.push_back({index, tb});
        }
    }
};

int initial_pieces(const CurveSegment& seg) {
    switch (seg.kind()) {
        case CurveKind::line: return 1;
        case CurveKind::arc: return std::max(2, static_cast<int>(std::ceil((seg.t1() - seg.t0()) / (kPi / 4))));
        case CurveKind::bezier: return 4;
        case CurveKind::polar: return 16;
    }
    return 1;
}

double segment_extent(const CurveSegment& seg) {
    BBox b;
    for (int i = 0; i <= 16; ++i) b.add(seg.evaluate(seg.t0() + (seg.t1() - seg.t0()) * i / 16));
    return b.diameter();
}

}  // namespace

Polyline discretize_loop(const BoundaryLoop& loop, double tol, const SizeFunction& max_length) {
    if (!(tol > 0.0)) throw GeometryError("discretization tolerance must be positive");
    if (loop.segments.empty()) throw GeometryError("loop " + loop_name(loop.tag) + " has no segments");

    double scale = 0.0;
    for (const auto& seg : loop.segments) scale = std::max(scale, segment_extent(seg));

    Polyline poly;
    poly.closed = true;
    for (std::size_t k = 0; k < loop.segments.size(); ++k) {
        const auto& seg = loop.segments[k];
        if (segment_extent(seg) <= 1e-14 * std::max(scale, 1e-300)) {
            throw GeometryError("degenerate (zero-length) segment " + std::to_string(k) + " in loop " +
                                loop_name(loop.tag));
        }
        std::vector<Vec2> pts{seg.start()};
        std::vector<Polyline::Source> src{{static_cast<int>(k), seg.t0()}};
        Subdivider sub{seg, tol, max_length, scale, pts, src, static_cast<int>(k)};
        const int n = initial_pieces(seg);
        for (int i = 0; i < n; ++i) {
            const double ta = seg.t0() + (seg.t1() - seg.t0()) * i / n;
            const double tb = i + 1 == n ? seg.t1() : seg.t0() + (seg.t1() - seg.t0()) * (i + 1) / n;
            sub.run(ta, seg.evaluate(ta), tb, seg.evaluate(tb), 0);
        }
        pts.pop_back();  // the segment end is the next segment's start
        src.pop_back();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!poly.points.empty() && distance(poly.points.back(), pts[i]) <= 1e-12 * scale) continue;
            poly.points.push_back(pts[i]);
            poly.source.push_back(src[i]);
        }
    }
    while (poly.points.size() > 1 && distance(poly.points.front(), poly.points.back()) <= 1e-12 * scale) {
        poly.points.pop_back();
        poly.source.pop_back();
    }
    if (poly.points.size() < 3) throw GeometryError("loop " + loop_name(loop.tag) + " discretizes to fewer than 3 points");
    return poly;
}

// ---------------------------------------------------------------------------
// polygon utilities
// ---------------------------------------------------------------------------

double signed_area(std::span<const Vec2> polygon) {
    double a = 0.0;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) a += cross(polygon[i], polygon[(i + 1) % n]);
    return 0.5 * a;
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon) {
    bool inside = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = polygon[i];
        const Vec2 b = polygon[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b, double* t_out) {
    const Vec2 ab = b - a;
    const double l2 = norm2(ab);
    double t = l2 > 0.0 ? dot(p - a, ab) / l2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    if (t_out) *t_out = t;
    return distance(p, a + ab * t);
}

std::optional<std::pair<double, double>> segment_intersection(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const Vec2 r = b - a;
    const Vec2 s = d - c;
    const double denom = cross(r, s);
    const double scale = std::max(norm2(r), norm2(s));
    if (std::abs(denom) <= 1e-14 * scale) {
        // Parallel: report overlap of collinear segments at the first shared point.
        if (std::abs(cross(c - a, r)) > 1e-12 * scale) return std::nullopt;
        const double rr = norm2(r);
        if (rr == 0.0) return std::nullopt;
        const double t0 = dot(c - a, r) / rr;
        const double t1 = dot(d - a, r) / rr;
        const double lo = std::max(0.0, std::min(t0, t1));
        const double hi = std::min(1.0, std::max(t0, t1));
        if (lo > hi) return std::nullopt;
        const double u = (t1 != t0) ? (lo - t0) / (t1 - t0) : 0.0;
        return std::make_pair(lo, u);
    }
    const double t = cross(c - a, s) / denom;
    const double u = cross(c - a, r) / denom;
    constexpr double eps = 1e-12;
    if (t < -eps || t > 1.0 + eps || u < -eps || u > 1.0 + eps) return std::nullopt;
    return std::make_pair(std::clamp(t, 0.0, 1.0), std::clamp(u, 0.0, 1.0));
}

double polyline_length(std::span<const Vec2> pts, bool closed) {
    double len = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
    if (closed && pts.size() > 2) len += distance(pts.back(), pts.front());
    return len;
}

Vec2 interior_point(std::span<const Vec2> polygon) {
    // Area centroid first; fall back to the widest horizontal chord.
    double a = 0.0;
    Vec2 c{};
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = polygon[i];
        const Vec2 q = polygon[(i + 1) % n];
        const double w = cross(p, q);
        a += w;
        c += (p + q) * w;
    }
    BBox box;
    for (auto p : polygon) box.add(p);
    if (std::abs(a) > 0.0) {
        c = c / (3.0 * a);
        if (point_in_polygon(c, polygon)) {
            double dmin = 1e300;
            for (std::size_t i = 0; i < n; ++i)
                dmin = std::min(dmin, point_segment_distance(c, polygon[i], polygon[(i + 1) % n]));
            if (dmin > 1e-3 * box.diameter()) return c;
        }
    }
    Vec2 best = box.center();
    double best_w = -1.0;
    for (int k = 1; k < 16; ++k) {
        const double y = box.lo.y + (box.hi.y - box.lo.y) * (k + 0.123) / 16.0;
        std::vector<double> xs;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 p = polygon[i];
            const Vec2 q = polygon[(i + 1) % n];
            if ((p.y > y) != (q.y > y)) xs.push_back(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
            if (xs[i + 1] - xs[i] > best_w) {
                best_w = xs[i + 1] - xs[i];
                best = {0.5 * (xs[i] + xs[i + 1]), y};
            }
        }
    }
    return best;
}

bool polygon_is_simple(std::span<const Vec2> polygon) {
    const std::size_t n = polygon.size();
    if (n < 3) return false;
    std::vector<BBox> boxes(n);
    for (std::size_t i = 0; i < n; ++i) {
        boxes[i].add(polygon[i]);
        boxes[i].add(polygon[(i + 1) % n]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = polygon[i];
        const Vec2 b = polygon[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            const Vec2 c = polygon[j];
            const Vec2 d = polygon[(j + 1) % n];
            if (boxes[i].hi.x < boxes[j].lo.x || boxes[j].hi.x < boxes[i].lo.x ||
                boxes[i].hi.y < boxes[j].lo.y || boxes[j].hi.y < boxes[i].lo.y)
                continue;
            if (adjacent) {
                // Shared vertex only; reject a fold-back onto the previous edge.
                const Vec2 shared = (j == i + 1) ? b : a;
                const Vec2 u = (j == i + 1) ? a : b;
                const Vec2 v = (j == i + 1) ? d : c;
                const Vec2 du = u - shared;
                const Vec2 dv = v - shared;
                if (std::abs(cross(du, dv)) <= 1e-14 * norm(du) * norm(dv) && dot(du, dv) > 0.0) return false;
                continue;
            }
            if (segment_intersection(a, b, c, d)) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

namespace {

BoundaryLoop reverse_loop(const BoundaryLoop& loop) {
    BoundaryLoop r;
    r.tag = loop.tag;
    for (auto it = loop.segments.rbegin(); it != loop.segments.rend(); ++it) r.segments.push_back(it->reversed());
    return r;
}

void check_closed(const BoundaryLoop& loop, double tol) {
    const std::size_t n = loop.segments.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 e = loop.segments[k].end();
        const Vec2 s = loop.segments[(k + 1) % n].start();
        if (distance(e, s) > tol) {
            std::ostringstream os;
            os << "loop " << loop_name(loop.tag) << " is open: end of segment " << k << " " << e
               << " does not meet start of segment " << (k + 1) % n << " " << s;
            throw GeometryError(os.str());
        }
    }
}

void check_regular(const BoundaryLoop& loop, double scale) {
    for (std::size_t k = 0; k < loop.segments.size(); ++k) {
        const auto& seg = loop.segments[k];
        constexpr int n = 32;
        for (int i = 0; i <= n; ++i) {
            if ((i == 0 && seg.cusp_at_start()) || (i == n && seg.cusp_at_end())) continue;
            const double t = seg.t0() + (seg.t1() - seg.t0()) * i / n;
            const Vec2 p = seg.evaluate(t);
            if (!std::isfinite(p.x) || !std::isfinite(p.y))
                throw GeometryError("non-finite point on segment " + std::to_string(k) + " of loop " + loop_name(loop.tag));
            if (i > 0 && i < n && norm(seg.derivative(t)) * (seg.t1() - seg.t0()) <= 1e-12 * scale)
                throw GeometryError("segment " + std::to_string(k) + " of loop " + loop_name(loop.tag) +
                                    " has a vanishing tangent");
        }
    }
}

double polygon_distance(std::span<const Vec2> a, std::span<const Vec2> b) {
    double d = 1e300;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            d = std::min(d, point_segment_distance(a[i], b[j], b[(j + 1) % b.size()]));
    for (std::size_t j = 0; j < b.size(); ++j)
        for (std::size_t i = 0; i < a.size(); ++i)
            d = std::min(d, point_segment_distance(b[j], a[i], a[(i + 1) % a.size()]));
    return d;
}

bool polygons_cross(std::span<const Vec2> a, std::span<const Vec2> b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            if (segment_intersection(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()])) return true;
    return false;
}

}  // namespace

DomainSpec validate_domain(DomainSpec spec) {
    spec.outer.tag = 0;
    for (int j = 0; j < spec.hole_count(); ++j) spec.holes[static_cast<std::size_t>(j)].tag = j + 1;

    const double diam = spec.bbox().diameter();
    if (!(diam > 0.0)) throw GeometryError("domain has zero extent");
    const double ctol = 1e-9 * diam;

    std::vector<BoundaryLoop*> loops{&spec.outer};
    for (auto& h : spec.holes) loops.push_back(&h);

    std::vector<std::vector<Vec2>> polys;
    for (BoundaryLoop* l : loops) {
        check_closed(*l, ctol);
        check_regular(*l, diam);
        Polyline p = discretize_loop(*l, 1e-3 * diam);
        if (!polygon_is_simple(p.points))
            throw GeometryError("loop " + loop_name(l->tag) + " intersects itself");
        const double area = signed_area(p.points);
        const bool want_ccw = l->tag == 0;
        if ((area > 0.0) != want_ccw) {
            *l = reverse_loop(*l);
            std::reverse(p.points.begin(), p.points.end());
        }
        polys.push_back(std::move(p.points));
    }

    const auto& outer = polys[0];
    for (std::size_t j = 1; j < polys.size(); ++j) {
        const auto& hole = polys[j];
        bool all_inside = true;
        for (auto q : hole) all_inside = all_inside && point_in_polygon(q, outer);
        if (!all_inside || polygons_cross(hole, outer))
            throw GeometryError("hole " + loop_name(static_cast<int>(j)) + " is not inside the outer loop");
        if (polygon_distance(hole, outer) <= 1e-9 * diam)
            throw GeometryError("hole " + loop_name(static_cast<int>(j)) + " touches the outer loop");
    }
    for (std::size_t i = 1; i < polys.size(); ++i) {
        for (std::size_t j = i + 1; j < polys.size(); ++j) {
            const bool nested = point_in_polygon(polys[i][0], polys[j]) || point_in_polygon(polys[j][0], polys[i]);
            if (nested || polygons_cross(polys[i], polys[j]) || polygon_distance(polys[i], polys[j]) <= 1e-9 * diam)
                throw GeometryError("holes " + loop_name(static_cast<int>(i)) + " and " +
                                    loop_name(static_cast<int>(j)) + " overlap");
        }
    }
    return spec;
}

}  // namespace cfm
