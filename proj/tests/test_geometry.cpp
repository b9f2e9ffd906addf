#include <doctest.h>

#include <cfm/geometry.hpp>

#include <cmath>
#include <numbers>

using namespace cfm;

namespace {

constexpr double pi = std::numbers::pi;

BoundaryLoop circle(Vec2 c, double r) {
    BoundaryLoop loop;
    loop.segments.push_back(CurveSegment::arc(c, r, 0.0, 2.0 * pi));
    return loop;
}

BoundaryLoop square(double x0, double y0, double x1, double y1) {
    BoundaryLoop loop;
    loop.segments = {CurveSegment::line({x0, y0}, {x1, y0}), CurveSegment::line({x1, y0}, {x1, y1}),
                     CurveSegment::line({x1, y1}, {x0, y1}), CurveSegment::line({x0, y1}, {x0, y0})};
    return loop;
}

// r(t) of the droplet outline, written out independently of the library.
double droplet_r(double t) {
    return (45 * std::pow(t, 6) + 75 * std::pow(t, 4) - 525 * t * t + 469) / 640.0 +
           15.0 / 32.0 * t * (t * t - 1) * (t * t - 1);
}

}  // namespace

TEST_CASE("curve evaluation") {
    const auto seg = CurveSegment::line({0, 0}, {2, 0});
    CHECK(seg.evaluate(0.5).x == doctest::Approx(1.0));
    CHECK(seg.evaluate(0.5).y == doctest::Approx(0.0));

    const auto arc = CurveSegment::arc({0, 0}, 1.0, 0.0, 2.0 * pi);
    const Vec2 q = arc.evaluate(pi / 2.0);
    CHECK(q.x == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(q.y == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)arc.evaluate(7.0), GeometryError);

    PolarGraph g;
    g.radius = droplet_r;
    g.angle = [](double t) { return pi * t; };
    const auto drop = CurveSegment::polar(g, -1.0, 1.0);
    CHECK(norm(drop.evaluate(0.0)) == doctest::Approx(469.0 / 640.0));
}

TEST_CASE("reversed segment traces the same points backwards") {
    const auto arc = CurveSegment::arc({1, 2}, 0.5, 0.0, pi);
    const auto rev = arc.reversed();
    for (double t : {0.0, 0.3, 1.1, pi}) {
        const Vec2 a = arc.evaluate(t), b = rev.evaluate(pi - t);
        CHECK(distance(a, b) < 1e-14);
    }
}

TEST_CASE("bezier endpoints and midpoint") {
    const auto b = CurveSegment::bezier({0, 0}, {1, 2}, {3, 2}, {4, 0});
    CHECK(distance(b.start(), Vec2{0, 0}) < 1e-15);
    CHECK(distance(b.end(), Vec2{4, 0}) < 1e-15);
    // de Casteljau at 1/2
    CHECK(b.evaluate(0.5).x == doctest::Approx(2.0));
    CHECK(b.evaluate(0.5).y == doctest::Approx(1.5));
}

TEST_CASE("discretized unit circle respects the sagitta bound") {
    const double tol = 1e-2;
    const Polyline p = discretize_loop(circle({0, 0}, 1.0), tol);
    CHECK(p.points.size() >= 12);
    const std::size_t n = p.points.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 a = p.points[k], b = p.points[(k + 1) % n];
        const double chord = distance(a, b);
        const double sagitta = 1.0 - std::sqrt(1.0 - chord * chord / 4.0);
        CHECK(sagitta <= tol * (1 + 1e-12));
        CHECK(std::fabs(norm(a) - 1.0) < 1e-14);
    }
    CHECK(signed_area(p.points) > 0.0);
}

TEST_CASE("max_length splits long chords and refinement is nested") {
    const BoundaryLoop sq = square(0, 0, 1, 1);
    const Polyline coarse = discretize_loop(sq, 1e-6, [](Vec2) { return 0.25; });
    const Polyline fine = discretize_loop(sq, 1e-6, [](Vec2) { return 0.125; });
    CHECK(coarse.points.size() == 16);
    CHECK(fine.points.size() == 32);
    for (const Vec2& p : coarse.points) {
        bool found = false;
        for (const Vec2& q : fine.points) found = found || distance(p, q) < 1e-14;
        CHECK(found);
    }
}

TEST_CASE("three disks in a circle validate") {
    DomainSpec d;
    d.outer = circle({0, 0}, 1.0);
    for (double a : {-90.0, 30.0, 150.0}) {
        const double r = a * pi / 180.0;
        d.holes.push_back(circle({0.5 * std::cos(r), 0.5 * std::sin(r)}, 1.0 / 6.0));
    }
    const DomainSpec v = validate_domain(d);
    CHECK(v.hole_count() == 3);
    CHECK(v.connectivity() == 4);
    // holes come back clockwise
    const Polyline hole = discretize_loop(v.holes[0], 1e-3);
    CHECK(signed_area(hole.points) < 0.0);
    CHECK(v.holes[2].tag == 3);
}

TEST_CASE("invalid domains are rejected") {
    DomainSpec overlap;
    overlap.outer = circle({0, 0}, 1.0);
    overlap.holes = {circle({0.1, 0}, 0.3), circle({-0.1, 0}, 0.3)};
    CHECK_THROWS_WITH_AS((void)validate_domain(overlap), doctest::Contains("overlap"), GeometryError);

    DomainSpec outside;
    outside.outer = circle({0, 0}, 1.0);
    outside.holes = {circle({3, 0}, 0.3)};
    CHECK_THROWS_WITH_AS((void)validate_domain(outside), doctest::Contains("not inside"), GeometryError);

    DomainSpec open;
    open.outer.segments = {CurveSegment::line({0, 0}, {1, 0}), CurveSegment::line({1, 0}, {1, 1})};
    CHECK_THROWS_AS((void)validate_domain(open), GeometryError);
}

TEST_CASE("polygon utilities") {
    const std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(signed_area(sq) == doctest::Approx(1.0));
    CHECK(point_in_polygon({0.5, 0.5}, sq));
    CHECK_FALSE(point_in_polygon({1.5, 0.5}, sq));
    double t = -1;
    CHECK(point_segment_distance({0.5, 1.0}, {0, 0}, {1, 0}, &t) == doctest::Approx(1.0));
    CHECK(t == doctest::Approx(0.5));
    const auto hit = segment_intersection({0, 0}, {1, 1}, {0, 1}, {1, 0});
    REQUIRE(hit);
    CHECK(hit->first == doctest::Approx(0.5));
    CHECK(polyline_length(sq, true) == doctest::Approx(4.0));
    CHECK(polygon_is_simple(sq));
    const std::vector<Vec2> bow{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    CHECK_FALSE(polygon_is_simple(bow));
    const std::vector<Vec2> ell{{0, 0}, {2, 0}, {2, 0.2}, {0.2, 0.2}, {0.2, 2}, {0, 2}};
    CHECK(point_in_polygon(interior_point(ell), ell));
}
