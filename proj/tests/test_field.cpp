#include <doctest.h>

#include <cfm/builtins.hpp>
#include <cfm/field_analysis.hpp>
#include <cfm/geometry.hpp>
#include <cfm/mesher.hpp>

#include <cmath>
#include <numbers>

using namespace cfm;

namespace {

constexpr double pi = std::numbers::pi;

BoundaryCondition capacity_bc(int holes) {
    BoundaryCondition bc;
    bc.dirichlet[EdgeTag::loop(0)] = 0.0;
    for (int j = 1; j <= holes; ++j) bc.dirichlet[EdgeTag::loop(j)] = 1.0;
    return bc;
}

PotentialField capacity_field(const ProblemConfig& cfg, int order, double h) {
    MeshOptions o = cfg.mesh_options();
    o.h = h;
    const Mesh m = triangulate(cfg.domain, o);
    return solve_laplace(m, capacity_bc(cfg.domain.hole_count()), order);
}

const PotentialField& annulus_field() {
    static const PotentialField f = capacity_field(builtin_problem("annulus"), 3, 0.1);
    return f;
}

const PotentialField& two_disk_field() {
    static const PotentialField f = capacity_field(builtin_problem("two-disks-in-rect"), 3, 0.15);
    return f;
}

std::vector<Vec2> circle(double r, int n) {
    std::vector<Vec2> c;
    for (int k = 0; k < n; ++k) c.push_back({r * std::cos(2 * pi * k / n), r * std::sin(2 * pi * k / n)});
    return c;
}

}  // namespace

TEST_CASE("annulus level curve is the circle 2^-1/2, counterclockwise") {
    const auto cs = extract_contours(annulus_field(), 0.5);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].closed);
    CHECK(cs[0].encloses == std::vector<int>{1});
    CHECK(signed_area(cs[0].points) > 0);
    for (const Vec2 p : cs[0].points) CHECK(norm(p) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-4));
    CHECK_THROWS_AS((void)extract_contours(annulus_field(), 1.0), AnalysisError);
}

TEST_CASE("flux through concentric circles is the capacity") {
    const double cap = 2 * pi / std::log(2.0);
    for (double r : {0.6, 0.75, 0.9}) {
        // counterclockwise circle: the left normal points inward, toward larger u
        const auto c = circle(r, 400);
        CHECK(flux_integral(annulus_field(), c, true) == doctest::Approx(cap).epsilon(1e-3));
        CHECK(gradient_norm_integral(annulus_field(), c, true) == doctest::Approx(cap).epsilon(1e-3));
    }
    const auto cs = extract_contours(annulus_field(), 0.3);
    REQUIRE(cs.size() == 1);
    CHECK(flux_integral(annulus_field(), cs[0].points, true) ==
          doctest::Approx(dirichlet_energy(annulus_field())).epsilon(1e-3));
}

TEST_CASE("linear field: open contour and unit flux") {
    DomainSpec spec;
    spec.outer = rect_loop({0, 0}, {1, 1});
    spec = validate_domain(spec);
    MeshOptions o;
    o.h = 0.3;
    o.marked_points = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    BoundaryCondition bc;
    bc.dirichlet = {{EdgeTag::loop(0, 0), 0.0}, {EdgeTag::loop(0, 2), 1.0}};
    bc.neumann = {EdgeTag::loop(0, 1), EdgeTag::loop(0, 3)};
    const PotentialField u = solve_laplace(triangulate(spec, o), bc, 1);
    const auto cs = extract_contours(u, 0.25);
    REQUIRE(cs.size() == 1);
    CHECK_FALSE(cs[0].closed);
    for (const Vec2 p : cs[0].points) CHECK(p.y == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(cs[0].points.front().x == doctest::Approx(0.0).scale(1.0));
    CHECK(cs[0].points.back().x == doctest::Approx(1.0));
    const std::vector<Vec2> seg{{0, 0.5}, {1, 0.5}};
    CHECK(flux_integral(u, seg, false) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two disks in a rectangle: saddle on the axis midway") {
    const SaddleSearch s = find_saddles(two_disk_field());
    REQUIRE(s.saddles.size() == 1);
    const SaddlePoint& sp = s.saddles[0];
    CHECK(distance(sp.location, {1, 0}) < 1e-3);
    CHECK(sp.multiplicity() == 1);
    CHECK(sp.value > 0.0);
    CHECK(sp.value < 1.0);
    CHECK(sp.gradient_norm <= 1e-4 * s.max_gradient);
    for (const Vec2 a : sp.ascent) CHECK(std::fabs(a.y) < 0.1);
    for (const Vec2 d : sp.descent) CHECK(std::fabs(d.x) < 0.1);
}

TEST_CASE("three symmetric disks: one degenerate saddle at the centre") {
    const PotentialField f = capacity_field(builtin_problem("three-disks-in-circle"), 3, 0.1);
    const SaddleSearch s = find_saddles(f);
    REQUIRE(s.saddles.size() == 1);
    CHECK(norm(s.saddles[0].location) < 1e-2);
    CHECK(s.saddles[0].ascent.size() == 3);
    CHECK(s.saddles[0].multiplicity() == 2);
}

TEST_CASE("annulus descent from r = 0.75 is radial") {
    const DescentPath p = trace_path(annulus_field(), {0.75, 0.0}, Direction::descent);
    CHECK(p.reached_boundary());
    CHECK(p.loop == 0);
    CHECK(distance(p.points.back(), {1, 0}) < 1e-4);
    // the discrete gradient is radial up to the discretization error
    for (const Vec2 q : p.points) CHECK(std::fabs(q.y) < 1e-5);
    for (std::size_t k = 1; k < p.values.size(); ++k) CHECK(p.values[k] < p.values[k - 1]);
    const DescentPath a = trace_path(annulus_field(), {0.75, 0.0}, Direction::ascent);
    CHECK(a.loop == 1);
    CHECK(distance(a.points.back(), {0.5, 0}) < 1e-4);
}

TEST_CASE("paths are orthogonal to level curves") {
    const DescentPath p = trace_path(annulus_field(), {0.6 * std::cos(1.0), 0.6 * std::sin(1.0)}, Direction::descent);
    for (std::size_t k = 1; k + 1 < p.points.size(); ++k) {
        const Vec2 t = normalized(p.points[k + 1] - p.points[k - 1]);
        const Vec2 g = normalized(gradient_at(annulus_field(), p.points[k]));
        CHECK(std::fabs(cross(t, g)) <= std::sin(2.0 * pi / 180));
    }
}

TEST_CASE("jump decomposition on the two-disk field") {
    const PotentialField& f = two_disk_field();
    const SaddleSearch s = find_saddles(f);
    REQUIRE(s.saddles.size() == 1);
    const Vec2 c = s.saddles[0].location;
    TraceOptions to;
    to.saddles = {c};
    to.saddle_radius = s.ball_radius;
    to.ignore_saddle = 0;
    std::vector<CutArc> arcs(3);
    const DescentPath g0 = trace_path(f, {-1, 0}, Direction::ascent, to);
    REQUIRE(g0.loop == 1);
    arcs[0] = {0, g0.points, 0, 1, -1};
    for (int k = 0; k < 2; ++k) {
        const Vec2 dir = s.saddles[0].ascent[k];
        const DescentPath a = trace_path(f, c + dir * s.ball_radius, Direction::ascent, to);
        REQUIRE(a.reached_boundary());
        std::vector<Vec2> pts{c};
        pts.insert(pts.end(), a.points.begin(), a.points.end());
        arcs[1 + k] = {1 + k, pts, -1, a.loop, 0};
    }
    const int to_first = arcs[1].to_loop == 1 ? 1 : 2;
    const int to_second = 3 - to_first;
    // walk: gamma0 up to disk 1, around it to the saddle arc, disk 2, back to disk 1
    const std::vector<HoleRun> runs{{1, 0, to_first}, {2, to_second, to_second}, {1, to_first, 0}};
    const double lev = 0.5 * (1.0 + s.saddles[0].value);
    const JumpResult j = jump_decomposition(f, arcs, runs, {{1, lev}, {2, lev}});
    REQUIRE(j.jumps.size() == 3);
    CHECK(j.jumps[0] == doctest::Approx(j.jumps[2]).epsilon(1e-3));
    CHECK(j.jumps[0] + j.jumps[2] == doctest::Approx(j.hole_flux.at(1)).epsilon(1e-6));
    CHECK(j.jumps[1] == doctest::Approx(j.hole_flux.at(2)).epsilon(1e-12));
    const double d = dirichlet_energy(f);
    CHECK(j.jumps[0] + j.jumps[1] + j.jumps[2] == doctest::Approx(d).epsilon(1e-3));
}
