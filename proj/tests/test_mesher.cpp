#include <doctest.h>

#include <cfm/mesher.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

using namespace cfm;

namespace {

constexpr double pi = std::numbers::pi;

BoundaryLoop circle(Vec2 c, double r) {
    BoundaryLoop loop;
    loop.segments.push_back(CurveSegment::arc(c, r, 0.0, 2.0 * pi));
    return loop;
}

BoundaryLoop rect(double x0, double y0, double x1, double y1) {
    BoundaryLoop loop;
    loop.segments = {CurveSegment::line({x0, y0}, {x1, y0}), CurveSegment::line({x1, y0}, {x1, y1}),
                     CurveSegment::line({x1, y1}, {x0, y1}), CurveSegment::line({x0, y1}, {x0, y0})};
    return loop;
}

DomainSpec annulus() {
    DomainSpec d;
    d.outer = circle({0, 0}, 1.0);
    d.holes = {circle({0, 0}, 0.5)};
    return d;
}

DomainSpec three_disks() {
    DomainSpec d;
    d.outer = circle({0, 0}, 1.0);
    for (double a : {-90.0, 30.0, 150.0}) {
        const double r = a * pi / 180.0;
        d.holes.push_back(circle({0.5 * std::cos(r), 0.5 * std::sin(r)}, 1.0 / 6.0));
    }
    return d;
}

// Independent Euler count: distinct undirected edges from the triangle list.
int euler(const Mesh& m) {
    std::set<std::pair<int, int>> edges;
    for (const auto& t : m.triangles)
        for (int k = 0; k < 3; ++k) edges.insert(std::minmax(t[k], t[(k + 1) % 3]));
    return m.node_count() - static_cast<int>(edges.size()) + m.triangle_count();
}

double min_angle(const Mesh& m) {
    double best = 180.0;
    for (const auto& t : m.triangles)
        for (int k = 0; k < 3; ++k) {
            const Vec2 u = m.nodes[t[(k + 1) % 3]] - m.nodes[t[k]];
            const Vec2 v = m.nodes[t[(k + 2) % 3]] - m.nodes[t[k]];
            best = std::min(best, std::acos(dot(u, v) / (norm(u) * norm(v))) * 180.0 / pi);
        }
    return best;
}

}  // namespace

TEST_CASE("unit square, coarse") {
    DomainSpec d;
    d.outer = rect(0, 0, 1, 1);
    MeshOptions o;
    o.h = 0.5;
    const Mesh m = triangulate(d, o);
    CHECK(m.triangle_count() >= 8);
    for (int t = 0; t < m.triangle_count(); ++t) CHECK(m.triangle_area(t) > 0.0);
    CHECK_NOTHROW(check_mesh(m));
    double area = 0;
    for (int t = 0; t < m.triangle_count(); ++t) area += m.triangle_area(t);
    CHECK(area == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(euler(m) == 1);
}

TEST_CASE("annulus has two boundary cycles and Euler characteristic zero") {
    MeshOptions o;
    o.h = 0.1;
    const Mesh m = triangulate(annulus(), o);
    CHECK_NOTHROW(check_mesh(m));
    CHECK(boundary_cycles(m).size() == 2);
    CHECK(euler(m) == 0);
    CHECK(min_angle(m) >= 20.0 - 1e-9);
    for (const auto& e : m.boundary_edges) {
        const double r = norm(m.nodes[e.a]);
        CHECK((std::fabs(r - 1.0) < 1e-12 || std::fabs(r - 0.5) < 1e-12));
        CHECK(distance(m.nodes[e.a], m.nodes[e.b]) <= 0.1 + 1e-12);
    }
    // polygonal area against the exact annulus area, within the chord tolerance
    double area = 0;
    for (int t = 0; t < m.triangle_count(); ++t) area += m.triangle_area(t);
    CHECK(area == doctest::Approx(0.75 * pi).epsilon(1e-4));
}

TEST_CASE("corner grading reaches the geometric floor") {
    // pacman-like re-entrant corner: L-shaped region, corner at the origin
    DomainSpec d;
    d.outer.segments = {CurveSegment::line({-1, -1}, {1, -1}), CurveSegment::line({1, -1}, {1, 0}),
                        CurveSegment::line({1, 0}, {0, 0}),   CurveSegment::line({0, 0}, {0, 1}),
                        CurveSegment::line({0, 1}, {-1, 1}),  CurveSegment::line({-1, 1}, {-1, -1})};
    MeshOptions o;
    o.h = 0.25;
    o.rules = {{{0, 0}, 8, 0.15}};
    const Mesh m = triangulate(d, o);
    CHECK_NOTHROW(check_mesh(m));
    double smallest = 1e300;
    for (const auto& e : m.boundary_edges)
        smallest = std::min(smallest, distance(m.nodes[e.a], m.nodes[e.b]));
    CHECK(smallest <= std::pow(0.15, 8) * o.h);
    CHECK(min_angle(m) >= 20.0 - 1e-9);
}

TEST_CASE("invalid rules are rejected") {
    CHECK_THROWS((void)validate_rule({{0, 0}, 3, 1.5}));
    CHECK_THROWS((void)validate_rule({{0, 0}, 41, 0.5}));
    CHECK_NOTHROW(validate_rule({{0, 0}, 40, 0.5}));
}

TEST_CASE("marked points split the outer loop into four arcs") {
    DomainSpec d;
    d.outer = rect(0, 0, 2, 1);
    MeshOptions o;
    o.h = 0.2;
    o.marked_points = {{0, 0}, {2, 0}, {2, 1}, {0, 1}};
    const Mesh m = triangulate(d, o);
    std::map<int, double> length;
    for (const auto& e : m.boundary_edges) length[e.tag.part] += distance(m.nodes[e.a], m.nodes[e.b]);
    REQUIRE(length.size() == 4);
    CHECK(length[0] == doctest::Approx(2.0));
    CHECK(length[1] == doctest::Approx(1.0));
    CHECK(length[2] == doctest::Approx(2.0));
    CHECK(length[3] == doctest::Approx(1.0));

    o.marked_points = {{0, 0}, {2, 1}, {2, 0}, {0, 1}};
    CHECK_THROWS_AS((void)triangulate(d, o), GeometryError);
}

TEST_CASE("cutting an annulus yields a disk") {
    MeshOptions o;
    o.h = 0.1;
    const std::vector<CutPolyline> cuts{{0, {{0, 0.5}, {0, 0.75}, {0, 1.0}}}};
    const Mesh joined = triangulate(annulus(), o, cuts);
    REQUIRE(joined.polylines.size() == 1);
    for (int v : joined.polylines[0].nodes) CHECK(std::fabs(joined.nodes[v].x) < 1e-14);
    const Mesh open = open_along_cuts(joined);
    CHECK_NOTHROW(check_mesh(open));
    CHECK(boundary_cycles(open).size() == 1);
    CHECK(euler(open) == 1);
    const int n_cut = static_cast<int>(joined.polylines[0].nodes.size());
    CHECK(open.node_count() == joined.node_count() + n_cut);
    CHECK(open.triangle_count() == joined.triangle_count());
}

TEST_CASE("cuts of the three-disk domain: one cycle, each cut side once per direction") {
    MeshOptions o;
    o.h = 0.08;
    // outer boundary to the bottom disk, and the centre to all three disks
    const Vec2 c{0, 0};
    const Vec2 up1{0.5 * std::cos(pi / 6) - std::cos(pi / 6) / 6.0, 0.5 * std::sin(pi / 6) - std::sin(pi / 6) / 6.0};
    const Vec2 up2{-up1.x, up1.y};
    const std::vector<CutPolyline> cuts{
        {0, {{0, -1}, {0, -0.8}, {0, -0.5 - 1.0 / 6.0}}},
        {1, {c, up1 * 0.5, up1}},
        {2, {c, up2 * 0.5, up2}},
        {3, {c, {0, -1.0 / 6.0}, {0, -1.0 / 3.0}}},
    };
    const Mesh open = embed_polyline(three_disks(), cuts, o);
    CHECK_NOTHROW(check_mesh(open));
    const auto cycles = boundary_cycles(open);
    REQUIRE(cycles.size() == 1);
    // each cut appears as a + run and a - run of equal length, traversed in opposite directions
    std::map<std::pair<int, int>, double> len;
    std::set<int> loops;
    for (int e : cycles[0]) {
        const auto& be = open.boundary_edges[e];
        const double l = distance(open.nodes[be.a], open.nodes[be.b]);
        if (be.tag.is_cut())
            len[{be.tag.id, be.tag.part}] += l;
        else
            loops.insert(be.tag.id);
    }
    CHECK(loops.size() == 4);
    for (int id = 0; id < 4; ++id) {
        CHECK(len[{id, 0}] > 0.0);
        CHECK(len[{id, 0}] == doctest::Approx(len[{id, 1}]).epsilon(1e-14));
    }
    // + side runs along the cut direction
    for (const auto& be : open.boundary_edges) {
        if (!be.tag.is_cut() || be.tag.id != 0) continue;
        const double dy = open.nodes[be.b].y - open.nodes[be.a].y;
        CHECK((be.tag.part == 0 ? dy > 0.0 : dy < 0.0));
    }
}

TEST_CASE("cut along existing mesh line only duplicates nodes") {
    DomainSpec d;
    d.outer = rect(-1, -1, 1, 1);
    d.holes = {rect(-0.25, -0.25, 0.25, 0.25)};
    MeshOptions o;
    o.h = 0.25;
    const std::vector<CutPolyline> cuts{{0, {{0.25, 0}, {1, 0}}}};
    const Mesh joined = triangulate(d, o, cuts);
    const Mesh again = triangulate(d, o, cuts);
    CHECK(again.node_count() == joined.node_count());
    const Mesh open = open_along_cuts(joined);
    CHECK(open.node_count() == joined.node_count() + static_cast<int>(joined.polylines[0].nodes.size()));
}

TEST_CASE("crossing cuts are rejected") {
    MeshOptions o;
    o.h = 0.1;
    const std::vector<CutPolyline> cuts{{0, {{0, 0.5}, {0, 1}}}, {1, {{-0.1, 0.72}, {0.1, 0.73}}}};
    CHECK_THROWS_AS((void)triangulate(annulus(), o, cuts), MeshError);
    // meeting at a shared interior vertex is a crossing too
    const std::vector<CutPolyline> touching{{0, {{0, 0.5}, {0, 1}}}, {1, {{-0.1, 0.75}, {0.1, 0.75}}}};
    CHECK_THROWS_AS((void)triangulate(annulus(), o, touching), MeshError);
}

TEST_CASE("mesh text round trip") {
    MeshOptions o;
    o.h = 0.2;
    const std::vector<CutPolyline> cuts{{0, {{0, 0.5}, {0, 1.0}}}};
    const Mesh m = embed_polyline(annulus(), cuts, o);
    std::stringstream ss;
    write_mesh(ss, m);
    const Mesh r = read_mesh(ss);
    REQUIRE(r.node_count() == m.node_count());
    CHECK(r.nodes[7] == m.nodes[7]);
    CHECK(r.triangles == m.triangles);
    REQUIRE(r.boundary_edges.size() == m.boundary_edges.size());
    CHECK(r.boundary_edges[3].tag == m.boundary_edges[3].tag);
    CHECK(r.parent == m.parent);
    std::stringstream bad("cfm-mesh 1\nnodes 1\n0 0\n");
    CHECK_THROWS_AS((void)read_mesh(bad), MeshError);
}
