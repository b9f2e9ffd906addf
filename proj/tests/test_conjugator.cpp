#include <doctest.h>

#include <cfm/builtins.hpp>
#include <cfm/conjugator.hpp>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace cfm;

namespace {

constexpr double pi = std::numbers::pi;

BoundaryCondition capacity_bc(int holes) {
    BoundaryCondition bc;
    bc.dirichlet[EdgeTag::loop(0)] = 0.0;
    for (int j = 1; j <= holes; ++j) bc.dirichlet[EdgeTag::loop(j)] = 1.0;
    return bc;
}

struct Conjugate {
    CutSet cuts;
    ConjugateSpec spec;
    std::vector<double> jumps;
    double d{};
    PotentialField v;
};

// the multiply connected chain, step by step
Conjugate conjugate_of(const ProblemConfig& cfg, int order, double h) {
    MeshOptions o = cfg.mesh_options();
    o.h = h;
    const int m = cfg.domain.hole_count();
    const PotentialField u0 = solve_laplace(triangulate(cfg.domain, o), capacity_bc(m), order);
    const SaddleSearch s = find_saddles(u0);
    CutOptions co;
    co.gamma0_start = cfg.gamma0_start;
    CutSet cuts = build_cuts(u0, s, co);
    const auto polys = cuts.polylines();
    const Mesh joined = triangulate(cfg.domain, o, polys);
    const PotentialField u1 = solve_laplace(joined, capacity_bc(m), order);
    const double d = dirichlet_energy(u1);
    auto opened = std::make_shared<const Mesh>(open_along_cuts(joined));
    ConjugateSpec spec = assemble_conjugate_boundary(*opened, cuts);
    std::map<int, double> levels;
    const double sv = s.saddles.empty() ? 0.0 : s.saddles[0].value;
    for (int j = 1; j <= m; ++j) levels[j] = 0.5 * (1.0 + sv);
    JumpResult jr = jump_decomposition(u1, cuts.arcs, spec.hole_runs, levels);
    const double total = std::accumulate(jr.jumps.begin(), jr.jumps.end(), 0.0);
    for (double& j : jr.jumps) j *= d / total;
    assign_cut_values(spec, jr.jumps, d);
    PotentialField v = solve_conjugate(spec, opened, order, d, false);
    return {std::move(cuts), std::move(spec), std::move(jr.jumps), d, std::move(v)};
}

const Conjugate& annulus() {
    static const Conjugate c = conjugate_of(builtin_problem("annulus"), 3, 0.1);
    return c;
}

}  // namespace

TEST_CASE("annulus: one radial cut and the four-run walk") {
    const Conjugate& c = annulus();
    REQUIRE(c.cuts.arcs.size() == 1);
    CHECK(distance(c.cuts.arcs[0].points.front(), {1, 0}) < 1e-9);
    CHECK(distance(c.cuts.arcs[0].points.back(), {0.5, 0}) < 1e-4);
    REQUIRE(c.spec.walk.size() == 4);
    CHECK(c.spec.walk[0].tag == EdgeTag::cut_side(0, 0));
    CHECK(c.spec.walk[1].tag == EdgeTag::loop(1));
    CHECK(c.spec.walk[2].tag == EdgeTag::cut_side(0, 1));
    CHECK(c.spec.walk[3].tag == EdgeTag::loop(0));
    CHECK(c.spec.walk[0].value == 0.0);
    CHECK(c.spec.walk[2].value == c.d);
    REQUIRE(c.jumps.size() == 1);
    CHECK(c.jumps[0] == doctest::Approx(c.d).epsilon(1e-12));
}

TEST_CASE("annulus conjugate: v = d (1 - theta / 2pi) and reciprocal energies") {
    const Conjugate& c = annulus();
    const double cap = 2 * pi / std::log(2.0);
    CHECK(c.d == doctest::Approx(cap).epsilon(1e-5));
    for (double th : {0.5, pi / 2, 2.0, pi, 4.5}) {
        const Vec2 p{0.75 * std::cos(th), 0.75 * std::sin(th)};
        CHECK(evaluate(c.v, p) == doctest::Approx(c.d * (1.0 - th / (2 * pi))).epsilon(1e-4));
    }
    const ReciprocalErrors e = reciprocal_errors(c.d, dirichlet_energy(c.v));
    CHECK(e.direct < 1e-4);
    CHECK(e.normalized < 1e-4);
}

TEST_CASE("two disks: three arcs, three hole runs, symmetric jumps") {
    const Conjugate c = conjugate_of(builtin_problem("two-disks-in-rect"), 3, 0.15);
    REQUIRE(c.cuts.arcs.size() == 3);
    REQUIRE(c.spec.hole_runs.size() == 3);
    CHECK(c.spec.hole_runs[0].hole == c.spec.hole_runs[2].hole);
    CHECK(c.jumps[0] == doctest::Approx(c.jumps[2]).epsilon(1e-3));
    CHECK(c.d == doctest::Approx(13.922976299110).epsilon(1e-3));
    const ReciprocalErrors e = reciprocal_errors(c.d, dirichlet_energy(c.v));
    CHECK(e.normalized < 1e-3);
    // every cut side is a Dirichlet run, values nondecreasing along the walk
    double last = -1.0;
    for (const auto& r : c.spec.walk)
        if (r.dirichlet) {
            CHECK(r.value >= last - 1e-12);
            last = r.value;
        }
}

TEST_CASE("bisection finds the separatrix start on the disk") {
    const ProblemConfig cfg = builtin_problem("two-disks-in-rect");
    MeshOptions o = cfg.mesh_options();
    const PotentialField u = solve_laplace(triangulate(cfg.domain, o), capacity_bc(2), 3);
    const SaddleSearch s = find_saddles(u);
    REQUIRE(s.saddles.size() == 1);
    const CutStart cs = bisect_cut_start(u, 1, {0.49, 0.1}, s.saddles[0].location, {-1, 0}, s.ball_radius, 1e-8);
    CHECK(cs.reached_ball);
    CHECK(distance(cs.boundary_point, {0.5, 0}) < 2e-3);
    CHECK(cs.iterations > 2);
}

TEST_CASE("unit square: conjugate modulus is the reciprocal") {
    const ProblemConfig cfg = builtin_problem("unit-square");
    const Mesh m = triangulate(cfg.domain, cfg.mesh_options());
    const double e1 = dirichlet_energy(solve_laplace(m, quadrilateral_bc(false), 1));
    const double e2 = dirichlet_energy(solve_laplace(m, quadrilateral_bc(true), 1));
    CHECK(e1 == doctest::Approx(1.0).epsilon(1e-12));
    // conjugate scaled to [0, M]: energy M^2 * (1 / M)
    const ReciprocalErrors e = reciprocal_errors(e1, e1 * e1 * e2);
    CHECK(e.normalized <= 1e-10);
    CHECK(e.direct <= 1e-10);
}

TEST_CASE("error order and walk errors") {
    CHECK(error_order(0.00185) == 2);
    CHECK(error_order(0.5) == 0);
    CHECK(error_order(0.0) == 16);
    const ProblemConfig cfg = builtin_problem("annulus");
    const Mesh m = triangulate(cfg.domain, cfg.mesh_options());
    CHECK_THROWS_AS((void)assemble_conjugate_boundary(m, annulus().cuts), ConjugateError);
    ConjugateSpec spec = annulus().spec;
    const std::vector<double> wrong{1.0};
    CHECK_THROWS_AS(assign_cut_values(spec, wrong, annulus().d), ConjugateError);
}
