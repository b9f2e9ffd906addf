#include <doctest.h>

#include <cfm/builtins.hpp>
#include <cfm/kernels.hpp>
#include <cfm/laplace.hpp>
#include <cfm/mesher.hpp>

#include <cmath>
#include <numbers>

using namespace cfm;

namespace {

constexpr double pi = std::numbers::pi;

Mesh square_mesh(double h) {
    DomainSpec spec;
    spec.outer = rect_loop({0, 0}, {1, 1});
    spec = validate_domain(spec);
    MeshOptions o;
    o.h = h;
    o.marked_points = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    return triangulate(spec, o);
}

Mesh annulus_mesh(double h) {
    DomainSpec spec;
    spec.outer = disk_loop({0, 0}, 1.0);
    spec.holes = {disk_loop({0, 0}, 0.5)};
    spec = validate_domain(spec);
    MeshOptions o;
    o.h = h;
    return triangulate(spec, o);
}

BoundaryCondition square_bc() {
    BoundaryCondition bc;
    bc.dirichlet = {{EdgeTag::loop(0, 0), 0.0}, {EdgeTag::loop(0, 2), 1.0}};
    bc.neumann = {EdgeTag::loop(0, 1), EdgeTag::loop(0, 3)};
    return bc;
}

BoundaryCondition annulus_bc() {
    BoundaryCondition bc;
    bc.dirichlet = {{EdgeTag::loop(0), 0.0}, {EdgeTag::loop(1), 1.0}};
    return bc;
}

// log(1/r)/log 2: 1 on r = 1/2, 0 on r = 1
double annulus_exact(Vec2 p) { return std::log(1.0 / norm(p)) / std::log(2.0); }

}  // namespace

TEST_CASE("dof layout is continuous across elements") {
    auto mesh = std::make_shared<const Mesh>(square_mesh(0.3));
    for (int p : {1, 2, 3, 4}) {
        const FeSpace fs(mesh, p);
        const int ne = mesh_statistics(*mesh).edges;
        const int expect = mesh->node_count() + ne * (p - 1) + mesh->triangle_count() * (p - 1) * (p - 2) / 2;
        CHECK(fs.dof_count() == expect);
        // every element's local dof sits at the physical point its basis node maps to
        for (int t = 0; t < mesh->triangle_count(); ++t) {
            const auto d = fs.element_dofs(t);
            for (int k = 0; k < fs.local_size(); ++k) {
                const auto r = fs.basis().node(k);
                CHECK(distance(fs.dof_point(d[k]), fs.to_physical({t, r[0], r[1]})) < 1e-14);
            }
        }
    }
}

TEST_CASE("linear field on the unit square is reproduced exactly") {
    const PotentialField u = solve_laplace(square_mesh(0.3), square_bc(), 1);
    for (int v = 0; v < u.mesh().node_count(); ++v)
        CHECK(u.coefficients()[v] == doctest::Approx(u.mesh().nodes[v].y).epsilon(1e-12));
    CHECK(dirichlet_energy(u) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(evaluate(u, {0.3, 0.7}) == doctest::Approx(0.7).epsilon(1e-12));
    const Vec2 g = gradient_at(u, {0.3, 0.7});
    CHECK(std::fabs(g.x) < 1e-11);
    CHECK(g.y == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(u.stats().residual <= 1e-10);
    CHECK(max_principle_violation(u) <= 1e-12);
    CHECK_THROWS_AS((void)evaluate(u, {1.5, 0.5}), SolveError);
}

TEST_CASE("annulus log potential: nodal error and energy shrink under refinement") {
    const double cap = 2 * pi / std::log(2.0);
    double prev_err = 1e9, prev_e = 1e9;
    for (double h : {0.2, 0.1, 0.05}) {
        CAPTURE(h);
        const PotentialField u = solve_laplace(annulus_mesh(h), annulus_bc(), 2);
        double err = 0;
        for (int v = 0; v < u.mesh().node_count(); ++v)
            err = std::max(err, std::fabs(u.coefficients()[v] - annulus_exact(u.mesh().nodes[v])));
        const double e = dirichlet_energy(u);
        CHECK(err < prev_err);
        CHECK(e < prev_e);
        CHECK(e > cap * (1 - 1e-9));  // polygonal domain inscribed: energy from above
        prev_err = err;
        prev_e = e;
    }
    CHECK(prev_e == doctest::Approx(cap).epsilon(1e-3));
}

TEST_CASE("annulus gradient at r = 0.75 and maximum principle at order 3") {
    const PotentialField u = solve_laplace(annulus_mesh(0.1), annulus_bc(), 3);
    const double expect = 1.0 / (0.75 * std::log(2.0));
    for (double a : {0.0, 1.0, 2.5, 4.0}) {
        const Vec2 p{0.75 * std::cos(a), 0.75 * std::sin(a)};
        CHECK(norm(gradient_at(u, p)) == doctest::Approx(expect).epsilon(2e-3));
        CHECK(evaluate(u, p) == doctest::Approx(annulus_exact(p)).epsilon(1e-4));
    }
    CHECK(max_principle_violation(u) <= 1e-8);
    CHECK(dirichlet_energy(u) == doctest::Approx(2 * pi / std::log(2.0)).epsilon(1e-3));
}

TEST_CASE("Hessian of the discrete field matches differences of its gradient") {
    const PotentialField u = solve_laplace(annulus_mesh(0.15), annulus_bc(), 4);
    const Vec2 p{0.61, 0.33};
    const auto e = u.space().locate(p);
    REQUIRE(e);
    const auto h = u.hessian(*e);
    const double d = 1e-6;
    auto grad_in = [&](Vec2 q) { return u.at(u.space().reference(e->triangle, q)).gradient; };
    const Vec2 gx = (grad_in(p + Vec2{d, 0}) - grad_in(p - Vec2{d, 0})) / (2 * d);
    const Vec2 gy = (grad_in(p + Vec2{0, d}) - grad_in(p - Vec2{0, d})) / (2 * d);
    CHECK(h[0] == doctest::Approx(gx.x).epsilon(1e-5));
    CHECK(h[1] == doctest::Approx(gx.y).epsilon(1e-5));
    CHECK(h[1] == doctest::Approx(gy.x).epsilon(1e-5));
    CHECK(h[2] == doctest::Approx(gy.y).epsilon(1e-5));
}

TEST_CASE("boundary condition validation") {
    const Mesh m = square_mesh(0.5);
    BoundaryCondition bc = square_bc();
    bc.neumann.erase(EdgeTag::loop(0, 3));
    CHECK_THROWS_WITH_AS((void)solve_laplace(m, bc, 1), doctest::Contains("no boundary condition"), SolveError);
    BoundaryCondition none;
    none.neumann = {EdgeTag::loop(0, 0), EdgeTag::loop(0, 1), EdgeTag::loop(0, 2), EdgeTag::loop(0, 3)};
    CHECK_THROWS_AS((void)solve_laplace(m, none, 1), SolveError);
    BoundaryCondition flat = square_bc();
    flat.dirichlet[EdgeTag::loop(0, 2)] = 0.0;
    const PotentialField c = solve_laplace(m, flat, 2);
    CHECK(c.stats().warnings.size() == 1);
    CHECK(dirichlet_energy(c) == 0.0);
}

TEST_CASE("serial and parallel kernels agree bitwise") {
    auto mesh = std::make_shared<const Mesh>(annulus_mesh(0.1));
    auto fs = std::make_shared<const FeSpace>(mesh, 3);
    const auto ks = kernels::element_stiffness(*fs, Exec::serial);
    const auto kp = kernels::element_stiffness(*fs, Exec::parallel);
    CHECK(ks == kp);
    SolveOptions so;
    so.exec = Exec::serial;
    const PotentialField a = solve_laplace(fs, annulus_bc(), so);
    so.exec = Exec::parallel;
    const PotentialField b = solve_laplace(fs, annulus_bc(), so);
    CHECK(a.coefficients() == b.coefficients());
    CHECK(kernels::energy(*fs, a.coefficients(), Exec::serial) ==
          kernels::energy(*fs, a.coefficients(), Exec::parallel));
    std::vector<Vec2> pts;
    for (int i = 0; i < 500; ++i) pts.push_back({-1.0 + 2.0 * (i % 25) / 24.0, -1.0 + 2.0 * (i / 25) / 19.0});
    const auto s1 = kernels::sample_field(a, pts, Exec::serial);
    const auto s2 = kernels::sample_field(a, pts, Exec::parallel);
    CHECK(s1.value == s2.value);
    CHECK(s1.valid == s2.valid);
}

TEST_CASE("CG path agrees with the direct path") {
    auto fs = std::make_shared<const FeSpace>(std::make_shared<const Mesh>(annulus_mesh(0.15)), 2);
    SolveOptions so;
    so.direct_limit = 0;
    const PotentialField a = solve_laplace(fs, annulus_bc(), so);
    const PotentialField b = solve_laplace(fs, annulus_bc());
    CHECK(a.stats().solver != b.stats().solver);
    CHECK(dirichlet_energy(a) == doctest::Approx(dirichlet_energy(b)).epsilon(1e-10));
}
