#include <doctest.h>

#include <cfm/builtins.hpp>
#include <cfm/pipeline.hpp>

#include <cmath>
#include <complex>
#include <numbers>

using namespace cfm;

namespace {

constexpr double pi = std::numbers::pi;

const RunResult& square() {
    static const RunResult r = run_problem(builtin_problem("unit-square"));
    return r;
}

const RunResult& annulus() {
    static const RunResult r = run_problem(builtin_problem("annulus"));
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// annulus post-map
// ---------------------------------------------------------------------------

TEST_CASE("to_annulus sends the rectangle edges to the two circles") {
    const double d = 2.0 * pi / std::log(2.0);
    CHECK(std::abs(to_annulus({0.0, 0.0}, d) - std::complex<double>(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(to_annulus({1.0, 0.0}, d)) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(to_annulus({0.3, 1.7}, d)) == doctest::Approx(std::exp(-2.0 * pi * 0.3 / d)).epsilon(1e-14));
    // Im w = 0 and Im w = d are glued
    const auto a = to_annulus({0.4, 0.0}, d), b = to_annulus({0.4, d}, d);
    CHECK(std::abs(a - b) < 1e-14);
    // Im w = d / 4 is a quarter turn clockwise
    const auto q = to_annulus({0.0, d / 4.0}, d);
    CHECK(q.real() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(q.imag() == doctest::Approx(-1.0).epsilon(1e-14));
}

// ---------------------------------------------------------------------------
// map evaluation
// ---------------------------------------------------------------------------

TEST_CASE("square maps onto itself") {
    const ConformalMap& map = square().map;
    for (const Vec2 z : {Vec2{0.2, 0.3}, Vec2{0.75, 0.5}, Vec2{0.5, 0.9}}) {
        const auto w = map_point(map, z);
        // u1 = 1 - x, v = 1 - y for the default marking
        CHECK(w.real() == doctest::Approx(1.0 - z.x).epsilon(1e-12));
        CHECK(w.imag() == doctest::Approx(1.0 - z.y).epsilon(1e-12));
    }
    CHECK_THROWS_AS((void)map_point(map, {1.5, 0.5}), MapError);
}

TEST_CASE("annulus map matches log z up to rotation") {
    const ConformalMap& map = annulus().map;
    const double d = map.d;
    for (const double r : {0.55, 0.7, 0.9}) {
        for (const double t : {0.5, 2.0, 4.0}) {
            const auto w = map_point(map, {r * std::cos(t), r * std::sin(t)});
            CHECK(w.real() == doctest::Approx(std::log(r) / std::log(0.5)).epsilon(1e-4));
            const auto z = to_annulus(w, d);
            CHECK(std::abs(z) == doctest::Approx(r).epsilon(1e-4));
        }
    }
    // the conjugate increases by d around the hole: arguments advance uniformly
    const auto z1 = to_annulus(map_point(map, {0.0, 0.7}), d);
    const auto z2 = to_annulus(map_point(map, {-0.7, 0.0}), d);
    double turn = std::arg(z2) - std::arg(z1);
    if (turn > pi) turn -= 2.0 * pi;
    if (turn < -pi) turn += 2.0 * pi;
    CHECK(std::abs(turn) == doctest::Approx(pi / 2.0).epsilon(1e-3));
}

TEST_CASE("points on a cut need a side hint") {
    const ConformalMap& map = annulus().map;
    REQUIRE(map.cuts.arcs.size() == 1);
    const auto& pts = map.cuts.arcs[0].points;
    const Vec2 on = pts[pts.size() / 2];
    CHECK_THROWS_AS((void)map_point(map, on), MapError);
    const Vec2 t = pts[pts.size() / 2 + 1] - pts[pts.size() / 2 - 1];
    const Vec2 left{-t.y, t.x};
    const auto a = map_point(map, on, left);
    const auto b = map_point(map, on, Vec2{t.y, -t.x});
    // the two banks differ by the full period
    CHECK(std::abs(std::abs(a.imag() - b.imag()) - map.d) < 1e-6 * map.d);
    CHECK(a.real() == doctest::Approx(b.real()).epsilon(1e-9));
}

// ---------------------------------------------------------------------------
// grid and Cauchy-Riemann
// ---------------------------------------------------------------------------

TEST_CASE("image grid lines sit on their levels") {
    const ConformalMap& map = annulus().map;
    const ImageGrid g = image_grid(map, 4, 8);
    REQUIRE_FALSE(g.u1_lines.empty());
    REQUIRE_FALSE(g.u2_lines.empty());
    for (const auto& l : g.u1_lines) {
        // u1 level sets of the annulus are circles r = 2^-level
        const double r = std::pow(0.5, l.level);
        for (const Vec2 p : l.points) CHECK(std::hypot(p.x, p.y) == doctest::Approx(r).epsilon(2e-3));
    }
}

TEST_CASE("Cauchy-Riemann residuals vanish on the square") {
    CrOptions o;
    o.density = 40;
    const CrReport cr = cauchy_riemann_report(square().map, o);
    CHECK(cr.points.size() > 100);
    CHECK(cr.max <= 1e-10);
}

TEST_CASE("Cauchy-Riemann residuals are small on the annulus") {
    CrOptions o;
    o.density = 60;
    const CrReport cr = cauchy_riemann_report(annulus().map, o);
    CHECK(cr.rms < 5e-3);
    const CrReport serial = [&] {
        o.exec = Exec::serial;
        return cauchy_riemann_report(annulus().map, o);
    }();
    REQUIRE(serial.points.size() == cr.points.size());
    CHECK(serial.rms == doctest::Approx(cr.rms).epsilon(1e-12));
}
