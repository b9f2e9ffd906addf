#include <doctest.h>

#include <cfm/lagrange.hpp>

#include <cmath>
#include <vector>

using namespace cfm;

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

}  // namespace

TEST_CASE("collapsed quadrature integrates monomials exactly") {
    for (int deg = 0; deg <= 20; deg += 4) {
        const QuadratureRule q = triangle_quadrature(deg);
        for (int a = 0; a <= deg; ++a)
            for (int b = 0; a + b <= deg; ++b) {
                double s = 0.0;
                for (int g = 0; g < q.size(); ++g) s += q.weight[g] * std::pow(q.xi[g], a) * std::pow(q.eta[g], b);
                // int_T xi^a eta^b = a! b! / (a + b + 2)!
                const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                CHECK(s == doctest::Approx(exact).epsilon(1e-12));
            }
    }
}

TEST_CASE("basis is nodal and sums to one") {
    for (int p = 1; p <= 10; ++p) {
        CAPTURE(p);
        const LagrangeBasis b(p);
        REQUIRE(b.size() == (p + 1) * (p + 2) / 2);
        std::vector<double> n(b.size()), dx(b.size()), dy(b.size());
        for (int k = 0; k < b.size(); ++k) {
            const auto x = b.node(k);
            b.eval(x[0], x[1], n.data());
            for (int j = 0; j < b.size(); ++j) CHECK(n[j] == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-9));
        }
        b.eval(0.21, 0.37, n.data());
        b.grad(0.21, 0.37, dx.data(), dy.data());
        double s = 0, sx = 0, sy = 0;
        for (int j = 0; j < b.size(); ++j) {
            s += n[j];
            sx += dx[j];
            sy += dy[j];
        }
        CHECK(s == doctest::Approx(1.0));
        CHECK(std::fabs(sx) < 1e-9);
        CHECK(std::fabs(sy) < 1e-9);
    }
}

TEST_CASE("local ordering: vertices, edges from their first vertex, interior") {
    const LagrangeBasis b(3);
    CHECK(b.node(0) == std::array<double, 2>{0, 0});
    CHECK(b.node(1) == std::array<double, 2>{1, 0});
    CHECK(b.node(2) == std::array<double, 2>{0, 1});
    CHECK(b.node(3)[0] == doctest::Approx(1.0 / 3));  // v0 -> v1
    CHECK(b.node(5)[0] == doctest::Approx(2.0 / 3));  // v1 -> v2
    CHECK(b.node(7)[1] == doctest::Approx(2.0 / 3));  // v2 -> v0
    CHECK(b.node(9)[0] == doctest::Approx(1.0 / 3));
    CHECK(b.node(9)[1] == doctest::Approx(1.0 / 3));
}

TEST_CASE("gradients and Hessians match finite differences") {
    const double e = 1e-5;
    for (int p : {1, 2, 3, 5, 8}) {
        CAPTURE(p);
        const LagrangeBasis b(p);
        const int n = b.size();
        std::vector<double> f0(n), f1(n), dx(n), dy(n), hxx(n), hxy(n), hyy(n), gx0(n), gy0(n), gx1(n), gy1(n);
        const double x = 0.23, y = 0.41;
        b.grad(x, y, dx.data(), dy.data());
        b.hessian(x, y, hxx.data(), hxy.data(), hyy.data());
        b.eval(x + e, y, f1.data());
        b.eval(x - e, y, f0.data());
        for (int k = 0; k < n; ++k) CHECK(dx[k] == doctest::Approx((f1[k] - f0[k]) / (2 * e)).epsilon(1e-6));
        b.eval(x, y + e, f1.data());
        b.eval(x, y - e, f0.data());
        for (int k = 0; k < n; ++k) CHECK(dy[k] == doctest::Approx((f1[k] - f0[k]) / (2 * e)).epsilon(1e-6));
        b.grad(x + e, y, gx1.data(), gy1.data());
        b.grad(x - e, y, gx0.data(), gy0.data());
        for (int k = 0; k < n; ++k) {
            CHECK(hxx[k] == doctest::Approx((gx1[k] - gx0[k]) / (2 * e)).epsilon(1e-5).scale(1.0));
            CHECK(hxy[k] == doctest::Approx((gy1[k] - gy0[k]) / (2 * e)).epsilon(1e-5).scale(1.0));
        }
        b.grad(x, y + e, gx1.data(), gy1.data());
        b.grad(x, y - e, gx0.data(), gy0.data());
        for (int k = 0; k < n; ++k) CHECK(hyy[k] == doctest::Approx((gy1[k] - gy0[k]) / (2 * e)).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("reference stiffness of the linear element") {
    const LagrangeBasis b(1);
    // grad N0 = (-1,-1), N1 = (1,0), N2 = (0,1); reference area 1/2
    const std::vector<double> sxx{0.5, -0.5, 0, -0.5, 0.5, 0, 0, 0, 0};
    for (int i = 0; i < 9; ++i) CHECK(b.sxx()[i] == doctest::Approx(sxx[i]));
    CHECK(b.sxy()[0 * 3 + 2] == doctest::Approx(-0.5));
    CHECK(b.sxy()[1 * 3 + 2] == doctest::Approx(0.5));
    // rows of each block sum to zero (constants are in the kernel)
    const LagrangeBasis c(4);
    for (int i = 0; i < c.size(); ++i) {
        double r = 0;
        for (int j = 0; j < c.size(); ++j) r += c.sxx()[i * c.size() + j] + c.syy()[i * c.size() + j];
        CHECK(std::fabs(r) < 1e-11);
    }
}
