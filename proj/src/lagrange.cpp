#include <cfm/lagrange.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cfm {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    // P_n(x) and P_n'(x) by the three-term recurrence
    auto legendre = [n](double x, double& dp) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        return p1;
    };
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            const double dx = legendre(x, dp) / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) break;
        }
        legendre(x, dp);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = weights[n - 1 - i] = 0.5 * w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.5;
}

QuadratureRule triangle_quadrature(int degree) {
    // collapsed square: xi = u, eta = v (1 - u), Jacobian 1 - u
    const int n = degree / 2 + 2;
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    QuadratureRule q;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const double u = x[a], v = x[b];
            q.xi.push_back(u);
            q.eta.push_back(v * (1.0 - u));
            q.weight.push_back(w[a] * w[b] * (1.0 - u));
        }
    }
    return q;
}

LagrangeBasis::LagrangeBasis(int order) : p_(order) {
    if (order < 1 || order > 10) throw std::invalid_argument("element order must lie in [1, 10]");
    const int p = p_;
    index_.push_back({p, 0, 0});
    index_.push_back({0, p, 0});
    index_.push_back({0, 0, p});
    // edges v0v1, v1v2, v2v0: k steps from the first vertex
    for (int k = 1; k < p; ++k) index_.push_back({p - k, k, 0});
    for (int k = 1; k < p; ++k) index_.push_back({0, p - k, k});
    for (int k = 1; k < p; ++k) index_.push_back({k, 0, p - k});
    for (int j = 1; j < p; ++j)
        for (int k = 1; j + k < p; ++k) index_.push_back({p - j - k, j, k});

    const int n = size();
    sxx_.assign(n * n, 0.0);
    sxy_.assign(n * n, 0.0);
    syy_.assign(n * n, 0.0);
    const QuadratureRule q = triangle_quadrature(2 * p);
    std::vector<double> dx(n), dy(n);
    for (int g = 0; g < q.size(); ++g) {
        grad(q.xi[g], q.eta[g], dx.data(), dy.data());
        const double w = q.weight[g];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                sxx_[i * n + j] += w * dx[i] * dx[j];
                sxy_[i * n + j] += w * dx[i] * dy[j];
                syy_[i * n + j] += w * dy[i] * dy[j];
            }
    }
}

std::array<double, 2> LagrangeBasis::node(int k) const {
    const auto& m = index_[k];
    return {static_cast<double>(m[1]) / p_, static_cast<double>(m[2]) / p_};
}

// P_n(l) = prod_{m<n} (p l - m) / (m + 1) for n = 0..p, with first and second derivatives.
void LagrangeBasis::factors(double lambda, double* f, double* d1, double* d2) const {
    const double p = p_;
    f[0] = 1.0;
    d1[0] = 0.0;
    d2[0] = 0.0;
    for (int k = 1; k <= p_; ++k) {
        const double a = (p * lambda - (k - 1)) / k;
        const double da = p / k;
        f[k] = f[k - 1] * a;
        d1[k] = d1[k - 1] * a + f[k - 1] * da;
        d2[k] = d2[k - 1] * a + 2.0 * d1[k - 1] * da;
    }
}

void LagrangeBasis::eval(double xi, double eta, double* n) const {
    double f0[11], f1[11], f2[11], g[11], h[11];
    factors(1.0 - xi - eta, f0, g, h);
    factors(xi, f1, g, h);
    factors(eta, f2, g, h);
    for (int k = 0; k < size(); ++k) {
        const auto& m = index_[k];
        n[k] = f0[m[0]] * f1[m[1]] * f2[m[2]];
    }
}

void LagrangeBasis::grad(double xi, double eta, double* dxi, double* deta) const {
    double a[11], da[11], b[11], db[11], c[11], dc[11], h[11];
    factors(1.0 - xi - eta, a, da, h);
    factors(xi, b, db, h);
    factors(eta, c, dc, h);
    for (int k = 0; k < size(); ++k) {
        const auto& m = index_[k];
        const double A = a[m[0]], B = b[m[1]], C = c[m[2]];
        const double Ad = da[m[0]];
        dxi[k] = -Ad * B * C + A * db[m[1]] * C;
        deta[k] = -Ad * B * C + A * B * dc[m[2]];
    }
}

void LagrangeBasis::hessian(double xi, double eta, double* hxx, double* hxy, double* hyy) const {
    double a[11], da[11], dda[11], b[11], db[11], ddb[11], c[11], dc[11], ddc[11];
    factors(1.0 - xi - eta, a, da, dda);
    factors(xi, b, db, ddb);
    factors(eta, c, dc, ddc);
    for (int k = 0; k < size(); ++k) {
        const auto& m = index_[k];
        const double A = a[m[0]], A1 = da[m[0]], A2 = dda[m[0]];
        const double B = b[m[1]], B1 = db[m[1]], B2 = ddb[m[1]];
        const double C = c[m[2]], C1 = dc[m[2]], C2 = ddc[m[2]];
        hxx[k] = A2 * B * C - 2.0 * A1 * B1 * C + A * B2 * C;
        hxy[k] = A2 * B * C - A1 * B1 * C - A1 * B * C1 + A * B1 * C1;
        hyy[k] = A2 * B * C - 2.0 * A1 * B * C1 + A * B * C2;
    }
}

}  // namespace cfm
