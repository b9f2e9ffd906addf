#pragma once

// Equispaced Lagrange elements on the reference triangle (0,0), (1,0), (0,1)
// and collapsed Gauss quadrature.

#include <array>
#include <vector>

namespace cfm {

struct QuadratureRule {
    std::vector<double> xi;
    std::vector<double> eta;
    std::vector<double> weight;  // sums to 1/2, the reference area

    [[nodiscard]] int size() const noexcept { return static_cast<int>(weight.size()); }
};

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Exact for polynomials of total degree <= `degree`.
[[nodiscard]] QuadratureRule triangle_quadrature(int degree);

/// Silvester product basis N = P_i(l0) P_j(l1) P_k(l2), i + j + k = p, with
/// l0 = 1 - xi - eta, l1 = xi, l2 = eta. Local ordering: the three vertices,
/// then p-1 nodes on each edge (v0v1, v1v2, v2v0, running from the first
/// vertex), then interior nodes.
class LagrangeBasis {
public:
    explicit LagrangeBasis(int order);

    [[nodiscard]] int order() const noexcept { return p_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(index_.size()); }
    [[nodiscard]] const std::array<int, 3>& multi_index(int k) const { return index_[k]; }
    /// Reference coordinates of local node k.
    [[nodiscard]] std::array<double, 2> node(int k) const;

    void eval(double xi, double eta, double* n) const;
    void grad(double xi, double eta, double* dxi, double* deta) const;
    void hessian(double xi, double eta, double* hxx, double* hxy, double* hyy) const;

    /// Reference stiffness blocks: S_ab[i][j] = int dN_i/da dN_j/db (row-major).
    [[nodiscard]] const std::vector<double>& sxx() const noexcept { return sxx_; }
    [[nodiscard]] const std::vector<double>& sxy() const noexcept { return sxy_; }
    [[nodiscard]] const std::vector<double>& syy() const noexcept { return syy_; }

private:
    void factors(double lambda, double* f, double* d1, double* d2) const;

    int p_;
    std::vector<std::array<int, 3>> index_;
    std::vector<double> sxx_, sxy_, syy_;
};

}  // namespace cfm
