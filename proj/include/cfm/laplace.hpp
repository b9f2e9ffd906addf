#pragma once

// Lagrange finite elements for the Laplace equation with piecewise-constant
// Dirichlet data and homogeneous Neumann data, plus field evaluation.

#include <cfm/lagrange.hpp>
#include <cfm/mesh.hpp>

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfm {

class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Point inside a triangle, in reference coordinates.
struct ElementPoint {
    int triangle{-1};
    double xi{};
    double eta{};
};

// ---------------------------------------------------------------------------
// degree-of-freedom layout
// ---------------------------------------------------------------------------

/// Continuous order-p space on a mesh. Vertex dofs are the mesh node indices;
/// edge dofs follow, ordered from the smaller node index; interior dofs last.
class FeSpace {
public:
    FeSpace(std::shared_ptr<const Mesh> mesh, int order);

    [[nodiscard]] const Mesh& mesh() const noexcept { return *mesh_; }
    [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
    [[nodiscard]] int order() const noexcept { return basis_.order(); }
    [[nodiscard]] const LagrangeBasis& basis() const noexcept { return basis_; }
    [[nodiscard]] int dof_count() const noexcept { return ndof_; }
    [[nodiscard]] int local_size() const noexcept { return basis_.size(); }

    [[nodiscard]] std::span<const int> element_dofs(int t) const {
        return {dofs_.data() + static_cast<std::size_t>(t) * local_size(), static_cast<std::size_t>(local_size())};
    }
    /// Dofs on the mesh edge a-b listed from a to b (both vertices included).
    [[nodiscard]] std::vector<int> edge_dofs(int a, int b) const;
    [[nodiscard]] Vec2 dof_point(int dof) const { return dof_points_[dof]; }

    // geometry of the affine map x = p0 + J (xi, eta)
    [[nodiscard]] Vec2 to_physical(const ElementPoint& e) const;
    /// Inverse Jacobian transposed, row-major: grad_x = G grad_ref.
    [[nodiscard]] std::array<double, 4> inverse_jacobian_t(int t) const { return ginv_[t]; }
    [[nodiscard]] double jacobian_det(int t) const { return det_[t]; }

    /// Containing triangle, or nullopt. Points up to `slack` outside the mesh
    /// snap to the nearest triangle.
    [[nodiscard]] std::optional<ElementPoint> locate(Vec2 p, double slack = 0.0) const;
    /// Reference coordinates of p in triangle t (may lie outside [0,1]^2).
    [[nodiscard]] ElementPoint reference(int t, Vec2 p) const;
    /// Triangles incident to each node.
    [[nodiscard]] std::span<const int> node_triangles(int node) const {
        return {node_tri_.data() + node_tri_off_[node], static_cast<std::size_t>(node_tri_off_[node + 1] - node_tri_off_[node])};
    }

private:
    void build_grid();

    std::shared_ptr<const Mesh> mesh_;
    LagrangeBasis basis_;
    int ndof_{0};
    std::vector<int> dofs_;
    std::map<std::pair<int, int>, int> edge_base_;
    std::vector<Vec2> dof_points_;
    std::vector<std::array<double, 4>> ginv_;
    std::vector<double> det_;
    std::vector<int> node_tri_off_, node_tri_;
    // bucket grid for point location
    BBox box_;
    int gx_{1}, gy_{1};
    double cell_{1.0};
    std::vector<int> cell_off_, cell_tri_;
};

// ---------------------------------------------------------------------------
// boundary data and the solution
// ---------------------------------------------------------------------------

struct BoundaryCondition {
    std::map<EdgeTag, double> dirichlet;
    std::set<EdgeTag> neumann;
};

struct SolveStats {
    int dofs{};
    int unknowns{};
    double residual{};
    double energy{};
    std::string solver;
    double assembly_seconds{};
    double solve_seconds{};
    std::vector<std::string> warnings;
};

enum class Exec { serial, parallel };

struct SolveOptions {
    Exec exec{Exec::parallel};
    /// Direct factorization up to this many unknowns, CG beyond.
    int direct_limit{200'000};
    double cg_tolerance{1e-12};
};

struct FieldSample {
    double value{};
    Vec2 gradient{};
    int triangle{-1};
};

class PotentialField {
public:
    PotentialField() = default;
    PotentialField(std::shared_ptr<const FeSpace> space, std::vector<double> coeffs, BoundaryCondition bc,
                   SolveStats stats);

    [[nodiscard]] const FeSpace& space() const noexcept { return *space_; }
    [[nodiscard]] const std::shared_ptr<const FeSpace>& space_ptr() const noexcept { return space_; }
    [[nodiscard]] const Mesh& mesh() const noexcept { return space_->mesh(); }
    [[nodiscard]] int order() const noexcept { return space_->order(); }
    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return coeffs_; }
    [[nodiscard]] const BoundaryCondition& bc() const noexcept { return bc_; }
    [[nodiscard]] const SolveStats& stats() const noexcept { return stats_; }

    [[nodiscard]] FieldSample at(const ElementPoint& e) const;
    /// Second derivatives (uxx, uxy, uyy) on the element.
    [[nodiscard]] std::array<double, 3> hessian(const ElementPoint& e) const;

    /// Value and gradient at p. A nonzero `side` picks the element containing
    /// p + tiny * side, which disambiguates points on cut sides and element edges.
    [[nodiscard]] std::optional<FieldSample> sample(Vec2 p, Vec2 side = {}, double slack = 0.0) const;

    /// Returns this field scaled by s (coefficients and Dirichlet values).
    [[nodiscard]] PotentialField scaled(double s) const;

private:
    std::shared_ptr<const FeSpace> space_;
    std::vector<double> coeffs_;
    BoundaryCondition bc_;
    SolveStats stats_;
};

/// Galerkin solution of the Laplace equation. Every boundary tag of the mesh
/// must appear in exactly one of bc.dirichlet / bc.neumann.
[[nodiscard]] PotentialField solve_laplace(std::shared_ptr<const FeSpace> space, const BoundaryCondition& bc,
                                           const SolveOptions& options = {});
[[nodiscard]] PotentialField solve_laplace(const Mesh& mesh, const BoundaryCondition& bc, int order,
                                           const SolveOptions& options = {});

/// Integral of |grad u|^2, exact for the discrete field.
[[nodiscard]] double dirichlet_energy(const PotentialField& field);

/// Throws SolveError when p is outside the mesh.
[[nodiscard]] double evaluate(const PotentialField& field, Vec2 p);
[[nodiscard]] Vec2 gradient_at(const PotentialField& field, Vec2 p);

/// Largest excursion of the field outside [min, max] of its Dirichlet data,
/// over nodal values (order 1) or element quadrature points.
[[nodiscard]] double max_principle_violation(const PotentialField& field);

}  // namespace cfm
