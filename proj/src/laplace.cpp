#include <cfm/laplace.hpp>

#include <cfm/geometry.hpp>
#include <cfm/kernels.hpp>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace cfm {

namespace {

constexpr int max_local = 66;  // order 10

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double point_triangle_distance(Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
    if (orient(a, b, p) >= 0 && orient(b, c, p) >= 0 && orient(c, a, p) >= 0) return 0.0;
    return std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c), point_segment_distance(p, c, a)});
}

}  // namespace

// ---------------------------------------------------------------------------
// FeSpace
// ---------------------------------------------------------------------------

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, int order) : mesh_(std::move(mesh)), basis_(order) {
    if (!mesh_) throw SolveError("FeSpace: null mesh");
    const Mesh& m = *mesh_;
    const int p = order;
    const int nloc = basis_.size();
    const int nt = m.triangle_count();
    ndof_ = m.node_count();

    for (int t = 0; t < nt; ++t)
        for (int e = 0; e < 3; ++e) {
            const int a = m.triangles[t][e], b = m.triangles[t][(e + 1) % 3];
            const auto key = std::minmax(a, b);
            if (edge_base_.emplace(key, ndof_).second) ndof_ += p - 1;
        }
    const int ninterior = (p - 1) * (p - 2) / 2;

    dofs_.resize(static_cast<std::size_t>(nt) * nloc);
    for (int t = 0; t < nt; ++t) {
        int* d = dofs_.data() + static_cast<std::size_t>(t) * nloc;
        const auto& v = m.triangles[t];
        d[0] = v[0];
        d[1] = v[1];
        d[2] = v[2];
        for (int e = 0; e < 3; ++e) {
            const int a = v[e], b = v[(e + 1) % 3];
            const int base = edge_base_.at(std::minmax(a, b));
            for (int k = 1; k < p; ++k) d[3 + e * (p - 1) + (k - 1)] = a < b ? base + k - 1 : base + (p - 1 - k);
        }
        for (int k = 0; k < ninterior; ++k) d[3 + 3 * (p - 1) + k] = ndof_ + k;
        ndof_ += ninterior;
    }

    ginv_.resize(nt);
    det_.resize(nt);
    for (int t = 0; t < nt; ++t) {
        const Vec2 p0 = m.nodes[m.triangles[t][0]], p1 = m.nodes[m.triangles[t][1]], p2 = m.nodes[m.triangles[t][2]];
        const double j00 = p1.x - p0.x, j01 = p2.x - p0.x, j10 = p1.y - p0.y, j11 = p2.y - p0.y;
        const double det = j00 * j11 - j01 * j10;
        if (!(det > 0.0)) throw SolveError("triangle " + std::to_string(t) + " is degenerate or clockwise");
        det_[t] = det;
        // J^{-T}
        ginv_[t] = {j11 / det, -j10 / det, -j01 / det, j00 / det};
    }

    dof_points_.assign(ndof_, Vec2{});
    for (int t = 0; t < nt; ++t) {
        const auto d = element_dofs(t);
        for (int k = 0; k < nloc; ++k) {
            const auto r = basis_.node(k);
            dof_points_[d[k]] = to_physical({t, r[0], r[1]});
        }
    }

    node_tri_off_.assign(m.node_count() + 1, 0);
    for (const auto& tri : m.triangles)
        for (int v : tri) ++node_tri_off_[v + 1];
    std::partial_sum(node_tri_off_.begin(), node_tri_off_.end(), node_tri_off_.begin());
    node_tri_.resize(node_tri_off_.back());
    std::vector<int> fill(node_tri_off_.begin(), node_tri_off_.end() - 1);
    for (int t = 0; t < nt; ++t)
        for (int v : m.triangles[t]) node_tri_[fill[v]++] = t;

    build_grid();
}

std::vector<int> FeSpace::edge_dofs(int a, int b) const {
    const auto it = edge_base_.find(std::minmax(a, b));
    if (it == edge_base_.end()) throw SolveError("edge_dofs: not a mesh edge");
    const int p = order();
    std::vector<int> out;
    out.reserve(p + 1);
    out.push_back(a);
    for (int k = 1; k < p; ++k) out.push_back(a < b ? it->second + k - 1 : it->second + (p - 1 - k));
    out.push_back(b);
    return out;
}

Vec2 FeSpace::to_physical(const ElementPoint& e) const {
    const auto& v = mesh_->triangles[e.triangle];
    const Vec2 p0 = mesh_->nodes[v[0]];
    return p0 + (mesh_->nodes[v[1]] - p0) * e.xi + (mesh_->nodes[v[2]] - p0) * e.eta;
}

ElementPoint FeSpace::reference(int t, Vec2 p) const {
    const Vec2 d = p - mesh_->nodes[mesh_->triangles[t][0]];
    const auto& g = ginv_[t];
    // (xi, eta) = J^{-1} d, and J^{-1} is the transpose of g
    return {t, g[0] * d.x + g[2] * d.y, g[1] * d.x + g[3] * d.y};
}

void FeSpace::build_grid() {
    const Mesh& m = *mesh_;
    box_ = m.bbox();
    const int nt = m.triangle_count();
    const double w = std::max(box_.hi.x - box_.lo.x, 1e-300), h = std::max(box_.hi.y - box_.lo.y, 1e-300);
    cell_ = std::sqrt(w * h / std::max(nt, 1)) * 1.5;
    gx_ = std::clamp(static_cast<int>(w / cell_) + 1, 1, 4096);
    gy_ = std::clamp(static_cast<int>(h / cell_) + 1, 1, 4096);
    cell_ = std::max(w / gx_, h / gy_) * (1.0 + 1e-12);
    auto range = [&](int t, int& x0, int& x1, int& y0, int& y1) {
        BBox b;
        for (int v : m.triangles[t]) b.add(m.nodes[v]);
        x0 = std::clamp(static_cast<int>((b.lo.x - box_.lo.x) / cell_), 0, gx_ - 1);
        x1 = std::clamp(static_cast<int>((b.hi.x - box_.lo.x) / cell_), 0, gx_ - 1);
        y0 = std::clamp(static_cast<int>((b.lo.y - box_.lo.y) / cell_), 0, gy_ - 1);
        y1 = std::clamp(static_cast<int>((b.hi.y - box_.lo.y) / cell_), 0, gy_ - 1);
    };
    cell_off_.assign(static_cast<std::size_t>(gx_) * gy_ + 1, 0);
    for (int t = 0; t < nt; ++t) {
        int x0, x1, y0, y1;
        range(t, x0, x1, y0, y1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) ++cell_off_[static_cast<std::size_t>(y) * gx_ + x + 1];
    }
    std::partial_sum(cell_off_.begin(), cell_off_.end(), cell_off_.begin());
    cell_tri_.resize(cell_off_.back());
    std::vector<int> fill(cell_off_.begin(), cell_off_.end() - 1);
    for (int t = 0; t < nt; ++t) {
        int x0, x1, y0, y1;
        range(t, x0, x1, y0, y1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) cell_tri_[fill[static_cast<std::size_t>(y) * gx_ + x]++] = t;
    }
}

std::optional<ElementPoint> FeSpace::locate(Vec2 p, double slack) const {
    if (!box_.contains(p, slack + 1e-12 * box_.diameter())) return std::nullopt;
    const int cx = std::clamp(static_cast<int>((p.x - box_.lo.x) / cell_), 0, gx_ - 1);
    const int cy = std::clamp(static_cast<int>((p.y - box_.lo.y) / cell_), 0, gy_ - 1);
    const std::size_t c = static_cast<std::size_t>(cy) * gx_ + cx;
    std::optional<ElementPoint> best;
    double best_min = -1e-10;
    for (int k = cell_off_[c]; k < cell_off_[c + 1]; ++k) {
        const ElementPoint e = reference(cell_tri_[k], p);
        const double lmin = std::min({1.0 - e.xi - e.eta, e.xi, e.eta});
        if (lmin >= best_min) {
            best_min = lmin;
            best = e;
            if (lmin > 1e-9) break;
        }
    }
    if (best || !(slack > 0.0)) return best;

    const Mesh& m = *mesh_;
    const int r = static_cast<int>(slack / cell_) + 1;
    double dmin = slack;
    int tmin = -1;
    for (int y = std::max(cy - r, 0); y <= std::min(cy + r, gy_ - 1); ++y)
        for (int x = std::max(cx - r, 0); x <= std::min(cx + r, gx_ - 1); ++x) {
            const std::size_t cc = static_cast<std::size_t>(y) * gx_ + x;
            for (int k = cell_off_[cc]; k < cell_off_[cc + 1]; ++k) {
                const auto& v = m.triangles[cell_tri_[k]];
                const double d = point_triangle_distance(p, m.nodes[v[0]], m.nodes[v[1]], m.nodes[v[2]]);
                if (d <= dmin) {
                    dmin = d;
                    tmin = cell_tri_[k];
                }
            }
        }
    if (tmin < 0) return std::nullopt;
    return reference(tmin, p);
}

// ---------------------------------------------------------------------------
// PotentialField
// ---------------------------------------------------------------------------

PotentialField::PotentialField(std::shared_ptr<const FeSpace> space, std::vector<double> coeffs, BoundaryCondition bc,
                               SolveStats stats)
    : space_(std::move(space)), coeffs_(std::move(coeffs)), bc_(std::move(bc)), stats_(std::move(stats)) {
    if (!space_ || static_cast<int>(coeffs_.size()) != space_->dof_count())
        throw SolveError("PotentialField: coefficient count does not match the space");
}

FieldSample PotentialField::at(const ElementPoint& e) const {
    const LagrangeBasis& b = space_->basis();
    const int n = b.size();
    double dx[max_local], dy[max_local], nv[max_local];
    b.eval(e.xi, e.eta, nv);
    b.grad(e.xi, e.eta, dx, dy);
    const auto dofs = space_->element_dofs(e.triangle);
    double v = 0, gx = 0, gy = 0;
    for (int k = 0; k < n; ++k) {
        const double c = coeffs_[dofs[k]];
        v += c * nv[k];
        gx += c * dx[k];
        gy += c * dy[k];
    }
    const auto g = space_->inverse_jacobian_t(e.triangle);
    return {v, {g[0] * gx + g[1] * gy, g[2] * gx + g[3] * gy}, e.triangle};
}

std::array<double, 3> PotentialField::hessian(const ElementPoint& e) const {
    const LagrangeBasis& b = space_->basis();
    const int n = b.size();
    double hxx[max_local], hxy[max_local], hyy[max_local];
    b.hessian(e.xi, e.eta, hxx, hxy, hyy);
    const auto dofs = space_->element_dofs(e.triangle);
    double a = 0, c = 0, d = 0;
    for (int k = 0; k < n; ++k) {
        const double u = coeffs_[dofs[k]];
        a += u * hxx[k];
        c += u * hxy[k];
        d += u * hyy[k];
    }
    // H_x = G H_ref G^T
    const auto g = space_->inverse_jacobian_t(e.triangle);
    const double r00 = g[0] * a + g[1] * c, r01 = g[0] * c + g[1] * d;
    const double r10 = g[2] * a + g[3] * c, r11 = g[2] * c + g[3] * d;
    return {r00 * g[0] + r01 * g[1], r00 * g[2] + r01 * g[3], r10 * g[2] + r11 * g[3]};
}

std::optional<FieldSample> PotentialField::sample(Vec2 p, Vec2 side, double slack) const {
    if (side.x != 0.0 || side.y != 0.0) {
        const double delta = 1e-10 * (1.0 + space_->mesh().bbox().diameter());
        if (const auto e = space_->locate(p + normalized(side) * delta))
            return at(space_->reference(e->triangle, p));
    }
    const auto e = space_->locate(p, slack);
    if (!e) return std::nullopt;
    return at(*e);
}

PotentialField PotentialField::scaled(double s) const {
    PotentialField out = *this;
    for (double& c : out.coeffs_) c *= s;
    for (auto& [tag, v] : out.bc_.dirichlet) v *= s;
    out.stats_.energy *= s * s;
    return out;
}

// ---------------------------------------------------------------------------
// solver
// ---------------------------------------------------------------------------

PotentialField solve_laplace(std::shared_ptr<const FeSpace> space, const BoundaryCondition& bc,
                             const SolveOptions& options) {
    using Clock = std::chrono::steady_clock;
    const FeSpace& fs = *space;
    const Mesh& mesh = fs.mesh();
    const int ndof = fs.dof_count();
    SolveStats stats;
    stats.dofs = ndof;

    for (const auto& [tag, v] : bc.dirichlet)
        if (bc.neumann.count(tag)) throw SolveError("boundary tag " + to_string(tag) + " is both Dirichlet and Neumann");
    std::set<EdgeTag> used;
    for (const auto& e : mesh.boundary_edges) {
        if (!bc.dirichlet.count(e.tag) && !bc.neumann.count(e.tag))
            throw SolveError("boundary tag " + to_string(e.tag) + " has no boundary condition");
        used.insert(e.tag);
    }
    for (const auto& [tag, v] : bc.dirichlet)
        if (!used.count(tag)) stats.warnings.push_back("Dirichlet tag " + to_string(tag) + " is not on the mesh");

    // Dirichlet dofs
    constexpr double unset = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> fixed(ndof, unset);
    bool conflict = false;
    for (const auto& e : mesh.boundary_edges) {
        const auto it = bc.dirichlet.find(e.tag);
        if (it == bc.dirichlet.end()) continue;
        for (int d : fs.edge_dofs(e.a, e.b)) {
            if (std::isnan(fixed[d])) fixed[d] = it->second;
            else if (fixed[d] != it->second) conflict = true;
        }
    }
    if (conflict) stats.warnings.push_back("node shared by Dirichlet arcs with different values; first value kept");

    double lo = 1e300, hi = -1e300;
    for (double v : fixed)
        if (!std::isnan(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (lo > hi) throw SolveError("no Dirichlet data on the mesh");

    // every connected piece of the mesh needs Dirichlet data
    {
        std::vector<int> parent(mesh.node_count());
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const auto& t : mesh.triangles) {
            parent[find(t[1])] = find(t[0]);
            parent[find(t[2])] = find(t[0]);
        }
        std::vector<char> anchored(mesh.node_count(), 0);
        for (int v = 0; v < mesh.node_count(); ++v)
            if (!std::isnan(fixed[v])) anchored[find(v)] = 1;
        for (const auto& t : mesh.triangles)
            if (!anchored[find(t[0])]) throw SolveError("singular system: a mesh component has no Dirichlet data");
    }

    std::vector<int> unknown(ndof, -1);
    int nu = 0;
    for (int d = 0; d < ndof; ++d)
        if (std::isnan(fixed[d])) unknown[d] = nu++;
    stats.unknowns = nu;

    std::vector<double> coeffs(ndof, 0.0);
    for (int d = 0; d < ndof; ++d)
        if (!std::isnan(fixed[d])) coeffs[d] = fixed[d];

    if (hi == lo) {
        stats.warnings.push_back("all Dirichlet values are equal; the solution is constant");
        std::fill(coeffs.begin(), coeffs.end(), lo);
        stats.solver = "constant";
        return PotentialField(std::move(space), std::move(coeffs), bc, std::move(stats));
    }

    auto t0 = Clock::now();
    const std::vector<double> ke = kernels::element_stiffness(fs, options.exec);
    const int n = fs.local_size();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.triangle_count()) * n * n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto dofs = fs.element_dofs(t);
        const double* k = ke.data() + static_cast<std::size_t>(t) * n * n;
        for (int i = 0; i < n; ++i) {
            const int ri = unknown[dofs[i]];
            if (ri < 0) continue;
            for (int j = 0; j < n; ++j) {
                const int cj = unknown[dofs[j]];
                if (cj >= 0) trip.emplace_back(ri, cj, k[i * n + j]);
                else rhs[ri] -= k[i * n + j] * coeffs[dofs[j]];
            }
        }
    }
    Eigen::SparseMatrix<double> a(nu, nu);
    a.setFromTriplets(trip.begin(), trip.end());
    trip.clear();
    trip.shrink_to_fit();
    stats.assembly_seconds = seconds_since(t0);

    t0 = Clock::now();
    Eigen::VectorXd x;
    if (nu > 0) {
        if (nu <= options.direct_limit) {
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(a);
            if (ldlt.info() != Eigen::Success) throw SolveError("sparse factorization failed");
            x = ldlt.solve(rhs);
            stats.solver = "sparse LDLT";
        } else {
            Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                     Eigen::DiagonalPreconditioner<double>>
                cg(a);
            cg.setTolerance(options.cg_tolerance);
            cg.setMaxIterations(std::max(1000, 20 * nu));
            x = cg.solve(rhs);
            if (cg.info() != Eigen::Success) throw SolveError("conjugate gradients did not converge");
            stats.solver = "diagonal-preconditioned CG";
        }
        const double bn = rhs.norm();
        stats.residual = bn > 0 ? (a * x - rhs).norm() / bn : (a * x).norm();
        if (!(stats.residual <= 1e-10))
            throw SolveError("linear solve residual " + std::to_string(stats.residual) + " exceeds 1e-10");
        for (int d = 0; d < ndof; ++d)
            if (unknown[d] >= 0) coeffs[d] = x[unknown[d]];
    }
    stats.solve_seconds = seconds_since(t0);
    stats.energy = kernels::energy(fs, coeffs, options.exec);
    return PotentialField(std::move(space), std::move(coeffs), bc, std::move(stats));
}

PotentialField solve_laplace(const Mesh& mesh, const BoundaryCondition& bc, int order, const SolveOptions& options) {
    auto space = std::make_shared<const FeSpace>(std::make_shared<const Mesh>(mesh), order);
    return solve_laplace(std::move(space), bc, options);
}

double dirichlet_energy(const PotentialField& field) { return field.stats().energy; }

double evaluate(const PotentialField& field, Vec2 p) {
    const auto s = field.sample(p);
    if (!s) throw SolveError("point outside the mesh");
    return s->value;
}

Vec2 gradient_at(const PotentialField& field, Vec2 p) {
    const auto s = field.sample(p);
    if (!s) throw SolveError("point outside the mesh");
    return s->gradient;
}

double max_principle_violation(const PotentialField& field) {
    double lo = 1e300, hi = -1e300;
    for (const auto& [tag, v] : field.bc().dirichlet) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double worst = 0.0;
    auto check = [&](double v) { worst = std::max({worst, v - hi, lo - v}); };
    if (field.order() == 1) {
        for (double c : field.coefficients()) check(c);
        return worst;
    }
    const QuadratureRule q = triangle_quadrature(2 * field.order() + 2);
    for (int t = 0; t < field.mesh().triangle_count(); ++t)
        for (int g = 0; g < q.size(); ++g) check(field.at({t, q.xi[g], q.eta[g]}).value);
    return worst;
}

}  // namespace cfm
