#include <cfm/kernels.hpp>

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cfm::kernels {

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {

// ---------------------------------------------------------------------------
// per-item bodies shared by both paths
// ---------------------------------------------------------------------------

void stiffness_one(const FeSpace& space, int t, double* out) {
    const LagrangeBasis& b = space.basis();
    const int n = b.size();
    const auto g = space.inverse_jacobian_t(t);
    // grad_x = G grad_ref, so K = |det J| grad_ref^T (G^T G) grad_ref
    const double cxx = g[0] * g[0] + g[2] * g[2];
    const double cxy = g[0] * g[1] + g[2] * g[3];
    const double cyy = g[1] * g[1] + g[3] * g[3];
    const double w = std::fabs(space.jacobian_det(t));
    const double* sxx = b.sxx().data();
    const double* sxy = b.sxy().data();
    const double* syy = b.syy().data();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out[i * n + j] = w * (cxx * sxx[i * n + j] + cxy * (sxy[i * n + j] + sxy[j * n + i]) + cyy * syy[i * n + j]);
}

double energy_one(const FeSpace& space, const double* coeffs, int t, std::vector<double>& ke) {
    const int n = space.local_size();
    stiffness_one(space, t, ke.data());
    const auto dofs = space.element_dofs(t);
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += ke[i * n + j] * coeffs[dofs[j]];
        e += coeffs[dofs[i]] * row;
    }
    return e;
}

void sample_one(const PotentialField& f, Vec2 p, FieldSamples& out, std::size_t i) {
    const auto s = f.sample(p);
    out.valid[i] = s.has_value();
    if (s) {
        out.value[i] = s->value;
        out.gradient[i] = s->gradient;
    }
}

void cr_one(const PotentialField& u, const PotentialField& w, double scale, Vec2 p, CrSamples& out, std::size_t i) {
    const auto a = u.sample(p);
    const auto b = w.sample(p);
    out.valid[i] = a.has_value() && b.has_value();
    if (!out.valid[i]) return;
    const Vec2 gu = a->gradient, gv = b->gradient * scale;
    out.r1[i] = std::fabs(gu.x - gv.y);
    out.r2[i] = std::fabs(gu.y + gv.x);
    out.ux[i] = std::fabs(gu.x);
    out.vy[i] = std::fabs(gv.y);
}

}  // namespace

// ---------------------------------------------------------------------------
// drivers
// ---------------------------------------------------------------------------

std::vector<double> element_stiffness(const FeSpace& space, Exec exec) {
    const int nt = space.mesh().triangle_count();
    const std::size_t n2 = static_cast<std::size_t>(space.local_size()) * space.local_size();
    std::vector<double> out(n2 * nt);
    if (exec == Exec::serial) {
        for (int t = 0; t < nt; ++t) stiffness_one(space, t, out.data() + n2 * t);
    } else {
#pragma omp parallel for schedule(static)
        for (int t = 0; t < nt; ++t) stiffness_one(space, t, out.data() + n2 * t);
    }
    return out;
}

double energy(const FeSpace& space, std::span<const double> coeffs, Exec exec) {
    const int nt = space.mesh().triangle_count();
    const int n = space.local_size();
    std::vector<double> per(nt);
    if (exec == Exec::serial) {
        std::vector<double> ke(static_cast<std::size_t>(n) * n);
        for (int t = 0; t < nt; ++t) per[t] = energy_one(space, coeffs.data(), t, ke);
    } else {
#pragma omp parallel
        {
            std::vector<double> ke(static_cast<std::size_t>(n) * n);
#pragma omp for schedule(static)
            for (int t = 0; t < nt; ++t) per[t] = energy_one(space, coeffs.data(), t, ke);
        }
    }
    double sum = 0.0;
    for (double e : per) sum += e;
    return sum;
}

FieldSamples sample_field(const PotentialField& field, std::span<const Vec2> points, Exec exec) {
    const std::size_t n = points.size();
    FieldSamples out;
    out.value.assign(n, 0.0);
    out.gradient.assign(n, Vec2{});
    out.valid.assign(n, 0);
    const long long m = static_cast<long long>(n);
    if (exec == Exec::serial) {
        for (long long i = 0; i < m; ++i) sample_one(field, points[i], out, i);
    } else {
#pragma omp parallel for schedule(dynamic, 64)
        for (long long i = 0; i < m; ++i) sample_one(field, points[i], out, i);
    }
    return out;
}

CrSamples cauchy_riemann(const PotentialField& u, const PotentialField& w, double scale, std::span<const Vec2> points,
                         Exec exec) {
    const std::size_t n = points.size();
    CrSamples out;
    out.r1.assign(n, 0.0);
    out.r2.assign(n, 0.0);
    out.ux.assign(n, 0.0);
    out.vy.assign(n, 0.0);
    out.valid.assign(n, 0);
    const long long m = static_cast<long long>(n);
    if (exec == Exec::serial) {
        for (long long i = 0; i < m; ++i) cr_one(u, w, scale, points[i], out, i);
    } else {
#pragma omp parallel for schedule(dynamic, 64)
        for (long long i = 0; i < m; ++i) cr_one(u, w, scale, points[i], out, i);
    }
    return out;
}

}  // namespace cfm::kernels
