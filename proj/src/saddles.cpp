#include <cfm/field_analysis.hpp>
#include <cfm/kernels.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cfm {

namespace {

// sqrt(2 * area) of the element containing p, a local length scale
double local_size(const PotentialField& f, Vec2 p) {
    const auto e = f.space().locate(p, 1e-9 * f.mesh().bbox().diameter());
    if (!e) return 0.0;
    return std::sqrt(2.0 * f.mesh().triangle_area(e->triangle));
}

double median_size(const Mesh& m) {
    std::vector<double> s(m.triangle_count());
    for (int t = 0; t < m.triangle_count(); ++t) s[t] = std::sqrt(2.0 * m.triangle_area(t));
    if (s.empty()) return 0.0;
    std::nth_element(s.begin(), s.begin() + s.size() / 2, s.end());
    return s[s.size() / 2];
}

}  // namespace

void classify_sectors(const PotentialField& field, Vec2 s, double radius, std::vector<Vec2>& ascent,
                      std::vector<Vec2>& descent) {
    ascent.clear();
    descent.clear();
    const auto c = field.sample(s);
    if (!c) return;
    constexpr int n = 96;
    std::vector<double> f(n);
    double fmax = 0.0;
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * std::numbers::pi * k / n;
        const auto q = field.sample(s + Vec2{std::cos(a), std::sin(a)} * radius);
        if (!q) return;
        f[k] = q->value - c->value;
        fmax = std::max(fmax, std::fabs(f[k]));
    }
    if (fmax == 0.0) return;
    // samples below the noise floor take the sign of their predecessor
    const double floor = 1e-3 * fmax;
    std::vector<int> sign(n, 0);
    for (int k = 0; k < n; ++k) sign[k] = f[k] > floor ? 1 : (f[k] < -floor ? -1 : 0);
    int first = -1;
    for (int k = 0; k < n && first < 0; ++k)
        if (sign[k] != 0) first = k;
    if (first < 0) return;
    for (int i = 1; i < n; ++i) {
        const int k = (first + i) % n;
        if (sign[k] == 0) sign[k] = sign[(k + n - 1) % n];
    }
    // start at a sign change so runs do not wrap
    int start = -1;
    for (int k = 0; k < n && start < 0; ++k)
        if (sign[k] != sign[(k + n - 1) % n]) start = k;
    if (start < 0) return;  // one sign all around: not a saddle
    int i = 0;
    while (i < n) {
        const int s0 = sign[(start + i) % n];
        int best = (start + i) % n;
        int j = i;
        while (j < n && sign[(start + j) % n] == s0) {
            const int k = (start + j) % n;
            if (std::fabs(f[k]) > std::fabs(f[best])) best = k;
            ++j;
        }
        const double a = 2.0 * std::numbers::pi * best / n;
        (s0 > 0 ? ascent : descent).push_back({std::cos(a), std::sin(a)});
        i = j;
    }
}

SaddleSearch find_saddles(const PotentialField& field, const SaddleOptions& options) {
    const Mesh& mesh = field.mesh();
    const BBox box = mesh.bbox();
    const double diam = box.diameter();
    double lo = 1e300, hi = -1e300;
    for (const auto& [tag, v] : field.bc().dirichlet) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    SaddleSearch out;
    // probe grid
    const double step = std::max(options.probe_fraction * median_size(mesh), 1e-4 * diam);
    const int nx = std::clamp(static_cast<int>((box.hi.x - box.lo.x) / step) + 1, 8, 2000);
    const int ny = std::clamp(static_cast<int>((box.hi.y - box.lo.y) / step) + 1, 8, 2000);
    const double dx = (box.hi.x - box.lo.x) / (nx - 1), dy = (box.hi.y - box.lo.y) / (ny - 1);
    std::vector<Vec2> probes(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) probes[static_cast<std::size_t>(j) * nx + i] = {box.lo.x + i * dx, box.lo.y + j * dy};
    const auto s = kernels::sample_field(field, probes, options.exec);
    out.probe_points = static_cast<int>(probes.size());
    for (std::size_t k = 0; k < probes.size(); ++k)
        if (s.valid[k]) out.max_gradient = std::max(out.max_gradient, norm(s.gradient[k]));
    out.eps2 = options.eps2_relative * out.max_gradient;

    auto gnorm = [&](int i, int j) { return norm(s.gradient[static_cast<std::size_t>(j) * nx + i]); };
    auto valid = [&](int i, int j) { return s.valid[static_cast<std::size_t>(j) * nx + i] != 0; };
    std::vector<Vec2> seeds;
    for (int j = 1; j + 1 < ny; ++j)
        for (int i = 1; i + 1 < nx; ++i) {
            if (!valid(i, j)) continue;
            const double g = gnorm(i, j);
            bool is_min = true;
            for (int b = -1; b <= 1 && is_min; ++b)
                for (int a = -1; a <= 1 && is_min; ++a) {
                    if (a == 0 && b == 0) continue;
                    if (!valid(i + a, j + b) || gnorm(i + a, j + b) < g) is_min = false;
                }
            if (is_min) seeds.push_back(probes[static_cast<std::size_t>(j) * nx + i]);
        }

    // Newton on grad u = 0
    struct Candidate {
        Vec2 x;
        double g;
    };
    std::vector<Candidate> found;
    const double trust = 2.0 * std::max(dx, dy);
    for (const Vec2 seed : seeds) {
        Vec2 x = seed;
        Vec2 best = x;
        double best_g = 1e300;
        for (int it = 0; it < 60; ++it) {
            const auto e = field.space().locate(x);
            if (!e) break;
            const FieldSample smp = field.at(*e);
            const double g = norm(smp.gradient);
            if (g < best_g) {
                best_g = g;
                best = x;
            }
            if (g <= out.eps2) break;
            const auto h = field.hessian(*e);
            const double det = h[0] * h[2] - h[1] * h[1];
            if (det == 0.0) break;
            Vec2 d{-(h[2] * smp.gradient.x - h[1] * smp.gradient.y) / det,
                   -(-h[1] * smp.gradient.x + h[0] * smp.gradient.y) / det};
            if (norm(d) > trust) d = d * (trust / norm(d));
            x += d;
            if (distance(x, seed) > 4.0 * trust) break;
        }
        ++out.candidates;
        // piecewise polynomial fields may stall across element edges
        if (best_g <= std::max(out.eps2, 1e-4 * out.max_gradient)) found.push_back({best, best_g});
    }

    // merge nearby candidates
    std::vector<int> group(found.size(), -1);
    int ngroups = 0;
    for (std::size_t a = 0; a < found.size(); ++a) {
        if (group[a] >= 0) continue;
        group[a] = ngroups;
        const double r = options.merge_factor * std::max(local_size(field, found[a].x), 1e-12 * diam);
        for (std::size_t b = a + 1; b < found.size(); ++b)
            if (group[b] < 0 && distance(found[a].x, found[b].x) <= r) group[b] = ngroups;
        ++ngroups;
    }

    double ball = 0.0;
    for (int gi = 0; gi < ngroups; ++gi) {
        std::vector<Vec2> pts;
        Vec2 c{};
        double g = 1e300;
        for (std::size_t a = 0; a < found.size(); ++a)
            if (group[a] == gi) {
                // distinct points only: repeated convergence to one point is not degeneracy
                bool dup = false;
                for (const Vec2 q : pts) dup = dup || distance(q, found[a].x) <= 1e-9 * diam;
                if (!dup) pts.push_back(found[a].x);
                if (found[a].g < g) {
                    g = found[a].g;
                    c = found[a].x;
                }
            }
        if (pts.size() > 1) {
            c = {};
            for (const Vec2 q : pts) c += q;
            c = c / static_cast<double>(pts.size());
        }
        const auto smp = field.sample(c);
        if (!smp) continue;
        const double v = smp->value;
        const double margin = 1e-9 * (hi - lo);
        if (!(v > lo + margin && v < hi - margin)) continue;
        const double hs = local_size(field, c);
        SaddlePoint sp;
        sp.location = c;
        sp.value = v;
        sp.gradient_norm = norm(smp->gradient);
        classify_sectors(field, c, hs, sp.ascent, sp.descent);
        if (sp.ascent.size() < 2 || sp.ascent.size() != sp.descent.size()) continue;
        out.saddles.push_back(sp);
        // inside radius eps2 / sqrt|det H| the gradient is below eps2; the ball
        // is never smaller than a quarter element
        const auto e = field.space().locate(c);
        const auto h = field.hessian(*e);
        const double sigma = std::sqrt(std::fabs(h[0] * h[2] - h[1] * h[1]));
        ball = std::max({ball, 0.25 * hs, sigma > 0 ? out.eps2 / sigma : 0.0});
    }
    std::sort(out.saddles.begin(), out.saddles.end(), [](const SaddlePoint& a, const SaddlePoint& b) {
        return a.location.x != b.location.x ? a.location.x < b.location.x : a.location.y < b.location.y;
    });
    out.ball_radius = ball;
    return out;
}

}  // namespace cfm
