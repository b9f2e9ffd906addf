#include <cfm/field_analysis.hpp>

#include <cfm/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace cfm {

namespace {

std::pair<double, double> dirichlet_range(const PotentialField& f) {
    double lo = 1e300, hi = -1e300;
    for (const auto& [tag, v] : f.bc().dirichlet) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

// local basis index of lattice point (i, j), i.e. reference point (i/p, j/p)
std::vector<int> lattice_table(const LagrangeBasis& b) {
    const int p = b.order();
    std::vector<int> lat((p + 1) * (p + 1), -1);
    for (int k = 0; k < b.size(); ++k) {
        const auto& m = b.multi_index(k);
        lat[m[1] * (p + 1) + m[2]] = k;
    }
    return lat;
}

struct PolyPos {
    int seg{};
    double frac{};
    [[nodiscard]] double key() const { return seg + frac; }
};

double segment_flux(const PotentialField& f, Vec2 a, Vec2 b, const std::vector<double>& x,
                    const std::vector<double>& w, bool magnitude) {
    const Vec2 t = b - a;
    const double len = norm(t);
    if (len == 0.0) return 0.0;
    const Vec2 n = perp(t) / len;
    const double slack = 1e-9 * (1.0 + f.mesh().bbox().diameter());
    double s = 0.0;
    for (std::size_t g = 0; g < x.size(); ++g) {
        const Vec2 p = a + t * x[g];
        // the left normal decides the element for points on cut sides
        auto smp = f.sample(p, n, slack);
        if (!smp) smp = f.sample(p, {}, 1e3 * slack);
        if (!smp) throw AnalysisError("flux integral: contour leaves the domain");
        s += w[g] * (magnitude ? norm(smp->gradient) : dot(smp->gradient, n));
    }
    return s * len;
}

double polyline_flux(const PotentialField& f, std::span<const Vec2> pts, bool closed, int gauss, bool magnitude) {
    std::vector<double> x, w;
    gauss_legendre(gauss, x, w);
    const std::size_t n = pts.size();
    if (n < 2) return 0.0;
    double s = 0.0;
    const std::size_t m = closed ? n : n - 1;
    for (std::size_t i = 0; i < m; ++i) s += segment_flux(f, pts[i], pts[(i + 1) % n], x, w, magnitude);
    return s;
}

// flux over the part of a closed polyline from position a forward to position b
double piece_flux(const PotentialField& f, const std::vector<Vec2>& pts, PolyPos a, PolyPos b, bool full) {
    std::vector<double> x, w;
    gauss_legendre(6, x, w);
    const int n = static_cast<int>(pts.size());
    auto at = [&](PolyPos q) { return pts[q.seg] + (pts[(q.seg + 1) % n] - pts[q.seg]) * q.frac; };
    if (!full && a.seg == b.seg && a.frac <= b.frac) return segment_flux(f, at(a), at(b), x, w, false);
    double s = segment_flux(f, at(a), pts[(a.seg + 1) % n], x, w, false);
    int i = (a.seg + 1) % n;
    for (int guard = 0; i != b.seg && guard <= n; ++guard, i = (i + 1) % n)
        s += segment_flux(f, pts[i], pts[(i + 1) % n], x, w, false);
    s += segment_flux(f, pts[b.seg], at(b), x, w, false);
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// marching triangles
// ---------------------------------------------------------------------------

std::vector<ContourLine> extract_contours(const PotentialField& field, double level) {
    const auto [lo, hi] = dirichlet_range(field);
    if (!(level > lo && level < hi))
        throw AnalysisError("contour level must lie strictly between the Dirichlet values");
    const FeSpace& fs = field.space();
    const LagrangeBasis& basis = fs.basis();
    const int p = basis.order();
    const auto lat = lattice_table(basis);
    const auto& c = field.coefficients();
    const double diam = field.mesh().bbox().diameter();

    std::unordered_map<std::uint64_t, int> ids;
    std::vector<Vec2> pts;
    std::vector<int> next, prev;

    auto crossing = [&](int t, int ga, int gb) {
        const std::uint64_t key = (static_cast<std::uint64_t>(std::min(ga, gb)) << 32) | std::max(ga, gb);
        const auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        const Vec2 pa = fs.dof_point(ga), pb = fs.dof_point(gb);
        const double s = (level - c[ga]) / (c[gb] - c[ga]);
        Vec2 x = pa + (pb - pa) * s;
        // Newton projection onto the level, kept inside this element
        const double reach = distance(pa, pb);
        Vec2 y = x;
        bool ok = true;
        for (int k = 0; k < 8; ++k) {
            const ElementPoint e = fs.reference(t, y);
            if (std::min({e.xi, e.eta, 1.0 - e.xi - e.eta}) < -1e-3) {
                ok = false;
                break;
            }
            const FieldSample smp = field.at(e);
            const double r = smp.value - level;
            const double g2 = norm2(smp.gradient);
            if (std::fabs(r) <= 1e-15 * (hi - lo) || g2 == 0.0) break;
            y -= smp.gradient * (r / g2);
            if (distance(x, y) > reach) {
                ok = false;
                break;
            }
        }
        if (ok) x = y;
        const int id = static_cast<int>(pts.size());
        ids.emplace(key, id);
        pts.push_back(x);
        next.push_back(-1);
        prev.push_back(-1);
        return id;
    };

    for (int t = 0; t < fs.mesh().triangle_count(); ++t) {
        const auto dofs = fs.element_dofs(t);
        auto g = [&](int i, int j) { return dofs[lat[i * (p + 1) + j]]; };
        auto march = [&](int g0, int g1, int g2) {
            const int v[3] = {g0, g1, g2};
            const bool up[3] = {c[g0] >= level, c[g1] >= level, c[g2] >= level};
            if (up[0] == up[1] && up[1] == up[2]) return;
            int rising = -1, falling = -1;
            for (int k = 0; k < 3; ++k) {
                const int a = v[k], b = v[(k + 1) % 3];
                if (!up[k] && up[(k + 1) % 3]) rising = crossing(t, a, b);
                if (up[k] && !up[(k + 1) % 3]) falling = crossing(t, a, b);
            }
            // higher values on the left: from the falling crossing to the rising one
            next[falling] = rising;
            prev[rising] = falling;
        };
        for (int j = 0; j < p; ++j)
            for (int i = 0; i + j < p; ++i) {
                march(g(i, j), g(i + 1, j), g(i, j + 1));
                if (i + j <= p - 2) march(g(i + 1, j), g(i + 1, j + 1), g(i, j + 1));
            }
    }

    const auto holes = hole_points(field.mesh());
    std::vector<ContourLine> out;
    std::vector<char> used(pts.size(), 0);
    const double dup = 1e-13 * diam;
    auto follow = [&](int start, bool closed) {
        ContourLine cl;
        cl.level = level;
        cl.closed = closed;
        int k = start;
        while (k >= 0 && !used[k]) {
            used[k] = 1;
            if (cl.points.empty() || distance(cl.points.back(), pts[k]) > dup) cl.points.push_back(pts[k]);
            k = next[k];
        }
        if (closed && cl.points.size() > 1 && distance(cl.points.front(), cl.points.back()) <= dup)
            cl.points.pop_back();
        if (closed)
            for (const auto& [tag, q] : holes)
                if (point_in_polygon(q, cl.points)) cl.encloses.push_back(tag);
        if (cl.points.size() >= 2) out.push_back(std::move(cl));
    };
    for (int k = 0; k < static_cast<int>(pts.size()); ++k)
        if (prev[k] < 0 && !used[k]) follow(k, false);
    for (int k = 0; k < static_cast<int>(pts.size()); ++k)
        if (!used[k]) follow(k, true);
    return out;
}

double flux_integral(const PotentialField& field, std::span<const Vec2> points, bool closed, int gauss_points) {
    return polyline_flux(field, points, closed, gauss_points, false);
}

double gradient_norm_integral(const PotentialField& field, std::span<const Vec2> points, bool closed,
                              int gauss_points) {
    return polyline_flux(field, points, closed, gauss_points, true);
}

std::map<int, Vec2> hole_points(const Mesh& mesh) {
    std::map<int, Vec2> out;
    for (const auto& cyc : boundary_cycles(mesh)) {
        const EdgeTag& tag = mesh.boundary_edges[cyc.front()].tag;
        if (tag.is_cut() || tag.id == 0) continue;
        bool pure = true;
        std::vector<Vec2> poly;
        for (int e : cyc) {
            pure = pure && !mesh.boundary_edges[e].tag.is_cut() && mesh.boundary_edges[e].tag.id == tag.id;
            poly.push_back(mesh.nodes[mesh.boundary_edges[e].a]);
        }
        if (pure) out[tag.id] = interior_point(poly);
    }
    return out;
}

// ---------------------------------------------------------------------------
// jumps
// ---------------------------------------------------------------------------

JumpResult jump_decomposition(const PotentialField& field, std::span<const CutArc> arcs, std::span<const HoleRun> runs,
                              std::map<int, double> levels) {
    const auto [lo, hi] = dirichlet_range(field);
    JumpResult res;
    std::map<int, ContourLine> contour;
    std::map<int, std::map<int, PolyPos>> cross;  // hole -> arc -> position on its contour

    std::vector<int> hole_ids;
    for (const auto& r : runs)
        if (std::find(hole_ids.begin(), hole_ids.end(), r.hole) == hole_ids.end()) hole_ids.push_back(r.hole);

    for (int j : hole_ids) {
        if (!levels.count(j)) throw AnalysisError("no contour level for hole " + std::to_string(j));
        double level = levels[j];
        std::optional<ContourLine> found;
        for (int attempt = 0; attempt < 2 && !found; ++attempt) {
            for (auto& cl : extract_contours(field, level))
                if (cl.closed && cl.encloses == std::vector<int>{j}) {
                    if (!found || cl.points.size() > found->points.size()) found = std::move(cl);
                }
            if (!found) level = 0.5 * (level + hi);
        }
        if (!found) throw AnalysisError("no contour encloses hole " + std::to_string(j) + " alone");
        res.levels[j] = found->level;

        // crossings of the incident arcs, the last one along each arc
        const auto& cp = found->points;
        const int n = static_cast<int>(cp.size());
        for (const auto& arc : arcs) {
            if (arc.to_loop != j) continue;
            std::optional<PolyPos> pos;
            double along = -1.0;
            for (std::size_t s = 0; s + 1 < arc.points.size(); ++s) {
                const Vec2 a = arc.points[s], b = arc.points[s + 1];
                BBox sb;
                sb.add(a);
                sb.add(b);
                for (int i = 0; i < n; ++i) {
                    const Vec2 c = cp[i], d = cp[(i + 1) % n];
                    if (std::max(c.x, d.x) < sb.lo.x || std::min(c.x, d.x) > sb.hi.x ||
                        std::max(c.y, d.y) < sb.lo.y || std::min(c.y, d.y) > sb.hi.y)
                        continue;
                    const auto hit = segment_intersection(a, b, c, d);
                    if (hit && s + hit->first >= along) {
                        along = s + hit->first;
                        pos = PolyPos{i, hit->second};
                    }
                }
            }
            if (!pos)
                throw AnalysisError("cut arc " + std::to_string(arc.id) + " does not cross the contour around hole " +
                                    std::to_string(j));
            cross[j][arc.id] = *pos;
        }
        res.hole_flux[j] = flux_integral(field, cp, true);
        contour[j] = std::move(*found);
    }

    for (const auto& r : runs) {
        const auto& cj = cross[r.hole];
        if (!cj.count(r.arc_in) || !cj.count(r.arc_out))
            throw AnalysisError("hole run references an arc that does not end on hole " + std::to_string(r.hole));
        // the walk passes holes clockwise; the contour runs counterclockwise
        const PolyPos a = cj.at(r.arc_out), b = cj.at(r.arc_in);
        const bool full = r.arc_in == r.arc_out;
        res.jumps.push_back(full ? res.hole_flux[r.hole] : piece_flux(field, contour[r.hole].points, a, b, false));
    }
    for (int j : hole_ids) res.contours.push_back(contour[j]);
    return res;
}

}  // namespace cfm
