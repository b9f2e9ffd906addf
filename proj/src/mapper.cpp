#include <cfm/mapper.hpp>

#include <cfm/geometry.hpp>
#include <cfm/kernels.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cfm {

namespace {

double distance_to_polyline(Vec2 p, const std::vector<Vec2>& pts) {
    double best = 1e300;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) best = std::min(best, point_segment_distance(p, pts[k], pts[k + 1]));
    return best;
}

double distance_to_cuts(Vec2 p, const CutSet& cuts) {
    double best = 1e300;
    for (const auto& a : cuts.arcs) best = std::min(best, distance_to_polyline(p, a.points));
    return best;
}

CrReport summarize(std::vector<Vec2> pts, const kernels::CrSamples& s, int excluded) {
    CrReport r;
    r.excluded = excluded;
    double sum = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (!s.valid[k]) {
            ++r.excluded;
            continue;
        }
        r.points.push_back(pts[k]);
        r.r1.push_back(s.r1[k]);
        r.r2.push_back(s.r2[k]);
        r.ux.push_back(s.ux[k]);
        r.vy.push_back(s.vy[k]);
        const double e = std::max(s.r1[k], s.r2[k]);
        r.max = std::max(r.max, e);
        sum += e;
        sq += e * e;
    }
    if (!r.points.empty()) {
        r.mean = sum / static_cast<double>(r.points.size());
        r.rms = std::sqrt(sq / static_cast<double>(r.points.size()));
    }
    return r;
}

}  // namespace

std::vector<Slit> collect_slits(const ConjugateSpec& spec, const CutSet& cuts, const std::vector<double>& saddle_values,
                                double d) {
    std::vector<Slit> out;
    for (const auto& run : spec.walk) {
        if (!run.tag.is_cut()) continue;
        const CutArc& arc = cuts.arcs.at(run.tag.id);
        if (arc.saddle < 0) continue;
        const Slit s{saddle_values.at(arc.saddle), run.value};
        const bool dup = std::any_of(out.begin(), out.end(), [&](const Slit& o) {
            return std::fabs(o.im - s.im) <= 1e-9 * d && std::fabs(o.re_start - s.re_start) <= 1e-9;
        });
        if (!dup) out.push_back(s);
    }
    std::sort(out.begin(), out.end(), [](const Slit& a, const Slit& b) { return a.im < b.im; });
    return out;
}

double cut_ambiguity_radius(const ConformalMap& map) { return 1e-9 * map.u1.mesh().bbox().diameter(); }

std::complex<double> map_point(const ConformalMap& map, Vec2 z, std::optional<Vec2> side) {
    const double slack = cut_ambiguity_radius(map);
    const auto a = map.u1.sample(z, {}, slack);
    if (!a) throw MapError("map_point: point outside the domain");
    std::optional<FieldSample> b;
    if (side) {
        b = map.u2.sample(z, *side, slack);
    } else {
        if (!map.cuts.arcs.empty() && distance_to_cuts(z, map.cuts) <= slack)
            throw MapError("map_point: point on a cut needs a side hint");
        b = map.u2.sample(z, {}, slack);
    }
    if (!b) throw MapError("map_point: point outside the conjugate domain");
    return {a->value, map.d * b->value};
}

std::complex<double> to_annulus(std::complex<double> w, double d) {
    return std::exp(-(2.0 * std::numbers::pi / d) * w);
}

ImageGrid image_grid(const ConformalMap& map, int n_radial, int n_angular) {
    ImageGrid g;
    for (int k = 1; k <= n_radial; ++k) {
        auto c = extract_contours(map.u1, static_cast<double>(k) / (n_radial + 1));
        g.u1_lines.insert(g.u1_lines.end(), c.begin(), c.end());
    }
    for (int k = 1; k < n_angular; ++k) {
        auto c = extract_contours(map.u2, static_cast<double>(k) / n_angular);
        g.u2_lines.insert(g.u2_lines.end(), c.begin(), c.end());
    }
    return g;
}

CrReport cauchy_riemann_report(const ConformalMap& map, const CrOptions& options) {
    const Mesh& mesh = map.u1.mesh();
    const BBox box = mesh.bbox();
    const double w = box.hi.x - box.lo.x, h = box.hi.y - box.lo.y;
    const double step = std::max(w, h) / std::max(2, options.density);
    std::vector<Vec2> pts;
    int excluded = 0;
    const double ball = options.saddle_exclusion * map.cuts.ball_radius;
    for (double y = box.lo.y + 0.5 * step; y < box.hi.y; y += step)
        for (double x = box.lo.x + 0.5 * step; x < box.hi.x; x += step) {
            const Vec2 p{x, y};
            const auto e = map.u1.space().locate(p);
            if (!e) continue;
            bool skip = false;
            for (const Vec2 s : map.cuts.saddles) skip = skip || distance(p, s) < ball;
            if (!skip && options.exclude_cut_tubes && !map.cuts.arcs.empty()) {
                const double tube = std::sqrt(2.0 * mesh.triangle_area(e->triangle));
                skip = distance_to_cuts(p, map.cuts) < tube;
            }
            if (skip) {
                ++excluded;
                continue;
            }
            pts.push_back(p);
        }
    const auto s = kernels::cauchy_riemann(map.u1, map.u2, map.d, pts, options.exec);
    return summarize(std::move(pts), s, excluded);
}

CrReport cauchy_riemann_at(const ConformalMap& map, std::span<const Vec2> points, Exec exec) {
    const auto s = kernels::cauchy_riemann(map.u1, map.u2, map.d, points, exec);
    return summarize(std::vector<Vec2>(points.begin(), points.end()), s, 0);
}

}  // namespace cfm
