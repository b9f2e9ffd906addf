#include <cfm/field_analysis.hpp>

#include <cfm/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <optional>

namespace cfm {

namespace {

struct Nearest {
    Vec2 point;
    int loop{-1};
    double dist{1e300};
};

Nearest nearest_boundary(const Mesh& m, Vec2 p) {
    Nearest best;
    for (const auto& e : m.boundary_edges) {
        double t = 0.0;
        const double d = point_segment_distance(p, m.nodes[e.a], m.nodes[e.b], &t);
        if (d < best.dist) {
            best.dist = d;
            best.point = m.nodes[e.a] + (m.nodes[e.b] - m.nodes[e.a]) * t;
            best.loop = e.tag.is_cut() ? -1 : e.tag.id;
        }
    }
    return best;
}

}  // namespace

DescentPath trace_path(const PotentialField& field, Vec2 start, Direction direction, const TraceOptions& options) {
    const Mesh& mesh = field.mesh();
    const double diam = mesh.bbox().diameter();
    const double slack = 1e-9 * diam;
    const double sign = direction == Direction::ascent ? 1.0 : -1.0;
    double lo = 1e300, hi = -1e300;
    for (const auto& [tag, v] : field.bc().dirichlet) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double target = direction == Direction::ascent ? hi : lo;

    double area = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) area += mesh.triangle_area(t);
    const double hmean = std::sqrt(2.0 * area / std::max(1, mesh.triangle_count()));
    const double hmax = options.max_step > 0 ? options.max_step : hmean / field.order();
    const double hmin = 1e-10 * diam;

    auto rhs = [&](Vec2 x) -> std::optional<Vec2> {
        const auto s = field.sample(x, {}, slack);
        if (!s) return std::nullopt;
        const double g = norm(s->gradient);
        if (!(g > 0.0)) return std::nullopt;
        return s->gradient * (sign / g);
    };
    auto rk4 = [&](Vec2 x, double h) -> std::optional<Vec2> {
        const auto k1 = rhs(x);
        if (!k1) return std::nullopt;
        const auto k2 = rhs(x + *k1 * (0.5 * h));
        if (!k2) return std::nullopt;
        const auto k3 = rhs(x + *k2 * (0.5 * h));
        if (!k3) return std::nullopt;
        const auto k4 = rhs(x + *k3 * h);
        if (!k4) return std::nullopt;
        const Vec2 y = x + (*k1 + *k2 * 2.0 + *k3 * 2.0 + *k4) * (h / 6.0);
        if (!field.sample(y, {}, slack)) return std::nullopt;
        return y;
    };

    DescentPath path;
    path.direction = direction;
    const auto s0 = field.sample(start, {}, slack);
    if (!s0) throw AnalysisError("trace_path: start point outside the domain");
    path.points.push_back(start);
    path.values.push_back(s0->value);

    auto finish_at_boundary = [&](Vec2 x) {
        const Nearest nb = nearest_boundary(mesh, x);
        path.end = Termination::boundary;
        path.loop = nb.loop;
        const auto s = field.sample(nb.point, {}, slack);
        const double vb = s ? s->value : path.values.back();
        // drop points that overshot the boundary within the slack
        while (path.points.size() > 1 && sign * (path.values.back() - vb) >= 0.0) {
            path.points.pop_back();
            path.values.pop_back();
        }
        if (distance(path.points.back(), nb.point) > 1e-14 * diam) {
            path.points.push_back(nb.point);
            path.values.push_back(vb);
        }
    };

    Vec2 x = start;
    double h = hmax;
    double stalled_near_edge = 0.0;
    for (int step = 0; step < options.max_steps; ++step) {
        const auto y1 = rk4(x, h);
        std::optional<Vec2> y2;
        if (y1) {
            const auto m = rk4(x, 0.5 * h);
            if (m) y2 = rk4(*m, 0.5 * h);
        }
        if (!y1 || !y2) {
            // a stage left the mesh: we are within h of the boundary
            if (h <= hmin) {
                finish_at_boundary(x);
                return path;
            }
            h *= 0.5;
            continue;
        }
        const double err = distance(*y1, *y2);
        if (err > options.tolerance * hmax && h > hmin) {
            h = std::max(hmin, h * std::max(0.2, 0.9 * std::pow(options.tolerance * hmax / err, 0.2)));
            continue;
        }
        Vec2 xn = *y2 + (*y2 - *y1) / 15.0;
        auto sn = field.sample(xn, {}, slack);
        if (!sn) {
            xn = *y2;
            sn = field.sample(xn, {}, slack);
        }
        const double v = sn->value;
        if (sign * (v - path.values.back()) > 0.0) {
            path.points.push_back(xn);
            path.values.push_back(v);
            stalled_near_edge = 0.0;
        } else {
            // C0 gradients can make a step lose monotonicity at element edges
            stalled_near_edge += h;
            if (stalled_near_edge > 10.0 * hmax) {
                path.end = Termination::stalled;
                return path;
            }
        }
        x = xn;
        h = std::min(hmax, err > 0 ? h * std::min(2.0, 0.9 * std::pow(options.tolerance * hmax / err, 0.2)) : 2 * h);
        h = std::max(h, hmin);

        if (sign * (target - v) <= options.level_tolerance) {
            finish_at_boundary(x);
            path.end = Termination::level;
            return path;
        }
        for (std::size_t k = 0; k < options.saddles.size(); ++k) {
            if (static_cast<int>(k) == options.ignore_saddle) continue;
            if (distance(x, options.saddles[k]) < options.saddle_radius) {
                path.end = Termination::saddle;
                path.saddle = static_cast<int>(k);
                return path;
            }
        }
    }
    path.end = Termination::max_steps;
    return path;
}

}  // namespace cfm
