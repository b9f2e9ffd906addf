#include <cfm/builtins.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace cfm {

namespace {

constexpr double pi = std::numbers::pi;

Vec2 polar_point(Vec2 c, double r, double a) { return c + Vec2{std::cos(a), std::sin(a)} * r; }

RefinementRule corner_rule(Vec2 p) { return {p, 8, 0.15}; }
RefinementRule cusp_rule(Vec2 p) { return {p, 12, 0.15}; }

}  // namespace

BoundaryLoop disk_loop(Vec2 center, double radius) {
    if (!(radius > 0.0)) throw GeometryError("disk radius must be positive");
    BoundaryLoop loop;
    loop.segments.push_back(CurveSegment::arc(center, radius, 0.0, 2.0 * pi));
    return loop;
}

BoundaryLoop rect_loop(Vec2 lo, Vec2 hi) {
    if (!(hi.x > lo.x && hi.y > lo.y)) throw GeometryError("rect corners must satisfy x0 < x1, y0 < y1");
    BoundaryLoop loop;
    const Vec2 a = lo, b{hi.x, lo.y}, c = hi, d{lo.x, hi.y};
    loop.segments = {CurveSegment::line(a, b), CurveSegment::line(b, c), CurveSegment::line(c, d),
                     CurveSegment::line(d, a)};
    return loop;
}

BoundaryLoop pacman_loop(Vec2 center, double radius, double opening, double heading) {
    if (!(radius > 0.0)) throw GeometryError("pacman radius must be positive");
    if (!(opening > 0.0 && opening < 2.0 * pi)) throw GeometryError("pacman opening must lie in (0, 2pi)");
    const double a0 = heading + opening / 2.0;
    const double a1 = heading + 2.0 * pi - opening / 2.0;
    BoundaryLoop loop;
    loop.segments.push_back(CurveSegment::arc(center, radius, a0, a1));
    loop.segments.push_back(CurveSegment::line(polar_point(center, radius, a1), center));
    loop.segments.push_back(CurveSegment::line(center, polar_point(center, radius, a0)));
    return loop;
}

std::array<Vec2, 2> pacman_lips(Vec2 center, double radius, double opening, double heading) {
    return {polar_point(center, radius, heading + opening / 2.0),
            polar_point(center, radius, heading - opening / 2.0)};
}

double droplet_radius(double t) {
    const double t2 = t * t;
    const double q = t2 - 1.0;
    return (45.0 * t2 * t2 * t2 + 75.0 * t2 * t2 - 525.0 * t2 + 469.0) / 640.0 + 15.0 / 32.0 * t * q * q;
}

double droplet_angle(double t) { return pi * t * (3.0 - t * t) / 2.0; }

BoundaryLoop droplet_loop(Vec2 center) {
    PolarGraph g;
    g.radius = droplet_radius;
    g.angle = droplet_angle;
    g.center = center;
    BoundaryLoop loop;
    loop.segments.push_back(CurveSegment::polar(std::move(g), -1.0, 1.0, true, true));
    return loop;
}

Vec2 droplet_cusp(Vec2 center) { return polar_point(center, droplet_radius(1.0), droplet_angle(1.0)); }

BoundaryLoop polar_table_loop(std::vector<std::pair<double, double>> samples, Vec2 center) {
    if (samples.size() < 3) throw GeometryError("polar table needs at least 3 samples");
    std::sort(samples.begin(), samples.end());
    const double base = samples.front().first;
    for (auto& s : samples) {
        s.first -= base;
        if (s.first >= 2.0 * pi) throw GeometryError("polar table angles must span less than 2pi");
        if (!(s.second > 0.0)) throw GeometryError("polar table radii must be positive");
    }
    for (std::size_t k = 1; k < samples.size(); ++k)
        if (samples[k].first == samples[k - 1].first) throw GeometryError("polar table has repeated angles");
    auto table = std::make_shared<std::vector<std::pair<double, double>>>(std::move(samples));
    const int n = static_cast<int>(table->size());
    PolarGraph g;
    g.center = center;
    g.angle = [base](double t) { return base + 2.0 * pi * t; };
    g.radius = [table, n](double t) {
        const auto& tb = *table;
        const double a = std::clamp(2.0 * pi * t, 0.0, 2.0 * pi);
        auto angle = [&](int k) {
            const int w = ((k % n) + n) % n;
            return tb[w].first + 2.0 * pi * std::floor(static_cast<double>(k) / n);
        };
        auto radius = [&](int k) { return tb[((k % n) + n) % n].second; };
        int k = 0;
        while (k + 1 < n && tb[k + 1].first <= a) ++k;
        if (a >= tb[n - 1].first) k = n - 1;
        // non-uniform Catmull-Rom on (angle, radius)
        const double x0 = angle(k - 1), x1 = angle(k), x2 = angle(k + 1), x3 = angle(k + 2);
        const double y0 = radius(k - 1), y1 = radius(k), y2 = radius(k + 1), y3 = radius(k + 2);
        const double m1 = (y2 - y0) / (x2 - x0);
        const double m2 = (y3 - y1) / (x3 - x1);
        const double hh = x2 - x1;
        const double s = (a - x1) / hh;
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y1 + (s3 - 2 * s2 + s) * hh * m1 + (-2 * s3 + 3 * s2) * y2 +
               (s3 - s2) * hh * m2;
    };
    BoundaryLoop loop;
    loop.segments.push_back(CurveSegment::polar(std::move(g), 0.0, 1.0));
    return loop;
}

// ---------------------------------------------------------------------------
// named problems
// ---------------------------------------------------------------------------

std::vector<std::string> builtin_names() {
    return {"three-disks-in-circle", "two-disks-in-rect", "disk-pacman-in-rect", "disk-two-pacmen-in-rect",
            "pacman-droplet",        "annulus",           "unit-square",         "rect-2x1",
            "l-shape"};
}

ProblemConfig builtin_problem(std::string_view name) {
    ProblemConfig cfg;
    cfg.name = std::string(name);
    const double quarter = pi / 2.0;
    // hole radius of the rectangle cases; the listed capacities are those of radius 1/2
    const double rr = 0.5;

    if (name == "three-disks-in-circle") {
        cfg.domain.outer = disk_loop({0, 0}, 1.0);
        for (double deg : {-90.0, 30.0, 150.0})
            cfg.domain.holes.push_back(disk_loop(polar_point({0, 0}, 0.5, deg * pi / 180.0), 1.0 / 6.0));
        cfg.symmetry = SymmetryAxis{{0, 0}, {0, 1}};
        cfg.gamma0_start = Vec2{0, -1};
        cfg.fem.h = 0.1;
        cfg.reference_capacity = 9.67475429123;
    } else if (name == "two-disks-in-rect") {
        cfg.domain.outer = rect_loop({-1, -1}, {3, 1});
        cfg.domain.holes = {disk_loop({0, 0}, rr), disk_loop({2, 0}, rr)};
        cfg.symmetry = SymmetryAxis{{0, 0}, {1, 0}};
        cfg.gamma0_start = Vec2{-1, 0};
        cfg.fem.h = 0.15;
        cfg.reference_capacity = 13.922976299110;
    } else if (name == "disk-pacman-in-rect") {
        cfg.domain.outer = rect_loop({-1, -1}, {3, 1});
        cfg.domain.holes = {disk_loop({0, 0}, rr), pacman_loop({2, 0}, rr, quarter, 0.0)};
        for (const Vec2& p : pacman_lips({2, 0}, rr, quarter, 0.0)) cfg.fem.rules.push_back(corner_rule(p));
        cfg.symmetry = SymmetryAxis{{0, 0}, {1, 0}};
        cfg.gamma0_start = Vec2{-1, 0};
        cfg.fem.h = 0.15;
        cfg.reference_capacity = 13.3376294414;
    } else if (name == "disk-two-pacmen-in-rect") {
        cfg.domain.outer = rect_loop({-1, -1}, {3, 4});
        const double h1 = 0.0, h2 = 0.0;
        cfg.domain.holes = {disk_loop({0, 1}, rr), pacman_loop({2, 0}, rr, quarter, h1),
                            pacman_loop({2, 3}, rr, quarter, h2)};
        for (const Vec2& p : pacman_lips({2, 0}, rr, quarter, h1)) cfg.fem.rules.push_back(corner_rule(p));
        for (const Vec2& p : pacman_lips({2, 3}, rr, quarter, h2)) cfg.fem.rules.push_back(corner_rule(p));
        cfg.gamma0_start = Vec2{-1, 1};
        cfg.fem.h = 0.15;
        cfg.reference_capacity = 14.3749;
    } else if (name == "pacman-droplet") {
        cfg.domain.outer = droplet_loop({0, 0});
        const Vec2 pc{0.25, 0.0};
        cfg.domain.holes = {pacman_loop(pc, 0.2, quarter, quarter)};
        cfg.fem.rules.push_back(cusp_rule(droplet_cusp({0, 0})));
        for (const Vec2& p : pacman_lips(pc, 0.2, quarter, quarter)) cfg.fem.rules.push_back(corner_rule(p));
        // the droplet's rightmost point, facing the pacman's back
        cfg.gamma0_start = Vec2{droplet_radius(0.0), 0.0};
        cfg.fem.h = 0.05;
    } else if (name == "annulus") {
        cfg.domain.outer = disk_loop({0, 0}, 1.0);
        cfg.domain.holes = {disk_loop({0, 0}, 0.5)};
        cfg.gamma0_start = Vec2{1, 0};
        cfg.fem.h = 0.1;
        cfg.reference_capacity = 2.0 * pi / std::log(2.0);
    } else if (name == "unit-square") {
        cfg.domain.outer = rect_loop({0, 0}, {1, 1});
        cfg.marked = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        cfg.fem.h = 0.25;
        cfg.fem.order = 1;
    } else if (name == "rect-2x1") {
        cfg.domain.outer = rect_loop({0, 0}, {2, 1});
        cfg.marked = {{0, 1}, {0, 0}, {2, 0}, {2, 1}};
        cfg.fem.h = 0.25;
        cfg.fem.order = 1;
    } else if (name == "l-shape") {
        cfg.domain.outer.segments = {CurveSegment::line({0, 0}, {2, 0}), CurveSegment::line({2, 0}, {2, 1}),
                                     CurveSegment::line({2, 1}, {1, 1}), CurveSegment::line({1, 1}, {1, 2}),
                                     CurveSegment::line({1, 2}, {0, 2}), CurveSegment::line({0, 2}, {0, 0})};
        cfg.marked = {{0, 0}, {2, 0}, {2, 1}, {0, 2}};
        cfg.fem.rules = {corner_rule({1, 1})};
        cfg.fem.h = 0.1;
    } else {
        throw ConfigError("unknown builtin '" + std::string(name) + "'");
    }
    cfg.domain = validate_domain(std::move(cfg.domain));
    return cfg;
}

}  // namespace cfm
