#include <cfm/svg.hpp>

#include <cfm/report.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <set>
#include <utility>

namespace cfm {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

BBox padded(BBox b, double frac) {
    const double p = frac * std::max(b.hi.x - b.lo.x, b.hi.y - b.lo.y);
    return {{b.lo.x - p, b.lo.y - p}, {b.hi.x + p, b.hi.y + p}};
}

// Unique undirected mesh edges.
std::vector<std::pair<int, int>> mesh_edges(const Mesh& m) {
    std::set<std::pair<int, int>> s;
    for (const auto& t : m.triangles)
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3];
            s.insert({std::min(a, b), std::max(a, b)});
        }
    return {s.begin(), s.end()};
}

// Image of every node of the conjugate mesh under w; vertex dofs are node ids.
std::vector<std::complex<double>> node_images(const RunResult& run) {
    const Mesh& m = *run.conjugate_mesh;
    const ConformalMap& map = run.map;
    const double slack = 1e-9 * m.bbox().diameter();
    std::vector<std::complex<double>> w(m.nodes.size());
    for (std::size_t k = 0; k < m.nodes.size(); ++k) {
        const auto s = map.u1.sample(m.nodes[k], {}, slack);
        w[k] = {s ? s->value : 0.0, map.d * map.u2.coefficients()[k]};
    }
    return w;
}

const char* grid_u1 = "#1b7837";
const char* grid_u2 = "#d95f02";

}  // namespace

// ---------------------------------------------------------------------------
// canvas
// ---------------------------------------------------------------------------

SvgCanvas::SvgCanvas(BBox world, int width_px) : world_(world), width_(width_px) {
    const double w = std::max(world.hi.x - world.lo.x, 1e-12);
    const double h = std::max(world.hi.y - world.lo.y, 1e-12);
    scale_ = width_px / w;
    height_ = static_cast<int>(std::ceil(h * scale_));
}

double SvgCanvas::px(double x) const { return (x - world_.lo.x) * scale_; }
double SvgCanvas::py(double y) const { return (world_.hi.y - y) * scale_; }

void SvgCanvas::line(Vec2 a, Vec2 b, const std::string& stroke, double width) {
    body_ += "<line x1=\"" + num(px(a.x)) + "\" y1=\"" + num(py(a.y)) + "\" x2=\"" + num(px(b.x)) + "\" y2=\"" +
             num(py(b.y)) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

void SvgCanvas::polyline(std::span<const Vec2> pts, bool closed, const std::string& stroke, double width) {
    if (pts.size() < 2) return;
    body_ += closed ? "<polygon points=\"" : "<polyline points=\"";
    for (const Vec2 p : pts) body_ += num(px(p.x)) + "," + num(py(p.y)) + " ";
    body_ += "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

void SvgCanvas::dot(Vec2 c, double radius_px, const std::string& fill) {
    body_ += "<circle cx=\"" + num(px(c.x)) + "\" cy=\"" + num(py(c.y)) + "\" r=\"" + num(radius_px) + "\" fill=\"" +
             fill + "\"/>\n";
}

void SvgCanvas::text(Vec2 at, const std::string& s, int size_px) {
    body_ += "<text x=\"" + num(px(at.x)) + "\" y=\"" + num(py(at.y)) + "\" font-family=\"sans-serif\" font-size=\"" +
             std::to_string(size_px) + "\">" + s + "</text>\n";
}

std::string SvgCanvas::str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width_) + "\" height=\"" +
           std::to_string(height_) + "\" viewBox=\"0 0 " + std::to_string(width_) + " " + std::to_string(height_) +
           "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ + "</svg>\n";
}

// ---------------------------------------------------------------------------
// pictures
// ---------------------------------------------------------------------------

std::string svg_domain(const RunResult& run, const ImageGrid& grid) {
    const Mesh& m = *run.mesh;
    SvgCanvas c(padded(m.bbox(), 0.03), 900);
    for (const auto& [a, b] : mesh_edges(m)) c.line(m.nodes[a], m.nodes[b], "#d0d0d0", 0.4);
    for (const auto& l : grid.u1_lines) c.polyline(l.points, l.closed, grid_u1, 1.0);
    for (const auto& l : grid.u2_lines) c.polyline(l.points, l.closed, grid_u2, 1.0);
    for (const auto& e : m.boundary_edges) c.line(m.nodes[e.a], m.nodes[e.b], "black", 1.6);
    for (const auto& a : run.map.cuts.arcs) c.polyline(a.points, false, "#c00000", 1.8);
    for (const Vec2 s : run.map.cuts.saddles) c.dot(s, 4.0, "#2040c0");
    return c.str();
}

std::string svg_rectangle(const RunResult& run, const ImageGrid& grid) {
    const double d = run.map.d;
    SvgCanvas c(padded({{0, 0}, {1, d}}, 0.03), d > 4 ? 300 : 600);
    const Mesh& m = *run.conjugate_mesh;
    const auto w = node_images(run);
    auto at = [&](int k) { return Vec2{w[k].real(), w[k].imag()}; };
    for (const auto& [a, b] : mesh_edges(m)) c.line(at(a), at(b), "#d0d0d0", 0.4);
    for (const auto& l : grid.u1_lines) c.line({l.level, 0}, {l.level, d}, grid_u1, 0.8);
    std::set<double> levels;
    for (const auto& l : grid.u2_lines) levels.insert(l.level);
    for (const double v : levels) c.line({0, v * d}, {1, v * d}, grid_u2, 0.8);
    const std::vector<Vec2> rect{{0, 0}, {1, 0}, {1, d}, {0, d}};
    c.polyline(rect, true, "black", 1.6);
    for (const auto& s : run.map.slits) c.line({s.re_start, s.im}, {1, s.im}, "#c00000", 2.0);
    return c.str();
}

std::string svg_annulus(const RunResult& run, const ImageGrid& grid) {
    const double d = run.map.d;
    SvgCanvas c({{-1.05, -1.05}, {1.05, 1.05}}, 700);
    const Mesh& m = *run.conjugate_mesh;
    const auto w = node_images(run);
    auto at = [&](int k) {
        const auto z = to_annulus(w[k], d);
        return Vec2{z.real(), z.imag()};
    };
    for (const auto& [a, b] : mesh_edges(m)) c.line(at(a), at(b), "#d0d0d0", 0.4);
    auto circle = [&](double r, const char* color, double width) {
        std::vector<Vec2> pts;
        for (int k = 0; k < 256; ++k) {
            const double t = 2.0 * 3.141592653589793 * k / 256;
            pts.push_back({r * std::cos(t), r * std::sin(t)});
        }
        c.polyline(pts, true, color, width);
    };
    for (const auto& l : grid.u1_lines) circle(std::exp(-2.0 * 3.141592653589793 * l.level / d), grid_u1, 0.8);
    std::set<double> levels;
    for (const auto& l : grid.u2_lines) levels.insert(l.level);
    for (const double v : levels) {
        const auto a = to_annulus({0.0, v * d}, d), b = to_annulus({1.0, v * d}, d);
        c.line({a.real(), a.imag()}, {b.real(), b.imag()}, grid_u2, 0.8);
    }
    circle(1.0, "black", 1.6);
    circle(std::exp(-2.0 * 3.141592653589793 / d), "black", 1.6);
    for (const auto& s : run.map.slits) {
        std::vector<Vec2> arc;
        for (int k = 0; k <= 64; ++k) {
            const auto z = to_annulus({s.re_start + (1.0 - s.re_start) * k / 64.0, s.im}, d);
            arc.push_back({z.real(), z.imag()});
        }
        c.polyline(arc, false, "#c00000", 2.0);
    }
    return c.str();
}

std::string svg_cauchy_riemann(const RunResult& run, const CrReport& cr) {
    const Mesh& m = *run.mesh;
    const BBox box = padded(m.bbox(), 0.03);
    SvgCanvas c(box, 900);
    for (const auto& e : m.boundary_edges) c.line(m.nodes[e.a], m.nodes[e.b], "black", 1.2);
    // log10 residual from 1e-8 (blue) to 1e-1 (red)
    for (std::size_t k = 0; k < cr.points.size(); ++k) {
        const double e = std::max({cr.r1[k], cr.r2[k], 1e-16});
        const double t = std::clamp((std::log10(e) + 8.0) / 7.0, 0.0, 1.0);
        char col[16];
        std::snprintf(col, sizeof col, "#%02x%02x%02x", static_cast<int>(255 * t), 40, static_cast<int>(255 * (1 - t)));
        c.dot(cr.points[k], 1.6, col);
    }
    for (const auto& a : run.map.cuts.arcs) c.polyline(a.points, false, "black", 0.8);
    c.text({box.lo.x, box.lo.y}, "max " + fmt12(cr.max) + "  rms " + fmt12(cr.rms));
    return c.str();
}

void write_svgs(const RunResult& run, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const ImageGrid grid = image_grid(run.map, 9, 24);
    write_atomic(dir / "domain.svg", svg_domain(run, grid));
    write_atomic(dir / "rectangle.svg", svg_rectangle(run, grid));
    if (run.map.kind != MapKind::quadrilateral) write_atomic(dir / "annulus.svg", svg_annulus(run, grid));
    CrOptions co;
    co.exclude_cut_tubes = false;
    write_atomic(dir / "cauchy_riemann.svg", svg_cauchy_riemann(run, cauchy_riemann_report(run.map, co)));
}

}  // namespace cfm
