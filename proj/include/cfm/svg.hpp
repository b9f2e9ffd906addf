#pragma once

// SVG pictures of a run: the domain with mesh, cuts, saddles and grid
// preimages; the rectangle and annulus images; Cauchy-Riemann residuals.

#include <cfm/mapper.hpp>
#include <cfm/pipeline.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cfm {

/// Minimal SVG canvas in world coordinates (y up).
class SvgCanvas {
public:
    SvgCanvas(BBox world, int width_px);

    void line(Vec2 a, Vec2 b, const std::string& stroke, double width = 1.0);
    void polyline(std::span<const Vec2> pts, bool closed, const std::string& stroke, double width = 1.0);
    void dot(Vec2 c, double radius_px, const std::string& fill);
    void text(Vec2 at, const std::string& s, int size_px = 12);

    [[nodiscard]] std::string str() const;

private:
    [[nodiscard]] double px(double x) const;
    [[nodiscard]] double py(double y) const;

    BBox world_;
    double scale_{};
    int width_{};
    int height_{};
    std::string body_;
};

[[nodiscard]] std::string svg_domain(const RunResult& run, const ImageGrid& grid);
[[nodiscard]] std::string svg_rectangle(const RunResult& run, const ImageGrid& grid);
[[nodiscard]] std::string svg_annulus(const RunResult& run, const ImageGrid& grid);
[[nodiscard]] std::string svg_cauchy_riemann(const RunResult& run, const CrReport& cr);

/// domain.svg, rectangle.svg, annulus.svg (not for quadrilaterals) and cauchy_riemann.svg.
void write_svgs(const RunResult& run, const std::filesystem::path& dir);

}  // namespace cfm
