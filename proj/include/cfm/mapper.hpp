#pragma once

// The conformal map w = u1 + i d u2 and its post-processing: the annulus
// image, preimages of the canonical grid and Cauchy-Riemann diagnostics.

#include <cfm/conjugator.hpp>
#include <cfm/field_analysis.hpp>
#include <cfm/laplace.hpp>

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cfm {

class MapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class MapKind { quadrilateral, ring, multiply_connected };

/// Horizontal segment {Re w in [re_start, 1], Im w = im} missing from the rectangle image.
struct Slit {
    double re_start{};
    double im{};
};

struct ConformalMap {
    MapKind kind{MapKind::ring};
    PotentialField u1;
    PotentialField u2;  // values in [0, 1]; on the opened mesh when there are cuts
    double d{};
    CutSet cuts;
    std::vector<double> saddle_values;
    std::vector<Slit> slits;
};

/// Slits from the Dirichlet values of the cut sides: every arc starting at a
/// saddle maps to a horizontal segment starting at Re w = u1(saddle).
[[nodiscard]] std::vector<Slit> collect_slits(const ConjugateSpec& spec, const CutSet& cuts,
                                              const std::vector<double>& saddle_values, double d);

/// Points within this distance of a cut need a side hint.
[[nodiscard]] double cut_ambiguity_radius(const ConformalMap& map);

/// w = u1(z) + i d u2(z). On a cut the side is taken from `side`, a vector
/// pointing into the wanted bank; without it a point on a cut throws MapError.
[[nodiscard]] std::complex<double> map_point(const ConformalMap& map, Vec2 z, std::optional<Vec2> side = {});

/// zeta = exp(-(2 pi / d) w): the rectangle wraps onto exp(-2pi/d) <= |zeta| <= 1
/// with the edges Im w = 0 and Im w = d glued.
[[nodiscard]] std::complex<double> to_annulus(std::complex<double> w, double d);

struct ImageGrid {
    std::vector<ContourLine> u1_lines;  // Re w = const
    std::vector<ContourLine> u2_lines;  // Im w = const, levels in [0, 1]
};

/// Preimages of n_radial lines Re w = k / (n_radial + 1) and n_angular lines
/// Im w = d k / n_angular, k = 1 .. n_angular - 1.
[[nodiscard]] ImageGrid image_grid(const ConformalMap& map, int n_radial, int n_angular);

struct CrOptions {
    /// Sample points along the longer side of the bounding box.
    int density{120};
    /// Radius around saddles skipped, in saddle-ball radii.
    double saddle_exclusion{2.0};
    /// Skip points within one local element size of a cut.
    bool exclude_cut_tubes{true};
    Exec exec{Exec::parallel};
};

struct CrReport {
    std::vector<Vec2> points;
    std::vector<double> r1, r2, ux, vy;
    double max{};
    double mean{};
    double rms{};
    int excluded{};
};

/// Residuals r1 = |u_x - v_y|, r2 = |u_y + v_x| of u1 + i d u2 at interior grid points.
[[nodiscard]] CrReport cauchy_riemann_report(const ConformalMap& map, const CrOptions& options = {});

/// The same report on a caller-supplied point set (no exclusions).
[[nodiscard]] CrReport cauchy_riemann_at(const ConformalMap& map, std::span<const Vec2> points,
                                         Exec exec = Exec::parallel);

}  // namespace cfm
