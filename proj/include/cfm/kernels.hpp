#pragma once

// Data-parallel hot loops. Each kernel has a serial reference path and an
// OpenMP path that write into disjoint per-item slots and reduce in a fixed
// order, so both paths give bit-identical results.

#include <cfm/laplace.hpp>

#include <span>
#include <vector>

namespace cfm::kernels {

/// Number of threads the parallel path uses (1 without OpenMP).
[[nodiscard]] int thread_count();

/// Element stiffness matrices, row-major, concatenated by triangle.
[[nodiscard]] std::vector<double> element_stiffness(const FeSpace& space, Exec exec);

/// Sum over elements of u_e^T K_e u_e, accumulated in element order.
[[nodiscard]] double energy(const FeSpace& space, std::span<const double> coeffs, Exec exec);

struct FieldSamples {
    std::vector<double> value;
    std::vector<Vec2> gradient;
    std::vector<unsigned char> valid;  // 0 where the point is outside the mesh
};

[[nodiscard]] FieldSamples sample_field(const PotentialField& field, std::span<const Vec2> points, Exec exec);

struct CrSamples {
    std::vector<double> r1;  // |u_x - v_y|
    std::vector<double> r2;  // |u_y + v_x|
    std::vector<double> ux;
    std::vector<double> vy;
    std::vector<unsigned char> valid;
};

/// Cauchy-Riemann residuals of u + i v with v = scale * w, sampled pointwise.
[[nodiscard]] CrSamples cauchy_riemann(const PotentialField& u, const PotentialField& w, double scale,
                                       std::span<const Vec2> points, Exec exec);

}  // namespace cfm::kernels
