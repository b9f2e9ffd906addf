#pragma once

// End-to-end runs: quadrilaterals, ring domains and multiply connected
// domains with the tolerance loop, plus refinement sweeps.

#include <cfm/config.hpp>
#include <cfm/conjugator.hpp>
#include <cfm/field_analysis.hpp>
#include <cfm/mapper.hpp>
#include <cfm/mesh.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cfm {

struct StageTime {
    std::string stage;
    double seconds{};
};

struct SaddleRecord {
    Vec2 location;
    double value{};
    double gradient_norm{};
    int multiplicity{};
};

struct RunReport {
    std::string name;
    MapKind kind{MapKind::ring};
    int holes{};
    int order{};
    double h{};

    double d{};
    /// 2 pi / d for rings and multiply connected domains, M for quadrilaterals.
    double modulus{};
    std::optional<double> reference;
    double reference_error{};  // relative

    std::vector<double> jumps;      // scaled to sum to d; zeros for degenerate saddles
    std::vector<double> raw_jumps;  // contour fluxes as measured
    std::vector<SaddleRecord> saddles;
    std::vector<Slit> slits;
    int moduli_count{};  // 3m - 3 for m >= 2 holes

    double conjugate_energy{};  // conjugate with values in [0, d]
    ReciprocalErrors reciprocal;

    int dofs_u1{};
    int dofs_u2{};
    MeshStats mesh_u1;
    MeshStats mesh_u2;
    double residual_u1{};
    double residual_u2{};

    // checks
    double energy_change{};  // |E_p - E_{p-1}| / E_p on the first mesh
    int h_refinements{};
    double flux_outer{};     // flux through a level curve enclosing every hole
    double flux_outer_alt{};  // the same at another level
    double hole_flux_sum{};
    double max_principle_u1{};
    double max_principle_u2{};
    std::vector<std::string> walk;  // "tag = value" or "tag neumann" per run

    double cr_max{};
    double cr_mean{};
    double cr_rms{};
    int cr_points{};

    int outer_iterations{};
    bool converged{false};
    double eps2{};
    double eps3{};
    bool shared_mesh{true};
    bool normalized_jumps{false};

    std::vector<StageTime> timings;
    std::vector<std::string> warnings;
    std::vector<std::string> notes;

    [[nodiscard]] double total_seconds() const;
};

struct RunOptions {
    Exec exec{Exec::parallel};
    bool normalized_jumps{false};
    /// Reuse these cuts instead of tracing new ones.
    std::optional<CutSet> frozen_cuts;
    bool cauchy_riemann{true};
    int cr_density{120};
};

struct RunResult {
    ConformalMap map;
    RunReport report;
    std::shared_ptr<const Mesh> mesh;            // u1 mesh (cuts embedded, not opened)
    std::shared_ptr<const Mesh> conjugate_mesh;  // opened along the cuts
    SaddleSearch saddles;
    JumpResult jumps;
    ConjugateSpec conjugate;
};

class PipelineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] RunResult run_simply_connected(const ProblemConfig& cfg, const RunOptions& options = {});
[[nodiscard]] RunResult run_ring(const ProblemConfig& cfg, const RunOptions& options = {});
[[nodiscard]] RunResult run_multiply_connected(const ProblemConfig& cfg, const RunOptions& options = {});
/// Dispatch on the hole count and marked points.
[[nodiscard]] RunResult run_problem(const ProblemConfig& cfg, const RunOptions& options = {});

/// Scaled jumps in walk order with a zero for every saddle passage beyond the
/// second at a degenerate saddle.
[[nodiscard]] std::vector<double> padded_jumps(const ConjugateSpec& spec, const CutSet& cuts,
                                               std::span<const double> jumps);

enum class LadderKind { h, p };

struct SweepRow {
    double h{};
    int order{};
    double d{};
    double e_direct{};
    double e_normalized{};
    int order_direct{};
    int order_normalized{};
    int dofs{};
    double cr_rms{};
    double seconds{};
    std::string error;  // empty on success
};

/// Runs the pipeline at each ladder value. With frozen cuts the first entry's
/// cuts are reused by the others; entries run concurrently when OpenMP is on.
[[nodiscard]] std::vector<SweepRow> convergence_sweep(const ProblemConfig& cfg, LadderKind kind,
                                                      const std::vector<double>& values, bool frozen_cuts,
                                                      const RunOptions& options = {});

}  // namespace cfm
