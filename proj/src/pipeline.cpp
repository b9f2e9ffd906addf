#include <cfm/pipeline.hpp>

#include <cfm/geometry.hpp>
#include <cfm/mesher.hpp>
#include <cfm/report.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cfm {

namespace {

class Stopwatch {
public:
    explicit Stopwatch(std::vector<StageTime>& sink) : sink_(sink) {}
    void lap(const std::string& stage) {
        const auto now = std::chrono::steady_clock::now();
        sink_.push_back({stage, std::chrono::duration<double>(now - last_).count()});
        last_ = now;
    }

private:
    std::vector<StageTime>& sink_;
    std::chrono::steady_clock::time_point last_{std::chrono::steady_clock::now()};
};

BoundaryCondition capacity_bc(int holes) {
    BoundaryCondition bc;
    bc.dirichlet[EdgeTag::loop(0)] = 0.0;
    for (int j = 1; j <= holes; ++j) bc.dirichlet[EdgeTag::loop(j)] = 1.0;
    return bc;
}

// Flux through all closed level curves at `level` (one curve when the level
// lies below every saddle value).
double level_flux(const PotentialField& u, double level) {
    double f = 0.0;
    for (const auto& c : extract_contours(u, level))
        if (c.closed) f += flux_integral(u, c.points, true);
    return f;
}

void fill_common(RunReport& r, const ProblemConfig& cfg) {
    r.name = cfg.name;
    r.holes = cfg.domain.hole_count();
    r.order = cfg.fem.order;
    r.h = cfg.fem.h;
    r.reference = cfg.reference_capacity;
    r.shared_mesh = cfg.fem.shared_mesh;
    r.eps2 = cfg.tol.eps2;
    r.eps3 = cfg.tol.eps3;
}

void fill_cr(RunReport& r, const ConformalMap& map, const RunOptions& options) {
    if (!options.cauchy_riemann) return;
    CrOptions co;
    co.density = options.cr_density;
    co.exec = options.exec;
    const CrReport cr = cauchy_riemann_report(map, co);
    r.cr_max = cr.max;
    r.cr_mean = cr.mean;
    r.cr_rms = cr.rms;
    r.cr_points = static_cast<int>(cr.points.size());
}

struct FirstSolve {
    std::shared_ptr<const Mesh> mesh;
    PotentialField u;
    double energy_change{};
    int refinements{};
    double h{};
};

// u1 on the plain mesh, halving h while p and p-1 disagree by more than eps1
FirstSolve first_solve(const ProblemConfig& cfg, const SolveOptions& so, Stopwatch& sw) {
    MeshOptions mo = cfg.mesh_options();
    const BoundaryCondition bc = capacity_bc(cfg.domain.hole_count());
    for (int r = 0;; ++r) {
        auto mesh = std::make_shared<const Mesh>(triangulate(cfg.domain, mo));
        sw.lap("mesh");
        PotentialField u = solve_laplace(std::make_shared<const FeSpace>(mesh, cfg.fem.order), bc, so);
        sw.lap("solve u1");
        double change = 0.0;
        if (cfg.fem.order >= 2) {
            const PotentialField low = solve_laplace(std::make_shared<const FeSpace>(mesh, cfg.fem.order - 1), bc, so);
            change = std::fabs(dirichlet_energy(u) - dirichlet_energy(low)) / dirichlet_energy(u);
            sw.lap("energy check");
        }
        if (change <= cfg.tol.eps1 || r >= cfg.fem.max_h_refinements)
            return {std::move(mesh), std::move(u), change, r, mo.h};
        mo.h *= 0.5;
    }
}

// One pass of the cut / conjugate chain at the given tolerances.
RunResult conjugate_pass(const ProblemConfig& cfg, const RunOptions& options, const FirstSolve& first,
                         double eps2, double eps3, int iteration, Stopwatch& sw) {
    const int m = cfg.domain.hole_count();
    SolveOptions so;
    so.exec = options.exec;
    MeshOptions mo = cfg.mesh_options();
    mo.h = first.h;

    RunResult res;
    RunReport& r = res.report;

    CutSet cuts;
    if (options.frozen_cuts) {
        cuts = *options.frozen_cuts;
    } else {
        if (m >= 2) {
            SaddleOptions sopt;
            sopt.eps2_relative = eps2;
            sopt.exec = options.exec;
            res.saddles = find_saddles(first.u, sopt);
            sw.lap("saddles");
            int count = 0;
            for (const auto& s : res.saddles.saddles) count += s.multiplicity();
            if (count < m - 1)
                throw AnalysisError("found " + std::to_string(count) + " saddles, expected " + std::to_string(m - 1));
            if (count > m - 1)
                r.warnings.push_back("found " + std::to_string(count) + " saddles, expected " + std::to_string(m - 1));
        }
        CutOptions co;
        co.gamma0_start = cfg.gamma0_start;
        co.symmetry = cfg.symmetry;
        co.eps3 = eps3;
        co.bisect_starts = iteration > 0;
        cuts = build_cuts(first.u, res.saddles, co);
        sw.lap("cuts");
    }
    for (const auto& n : cuts.notes) r.notes.push_back(n);

    // u1 on the mesh with the cuts as edges
    const auto polys = cuts.polylines();
    auto joined = std::make_shared<const Mesh>(triangulate(cfg.domain, mo, polys));
    sw.lap("mesh with cuts");
    // from here on the cuts are the mesh edges, not the traced curves
    for (const auto& pl : joined->polylines) {
        auto& pts = cuts.arcs.at(pl.id).points;
        pts.clear();
        for (const int n : pl.nodes) pts.push_back(joined->nodes[n]);
    }
    PotentialField u1 = first.u;
    if (cfg.fem.shared_mesh) {
        u1 = solve_laplace(std::make_shared<const FeSpace>(joined, cfg.fem.order), capacity_bc(m), so);
        sw.lap("solve u1 on cut mesh");
        res.mesh = joined;
    } else {
        res.mesh = first.mesh;
        r.notes.push_back("u1 and the conjugate use separate meshes");
    }
    const double d = dirichlet_energy(u1);

    auto opened = std::make_shared<const Mesh>(open_along_cuts(*joined));
    res.conjugate_mesh = opened;
    res.conjugate = assemble_conjugate_boundary(*opened, cuts);

    // saddle values on the final u1
    std::vector<double> sval;
    for (const Vec2 s : cuts.saddles) sval.push_back(evaluate(u1, s));
    std::map<int, double> levels;
    for (int j = 1; j <= m; ++j) {
        double top = -1.0;
        for (const auto& a : cuts.arcs)
            if (a.saddle >= 0 && a.to_loop == j) top = std::max(top, sval[a.saddle]);
        if (top < 0)
            for (const double v : sval) top = std::max(top, v);
        levels[j] = 0.5 * (1.0 + std::max(top, 0.0));
    }
    res.jumps = jump_decomposition(u1, cuts.arcs, res.conjugate.hole_runs, levels);
    r.raw_jumps = res.jumps.jumps;
    const double raw_total = std::accumulate(r.raw_jumps.begin(), r.raw_jumps.end(), 0.0);
    std::vector<double> scaled = r.raw_jumps;
    for (double& j : scaled) j *= d / raw_total;
    assign_cut_values(res.conjugate, scaled, d);
    r.jumps = padded_jumps(res.conjugate, cuts, scaled);
    r.hole_flux_sum = 0.0;
    for (const auto& [j, f] : res.jumps.hole_flux) r.hole_flux_sum += f;
    sw.lap("jumps");

    const PotentialField u2 =
        solve_conjugate(res.conjugate, opened, cfg.fem.order, d, options.normalized_jumps, so);
    sw.lap("solve conjugate");
    const double e2 = dirichlet_energy(u2);
    r.conjugate_energy = options.normalized_jumps ? e2 * d * d : e2;
    r.reciprocal = reciprocal_errors(d, r.conjugate_energy);

    // the map
    ConformalMap& map = res.map;
    map.kind = m == 1 ? MapKind::ring : MapKind::multiply_connected;
    map.u1 = u1;
    map.u2 = options.normalized_jumps ? u2 : u2.scaled(1.0 / d);
    map.d = d;
    map.cuts = cuts;
    map.saddle_values = sval;
    map.slits = collect_slits(res.conjugate, cuts, sval, d);

    // report
    r.kind = map.kind;
    r.d = d;
    r.modulus = 2.0 * std::numbers::pi / d;
    r.slits = map.slits;
    r.moduli_count = m >= 2 ? 3 * m - 3 : 0;
    for (std::size_t k = 0; k < cuts.saddles.size(); ++k) {
        int arcs = 0;
        for (const auto& a : cuts.arcs) arcs += a.saddle == static_cast<int>(k);
        r.saddles.push_back({cuts.saddles[k], sval[k], norm(gradient_at(u1, cuts.saddles[k])), arcs - 1});
    }
    r.dofs_u1 = u1.stats().dofs;
    r.dofs_u2 = u2.stats().dofs;
    r.residual_u1 = u1.stats().residual;
    r.residual_u2 = u2.stats().residual;
    r.mesh_u1 = mesh_statistics(u1.mesh());
    r.mesh_u2 = mesh_statistics(*opened);
    for (const auto& w : u1.stats().warnings) r.warnings.push_back("u1: " + w);
    for (const auto& w : u2.stats().warnings) r.warnings.push_back("conjugate: " + w);

    double smin = 1.0;
    for (const double v : sval) smin = std::min(smin, v);
    r.flux_outer = level_flux(u1, 0.5 * smin);
    r.flux_outer_alt = level_flux(u1, 0.25 * smin);
    r.max_principle_u1 = max_principle_violation(u1);
    r.max_principle_u2 = max_principle_violation(map.u2);
    for (const auto& run : res.conjugate.walk) {
        std::string s = to_string(run.tag);
        s += run.dirichlet ? " = " + fmt12(run.value) : " neumann";
        s += " (" + std::to_string(run.edges.size()) + " edges)";
        r.walk.push_back(std::move(s));
    }
    sw.lap("checks");
    fill_cr(r, map, options);
    sw.lap("cauchy-riemann");
    return res;
}

RunResult run_cut_domain(const ProblemConfig& cfg, const RunOptions& options) {
    std::vector<StageTime> timings;
    Stopwatch sw(timings);
    SolveOptions so;
    so.exec = options.exec;
    const FirstSolve first = first_solve(cfg, so, sw);

    std::optional<RunResult> best;
    std::vector<std::string> carried;
    double eps2 = cfg.tol.eps2, eps3 = cfg.tol.eps3;
    const int iterations = options.frozen_cuts ? 1 : cfg.tol.max_outer;
    int done = 0;
    for (int it = 0; it < iterations; ++it) {
        ++done;
        try {
            RunResult r = conjugate_pass(cfg, options, first, eps2, eps3, it, sw);
            r.report.eps2 = eps2;
            r.report.eps3 = eps3;
            const bool better = !best || r.report.reciprocal.normalized < best->report.reciprocal.normalized;
            if (better) best = std::move(r);
            if (best->report.reciprocal.normalized <= cfg.tol.eps4) break;
        } catch (const std::exception& e) {
            carried.push_back("iteration " + std::to_string(it + 1) + ": " + e.what());
            if (it + 1 == iterations && !best)
                throw PipelineError(cfg.name + ": " + e.what());
        }
        eps2 *= cfg.tol.shrink;
        eps3 *= cfg.tol.shrink;
    }
    RunReport& r = best->report;
    fill_common(r, cfg);
    r.h = first.h;
    r.eps2 = best->report.eps2;
    r.eps3 = best->report.eps3;
    r.normalized_jumps = options.normalized_jumps;
    r.energy_change = first.energy_change;
    r.h_refinements = first.refinements;
    r.outer_iterations = done;
    r.converged = r.reciprocal.normalized <= cfg.tol.eps4;
    if (!r.converged)
        r.warnings.push_back("reciprocal error " + fmt12(r.reciprocal.normalized) + " above eps4 after " +
                             std::to_string(done) + " iterations");
    if (first.energy_change > cfg.tol.eps1)
        r.notes.push_back("energy change between orders p-1 and p: " + fmt12(first.energy_change));
    for (auto& w : carried) r.warnings.push_back(std::move(w));
    if (r.reference) r.reference_error = std::fabs(r.d / *r.reference - 1.0);
    r.timings = std::move(timings);
    return std::move(*best);
}

}  // namespace

double RunReport::total_seconds() const {
    double t = 0.0;
    for (const auto& s : timings) t += s.seconds;
    return t;
}

std::vector<double> padded_jumps(const ConjugateSpec& spec, const CutSet& cuts, std::span<const double> jumps) {
    std::vector<double> out;
    std::map<int, int> passages;
    std::size_t next = 0;
    for (std::size_t k = 0; k < spec.walk.size(); ++k) {
        if (next < spec.hole_run_index.size() && static_cast<int>(k) == spec.hole_run_index[next]) {
            out.push_back(jumps[next++]);
            continue;
        }
        if (k + 1 >= spec.walk.size() || !spec.walk[k].tag.is_cut() || !spec.walk[k + 1].tag.is_cut()) continue;
        const int a = cuts.arcs.at(spec.walk[k].tag.id).saddle;
        const int b = cuts.arcs.at(spec.walk[k + 1].tag.id).saddle;
        if (a >= 0 && a == b && ++passages[a] > 2) out.push_back(0.0);
    }
    return out;
}

RunResult run_simply_connected(const ProblemConfig& cfg, const RunOptions& options) {
    if (cfg.domain.hole_count() != 0 || cfg.marked.size() != 4)
        throw PipelineError("a quadrilateral needs a simply connected domain and four marked points");
    RunResult res;
    RunReport& r = res.report;
    Stopwatch sw(r.timings);
    SolveOptions so;
    so.exec = options.exec;
    auto mesh = std::make_shared<const Mesh>(triangulate(cfg.domain, cfg.mesh_options()));
    sw.lap("mesh");
    auto space = std::make_shared<const FeSpace>(mesh, cfg.fem.order);
    PotentialField u1 = solve_laplace(space, quadrilateral_bc(false), so);
    sw.lap("solve u1");
    PotentialField u2 = solve_laplace(space, quadrilateral_bc(true), so);
    sw.lap("solve conjugate");
    const double M = dirichlet_energy(u1), Mt = dirichlet_energy(u2);

    res.mesh = mesh;
    res.conjugate_mesh = mesh;
    ConformalMap& map = res.map;
    map.kind = MapKind::quadrilateral;
    map.u1 = u1;
    map.u2 = u2;
    map.d = M;

    fill_common(r, cfg);
    r.kind = MapKind::quadrilateral;
    r.d = M;
    r.modulus = M;
    r.conjugate_energy = M * M * Mt;
    r.reciprocal = reciprocal_errors(M, r.conjugate_energy);
    r.dofs_u1 = u1.stats().dofs;
    r.dofs_u2 = u2.stats().dofs;
    r.residual_u1 = u1.stats().residual;
    r.residual_u2 = u2.stats().residual;
    r.mesh_u1 = r.mesh_u2 = mesh_statistics(*mesh);
    r.max_principle_u1 = max_principle_violation(u1);
    r.max_principle_u2 = max_principle_violation(u2);
    for (const auto& w : u1.stats().warnings) r.warnings.push_back("u1: " + w);
    for (const auto& w : u2.stats().warnings) r.warnings.push_back("conjugate: " + w);
    r.outer_iterations = 1;
    r.converged = r.reciprocal.normalized <= cfg.tol.eps4;
    if (r.reference) r.reference_error = std::fabs(M / *r.reference - 1.0);
    for (int k = 0; k < 4; ++k) {
        const EdgeTag t = EdgeTag::loop(0, k);
        const auto& bc = u1.bc();
        r.walk.push_back(to_string(t) + (bc.dirichlet.count(t) ? " = " + fmt12(bc.dirichlet.at(t)) : " neumann"));
    }
    sw.lap("checks");
    fill_cr(r, map, options);
    sw.lap("cauchy-riemann");
    return res;
}

RunResult run_ring(const ProblemConfig& cfg, const RunOptions& options) {
    if (cfg.domain.hole_count() != 1) throw PipelineError("a ring domain has exactly one hole");
    return run_cut_domain(cfg, options);
}

RunResult run_multiply_connected(const ProblemConfig& cfg, const RunOptions& options) {
    if (cfg.domain.hole_count() < 2) throw PipelineError("a multiply connected run needs at least two holes");
    return run_cut_domain(cfg, options);
}

RunResult run_problem(const ProblemConfig& cfg, const RunOptions& options) {
    const int m = cfg.domain.hole_count();
    if (m == 0) return run_simply_connected(cfg, options);
    if (m == 1) return run_ring(cfg, options);
    return run_multiply_connected(cfg, options);
}

std::vector<SweepRow> convergence_sweep(const ProblemConfig& cfg, LadderKind kind, const std::vector<double>& values,
                                        bool frozen_cuts, const RunOptions& options) {
    std::vector<SweepRow> rows(values.size());
    auto config_at = [&](std::size_t k) {
        ProblemConfig c = cfg;
        if (kind == LadderKind::h)
            c.fem.h = values[k];
        else
            c.fem.order = static_cast<int>(std::lround(values[k]));
        return c;
    };
    auto run_row = [&](std::size_t k, const RunOptions& o) -> std::optional<RunResult> {
        const ProblemConfig c = config_at(k);
        SweepRow& row = rows[k];
        row.h = c.fem.h;
        row.order = c.fem.order;
        try {
            RunResult r = run_problem(c, o);
            const RunReport& rep = r.report;
            row.h = rep.h;
            row.d = rep.d;
            row.e_direct = rep.reciprocal.direct;
            row.e_normalized = rep.reciprocal.normalized;
            row.order_direct = rep.reciprocal.direct_order;
            row.order_normalized = rep.reciprocal.normalized_order;
            row.dofs = rep.dofs_u1;
            row.cr_rms = rep.cr_rms;
            row.seconds = rep.total_seconds();
            return r;
        } catch (const std::exception& e) {
            row.error = e.what();
            return std::nullopt;
        }
    };

    RunOptions inner = options;
    std::size_t start = 0;
    if (frozen_cuts && cfg.domain.hole_count() >= 1 && !values.empty()) {
        const auto first = run_row(0, options);
        if (first) inner.frozen_cuts = first->map.cuts;
        start = 1;
    }
    const long n = static_cast<long>(values.size());
#ifdef _OPENMP
    const bool nested = omp_get_max_threads() > 1 && n - static_cast<long>(start) > 1;
    if (nested) inner.exec = Exec::serial;
#pragma omp parallel for schedule(dynamic) if (nested)
#endif
    for (long k = static_cast<long>(start); k < n; ++k) (void)run_row(static_cast<std::size_t>(k), inner);
    return rows;
}

}  // namespace cfm
