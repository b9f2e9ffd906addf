// Serial reference against the OpenMP path for the data-parallel kernels.
// The problem is the two-disk rectangle at order 3; the argument selects the
// path (0 serial, 1 parallel).

#include <cfm/builtins.hpp>
#include <cfm/kernels.hpp>
#include <cfm/pipeline.hpp>

#include <benchmark/benchmark.h>

namespace {

using namespace cfm;

const RunResult& problem() {
    static const RunResult r = [] {
        RunOptions o;
        o.cauchy_riemann = false;
        return run_problem(builtin_problem("two-disks-in-rect"), o);
    }();
    return r;
}

// Regular grid over the bounding box; points outside the mesh are part of the load.
const std::vector<Vec2>& probe_grid() {
    static const std::vector<Vec2> pts = [] {
        const BBox b = problem().mesh->bbox();
        constexpr int n = 200;
        std::vector<Vec2> out;
        out.reserve(n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.push_back({b.lo.x + (b.hi.x - b.lo.x) * (i + 0.5) / n, b.lo.y + (b.hi.y - b.lo.y) * (j + 0.5) / n});
        return out;
    }();
    return pts;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& state) {
    state.SetLabel(state.range(0) ? "parallel x" + std::to_string(kernels::thread_count()) : "serial");
}

// ---------------------------------------------------------------------------
// kernels
// ---------------------------------------------------------------------------

void BM_element_stiffness(benchmark::State& state) {
    const FeSpace& space = problem().map.u1.space();
    for (auto _ : state) benchmark::DoNotOptimize(kernels::element_stiffness(space, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * problem().mesh->triangle_count());
    label(state);
}

void BM_energy(benchmark::State& state) {
    const PotentialField& u = problem().map.u1;
    for (auto _ : state) benchmark::DoNotOptimize(kernels::energy(u.space(), u.coefficients(), exec_of(state)));
    state.SetItemsProcessed(state.iterations() * problem().mesh->triangle_count());
    label(state);
}

void BM_sample_field(benchmark::State& state) {
    const auto& pts = probe_grid();
    for (auto _ : state) benchmark::DoNotOptimize(kernels::sample_field(problem().map.u1, pts, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size()));
    label(state);
}

void BM_cauchy_riemann(benchmark::State& state) {
    const auto& pts = probe_grid();
    const ConformalMap& map = problem().map;
    for (auto _ : state) benchmark::DoNotOptimize(kernels::cauchy_riemann(map.u1, map.u2, map.d, pts, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size()));
    label(state);
}

}  // namespace

BENCHMARK(BM_element_stiffness)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_energy)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sample_field)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_cauchy_riemann)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
