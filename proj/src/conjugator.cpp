#include <cfm/conjugator.hpp>

#include <cfm/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace cfm {

namespace {

// Closed boundary polygon of one loop with arclength parameters.
struct LoopCurve {
    std::vector<Vec2> points;  // closed: last edge returns to points[0]
    std::vector<double> s;     // cumulative length at each point
    double length{};

    [[nodiscard]] Vec2 at(double t) const {
        t = std::fmod(t, length);
        if (t < 0) t += length;
        const auto it = std::upper_bound(s.begin(), s.end(), t);
        const std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - s.begin() - 1));
        const Vec2 a = points[k], b = points[(k + 1) % points.size()];
        const double seg = distance(a, b);
        return seg > 0 ? a + (b - a) * ((t - s[k]) / seg) : a;
    }

    [[nodiscard]] double project(Vec2 p) const {
        double best = 1e300, tb = 0.0;
        for (std::size_t k = 0; k < points.size(); ++k) {
            double t = 0.0;
            const Vec2 a = points[k], b = points[(k + 1) % points.size()];
            const double d = point_segment_distance(p, a, b, &t);
            if (d < best) {
                best = d;
                tb = s[k] + t * distance(a, b);
            }
        }
        return tb;
    }
};

LoopCurve loop_curve(const Mesh& mesh, int loop) {
    for (const auto& cyc : boundary_cycles(mesh)) {
        const auto& e0 = mesh.boundary_edges[cyc.front()];
        if (e0.tag.is_cut() || e0.tag.id != loop) continue;
        LoopCurve c;
        for (const int e : cyc) c.points.push_back(mesh.nodes[mesh.boundary_edges[e].a]);
        c.s.resize(c.points.size());
        double acc = 0.0;
        for (std::size_t k = 0; k < c.points.size(); ++k) {
            c.s[k] = acc;
            acc += distance(c.points[k], c.points[(k + 1) % c.points.size()]);
        }
        c.length = acc;
        return c;
    }
    throw ConjugateError("no boundary cycle for loop " + std::to_string(loop));
}

int hole_count(const Mesh& m) {
    int n = 0;
    for (const auto& e : m.boundary_edges)
        if (!e.tag.is_cut()) n = std::max(n, e.tag.id);
    return n;
}

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        p[a] = b;
        return true;
    }
};

// Start candidates for the cut from the outer loop, best first.
std::vector<Vec2> gamma0_candidates(const PotentialField& u1, const CutOptions& o, const LoopCurve& outer) {
    std::vector<Vec2> out;
    const double diam = u1.mesh().bbox().diameter();
    auto add_perturbed = [&](Vec2 p) {
        const double t = outer.project(p);
        out.push_back(outer.at(t));
        for (int k = 1; k <= 6; ++k) {
            out.push_back(outer.at(t + 0.01 * k * outer.length));
            out.push_back(outer.at(t - 0.01 * k * outer.length));
        }
    };
    if (o.gamma0_start) {
        add_perturbed(*o.gamma0_start);
        return out;
    }
    if (o.symmetry) {
        const Vec2 a = o.symmetry->point, dir = normalized(o.symmetry->direction);
        std::vector<std::pair<double, Vec2>> hits;
        const std::size_t n = outer.points.size();
        for (std::size_t k = 0; k < n; ++k) {
            const auto x = segment_intersection(a - dir * (2 * diam), a + dir * (2 * diam), outer.points[k],
                                                outer.points[(k + 1) % n]);
            if (!x) continue;
            const Vec2 p = a - dir * (2 * diam) + dir * (4 * diam * x->first);
            const auto smp = u1.sample(p, {}, 1e-9 * diam);
            hits.emplace_back(smp ? -norm(smp->gradient) : 0.0, p);
        }
        std::sort(hits.begin(), hits.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
        for (const auto& h : hits) add_perturbed(h.second);
        if (!out.empty()) return out;
    }
    // largest gradient on the outer loop, away from graded (singular) spots
    const Mesh& m = u1.mesh();
    std::vector<double> sizes;
    for (int t = 0; t < m.triangle_count(); ++t) sizes.push_back(std::sqrt(2.0 * m.triangle_area(t)));
    std::nth_element(sizes.begin(), sizes.begin() + sizes.size() / 2, sizes.end());
    const double median = sizes[sizes.size() / 2];
    std::vector<std::pair<double, Vec2>> cand;
    for (const auto& e : m.boundary_edges) {
        if (e.tag.is_cut() || e.tag.id != 0) continue;
        const Vec2 a = m.nodes[e.a], b = m.nodes[e.b];
        if (distance(a, b) < 0.5 * median) continue;
        const Vec2 mid = (a + b) * 0.5;
        const Vec2 inward{-(b - a).y, (b - a).x};
        const auto smp = u1.sample(mid, inward, 1e-9 * diam);
        if (smp) cand.emplace_back(-norm(smp->gradient), mid);
    }
    std::sort(cand.begin(), cand.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    for (std::size_t k = 0; k < cand.size() && k < 20; ++k) out.push_back(cand[k].second);
    return out;
}

}  // namespace

std::vector<CutPolyline> CutSet::polylines() const {
    std::vector<CutPolyline> out;
    for (const auto& a : arcs) out.push_back({a.id, a.points});
    return out;
}

// ---------------------------------------------------------------------------
// cuts
// ---------------------------------------------------------------------------

CutStart bisect_cut_start(const PotentialField& u1, int hole, Vec2 guess, Vec2 saddle, Vec2 ascent, double ball,
                          double eps3) {
    const LoopCurve curve = loop_curve(u1.mesh(), hole);
    TraceOptions to;
    to.saddles = {saddle};
    to.saddle_radius = ball;
    const Vec2 a = normalized(ascent);

    CutStart out;
    // +1 / -1: side of the ascent line where the path passes the saddle; 0: inside the ball
    auto side = [&](double t, DescentPath& path) {
        ++out.iterations;
        path = trace_path(u1, curve.at(t), Direction::descent, to);
        if (path.end == Termination::saddle) return 0;
        double best = 1e300;
        Vec2 c = path.points.front();
        for (const Vec2 q : path.points)
            if (distance(q, saddle) < best) {
                best = distance(q, saddle);
                c = q;
            }
        return cross(a, c - saddle) >= 0 ? 1 : -1;
    };

    const double tg = curve.project(guess);
    DescentPath p0, p1;
    double delta = std::max(0.005 * curve.length, 4.0 * ball);
    double t0 = tg - delta, t1 = tg + delta;
    int s0 = side(t0, p0), s1 = side(t1, p1);
    for (int grow = 0; s0 * s1 > 0 && grow < 4; ++grow) {
        delta *= 2.0;
        t0 = tg - delta;
        t1 = tg + delta;
        s0 = side(t0, p0);
        s1 = side(t1, p1);
    }
    auto finish = [&](double t, DescentPath& p, bool hit) {
        out.boundary_point = curve.at(t);
        out.path = std::move(p);
        out.reached_ball = hit;
        return out;
    };
    if (s0 == 0) return finish(t0, p0, true);
    if (s1 == 0) return finish(t1, p1, true);
    if (s0 * s1 > 0) return finish(tg, p0, false);
    while (t1 - t0 > eps3 * curve.length) {
        const double tm = 0.5 * (t0 + t1);
        DescentPath pm;
        const int sm = side(tm, pm);
        if (sm == 0) return finish(tm, pm, true);
        if (sm == s0)
            t0 = tm;
        else
            t1 = tm;
    }
    DescentPath pm;
    const double tm = 0.5 * (t0 + t1);
    const int sm = side(tm, pm);
    return finish(tm, pm, sm == 0);
}

CutSet build_cuts(const PotentialField& u1, const SaddleSearch& search, const CutOptions& options) {
    const Mesh& mesh = u1.mesh();
    const int m = hole_count(mesh);
    if (m < 1) throw ConjugateError("build_cuts: the domain has no holes");

    CutSet out;
    out.ball_radius = search.ball_radius;
    for (const auto& s : search.saddles) out.saddles.push_back(s.location);

    TraceOptions to;
    to.saddles = out.saddles;
    to.saddle_radius = search.ball_radius;

    // the arc from the outer loop
    const LoopCurve outer = loop_curve(mesh, 0);
    bool found = false;
    int tried = 0;
    for (const Vec2 start : gamma0_candidates(u1, options, outer)) {
        ++tried;
        const DescentPath p = trace_path(u1, start, Direction::ascent, to);
        if (!p.reached_boundary() || p.loop < 1) continue;
        out.arcs.push_back({0, p.points, 0, p.loop, -1});
        out.cuts.push_back({{0}, -1});
        if (tried > 1) out.notes.push_back("outer cut start moved to candidate " + std::to_string(tried));
        found = true;
        break;
    }
    if (!found) throw ConjugateError("no ascent path from the outer loop reaches a hole");

    // ascent arcs of every saddle
    for (std::size_t si = 0; si < search.saddles.size(); ++si) {
        const SaddlePoint& sp = search.saddles[si];
        Cut cut;
        cut.saddle = static_cast<int>(si);
        to.ignore_saddle = static_cast<int>(si);
        for (const Vec2 dir : sp.ascent) {
            const DescentPath p = trace_path(u1, sp.location + dir * search.ball_radius, Direction::ascent, to);
            if (p.end == Termination::saddle)
                throw ConjugateError("ascent path from saddle " + std::to_string(si) + " runs into saddle " +
                                     std::to_string(p.saddle));
            if (!p.reached_boundary() || p.loop < 1)
                throw ConjugateError("ascent path from saddle " + std::to_string(si) + " does not reach a hole");
            CutArc arc{static_cast<int>(out.arcs.size()), {sp.location}, -1, p.loop, static_cast<int>(si)};
            arc.points.insert(arc.points.end(), p.points.begin(), p.points.end());
            if (options.bisect_starts) {
                const CutStart cs = bisect_cut_start(u1, p.loop, p.points.back(), sp.location, dir,
                                                     search.ball_radius, options.eps3);
                if (cs.reached_ball) {
                    arc.points.assign(1, sp.location);
                    arc.points.insert(arc.points.end(), cs.path.points.rbegin(), cs.path.points.rend());
                } else {
                    out.notes.push_back("bisection for arc " + std::to_string(arc.id) +
                                        " did not reach the saddle ball; kept the ascent trace");
                }
            }
            cut.arcs.push_back(arc.id);
            out.arcs.push_back(std::move(arc));
        }
        out.cuts.push_back(std::move(cut));
    }

    // the arcs must form a tree joining every loop
    const int nodes = m + 1 + static_cast<int>(search.saddles.size());
    UnionFind uf(nodes);
    for (const auto& a : out.arcs) {
        const int from = a.saddle >= 0 ? m + 1 + a.saddle : a.from_loop;
        if (!uf.unite(from, a.to_loop))
            throw ConjugateError("cut arc " + std::to_string(a.id) + " closes a cycle (hole " +
                                 std::to_string(a.to_loop) + " reached twice)");
    }
    for (int j = 1; j <= m; ++j)
        if (uf.find(j) != uf.find(0))
            throw ConjugateError("hole " + std::to_string(j) + " is not joined to the outer loop by any cut");
    return out;
}

// ---------------------------------------------------------------------------
// boundary walk
// ---------------------------------------------------------------------------

ConjugateSpec assemble_conjugate_boundary(const Mesh& opened, const CutSet& cuts) {
    const auto cycles = boundary_cycles(opened);
    if (cycles.size() != 1)
        throw ConjugateError("conjugate boundary walk does not close into one cycle (" +
                             std::to_string(cycles.size()) + " cycles)");
    const auto& cyc = cycles.front();

    // runs of equal tags, rotated to start at side 0 of arc 0
    std::vector<WalkRun> runs;
    for (const int e : cyc) {
        const auto& be = opened.boundary_edges[e];
        const double len = distance(opened.nodes[be.a], opened.nodes[be.b]);
        if (runs.empty() || runs.back().tag != be.tag) runs.push_back({be.tag, {}, 0.0, false, 0.0});
        runs.back().edges.push_back(e);
        runs.back().length += len;
    }
    if (runs.size() > 1 && runs.front().tag == runs.back().tag) {
        runs.back().edges.insert(runs.back().edges.end(), runs.front().edges.begin(), runs.front().edges.end());
        runs.back().length += runs.front().length;
        runs.erase(runs.begin());
    }
    const EdgeTag first = EdgeTag::cut_side(0, 0);
    const auto it = std::find_if(runs.begin(), runs.end(), [&](const WalkRun& r) { return r.tag == first; });
    if (it == runs.end()) throw ConjugateError("side 0 of the outer cut is missing from the walk");
    std::rotate(runs.begin(), it, runs.end());

    // structure
    std::set<EdgeTag> seen;
    for (const auto& r : runs)
        if (r.tag.is_cut() && !seen.insert(r.tag).second)
            throw ConjugateError("cut side " + to_string(r.tag) + " appears twice in the walk");
    for (const auto& a : cuts.arcs)
        for (int side = 0; side < 2; ++side)
            if (!seen.count(EdgeTag::cut_side(a.id, side)))
                throw ConjugateError("cut side " + to_string(EdgeTag::cut_side(a.id, side)) + " is not in the walk");
    if (runs.size() < 3 || runs.back().tag.is_cut() || runs.back().tag.id != 0 ||
        runs[runs.size() - 2].tag != EdgeTag::cut_side(0, 1))
        throw ConjugateError("the walk must end with side 1 of the outer cut followed by the outer loop");
    const int m = hole_count(opened);
    std::set<int> loops;
    for (const auto& r : runs)
        if (!r.tag.is_cut()) loops.insert(r.tag.id);
    for (int j = 0; j <= m; ++j)
        if (!loops.count(j)) throw ConjugateError("loop " + std::to_string(j) + " is unused by the walk");

    ConjugateSpec spec;
    for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
        const auto& r = runs[k];
        if (r.tag.is_cut()) continue;
        if (r.tag.id == 0) throw ConjugateError("the outer loop is split by the cuts");
        if (k == 0 || !runs[k - 1].tag.is_cut() || !runs[k + 1].tag.is_cut())
            throw ConjugateError("hole run not enclosed by cut sides");
        spec.hole_runs.push_back({r.tag.id, runs[k - 1].tag.id, runs[k + 1].tag.id});
        spec.hole_run_index.push_back(static_cast<int>(k));
    }
    spec.walk = std::move(runs);
    return spec;
}

void assign_cut_values(ConjugateSpec& spec, std::span<const double> jumps, double d) {
    if (jumps.size() != spec.hole_runs.size())
        throw ConjugateError("assign_cut_values: " + std::to_string(jumps.size()) + " jumps for " +
                             std::to_string(spec.hole_runs.size()) + " hole runs");
    const double total = std::accumulate(jumps.begin(), jumps.end(), 0.0);
    if (std::fabs(total - d) > 1e-6 * std::fabs(d))
        throw ConjugateError("jumps sum to " + std::to_string(total) + ", expected " + std::to_string(d));
    double acc = 0.0;
    std::size_t next = 0;
    for (std::size_t k = 0; k < spec.walk.size(); ++k) {
        WalkRun& r = spec.walk[k];
        if (next < spec.hole_run_index.size() && static_cast<int>(k) == spec.hole_run_index[next]) {
            acc += jumps[next++];
            r.dirichlet = false;
            continue;
        }
        r.dirichlet = r.tag.is_cut();
        r.value = r.dirichlet ? acc : 0.0;
    }
    // the closing side carries d exactly
    spec.walk[spec.walk.size() - 2].value = d;
}

BoundaryCondition conjugate_bc(const ConjugateSpec& spec, const Mesh& opened, double d, bool normalized) {
    BoundaryCondition bc;
    const double scale = normalized ? 1.0 / d : 1.0;
    for (const auto& r : spec.walk)
        if (r.dirichlet) bc.dirichlet[r.tag] = r.value * scale;
    for (const auto& e : opened.boundary_edges)
        if (!e.tag.is_cut()) bc.neumann.insert(e.tag);
    return bc;
}

PotentialField solve_conjugate(const ConjugateSpec& spec, std::shared_ptr<const Mesh> opened, int order, double d,
                               bool normalized, const SolveOptions& options) {
    const BoundaryCondition bc = conjugate_bc(spec, *opened, d, normalized);
    return solve_laplace(std::make_shared<const FeSpace>(std::move(opened), order), bc, options);
}

BoundaryCondition quadrilateral_bc(bool conjugate) {
    BoundaryCondition bc;
    // arcs 0..3 counterclockwise from the first marked point
    const int zero = conjugate ? 2 : 1, one = conjugate ? 0 : 3;
    bc.dirichlet[EdgeTag::loop(0, zero)] = 0.0;
    bc.dirichlet[EdgeTag::loop(0, one)] = 1.0;
    for (int k = 0; k < 4; ++k)
        if (k != zero && k != one) bc.neumann.insert(EdgeTag::loop(0, k));
    return bc;
}

// ---------------------------------------------------------------------------
// reciprocal check
// ---------------------------------------------------------------------------

int error_order(double e) {
    if (!(e > 0.0)) return 16;
    return std::abs(static_cast<int>(std::ceil(std::log10(e))));
}

ReciprocalErrors reciprocal_errors(double d, double conjugate_energy) {
    ReciprocalErrors r;
    r.direct = std::fabs(1.0 - d / conjugate_energy);
    r.normalized = std::fabs(1.0 - conjugate_energy / d);
    r.direct_order = error_order(r.direct);
    r.normalized_order = error_order(r.normalized);
    return r;
}

}  // namespace cfm
