// Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any fails.

#include <cfm/builtins.hpp>
#include <cfm/pipeline.hpp>
#include <cfm/report.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace cfm;
using Clock = std::chrono::steady_clock;

constexpr double pi = std::numbers::pi;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

std::string g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string list(const std::vector<double>& v) {
    std::string s = "(";
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + g(v[k]);
    return s + ")";
}

struct Verdict {
    bool ok{true};
    std::vector<std::string> detail;

    void require(bool cond, const std::string& what) {
        ok = ok && cond;
        detail.push_back(what + (cond ? "" : " [fail]"));
    }
};

int failures = 0;

void emit(int n, const std::string& title, const Verdict& v) {
    std::cout << "criterion " << n << ": " << (v.ok ? "PASS" : "FAIL") << "  " << title << "\n";
    for (const auto& d : v.detail) std::cout << "    " << d << "\n";
    std::cout.flush();
    if (!v.ok) ++failures;
}

template <class F>
void guarded(int n, const std::string& title, F&& body) {
    Verdict v;
    try {
        body(v);
    } catch (const std::exception& e) {
        v.require(false, std::string("exception: ") + e.what());
    }
    emit(n, title, v);
}

RunResult solve(const std::string& name, double h = 0.0, int order = 0) {
    ProblemConfig cfg = builtin_problem(name);
    if (h > 0.0) cfg.fem.h = h;
    if (order > 0) cfg.fem.order = order;
    return run_problem(cfg);
}

const RunResult& cached(const std::string& name) {
    static std::map<std::string, RunResult> runs;
    auto it = runs.find(name);
    if (it == runs.end()) it = runs.emplace(name, solve(name)).first;
    return it->second;
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

void annulus_oracle(Verdict& v) {
    const auto t0 = Clock::now();
    const double exact = 2.0 * pi / std::log(2.0);
    RunResult last;
    for (const double h : {0.1, 0.05, 0.035}) {
        last = solve("annulus", h, 3);
        v.detail.push_back("h = " + g(h) + ": d = " + fmt12(last.report.d) + ", dofs " +
                           std::to_string(last.report.dofs_u1) + ", rel. error " + g(rel(last.report.d, exact)));
    }
    v.require(last.report.dofs_u1 >= 40000, "finest ladder step has " + std::to_string(last.report.dofs_u1) + " dofs");
    v.require(rel(last.report.d, exact) <= 1e-4, "capacity within 1e-4 of 2 pi / log 2");
    double worst = 0.0;
    for (int k = 1; k < 64; ++k) {
        const double t = 2.0 * pi * k / 64;  // the cut leaves the hole at t = 0
        const Vec2 z{0.5 * std::cos(t), 0.5 * std::sin(t)};
        worst = std::max(worst, std::fabs(std::abs(to_annulus(map_point(last.map, z), last.map.d)) - 0.5));
    }
    v.require(worst <= 1e-3, "inner image radius deviates from 0.5 by at most " + g(worst));
    const double secs = seconds_since(t0);
    v.require(secs <= 60.0, "ladder runtime " + g(secs) + " s");
}

void reference_capacity(Verdict& v, const std::string& name, double ref, double tol, double sector, double sector_ref) {
    const RunReport& r = cached(name).report;
    v.require(rel(r.d, ref) <= tol, "d = " + fmt12(r.d) + " vs " + fmt12(ref) + ", rel. error " + g(rel(r.d, ref)));
    v.require(rel(r.d / sector, sector_ref) <= tol, "d / " + g(sector) + " = " + fmt12(r.d / sector) + " vs " +
                                                        fmt12(sector_ref) + ", rel. error " +
                                                        g(rel(r.d / sector, sector_ref)));
}

void disk_pacman(Verdict& v) {
    const RunReport& r = cached("disk-pacman-in-rect").report;
    const double ref = 13.3376294414;
    v.require(rel(r.d, ref) <= 2e-3, "d = " + fmt12(r.d) + ", rel. error " + g(rel(r.d, ref)));
    const std::vector<double> jref{3.4808, 6.3761, 3.4808};
    bool ok = r.jumps.size() == jref.size();
    double worst = 0.0;
    for (std::size_t k = 0; ok && k < jref.size(); ++k) worst = std::max(worst, std::fabs(r.jumps[k] - jref[k]));
    v.require(ok && worst <= 5e-3, "jumps " + list(r.jumps) + ", max deviation " + g(worst));
}

void two_pacmen(Verdict& v) {
    const RunReport& r = cached("disk-two-pacmen-in-rect").report;
    const double ref = 14.3749;
    v.require(rel(r.d, ref) <= 5e-3, "d = " + fmt12(r.d) + ", rel. error " + g(rel(r.d, ref)));
    std::vector<double> jref{2.0001, 4.94015, 0.09500, 5.1651, 2.1746};
    std::vector<double> got = r.jumps;
    v.detail.push_back("jumps in walk order " + list(got));
    // the walk enumerates the two pacman runs in the opposite order, so compare the sorted values
    std::sort(jref.begin(), jref.end());
    std::sort(got.begin(), got.end());
    bool ok = got.size() == jref.size();
    double worst = 0.0;
    for (std::size_t k = 0; ok && k < jref.size(); ++k) worst = std::max(worst, std::fabs(got[k] - jref[k]));
    v.require(ok && worst <= 2e-2, "sorted jumps within " + g(worst) + " of the reference");
    v.require(r.reciprocal.normalized <= 1e-2, "e_r^n = " + g(r.reciprocal.normalized));
}

void reciprocal_trend(Verdict& v) {
    const std::vector<std::pair<std::string, std::vector<double>>> ladders{
        {"annulus", {0.1, 0.07, 0.05}},
        {"three-disks-in-circle", {0.1, 0.07, 0.05}},
        {"two-disks-in-rect", {0.15, 0.1, 0.07}},
        {"disk-pacman-in-rect", {0.15, 0.1, 0.07}},
    };
    for (const auto& [name, hs] : ladders) {
        RunOptions o;
        o.cauchy_riemann = false;
        const auto rows = convergence_sweep(builtin_problem(name), LadderKind::h, hs, false, o);
        std::vector<double> e;
        bool ok = true;
        for (const auto& row : rows) {
            ok = ok && row.error.empty();
            e.push_back(row.e_normalized);
        }
        // strictly decreasing, except for at most one step that stalls within 5 %
        int plateaus = 0;
        std::vector<double> ratios;
        for (std::size_t k = 1; ok && k < e.size(); ++k) {
            ratios.push_back(e[k] / e[k - 1]);
            if (e[k] < e[k - 1]) continue;
            if (e[k] <= 1.05 * e[k - 1])
                ++plateaus;
            else
                ok = false;
        }
        ok = ok && plateaus <= 1 && e.back() <= 1e-3;
        v.require(ok, name + ": e_r^n " + list(e) + ", step ratios " + list(ratios));
    }
}

void identities(Verdict& v, const std::string& name) {
    const RunResult& run = cached(name);
    const RunReport& r = run.report;
    const int m = r.holes;
    Verdict local;
    local.require(rel(r.flux_outer, r.d) <= 1e-3, "energy/flux " + g(rel(r.flux_outer, r.d)));
    const double sum = std::accumulate(r.jumps.begin(), r.jumps.end(), 0.0);
    local.require(rel(sum, r.d) <= 1e-6, "sum d_k " + g(rel(sum, r.d)));
    const double raw = std::accumulate(r.raw_jumps.begin(), r.raw_jumps.end(), 0.0);
    local.detail.push_back("unscaled " + g(rel(raw, r.d)));
    local.require(rel(r.flux_outer_alt, r.flux_outer) <= 1e-3, "levels " + g(rel(r.flux_outer_alt, r.flux_outer)));

    std::map<int, std::vector<int>> sides;
    std::map<int, int> loops;
    for (const auto& w : run.conjugate.walk) {
        if (w.tag.is_cut())
            sides[w.tag.id].push_back(w.tag.part);
        else
            ++loops[w.tag.id];
    }
    bool walk_ok = sides.size() == run.map.cuts.arcs.size() && loops.count(0) == 1 && loops[0] == 1;
    for (const auto& [id, s] : sides) walk_ok = walk_ok && s.size() == 2 && s[0] != s[1];
    for (int j = 1; j <= m; ++j) walk_ok = walk_ok && loops.count(j) == 1;
    local.require(walk_ok, "walk");
    local.require(static_cast<int>(r.jumps.size()) == 2 * m - 1, std::to_string(r.jumps.size()) + " jumps");
    int saddles = 0;
    for (const auto& s : r.saddles) saddles += s.multiplicity;
    local.require(saddles == m - 1, std::to_string(saddles) + " saddles");
    local.require(r.max_principle_u1 <= 1e-6 && r.max_principle_u2 <= 1e-6,
                  "max principle " + g(r.max_principle_u1) + " / " + g(r.max_principle_u2));
    std::string line = name + ":";
    for (const auto& d : local.detail) line += " " + d + ";";
    line.pop_back();
    v.require(local.ok, line);
}

void cauchy_riemann_refinement(Verdict& v) {
    // same cuts, same points, higher order
    ProblemConfig cfg = builtin_problem("two-disks-in-rect");
    cfg.fem.order = 2;
    const RunResult coarse = run_problem(cfg);
    CrOptions co;
    co.density = 80;
    const CrReport base = cauchy_riemann_report(coarse.map, co);
    RunOptions o;
    o.frozen_cuts = coarse.map.cuts;
    o.cauchy_riemann = false;
    double last = cauchy_riemann_at(coarse.map, base.points).rms;
    std::string trail = g(last);
    bool ok = true;
    for (const int p : {3, 4}) {
        cfg.fem.order = p;
        const RunResult fine = run_problem(cfg, o);
        const double rms = cauchy_riemann_at(fine.map, base.points).rms;
        ok = ok && rms < last;
        last = rms;
        trail += " -> " + g(rms);
    }
    v.require(ok, "two-disks CR rms on " + std::to_string(base.points.size()) + " fixed points, p = 2, 3, 4: " + trail);
}

void square(Verdict& v) {
    const auto t0 = Clock::now();
    const RunReport r = solve("unit-square").report;
    const double secs = seconds_since(t0);
    v.require(std::fabs(r.d - 1.0) <= 1e-12, "M = " + fmt12(r.d));
    v.require(r.reciprocal.direct <= 1e-10 && r.reciprocal.normalized <= 1e-10,
              "e_r = " + g(r.reciprocal.direct) + " / " + g(r.reciprocal.normalized));
    v.require(r.residual_u1 <= 1e-12 && r.residual_u2 <= 1e-12,
              "residuals " + g(r.residual_u1) + " / " + g(r.residual_u2));
    v.require(r.cr_max <= 1e-10, "Cauchy-Riemann max " + g(r.cr_max));
    v.require(secs <= 5.0, "runtime " + g(secs) + " s");
}

}  // namespace

int main() {
    guarded(1, "annulus oracle", annulus_oracle);
    guarded(2, "three disks in a circle", [](Verdict& v) {
        reference_capacity(v, "three-disks-in-circle", 9.67475429123, 1e-3, 6.0, 1.61245904853);
    });
    guarded(3, "two disks in a rectangle", [](Verdict& v) {
        reference_capacity(v, "two-disks-in-rect", 13.922976299110, 1e-3, 4.0, 3.48074407477);
    });
    guarded(4, "disk and pacman", disk_pacman);
    guarded(5, "disk and two pacmen", two_pacmen);
    guarded(6, "reciprocal error decreases under refinement", reciprocal_trend);
    guarded(7, "conservation and identity suite", [](Verdict& v) {
        for (const char* name : {"annulus", "pacman-droplet", "two-disks-in-rect", "disk-pacman-in-rect",
                                 "three-disks-in-circle", "disk-two-pacmen-in-rect"})
            identities(v, name);
        const RunReport& drop = cached("pacman-droplet").report;
        v.require(drop.reciprocal.normalized <= 1e-3, "pacman-droplet e_r^n " + g(drop.reciprocal.normalized));
        cauchy_riemann_refinement(v);
    });
    guarded(8, "unit square exactness", square);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
    return failures == 0 ? 0 : 1;
}
