#include <cfm/report.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cfm {

namespace {

const char* kind_name(MapKind k) {
    switch (k) {
        case MapKind::quadrilateral: return "quadrilateral";
        case MapKind::ring: return "ring";
        case MapKind::multiply_connected: return "multiply-connected";
    }
    return "?";
}

std::string point(Vec2 p) { return "(" + fmt12(p.x) + ", " + fmt12(p.y) + ")"; }

}  // namespace

std::string fmt12(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::string report_text(const RunReport& r) {
    std::ostringstream os;
    os << "problem            " << r.name << "\n";
    os << "kind               " << kind_name(r.kind) << ", " << r.holes << " hole(s)\n";
    os << "order / h          " << r.order << " / " << fmt12(r.h);
    if (r.h_refinements > 0) os << " (after " << r.h_refinements << " halvings)";
    os << "\n\n";

    if (r.kind == MapKind::quadrilateral) {
        os << "modulus M          " << fmt12(r.d) << "\n";
        os << "conjugate M~       " << fmt12(r.conjugate_energy / (r.d * r.d)) << "\n";
    } else {
        os << "capacity d         " << fmt12(r.d) << "\n";
        os << "modulus 2pi/d      " << fmt12(r.modulus) << "\n";
        os << "conjugate energy   " << fmt12(r.conjugate_energy) << "\n";
    }
    if (r.reference)
        os << "reference          " << fmt12(*r.reference) << "  (relative error " << fmt12(r.reference_error)
           << ")\n";
    os << "reciprocal e_r^d   " << fmt12(r.reciprocal.direct) << "  (order " << r.reciprocal.direct_order << ")\n";
    os << "reciprocal e_r^n   " << fmt12(r.reciprocal.normalized) << "  (order " << r.reciprocal.normalized_order
       << ")\n";
    if (r.moduli_count > 0) os << "moduli (3m-3)      " << r.moduli_count << "\n";
    os << "\n";

    if (!r.jumps.empty()) {
        os << "jumps (" << r.jumps.size() << ", scaled to d" << (r.normalized_jumps ? ", conjugate normalized" : "")
           << ")\n";
        for (std::size_t k = 0; k < r.jumps.size(); ++k) os << "  d_" << k + 1 << " = " << fmt12(r.jumps[k]) << "\n";
        os << "raw contour fluxes\n";
        for (std::size_t k = 0; k < r.raw_jumps.size(); ++k) os << "  " << fmt12(r.raw_jumps[k]) << "\n";
        os << "\n";
    }
    if (!r.saddles.empty()) {
        os << "saddles (" << r.saddles.size() << ")\n";
        for (const auto& s : r.saddles)
            os << "  " << point(s.location) << "  u1 = " << fmt12(s.value) << "  |grad| = " << fmt12(s.gradient_norm)
               << "  multiplicity " << s.multiplicity << "\n";
        os << "slits\n";
        for (const auto& s : r.slits) os << "  Re w in [" << fmt12(s.re_start) << ", 1], Im w = " << fmt12(s.im) << "\n";
        os << "\n";
    }
    os << "boundary walk\n";
    for (const auto& w : r.walk) os << "  " << w << "\n";
    os << "\n";

    os << "checks\n";
    if (r.kind != MapKind::quadrilateral) {
        os << "  flux, level curve around all holes   " << fmt12(r.flux_outer) << "\n";
        os << "  flux, second level                   " << fmt12(r.flux_outer_alt) << "\n";
        os << "  sum of hole fluxes                   " << fmt12(r.hole_flux_sum) << "\n";
        os << "  energy change p-1 -> p               " << fmt12(r.energy_change) << "\n";
    }
    os << "  maximum principle excess u1 / u2     " << fmt12(r.max_principle_u1) << " / "
       << fmt12(r.max_principle_u2) << "\n";
    os << "  solver residual u1 / u2              " << fmt12(r.residual_u1) << " / " << fmt12(r.residual_u2) << "\n";
    if (r.cr_points > 0)
        os << "  Cauchy-Riemann max / mean / rms      " << fmt12(r.cr_max) << " / " << fmt12(r.cr_mean) << " / "
           << fmt12(r.cr_rms) << "  (" << r.cr_points << " points)\n";
    os << "  outer iterations                     " << r.outer_iterations << (r.converged ? " (converged)" : "")
       << "\n";
    os << "  eps2 / eps3                          " << fmt12(r.eps2) << " / " << fmt12(r.eps3) << "\n";
    os << "\n";

    os << "mesh               nodes / triangles / min angle\n";
    os << "  u1               " << r.mesh_u1.nodes << " / " << r.mesh_u1.triangles << " / "
       << fmt12(r.mesh_u1.min_angle_deg) << "\n";
    os << "  conjugate        " << r.mesh_u2.nodes << " / " << r.mesh_u2.triangles << " / "
       << fmt12(r.mesh_u2.min_angle_deg) << "\n";
    os << "dofs u1 / u2       " << r.dofs_u1 << " / " << r.dofs_u2 << "\n\n";

    os << "timings (s)\n";
    for (const auto& t : r.timings) os << "  " << t.stage << "  " << fmt12(t.seconds) << "\n";
    os << "  total  " << fmt12(r.total_seconds()) << "\n";
    if (!r.warnings.empty()) {
        os << "\nwarnings\n";
        for (const auto& w : r.warnings) os << "  " << w << "\n";
    }
    if (!r.notes.empty()) {
        os << "\nnotes\n";
        for (const auto& n : r.notes) os << "  " << n << "\n";
    }
    return os.str();
}

std::string report_tsv(const RunReport& r) {
    std::ostringstream os;
    auto kv = [&](const std::string& k, const std::string& v) { os << k << '\t' << v << '\n'; };
    kv("name", r.name);
    kv("kind", kind_name(r.kind));
    kv("holes", std::to_string(r.holes));
    kv("order", std::to_string(r.order));
    kv("h", fmt12(r.h));
    kv("d", fmt12(r.d));
    kv("modulus", fmt12(r.modulus));
    if (r.reference) {
        kv("reference", fmt12(*r.reference));
        kv("reference_error", fmt12(r.reference_error));
    }
    kv("conjugate_energy", fmt12(r.conjugate_energy));
    kv("e_r_d", fmt12(r.reciprocal.direct));
    kv("e_r_n", fmt12(r.reciprocal.normalized));
    kv("error_order_d", std::to_string(r.reciprocal.direct_order));
    kv("error_order_n", std::to_string(r.reciprocal.normalized_order));
    kv("moduli_count", std::to_string(r.moduli_count));
    for (std::size_t k = 0; k < r.jumps.size(); ++k) kv("jump." + std::to_string(k + 1), fmt12(r.jumps[k]));
    for (std::size_t k = 0; k < r.raw_jumps.size(); ++k) kv("raw_jump." + std::to_string(k + 1), fmt12(r.raw_jumps[k]));
    for (std::size_t k = 0; k < r.saddles.size(); ++k) {
        const std::string p = "saddle." + std::to_string(k + 1);
        kv(p + ".x", fmt12(r.saddles[k].location.x));
        kv(p + ".y", fmt12(r.saddles[k].location.y));
        kv(p + ".value", fmt12(r.saddles[k].value));
        kv(p + ".gradient", fmt12(r.saddles[k].gradient_norm));
        kv(p + ".multiplicity", std::to_string(r.saddles[k].multiplicity));
    }
    for (std::size_t k = 0; k < r.slits.size(); ++k) {
        kv("slit." + std::to_string(k + 1) + ".re", fmt12(r.slits[k].re_start));
        kv("slit." + std::to_string(k + 1) + ".im", fmt12(r.slits[k].im));
    }
    kv("dofs_u1", std::to_string(r.dofs_u1));
    kv("dofs_u2", std::to_string(r.dofs_u2));
    kv("nodes_u1", std::to_string(r.mesh_u1.nodes));
    kv("triangles_u1", std::to_string(r.mesh_u1.triangles));
    kv("nodes_u2", std::to_string(r.mesh_u2.nodes));
    kv("triangles_u2", std::to_string(r.mesh_u2.triangles));
    kv("min_angle_deg", fmt12(r.mesh_u1.min_angle_deg));
    kv("residual_u1", fmt12(r.residual_u1));
    kv("residual_u2", fmt12(r.residual_u2));
    kv("energy_change", fmt12(r.energy_change));
    kv("flux_outer", fmt12(r.flux_outer));
    kv("flux_outer_alt", fmt12(r.flux_outer_alt));
    kv("hole_flux_sum", fmt12(r.hole_flux_sum));
    kv("max_principle_u1", fmt12(r.max_principle_u1));
    kv("max_principle_u2", fmt12(r.max_principle_u2));
    kv("cr_max", fmt12(r.cr_max));
    kv("cr_mean", fmt12(r.cr_mean));
    kv("cr_rms", fmt12(r.cr_rms));
    kv("cr_points", std::to_string(r.cr_points));
    kv("outer_iterations", std::to_string(r.outer_iterations));
    kv("converged", r.converged ? "1" : "0");
    kv("eps2", fmt12(r.eps2));
    kv("eps3", fmt12(r.eps3));
    for (const auto& t : r.timings) kv("time." + t.stage, fmt12(t.seconds));
    kv("time.total", fmt12(r.total_seconds()));
    for (std::size_t k = 0; k < r.warnings.size(); ++k) kv("warning." + std::to_string(k + 1), r.warnings[k]);
    return os.str();
}

std::string sweep_tsv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "h\torder\td\te_r_d\te_r_n\torder_d\torder_n\tdofs\tcr_rms\tseconds\terror\n";
    for (const auto& r : rows)
        os << fmt12(r.h) << '\t' << r.order << '\t' << fmt12(r.d) << '\t' << fmt12(r.e_direct) << '\t'
           << fmt12(r.e_normalized) << '\t' << r.order_direct << '\t' << r.order_normalized << '\t' << r.dofs << '\t'
           << fmt12(r.cr_rms) << '\t' << fmt12(r.seconds) << '\t' << r.error << '\n';
    return os.str();
}

std::string feature_records(const RunResult& run) {
    std::ostringstream os;
    os.precision(17);
    os << "cfm-features 1\n";
    const RunReport& r = run.report;
    for (std::size_t k = 0; k < r.saddles.size(); ++k)
        os << "saddle " << k << ' ' << r.saddles[k].location.x << ' ' << r.saddles[k].location.y << ' '
           << r.saddles[k].value << ' ' << r.saddles[k].multiplicity << '\n';
    auto poly = [&](const std::string& kind, int id, const std::vector<Vec2>& pts) {
        os << "polyline " << kind << ' ' << id << ' ' << pts.size() << '\n';
        for (const Vec2 p : pts) os << p.x << ' ' << p.y << '\n';
    };
    for (const auto& a : run.map.cuts.arcs) poly("cut", a.id, a.points);
    int id = 0;
    for (const auto& c : run.jumps.contours) poly("contour", id++, c.points);
    return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os << contents;
        os.flush();
        if (!os) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_reports(const RunReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_atomic(dir / "report.txt", report_text(r));
    write_atomic(dir / "report.tsv", report_tsv(r));
}

}  // namespace cfm
