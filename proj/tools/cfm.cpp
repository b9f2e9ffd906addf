// Command line front end: solve a configured problem, optionally sweep a
// refinement ladder, and write reports, meshes and pictures.

#include <cfm/builtins.hpp>
#include <cfm/config.hpp>
#include <cfm/pipeline.hpp>
#include <cfm/report.hpp>
#include <cfm/svg.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace cfm;

struct Ladder {
    LadderKind kind{LadderKind::h};
    std::vector<double> values;
};

Ladder parse_ladder(const std::string& s) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--sweep expects h=v1,v2,... or p=v1,v2,...");
    Ladder l;
    const std::string key = s.substr(0, eq);
    if (key == "h")
        l.kind = LadderKind::h;
    else if (key == "p")
        l.kind = LadderKind::p;
    else
        throw ConfigError("--sweep ladder must be h or p, got '" + key + "'");
    std::stringstream ss(s.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) l.values.push_back(evaluate_expression(item));
    if (l.values.empty()) throw ConfigError("--sweep ladder is empty");
    return l;
}

void write_mesh_file(const std::filesystem::path& path, const Mesh& m) {
    std::ostringstream os;
    write_mesh(os, m);
    write_atomic(path, os.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conformal maps of multiply connected domains by finite elements"};
    app.require_subcommand(1);

    std::string source, out_dir, sweep;
    bool svg = false, mesh_export = false, frozen = false, normalized = false, serial = false;
    auto* solve = app.add_subcommand("solve", "Solve one problem (config file or builtin:<name>)");
    solve->add_option("config", source, "Config file, or builtin:<name>")->required();
    solve->add_option("--out", out_dir, "Directory for report.txt, report.tsv and other outputs");
    solve->add_flag("--svg", svg, "Write SVG pictures (needs --out)");
    solve->add_flag("--mesh-export", mesh_export, "Write meshes and feature polylines (needs --out)");
    solve->add_option("--sweep", sweep, "Refinement ladder h=v1,v2,... or p=v1,v2,...");
    solve->add_flag("--frozen-cuts", frozen, "Reuse the first ladder entry's cuts");
    solve->add_flag("--normalized-jumps", normalized, "Solve the conjugate with values in [0, 1]");
    solve->add_flag("--serial", serial, "Use the serial kernels");

    auto* list = app.add_subcommand("builtins", "List the builtin problems");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& n : builtin_names()) std::cout << n << "\n";
        return 0;
    }

    try {
        if ((svg || mesh_export) && out_dir.empty()) throw ConfigError("--svg and --mesh-export need --out");
        const ProblemConfig cfg = load_config(source);
        RunOptions opts;
        opts.normalized_jumps = normalized;
        opts.exec = serial ? Exec::serial : Exec::parallel;

        if (!sweep.empty()) {
            const Ladder l = parse_ladder(sweep);
            const auto rows = convergence_sweep(cfg, l.kind, l.values, frozen, opts);
            const std::string table = sweep_tsv(rows);
            std::cout << table;
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                write_atomic(std::filesystem::path(out_dir) / "sweep.tsv", table);
            }
            for (const auto& r : rows)
                if (!r.error.empty()) return 1;
            return 0;
        }

        const RunResult run = run_problem(cfg, opts);
        std::cout << report_text(run.report);
        if (!out_dir.empty()) {
            const std::filesystem::path dir(out_dir);
            write_reports(run.report, dir);
            if (mesh_export) {
                write_mesh_file(dir / "mesh.txt", *run.mesh);
                write_mesh_file(dir / "conjugate_mesh.txt", *run.conjugate_mesh);
                write_atomic(dir / "features.txt", feature_records(run));
            }
            if (svg) write_svgs(run, dir);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
