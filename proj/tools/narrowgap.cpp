#include <CLI11.hpp>
#include <iostream>

#include "narrowgap/aux/recursion.hpp"
#include "narrowgap/experiments/studies.hpp"
#include "narrowgap/verify/checks.hpp"

using namespace narrowgap;

namespace {

enum Exit { ok = 0, check_failed = 1, usage = 2, runtime = 3 };

Route parse_route(const std::string& s) {
    if (s == "integral") return Route::integral;
    if (s == "recursion") return Route::recursion;
    throw ConfigError("route must be integral or recursion");
}

void write_json(const json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << j.dump(2) << '\n';
}

json dump_family(const AuxFamily& fam) {
    json levels = json::array();
    for (int l = 1; l <= fam.depth(); ++l) {
        json comps = json::array(), res = json::array();
        for (int i = 0; i < fam.dim; ++i) {
            const NeckScalar& v = fam.level(l)[i];
            comps.push_back({{"expr", v.str()}, {"terms", v.to_json()}});
            const NeckScalar& f = residual(fam, l)[i];
            res.push_back({{"expr", f.str()}, {"neck_order", is_semantic_zero(f) ? "zero" : f.neck_order().get_str()}});
        }
        levels.push_back({{"level", l}, {"components", comps}, {"residual", res}});
    }
    json tables = json::object();
    if (!(fam.dim == 2 && fam.alpha == 3) && !(fam.dim == 3 && fam.alpha >= 4)) {
        for (const auto& slot : detail::table_layout(fam.dim, fam.alpha))
            for (int l = 1; l <= fam.depth(); ++l) {
                if (detail::is_odd_table(slot.name) && l == 1) continue;
                const int top = detail::is_odd_table(slot.name) ? l - 1 : l;
                for (int i = 1; i <= top; ++i)
                    tables[slot.name + "_" + std::to_string(l) + "," + std::to_string(i)] = ansatz_coefficient(fam, slot.name, l, i).str();
            }
    }
    return {{"dim", fam.dim}, {"alpha", fam.alpha}, {"depth", fam.depth()}, {"route", route_name(fam.route)}, {"levels", levels}, {"tables", tables}};
}

void log_config(const std::string& what) { std::cerr << "# resolved configuration\n" << what << std::flush; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Singular asymptotics of the Lame system between nearly touching inclusions: symbolic families, FEM and sweeps"};
    app.require_subcommand(1);
    bool deterministic = false;
    app.add_flag("--deterministic", deterministic, "Sequential everything (assembly and eps cases)");

    int dim = 2, alpha = 1, depth = 4;
    std::string route = "integral", out;
    auto add_family_opts = [&](CLI::App* c) {
        c->add_option("--dim", dim, "Dimension (2 or 3)")->check(CLI::IsMember({2, 3}))->capture_default_str();
        c->add_option("--alpha", alpha, "Rigid mode index")->check(CLI::Range(1, 6))->capture_default_str();
        c->add_option("--depth", depth, "Number of levels")->check(CLI::Range(1, 6))->capture_default_str();
        c->add_option("--route", route, "integral or recursion")->check(CLI::IsMember({"integral", "recursion"}))->capture_default_str();
    };
    CLI::App* aux = app.add_subcommand("aux", "Symbolic auxiliary families");
    aux->require_subcommand(1);
    CLI::App* aux_build = aux->add_subcommand("build", "Build a family and dump its levels, residuals and coefficient tables");
    add_family_opts(aux_build);
    aux_build->add_option("--dump", out, "Output JSON file (stdout if omitted)");
    CLI::App* aux_verify = aux->add_subcommand("verify", "Run the identity, boundary, structure, order and z-degree suite");
    add_family_opts(aux_verify);
    aux_verify->add_option("--json", out, "Write the check reports as JSON");

    SweepConfig fem_cfg;
    double eps = 0.1;
    std::string problem = "component", mesh_out, field_out, config_path;
    int inclusion = 1, mode = 1;
    CLI::App* fem = app.add_subcommand("fem", "Finite element solves");
    fem->require_subcommand(1);
    CLI::App* fem_solve = fem->add_subcommand("solve", "Solve one problem at one gap");
    fem_solve->add_option("--config", config_path, "key=value file for geometry, material and mesh keys");
    fem_solve->add_option("--eps", eps, "Gap")->capture_default_str();
    fem_solve->add_option("--problem", problem, "component, hard or holes")->check(CLI::IsMember({"component", "hard", "holes"}))->capture_default_str();
    fem_solve->add_option("--inclusion", inclusion, "Inclusion carrying psi_alpha (component problem)")->check(CLI::IsMember({1, 2}))->capture_default_str();
    fem_solve->add_option("--alpha", mode, "Rigid mode (component problem)")->check(CLI::Range(1, 3))->capture_default_str();
    fem_solve->add_option("--mesh-out", mesh_out, "Export the mesh (ASCII)");
    fem_solve->add_option("--field-out", field_out, "Export the field (CSV x,y,u1,u2,g11,g12,g21,g22)");
    fem_solve->add_option("--json", out, "Summary JSON (stdout if omitted)");

    std::string study_out, study_json;
    CLI::App* study = app.add_subcommand("study", "Epsilon sweeps");
    study->require_subcommand(1);
    std::vector<CLI::App*> study_cmds;
    for (const auto& id : study_ids()) {
        CLI::App* s = study->add_subcommand(id, "Run the '" + id + "' study");
        s->add_option("--config", config_path, "key=value config (defaults: eps 0.1,0.05,0.025,0.0125; nz 8; grading 0.15; R0 3; rho 1; lambda = mu = 1)");
        s->add_option("--out", study_out, "Report file; .csv gives series,eps,value,fit_slope,fit_r2,pass, anything else JSON");
        s->add_option("--json", study_json, "Additional JSON report");
        study_cmds.push_back(s);
    }

    std::vector<std::string> inputs;
    CLI::App* report = app.add_subcommand("report", "Merge study JSON reports into one summary table");
    report->add_option("inputs", inputs, "Study JSON files")->required();
    report->add_option("--out", out, "Summary JSON (table goes to stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (aux_build->parsed() || aux_verify->parsed()) {
            log_config("dim = " + std::to_string(dim) + "\nalpha = " + std::to_string(alpha) + "\ndepth = " + std::to_string(depth) + "\nroute = " + route + "\n");
            const AuxFamily fam = build_family(dim, alpha, depth, parse_route(route));
            if (aux_build->parsed()) {
                write_json(dump_family(fam), out);
                return ok;
            }
            bool pass = true;
            json reps = json::array();
            for (const auto& r : run_symbolic_suite(fam)) {
                pass = pass && r.pass;
                reps.push_back(r.to_json());
                std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << (r.pass ? "" : "  witness: " + r.witness) << '\n';
            }
            if (!out.empty()) write_json(reps, out);
            return pass ? ok : check_failed;
        }

        if (fem_solve->parsed()) {
            if (!config_path.empty()) fem_cfg = parse_config_file(config_path);
            fem_cfg.deterministic = deterministic;
            const fem::Geometry g = fem_cfg.geometry_at(eps);
            log_config(fem_cfg.to_text() + "eps = " + detail::fmt(eps) + "\nproblem = " + problem + "\n");
            fem::SolverOptions opt;
            opt.assembly = deterministic ? fem::AssemblyMode::sequential : fem::AssemblyMode::parallel;
            const fem::ElasticProblem P(fem::make_mesh(g, fem_cfg.mesh_params()), fem_cfg.material(), opt);
            const fem::Solution s = problem == "component" ? P.solve_component(inclusion, mode)
                                    : problem == "hard"    ? P.solve_hard_inclusion(fem_cfg.boundary_data())
                                                           : P.solve_holes(fem_cfg.boundary_data());
            if (!mesh_out.empty()) fem::write_mesh(P.mesh(), mesh_out);
            if (!field_out.empty()) s.field.write_csv(field_out);
            const fem::Gradient gc = s.field.gradient({0, 0});
            json j{{"eps", eps},
                   {"problem", problem},
                   {"nodes", P.mesh().node_count()},
                   {"elements", P.mesh().element_count()},
                   {"unknowns", s.stats.unknowns},
                   {"solver", s.stats.method},
                   {"relative_residual", s.stats.relative_residual},
                   {"energy", s.energy},
                   {"grad_at_center", {{gc[0][0], gc[0][1]}, {gc[1][0], gc[1][1]}}},
                   {"min_quality", P.mesh().min_quality()}};
            if (problem == "hard") j["C"] = {{s.C(0, 0), s.C(0, 1), s.C(0, 2)}, {s.C(1, 0), s.C(1, 1), s.C(1, 2)}};
            write_json(j, out);
            return ok;
        }

        for (CLI::App* s : study_cmds)
            if (s->parsed()) {
                SweepConfig c;
                if (!config_path.empty()) c = parse_config_file(config_path);
                c.study = s->get_name();
                c.deterministic = deterministic;
                c.validate();
                log_config(c.to_text());
                const StudyReport r = run_study(c);
                if (!study_out.empty()) emit_report(r, study_out);
                if (!study_json.empty()) emit_report(r, study_json);
                if (study_out.empty() && study_json.empty()) r.write_csv(std::cout);
                for (const auto& x : r.series)
                    if (!x.informational)
                        std::cerr << (x.pass ? "PASS " : "FAIL ") << x.name << "  slope " << x.fit->slope << "  (" << x.criterion << ")\n";
                for (const auto& x : r.checks) std::cerr << (x.pass ? "PASS " : "FAIL ") << x.name << "  " << x.value << "  (" << x.criterion << ")\n";
                return r.pass() ? ok : check_failed;
            }

        if (report->parsed()) {
            bool pass = true;
            json rows = json::array();
            std::cout << std::left << std::setw(12) << "study" << std::setw(30) << "item" << std::setw(16) << "value" << "result\n";
            for (const auto& path : inputs) {
                const StudyReport r = load_report(path);
                pass = pass && r.pass();
                for (const auto& x : r.series) {
                    if (x.informational) continue;
                    const double v = x.fit ? x.fit->slope : 0.0;
                    std::cout << std::setw(12) << r.study << std::setw(30) << x.name + " slope" << std::setw(16) << v << (x.pass ? "pass" : "FAIL") << '\n';
                    rows.push_back({{"study", r.study}, {"item", x.name}, {"slope", v}, {"pass", x.pass}});
                }
                for (const auto& x : r.checks) {
                    std::cout << std::setw(12) << r.study << std::setw(30) << x.name << std::setw(16) << x.value << (x.pass ? "pass" : "FAIL") << '\n';
                    rows.push_back({{"study", r.study}, {"item", x.name}, {"value", x.value}, {"pass", x.pass}});
                }
            }
            if (!out.empty()) write_json({{"schema", report_schema_version}, {"rows", rows}, {"pass", pass}}, out);
            return pass ? ok : check_failed;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return usage;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return runtime;
    }
    return usage;
}
