#include "teugels/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <json.hpp>
#include <sstream>

#include "teugels/acceptance.hpp"
#include "teugels/io.hpp"
#include "teugels/path_sim.hpp"

namespace teugels {

namespace {

SpatialGrid refine(const SpatialGrid& g, int factor) {
    return SpatialGrid(g.x_min, g.x_max, (g.n_nodes - 1) * factor + 1);
}

bool is_zero_driver(const DriverSpec& d) {
    if (d.kind == "zero") return true;
    if (d.kind == "constant") return d.c0 == 0.0;
    double g = 0.0;
    for (double v : d.gamma) g += std::abs(v);
    return d.c0 == 0.0 && d.ct == 0.0 && d.cx == 0.0 && d.cu == 0.0 && d.cuu == 0.0 && d.r == 0.0 && g == 0.0;
}

} // namespace

std::optional<Subcommand> parse_subcommand(const std::string& name) {
    for (Subcommand c : {Subcommand::basis, Subcommand::simulate, Subcommand::bsde, Subcommand::value_mc,
                         Subcommand::hjb, Subcommand::compare, Subcommand::accept})
        if (subcommand_name(c) == name) return c;
    return std::nullopt;
}

std::string subcommand_name(Subcommand c) {
    switch (c) {
    case Subcommand::basis: return "basis";
    case Subcommand::simulate: return "simulate";
    case Subcommand::bsde: return "bsde";
    case Subcommand::value_mc: return "value-mc";
    case Subcommand::hjb: return "hjb";
    case Subcommand::compare: return "compare";
    case Subcommand::accept: return "accept";
    }
    return "";
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand;
    j["scenario_digest"] = scenario_digest;
    j["version"] = version;
    j["exit_code"] = exit_code;
    j["wall_seconds"] = wall_seconds;
    auto& outs = j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& o : outputs) outs.push_back({{"name", o.name}, {"path", o.path}, {"fnv1a64", hex64(o.checksum)}});
    return j.dump(2) + "\n";
}

Report basis_report(const Scenario& sc) {
    const LevyModel model = sc.levy_model();
    const OrthoBasis basis = build_basis(model, sc.K);
    const double defect = verify_orthonormal(basis, model);
    std::ostringstream out;
    CsvWriter csv(out);
    std::vector<std::string> head{"n"};
    for (int j = 1; j <= basis.rank(); ++j) head.push_back("a_" + std::to_string(j));
    head.push_back("orthonormality_defect");
    csv.header(head);
    for (int n = 1; n <= basis.rank(); ++n) {
        std::vector<CsvField> row{static_cast<long long>(n)};
        for (int j = 1; j <= basis.rank(); ++j) row.emplace_back(basis.a(n, j));
        row.emplace_back(defect);
        csv.row(row);
    }
    return {{{"basis", out.str()}}, true};
}

Report simulate_report(const Scenario& sc, Exec exec) {
    const LevyModel model = sc.levy_model();
    const OrthoBasis basis = build_basis(model, sc.K);
    const EnsembleSummary s = summarize_ensemble(model, basis, 0.0, sc.paths.T, sc.paths.M, sc.paths.N, sc.paths.seed, exec);
    std::ostringstream out;
    CsvWriter csv(out);
    csv.header({"quantity", "i", "j", "mean", "stderr", "target", "pass"});
    auto line = [&](const std::string& q, long long i, long long j, const MeanEstimate& e, double target) {
        const bool ok = std::abs(e.mean - target) <= 5.0 * e.stderr;
        csv.row({q, i, j, e.mean, e.stderr, target, std::string(ok ? "pass" : "fail")});
    };
    for (int i = 1; i <= s.K; ++i)
        for (int j = i; j <= s.K; ++j) line("bracket", i, j, s.at(i, j), i == j ? 1.0 : 0.0);
    line("terminal_mean", 0, 0, s.terminal, model.moment(1) * sc.paths.T);
    return {{{"simulate", out.str()}}, true};
}

Report bsde_report(const Scenario& sc, Exec exec) {
    const LevyModel model = sc.levy_model();
    const OrthoBasis basis = build_basis(model, sc.K);
    const auto table = simulate_increment_table(model, basis, 0.0, sc.paths.T, sc.paths.M, sc.paths.N, sc.paths.seed, exec);
    const ForwardEnsemble fe = levy_state(table, sc.bsde.x0);
    const BsdeSolution sol = solve_backward(sc.bsde_spec(), fe, sc.bsde.config, exec);

    std::ostringstream out;
    CsvWriter csv(out);
    csv.header({"t", "y_mean", "y_stderr", "z_norm_mean"});
    for (std::size_t s = 0; s <= sol.M; ++s) {
        std::vector<CsvField> row{sol.times[s], sol.y_mean[s], sol.y_stderr[s]};
        row.emplace_back(s < sol.M ? CsvField(sol.z_norm_mean[s]) : CsvField(std::string()));
        csv.row(row);
    }
    std::ostringstream diag;
    CsvWriter d(diag);
    d.header({"quantity", "value"});
    d.row({std::string("y0"), sol.y0});
    d.row({std::string("y0_stderr"), sol.y0_stderr});
    d.row({std::string("a_priori_ratio"), sol.a_priori_ratio});
    d.row({std::string("reduced_degree_steps"), static_cast<long long>(sol.reduced_degree_steps)});
    return {{{"bsde", out.str()}, {"bsde_diagnostics", diag.str()}}, true};
}

Report value_mc_report(const Scenario& sc, Exec exec) {
    const LevyModel model = sc.levy_model();
    const OrthoBasis basis = build_basis(model, sc.K);
    const ControlProblem problem = sc.control_problem();
    const ValueLattice lattice = sc.value_lattice();
    const ValueEstimate est = value_dp(problem, model, basis, lattice, sc.mc_config(), exec);

    std::ostringstream out;
    CsvWriter csv(out);
    csv.header({"t", "x", "W", "stderr", "argmin_u"});
    for (int l = 0; l <= lattice.n_slices; ++l) {
        for (int i = 0; i < lattice.x.n_nodes; ++i) {
            std::vector<CsvField> row{lattice.time(l), lattice.x.x(i), est.w(l, i), est.se(l, i)};
            if (l < lattice.n_slices)
                row.emplace_back(problem.U[static_cast<std::size_t>(est.policy[static_cast<std::size_t>(l * lattice.x.n_nodes + i)])]);
            else
                row.emplace_back(std::string());
            csv.row(row);
        }
    }
    const RegularityReport reg = regularity_diagnostics(est);
    std::ostringstream rdoc;
    CsvWriter r(rdoc);
    r.header({"t", "C_x", "C_t"});
    for (int l = 0; l <= lattice.n_slices; ++l)
        r.row({lattice.time(l), reg.C_x_per_slice[static_cast<std::size_t>(l)], reg.C_t});
    return {{{"value_mc", out.str()}, {"regularity", rdoc.str()}}, true};
}

std::optional<std::function<double(double)>> closed_form_value(const Scenario& sc) {
    const auto& p = sc.problem;
    if (p.U.size() != 1) return std::nullopt;
    double b = 0.0;
    if (p.forward.kind == "linear" || p.forward.kind == "affine_u") {
        if (p.forward.a != 0.0 || (p.forward.kind == "affine_u" && p.forward.c != 0.0)) return std::nullopt;
        b = p.forward.b;
    } else {
        return std::nullopt;
    }
    if (!is_zero_driver(p.driver) || p.terminal.kind != "linear") return std::nullopt;
    const double growth = std::exp(b * sc.levy_model().moment(1) * p.T);
    const double c0 = p.terminal.c0, c1 = p.terminal.c1;
    return [c0, c1, growth](double x) { return c0 + c1 * x * growth; };
}

Report hjb_report(const Scenario& sc, Exec exec) {
    const LevyModel model = sc.levy_model();
    const OrthoBasis basis = build_basis(model, sc.K);
    const ControlProblem problem = sc.control_problem();
    const HjbSolution sol = solve(problem, model, basis, sc.grid, sc.hjb, 0.0, exec);

    std::ostringstream out;
    CsvWriter csv(out);
    csv.header({"t", "x", "W", "argmin_u"});
    const auto nx = static_cast<std::size_t>(sc.grid.n_nodes);
    for (std::size_t n = 0; n <= sol.time_steps; ++n) {
        for (int i = 0; i < sc.grid.n_nodes; ++i) {
            std::vector<CsvField> row{sol.times[n], sc.grid.x(i), sol.w(n, i)};
            if (n < sol.time_steps)
                row.emplace_back(problem.U[static_cast<std::size_t>(sol.policy[n * nx + static_cast<std::size_t>(i)])]);
            else
                row.emplace_back(std::string());
            csv.row(row);
        }
    }

    // Convergence: three nested grids; error against the closed form when
    // there is one, against the finest grid otherwise. Judged on the middle
    // half of the domain, away from the extension.
    const double span = sc.grid.x_max - sc.grid.x_min;
    const double lo = sc.grid.x_min + 0.25 * span, hi = sc.grid.x_max - 0.25 * span;
    const auto oracle = closed_form_value(sc);
    std::vector<HjbSolution> levels;
    for (int r : {1, 2, 4}) {
        HjbConfig c = sc.hjb;
        if (c.time_steps > 0) c.time_steps *= static_cast<std::size_t>(r);
        levels.push_back(r == 1 ? sol : solve(problem, model, basis, refine(sc.grid, r), c, 0.0, exec));
    }
    const GridFunction finest = levels.back().slice(0);
    std::ostringstream conv;
    CsvWriter cv(conv);
    cv.header({"h", "dt", "time_steps", "error", "reference"});
    const std::size_t rows = oracle ? levels.size() : levels.size() - 1;
    for (std::size_t k = 0; k < rows; ++k) {
        const HjbSolution& s = levels[k];
        double err = 0.0;
        for (int i = 0; i < s.grid.n_nodes; ++i) {
            const double x = s.grid.x(i);
            if (x < lo - 1e-12 || x > hi + 1e-12) continue;
            err = std::max(err, oracle ? std::abs(s.w(0, i) - (*oracle)(x)) : std::abs(s.w(0, i) - finest(x)));
        }
        cv.row({s.grid.h(), (problem.T - s.times[0]) / static_cast<double>(s.time_steps),
                static_cast<long long>(s.time_steps), err, std::string(oracle ? "closed_form" : "finest_grid")});
    }
    return {{{"hjb", out.str()}, {"convergence", conv.str()}}, true};
}

Report compare_report(const Scenario& sc, Exec exec) {
    const LevyModel model = sc.levy_model();
    const OrthoBasis basis = build_basis(model, sc.K);
    const ControlProblem problem = sc.control_problem();
    const ValueEstimate mc = value_dp(problem, model, basis, sc.value_lattice(), sc.mc_config(), exec);
    const HjbSolution pde = solve(problem, model, basis, sc.grid, sc.hjb, 0.0, exec);
    const GridFunction w0 = pde.slice(0);

    std::ostringstream out;
    CsvWriter csv(out);
    csv.header({"x", "W_mc", "stderr", "W_pde", "discrepancy", "tolerance", "pass"});
    bool all = true;
    for (int i = 0; i < sc.lattice.x.n_nodes; ++i) {
        const double x = sc.lattice.x.x(i);
        const double wp = w0(x), wm = mc.w(0, i), se = mc.se(0, i);
        const double gap = std::abs(wm - wp), tol = 0.01 * std::abs(wp) + 3.0 * se;
        const bool ok = gap <= tol;
        all = all && ok;
        csv.row({x, wm, se, wp, gap, tol, std::string(ok ? "pass" : "fail")});
    }
    return {{{"compare", out.str()}}, all};
}

Report accept_report(const Scenario& sc, std::ostream& log, Exec exec) {
    AcceptanceOptions opt;
    opt.exec = exec;
    opt.scenario = &sc;
    const auto results = run_acceptance(opt, &log);
    std::ostringstream out;
    CsvWriter csv(out);
    csv.header({"id", "criterion", "result", "measured", "tolerance", "detail"});
    bool all = true;
    for (const auto& r : results) {
        all = all && r.passed;
        csv.row({static_cast<long long>(r.id), r.name, std::string(r.passed ? "pass" : "fail"), r.measured,
                 r.tolerance, r.detail});
    }
    return {{{"accept", out.str()}}, all};
}

std::filesystem::path output_directory(const Scenario& sc, const std::string& flag) {
    if (!flag.empty()) return flag;
    if (!sc.outputs.directory.empty()) return sc.outputs.directory;
    if (const char* env = std::getenv("TEUGELS_OUT_DIR"); env && *env) return env;
    return "teugels-out";
}

RunManifest run(Subcommand cmd, const Scenario& sc, const std::filesystem::path& out_dir, std::ostream& log,
                Exec exec) {
    const auto start = std::chrono::steady_clock::now();
    RunManifest m;
    m.subcommand = subcommand_name(cmd);
    m.scenario_digest = sc.digest();
    try {
        Report rep;
        switch (cmd) {
        case Subcommand::basis: rep = basis_report(sc); break;
        case Subcommand::simulate: rep = simulate_report(sc, exec); break;
        case Subcommand::bsde: rep = bsde_report(sc, exec); break;
        case Subcommand::value_mc: rep = value_mc_report(sc, exec); break;
        case Subcommand::hjb: rep = hjb_report(sc, exec); break;
        case Subcommand::compare: rep = compare_report(sc, exec); break;
        case Subcommand::accept: rep = accept_report(sc, log, exec); break;
        }
        for (const auto& doc : rep.documents) {
            const auto path = out_dir / sc.outputs.file(doc.name);
            m.outputs.push_back({doc.name, path.string(), write_file(path, doc.bytes)});
        }
        m.exit_code = rep.passed ? kExitOk : kExitAcceptance;
        if (!rep.passed) log << "error: " << m.subcommand << " checks failed\n";
    } catch (const ValidationError& e) {
        log << "validation error: " << e.what() << "\n";
        m.exit_code = kExitValidation;
    } catch (const NumericalError& e) {
        log << "numerical failure: " << e.what() << "\n";
        m.exit_code = kExitNumerical;
    }
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        write_file(out_dir / sc.outputs.file("manifest"), m.to_json());
    } catch (const ValidationError& e) {
        log << "validation error: " << e.what() << "\n";
        if (m.exit_code == kExitOk) m.exit_code = kExitValidation;
    }
    return m;
}

} // namespace teugels
