// teugels-control <subcommand> --scenario <file> [--out <dir>] [--workers <n>]

#include <CLI11.hpp>
#include <iostream>

#include "teugels/exec.hpp"
#include "teugels/runner.hpp"
#include "teugels/scenario.hpp"

int main(int argc, char** argv) {
    using namespace teugels;
    CLI::App app{"Teugels-martingale control: Monte Carlo dynamic programming and nonlocal HJB grid solver"};
    app.require_subcommand(1);

    std::string scenario_path, out_flag;
    int workers = 0;
    const std::vector<std::pair<const char*, const char*>> commands = {
        {"basis", "orthonormal polynomial coefficients and defect"},
        {"simulate", "ensemble bracket matrix and terminal mean"},
        {"bsde", "backward solve on the scenario driver"},
        {"value-mc", "Monte Carlo dynamic programming value surface"},
        {"hjb", "grid solution of the HJB equation and convergence study"},
        {"compare", "Monte Carlo vs grid discrepancy at t = 0"},
        {"accept", "full acceptance suite"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--scenario", scenario_path, "scenario file")->required();
        sub->add_option("--out", out_flag, "output directory (default: scenario, then $TEUGELS_OUT_DIR)");
        sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    const Subcommand cmd = *parse_subcommand(name);
    try {
        if (workers > 0) set_worker_count(workers);
        const Scenario sc = parse_scenario(scenario_path);
        const auto dir = output_directory(sc, out_flag);
        const RunManifest m = run(cmd, sc, dir, std::cerr);
        for (const auto& o : m.outputs) std::cout << o.name << ": " << o.path << "\n";
        std::cout << name << " finished in " << m.wall_seconds << " s, exit " << m.exit_code << "\n";
        return m.exit_code;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}
