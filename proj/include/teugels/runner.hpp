#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "teugels/exec.hpp"
#include "teugels/scenario.hpp"

namespace teugels {

inline constexpr const char* kVersion = "1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitAcceptance = 3;

enum class Subcommand { basis, simulate, bsde, value_mc, hjb, compare, accept };

std::optional<Subcommand> parse_subcommand(const std::string& name);
std::string subcommand_name(Subcommand c);

struct OutputFile {
    std::string name;
    std::string path;
    std::uint64_t checksum = 0;
};

struct RunManifest {
    std::string subcommand;
    std::string scenario_digest;
    std::string version = kVersion;
    std::vector<OutputFile> outputs;
    double wall_seconds = 0.0;
    int exit_code = 0;

    std::string to_json() const;
};

/// CSV documents produced by one subcommand, keyed by output name.
struct Document {
    std::string name;
    std::string bytes;
};

struct Report {
    std::vector<Document> documents;
    bool passed = true;
};

Report basis_report(const Scenario& sc);
Report simulate_report(const Scenario& sc, Exec exec = Exec::parallel);
Report bsde_report(const Scenario& sc, Exec exec = Exec::parallel);
Report value_mc_report(const Scenario& sc, Exec exec = Exec::parallel);
Report hjb_report(const Scenario& sc, Exec exec = Exec::parallel);
Report compare_report(const Scenario& sc, Exec exec = Exec::parallel);
Report accept_report(const Scenario& sc, std::ostream& log, Exec exec = Exec::parallel);

/// W(0, x) in closed form when the problem is x -> c0 + c1 x under F = b x,
/// f = 0 and a single control.
std::optional<std::function<double(double)>> closed_form_value(const Scenario& sc);

/// Resolve the output directory: explicit flag, then the scenario, then
/// TEUGELS_OUT_DIR, then ./teugels-out.
std::filesystem::path output_directory(const Scenario& sc, const std::string& flag);

/// Run one subcommand, write its CSVs and manifest, map errors to exit codes.
RunManifest run(Subcommand cmd, const Scenario& sc, const std::filesystem::path& out_dir, std::ostream& log,
                Exec exec = Exec::parallel);

} // namespace teugels
