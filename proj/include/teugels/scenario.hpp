#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "teugels/bsde_solver.hpp"
#include "teugels/control_problem.hpp"
#include "teugels/control_value.hpp"
#include "teugels/errors.hpp"
#include "teugels/hjb_solver.hpp"
#include "teugels/levy_model.hpp"
#include "teugels/teugels_basis.hpp"

namespace teugels {

/// One problem per entry, each naming `section.key` and the reason.
class ScenarioError : public ValidationError {
public:
    explicit ScenarioError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct ModelSection {
    double b = 0.0;
    double sigma2 = 0.0;
    JumpMeasure nu;
    int i_max = 0; // 0: 2K + 2
};

struct PathsSection {
    std::size_t M = 0;
    std::size_t N = 0;
    std::uint64_t seed = 0;
    double T = 1.0;
};

struct BsdeSection {
    DriverSpec driver;
    TerminalSpec terminal;
    double x0 = 0.0;
    BsdeConfig config;
};

struct ProblemSection {
    ForwardSpec forward;
    DriverSpec driver;
    TerminalSpec terminal;
    std::vector<double> U{0.0};
    double T = 1.0;
};

struct LatticeSection {
    int slices = 10;
    std::size_t substeps = 5;
    std::size_t paths = 10000;
    std::uint64_t seed = 0;
    SpatialGrid x{0.0, 4.0, 41};
    double slope_bound = std::numeric_limits<double>::infinity();
};

struct OutputsSection {
    std::string directory;
    std::map<std::string, std::string> files; // logical name -> file name
    std::string file(const std::string& name) const;
};

/// Validated run description.
///
/// Text format: `[section]` headers, `key = value` lines, `#` comments.
/// Lists are comma separated; atoms are `location:intensity` pairs.
struct Scenario {
    std::string text; // source, used for the digest
    ModelSection model;
    int K = 3;
    PathsSection paths;
    BsdeSection bsde;
    ProblemSection problem;
    LatticeSection lattice;
    SpatialGrid grid{0.0, 4.0, 41};
    HjbConfig hjb;
    OutputsSection outputs;

    LevyModel levy_model() const;
    OrthoBasis basis() const;
    ControlProblem control_problem() const;
    BsdeSpec bsde_spec() const;
    ValueLattice value_lattice() const;
    McConfig mc_config() const;
    /// FNV-1a 64 of the source text, hex.
    std::string digest() const;
};

Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text);

} // namespace teugels
