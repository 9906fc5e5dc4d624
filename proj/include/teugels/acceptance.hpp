#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "teugels/exec.hpp"

namespace teugels {

struct Scenario;

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double measured = 0.0;  // worst observed statistic
    double tolerance = 0.0; // what it was held to
    std::string detail;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20240611;
    Exec exec = Exec::parallel;
    /// Scenario whose CSV pipeline the determinism check replays; the
    /// built-in default when null.
    const Scenario* scenario = nullptr;
};

struct Criterion {
    int id;
    const char* name;
    std::function<CriterionResult(const AcceptanceOptions&)> run;
};

const std::vector<Criterion>& acceptance_criteria();

/// Runs every criterion in order, printing one line each to `log` when given.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream* log = nullptr);

std::string format_result_line(const CriterionResult& r);

/// Text of the shipped default scenario.
const std::string& default_scenario_text();

} // namespace teugels
