#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "teugels/acceptance.hpp"
#include "teugels/io.hpp"
#include "teugels/runner.hpp"
#include "teugels/scenario.hpp"

using namespace teugels;
namespace fs = std::filesystem;

namespace {

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    return text.replace(at, from.size(), to);
}

std::vector<std::string> problems_of(const std::string& text) {
    try {
        parse_scenario_text(text);
    } catch (const ScenarioError& e) {
        return e.problems();
    }
    return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
    for (const auto& p : problems)
        if (p.find(needle) != std::string::npos) return true;
    return false;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("teugels-unit-" + name);
    fs::remove_all(p);
    return p;
}

// Small scenario: few paths and nodes so every subcommand runs in well under a second.
std::string small_scenario() {
    std::string t = default_scenario_text();
    t = replace(t, "N = 20000", "N = 500");
    t = replace(t, "M = 50", "M = 10");
    t = replace(t, "paths = 10000", "paths = 300");
    t = replace(t, "slices = 10", "slices = 2");
    t = replace(t, "nodes = 31", "nodes = 4");
    return t;
}

} // namespace

TEST_SUITE("scenario") {
    TEST_CASE("default scenario parses") {
        const Scenario sc = parse_scenario_text(default_scenario_text());
        CHECK(sc.K == 3);
        CHECK(sc.paths.seed == 20240611u);
        CHECK(sc.levy_model().moment(1) == doctest::Approx(0.2));
        CHECK(sc.basis().rank() == 3);
        CHECK(sc.digest().size() == 16);
        CHECK(sc.digest() == parse_scenario_text(default_scenario_text()).digest());
    }

    TEST_CASE("missing seed names paths.seed") {
        const auto p = problems_of(replace(default_scenario_text(), "seed = 20240611", ""));
        CHECK(mentions(p, "paths.seed"));
    }

    TEST_CASE("basis size beyond the rank of a single atom") {
        std::string t = default_scenario_text();
        t = replace(t, "atoms = 0.1:1.0, -0.1:0.5", "atoms = 1.0:1.0");
        t = replace(t, "sigma2 = 0.04", "sigma2 = 0.0");
        t = replace(t, "K = 3\n\n[paths]", "K = 5\n\n[paths]");
        CHECK(mentions(problems_of(t), "exceeds basis rank 1"));
    }

    TEST_CASE("unknown keys, type mismatches and bounds") {
        CHECK(mentions(problems_of(replace(default_scenario_text(), "M = 50", "M = 50\ncolour = blue")),
                       "paths.colour: unknown key"));
        CHECK(mentions(problems_of(replace(default_scenario_text(), "M = 50", "M = fifty")), "paths.M"));
        CHECK(mentions(problems_of(replace(default_scenario_text(), "N = 20000", "N = 0")), "paths.N"));
        CHECK(mentions(problems_of(replace(default_scenario_text(), "[grid]", "[gird]")), "gird"));
        CHECK_THROWS_AS(parse_scenario("/nonexistent/scenario.txt"), ValidationError);
    }
}

TEST_SUITE("io") {
    TEST_CASE("checksums and number formatting") {
        CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
        CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
        CHECK(hex64(0xabcull) == "0000000000000abc");
        for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0}) CHECK(std::stod(format_real(v)) == v);
    }

    TEST_CASE("RFC 4180 records") {
        CHECK(csv_escape("plain") == "plain");
        CHECK(csv_escape("a,b") == "\"a,b\"");
        CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
        std::ostringstream out;
        CsvWriter w(out);
        w.header({"name", "value", "count"});
        w.row({std::string("x, y"), 0.5, 3LL});
        CHECK(out.str() == "name,value,count\r\n\"x, y\",0.5,3\r\n");
    }
}

TEST_SUITE("runner") {
    TEST_CASE("subcommand names round trip") {
        for (auto c : {Subcommand::basis, Subcommand::simulate, Subcommand::bsde, Subcommand::value_mc,
                       Subcommand::hjb, Subcommand::compare, Subcommand::accept})
            CHECK(parse_subcommand(subcommand_name(c)) == c);
        CHECK_FALSE(parse_subcommand("nope").has_value());
    }

    TEST_CASE("output directory precedence") {
        Scenario sc = parse_scenario_text(default_scenario_text());
        CHECK(output_directory(sc, "flag") == fs::path("flag"));
        CHECK(output_directory(sc, "") == fs::path("teugels-out"));
        sc.outputs.directory.clear();
        setenv("TEUGELS_OUT_DIR", "from-env", 1);
        CHECK(output_directory(sc, "") == fs::path("from-env"));
        unsetenv("TEUGELS_OUT_DIR");
        CHECK(output_directory(sc, "") == fs::path("teugels-out"));
    }

    TEST_CASE("runs write CSVs and a manifest, twice identically") {
        const Scenario sc = parse_scenario_text(small_scenario());
        std::ostringstream log;
        for (Subcommand c : {Subcommand::basis, Subcommand::simulate, Subcommand::bsde, Subcommand::value_mc,
                             Subcommand::hjb, Subcommand::compare}) {
            const fs::path a = scratch("a"), b = scratch("b");
            const RunManifest ma = run(c, sc, a, log);
            const RunManifest mb = run(c, sc, b, log);
            INFO(subcommand_name(c) << ": " << log.str());
            CHECK(ma.exit_code == kExitOk);
            REQUIRE(!ma.outputs.empty());
            REQUIRE(ma.outputs.size() == mb.outputs.size());
            for (std::size_t i = 0; i < ma.outputs.size(); ++i) {
                CHECK(ma.outputs[i].checksum == mb.outputs[i].checksum);
                CHECK(read_file(ma.outputs[i].path) == read_file(mb.outputs[i].path));
            }
            const auto manifest = nlohmann::json::parse(read_file(a / sc.outputs.file("manifest")));
            CHECK(manifest["subcommand"] == subcommand_name(c));
            CHECK(manifest["exit_code"] == 0);
            CHECK(manifest["version"] == kVersion);
            CHECK(manifest["outputs"].size() == ma.outputs.size());
            fs::remove_all(a);
            fs::remove_all(b);
        }
    }

    TEST_CASE("numerical failures map to exit code 2") {
        std::string t = replace(small_scenario(), "time_steps = 0", "time_steps = 1");
        const Scenario sc = parse_scenario_text(t);
        std::ostringstream log;
        const fs::path dir = scratch("cfl");
        const RunManifest m = run(Subcommand::hjb, sc, dir, log);
        CHECK(m.exit_code == kExitNumerical);
        CHECK(log.str().find("CFL") != std::string::npos);
        CHECK(fs::exists(dir / sc.outputs.file("manifest")));
        fs::remove_all(dir);
    }

    TEST_CASE("closed form of the linear benchmark") {
        const Scenario sc = parse_scenario_text(default_scenario_text());
        const auto w = closed_form_value(sc);
        REQUIRE(w.has_value());
        CHECK((*w)(2.0) == doctest::Approx(2.0 * std::exp(0.2)).epsilon(1e-14));
    }
}
