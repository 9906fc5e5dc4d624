#include "teugels/scenario.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "teugels/io.hpp"

namespace teugels {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : "\n  ") + s;
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

bool to_double(const std::string& s, double& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

bool to_int(const std::string& s, long long& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

const std::set<std::string> kSections = {"model", "basis", "paths", "bsde",    "problem",
                                         "lattice", "grid", "hjb", "outputs"};

/// Typed access to one section; remembers which keys were read so the rest
/// can be reported as unknown.
class Reader {
public:
    Reader(Sections& all, std::string name, std::vector<std::string>& errors)
        : name_(std::move(name)), errors_(errors) {
        auto it = all.find(name_);
        if (it != all.end()) entries_ = &it->second;
    }

    bool present() const { return entries_ != nullptr; }
    bool has(const std::string& key) const { return entries_ && entries_->count(key); }

    std::string str(const std::string& key, const std::string& fallback, bool required = false) {
        Entry* e = find(key, required);
        return e ? e->value : fallback;
    }

    double real(const std::string& key, double fallback, bool required = false) {
        Entry* e = find(key, required);
        if (!e) return fallback;
        double v = 0.0;
        if (!to_double(e->value, v)) {
            fail(key, "expected a real number, got '" + e->value + "'");
            return fallback;
        }
        return v;
    }

    long long integer(const std::string& key, long long fallback, bool required = false, long long min = 0) {
        Entry* e = find(key, required);
        if (!e) return fallback;
        long long v = 0;
        if (!to_int(e->value, v)) {
            fail(key, "expected an integer, got '" + e->value + "'");
            return fallback;
        }
        if (v < min) {
            fail(key, "must be >= " + std::to_string(min));
            return fallback;
        }
        return v;
    }

    std::vector<double> reals(const std::string& key, std::vector<double> fallback, bool required = false) {
        Entry* e = find(key, required);
        if (!e) return fallback;
        std::vector<double> out;
        if (e->value.empty()) return out;
        for (const auto& item : split(e->value, ',')) {
            double v = 0.0;
            if (!to_double(item, v)) {
                fail(key, "expected a comma-separated list of reals, got '" + e->value + "'");
                return fallback;
            }
            out.push_back(v);
        }
        return out;
    }

    void fail(const std::string& key, const std::string& reason) { errors_.push_back(name_ + "." + key + ": " + reason); }

    void report_unknown() {
        if (!entries_) return;
        for (const auto& [key, e] : *entries_)
            if (!e.used) errors_.push_back(name_ + "." + key + ": unknown key (line " + std::to_string(e.line) + ")");
    }

private:
    Entry* find(const std::string& key, bool required) {
        if (entries_) {
            auto it = entries_->find(key);
            if (it != entries_->end()) {
                it->second.used = true;
                return &it->second;
            }
        }
        if (required) fail(key, "missing required key");
        return nullptr;
    }

    std::string name_;
    std::map<std::string, Entry>* entries_ = nullptr;
    std::vector<std::string>& errors_;
};

Sections tokenize(const std::string& text, std::vector<std::string>& errors) {
    Sections out;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        const std::string where = "line " + std::to_string(line);
        if (s.front() == '[') {
            if (s.back() != ']') {
                errors.push_back(where + ": malformed section header '" + s + "'");
                continue;
            }
            section = trim(s.substr(1, s.size() - 2));
            if (!kSections.count(section)) errors.push_back(section + ": unknown section (" + where + ")");
            out[section];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            errors.push_back(where + ": expected 'key = value', got '" + s + "'");
            continue;
        }
        if (section.empty()) {
            errors.push_back(where + ": key outside any section");
            continue;
        }
        const std::string key = trim(s.substr(0, eq));
        if (key.empty()) {
            errors.push_back(where + ": empty key");
            continue;
        }
        auto& sec = out[section];
        if (sec.count(key)) {
            errors.push_back(section + "." + key + ": duplicate key (" + where + ")");
            continue;
        }
        sec[key] = {trim(s.substr(eq + 1)), line, false};
    }
    return out;
}

DriverSpec read_driver(Reader& r) {
    DriverSpec d;
    d.kind = r.str("driver", "zero");
    d.c0 = r.real("driver_c0", 0.0);
    d.ct = r.real("driver_ct", 0.0);
    d.cx = r.real("driver_cx", 0.0);
    d.cu = r.real("driver_cu", 0.0);
    d.cuu = r.real("driver_cuu", 0.0);
    d.r = r.real("driver_r", 0.0);
    d.gamma = r.reals("driver_gamma", {});
    if (d.kind != "zero" && d.kind != "constant" && d.kind != "linear")
        r.fail("driver", "unknown driver kind '" + d.kind + "' (zero, constant, linear)");
    return d;
}

TerminalSpec read_terminal(Reader& r, const std::string& fallback) {
    TerminalSpec t;
    t.kind = r.str("terminal", fallback);
    t.c0 = r.real("terminal_c0", 0.0);
    t.c1 = r.real("terminal_c1", t.kind == "linear" ? 1.0 : 0.0);
    t.c2 = r.real("terminal_c2", t.kind == "quadratic" ? 1.0 : 0.0);
    if (t.kind != "constant" && t.kind != "linear" && t.kind != "quadratic")
        r.fail("terminal", "unknown terminal kind '" + t.kind + "' (constant, linear, quadratic)");
    return t;
}

SpatialGrid read_grid(Reader& r, SpatialGrid fallback) {
    const double lo = r.real("x_min", fallback.x_min);
    const double hi = r.real("x_max", fallback.x_max);
    const auto n = r.integer("nodes", fallback.n_nodes, false, 3);
    if (!(lo < hi)) {
        r.fail("x_max", "must exceed x_min");
        return fallback;
    }
    return SpatialGrid(lo, hi, static_cast<int>(n));
}

} // namespace

ScenarioError::ScenarioError(std::vector<std::string> problems)
    : ValidationError("invalid scenario:\n  " + join(problems)), problems_(std::move(problems)) {}

std::string OutputsSection::file(const std::string& name) const {
    auto it = files.find(name);
    return it == files.end() ? name + ".csv" : it->second;
}

Scenario parse_scenario_text(const std::string& text) {
    std::vector<std::string> errors;
    Sections sections = tokenize(text, errors);
    Scenario sc;
    sc.text = text;

    if (!sections.count("model")) errors.push_back("model: missing required section");
    if (!sections.count("paths")) errors.push_back("paths: missing required section");

    Reader model(sections, "model", errors);
    if (model.present()) {
        sc.model.b = model.real("b", 0.0, true);
        sc.model.sigma2 = model.real("sigma2", 0.0, true);
        const std::string kind = model.str("jumps", "none", true);
        if (kind == "none") {
            sc.model.nu = JumpMeasure::none();
        } else if (kind == "point_masses") {
            std::vector<PointMass> atoms;
            const std::string list = model.str("atoms", "", true);
            for (const auto& item : split(list, ',')) {
                const auto colon = item.find(':');
                double c = 0.0, l = 0.0;
                if (colon == std::string::npos || !to_double(trim(item.substr(0, colon)), c) ||
                    !to_double(trim(item.substr(colon + 1)), l)) {
                    model.fail("atoms", "expected 'location:intensity' pairs, got '" + item + "'");
                    break;
                }
                atoms.push_back({c, l});
            }
            sc.model.nu = JumpMeasure::point_masses(std::move(atoms));
        } else if (kind == "two_sided_exponential") {
            sc.model.nu = JumpMeasure::two_sided_exponential(model.real("lambda", 1.0, true), model.real("p", 0.5, true),
                                                             model.real("alpha", 1.0, true),
                                                             model.real("beta", 1.0, true));
        } else {
            model.fail("jumps", "unknown jump measure '" + kind + "' (none, point_masses, two_sided_exponential)");
        }
        sc.model.i_max = static_cast<int>(model.integer("i_max", 0));
    }

    Reader basis(sections, "basis", errors);
    sc.K = static_cast<int>(basis.integer("K", 3, false, 1));

    Reader paths(sections, "paths", errors);
    if (paths.present()) {
        sc.paths.M = static_cast<std::size_t>(paths.integer("M", 1, true, 1));
        sc.paths.N = static_cast<std::size_t>(paths.integer("N", 1, true, 1));
        sc.paths.seed = static_cast<std::uint64_t>(paths.integer("seed", 0, true));
        sc.paths.T = paths.real("T", 1.0);
        if (!(sc.paths.T > 0.0)) paths.fail("T", "must be positive");
    }

    Reader bsde(sections, "bsde", errors);
    sc.bsde.driver = read_driver(bsde);
    sc.bsde.terminal = read_terminal(bsde, "linear");
    sc.bsde.x0 = bsde.real("x0", 0.0);
    sc.bsde.config.regression_degree = static_cast<int>(bsde.integer("degree", 3));
    if (sc.bsde.config.regression_degree > kMaxRegressionDegree)
        bsde.fail("degree", "must be <= " + std::to_string(kMaxRegressionDegree));
    const std::string scheme = bsde.str("scheme", "heun");
    if (scheme == "heun") {
        sc.bsde.config.scheme = BsdeScheme::heun;
    } else if (scheme == "euler") {
        sc.bsde.config.scheme = BsdeScheme::explicit_euler;
    } else {
        bsde.fail("scheme", "expected 'heun' or 'euler'");
    }

    Reader problem(sections, "problem", errors);
    sc.problem.forward.kind = problem.str("forward", "constant");
    sc.problem.forward.a = problem.real("forward_a", sc.problem.forward.kind == "constant" ? 1.0 : 0.0);
    sc.problem.forward.b = problem.real("forward_b", 0.0);
    sc.problem.forward.c = problem.real("forward_c", 0.0);
    if (sc.problem.forward.kind != "constant" && sc.problem.forward.kind != "linear" &&
        sc.problem.forward.kind != "affine_u")
        problem.fail("forward", "unknown forward kind '" + sc.problem.forward.kind + "' (constant, linear, affine_u)");
    sc.problem.driver = read_driver(problem);
    sc.problem.terminal = read_terminal(problem, "linear");
    sc.problem.U = problem.reals("U", {0.0});
    if (sc.problem.U.empty()) problem.fail("U", "control set is empty");
    sc.problem.T = problem.real("T", 1.0);
    if (!(sc.problem.T > 0.0)) problem.fail("T", "must be positive");

    Reader lattice(sections, "lattice", errors);
    sc.lattice.slices = static_cast<int>(lattice.integer("slices", 10, false, 1));
    sc.lattice.substeps = static_cast<std::size_t>(lattice.integer("substeps", 5, false, 1));
    sc.lattice.paths = static_cast<std::size_t>(lattice.integer("paths", 10000, false, 2));
    sc.lattice.seed = static_cast<std::uint64_t>(lattice.integer("seed", static_cast<long long>(sc.paths.seed)));
    sc.lattice.x = read_grid(lattice, sc.lattice.x);
    sc.lattice.slope_bound = lattice.real("slope_bound", sc.lattice.slope_bound);

    Reader grid(sections, "grid", errors);
    sc.grid = read_grid(grid, sc.grid);

    Reader hjb(sections, "hjb", errors);
    sc.hjb.time_steps = static_cast<std::size_t>(hjb.integer("time_steps", 0));
    sc.hjb.cfl_safety = hjb.real("cfl_safety", 0.9);
    if (!(sc.hjb.cfl_safety > 0.0 && sc.hjb.cfl_safety < 1.0)) hjb.fail("cfl_safety", "must lie in (0, 1)");
    sc.hjb.quad_order = static_cast<int>(hjb.integer("quad_order", 16, false, 1));
    sc.hjb.K = static_cast<int>(hjb.integer("K", sc.K, false, 1));
    sc.hjb.slope_bound = hjb.real("slope_bound", sc.hjb.slope_bound);

    Reader outputs(sections, "outputs", errors);
    sc.outputs.directory = outputs.str("directory", "");
    for (const char* name : {"basis", "simulate", "bsde", "value_mc", "hjb", "convergence", "compare", "accept"})
        sc.outputs.files[name] = outputs.str(name, std::string(name) + ".csv");
    sc.outputs.files["manifest"] = outputs.str("manifest", "manifest.json");

    for (Reader* r : {&model, &basis, &paths, &bsde, &problem, &lattice, &grid, &hjb, &outputs}) r->report_unknown();
    if (!errors.empty()) throw ScenarioError(errors);

    // Cross-section checks need a usable model.
    const LevyModel m = sc.levy_model();
    const auto diags = validate(m);
    for (const auto& d : diags) errors.push_back("model: " + d.code + ": " + d.message);
    if (errors.empty()) {
        if (sc.model.i_max != 0 && sc.model.i_max < default_i_max(sc.K))
            errors.push_back("model.i_max: " + std::to_string(sc.model.i_max) + " is below 2K + 2 = " +
                             std::to_string(default_i_max(sc.K)));
        else {
            const OrthoBasis b = build_basis(m, sc.K);
            if (b.rank() < sc.K)
                errors.push_back("basis.K: K = " + std::to_string(sc.K) + " exceeds basis rank " +
                                 std::to_string(b.rank()));
        }
        if (sc.hjb.K > sc.K)
            errors.push_back("hjb.K: " + std::to_string(sc.hjb.K) + " exceeds basis.K = " + std::to_string(sc.K));
    }
    if (!errors.empty()) throw ScenarioError(errors);
    return sc;
}

Scenario parse_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError({"cannot read scenario file '" + path + "'"});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

LevyModel Scenario::levy_model() const {
    return LevyModel(model.b, model.sigma2, model.nu, model.i_max > 0 ? model.i_max : default_i_max(K));
}

OrthoBasis Scenario::basis() const { return build_basis(levy_model(), K); }

ControlProblem Scenario::control_problem() const {
    const double x_bound = std::max({std::abs(grid.x_min), std::abs(grid.x_max), std::abs(lattice.x.x_min),
                                     std::abs(lattice.x.x_max)});
    return ControlProblem::from_registry(problem.forward, problem.driver, problem.terminal, problem.U, problem.T,
                                         x_bound);
}

BsdeSpec Scenario::bsde_spec() const {
    // Reuse the registry with a single dummy control.
    const ControlProblem p =
        ControlProblem::from_registry(ForwardSpec{}, bsde.driver, bsde.terminal, {0.0}, paths.T, 1.0);
    BsdeSpec spec;
    spec.terminal = p.phi;
    const auto f = p.f;
    spec.driver = [f](double t, double x, double y, std::span<const double> z) { return f(t, x, y, z, 0.0); };
    spec.lipschitz_y = p.lipschitz.L2;
    spec.lipschitz_z = p.lipschitz.L3;
    spec.z_free = p.z_free;
    const auto f1 = p.f1;
    spec.linear_z = LinearZDecomposition{[f1](double t, double x, double y) { return f1(t, x, y, 0.0); },
                                         bsde.driver.gamma};
    return spec;
}

ValueLattice Scenario::value_lattice() const { return {0.0, problem.T, lattice.slices, lattice.x}; }

McConfig Scenario::mc_config() const {
    McConfig c;
    c.paths = lattice.paths;
    c.substeps = lattice.substeps;
    c.seed = lattice.seed;
    c.bsde = bsde.config;
    c.slope_bound = lattice.slope_bound;
    return c;
}

std::string Scenario::digest() const { return hex64(fnv1a64(text)); }

} // namespace teugels
