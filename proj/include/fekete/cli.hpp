#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fekete/equilibrium.hpp"
#include "fekete/errors.hpp"
#include "fekete/fieldscan.hpp"
#include "fekete/format.hpp"
#include "fekete/geometry.hpp"
#include "fekete/imagecharge.hpp"
#include "fekete/levelset.hpp"
#include "fekete/pointcharge.hpp"

namespace fekete::cli {

using json = nlohmann::json;

// Exit codes: 0 ok, 2 config validation failure, 3 numerical failure (the
// partial result is still written and flagged in run.json).
inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_numerical = 3;

struct Diagnostic {
    std::string field;
    std::string message;
};

struct ScenarioConfig {
    std::string command;
    std::map<std::string, std::string> parameters;
    std::string output_dir = ".";
    std::uint64_t seed = 0;
};

struct ParamSpec {
    std::string name;
    std::string help;
    bool required = false;
    std::string default_value;  // empty = none
};

struct CommandSpec {
    std::string name;
    std::string help;
    std::vector<ParamSpec> params;
};

inline const std::vector<CommandSpec>& command_table() {
    static const std::vector<CommandSpec> table = {
        {"equilibrium",
         "minimize the Coulomb energy of n equal charges on a sphere or ball",
         {{"domain", "conductor type: sphere | ball", false, "sphere"},
          {"radius", "conductor radius", true, ""},
          {"center", "conductor center as x,y,z", false, "0,0,0"},
          {"n", "number of charges", true, ""},
          {"q", "per-charge value", false, "1"},
          {"restarts", "independent restarts", false, "8"},
          {"max-iter", "iteration cap per restart", false, "20000"},
          {"gtol", "projected-gradient tolerance (0 = auto)", false, "0"}}},
        {"two-balls",
         "solve the two-ball equilibrium by image charges",
         {{"R", "radius of ball 1", true, ""},
          {"Q", "total charge of ball 1", true, ""},
          {"r", "radius of ball 2", true, ""},
          {"q", "total charge of ball 2", true, ""},
          {"gap", "surface gap between the balls", true, ""},
          {"eps-tail", "series tail cutoff", false, "1e-12"},
          {"n-max", "maximum image depth", false, "200"}}},
        {"oscillation",
         "E(d) oscillation curve for symmetric two-ball conductors",
         {{"R", "ball radius", true, ""},
          {"q", "per-ball charge", true, ""},
          {"d-list", "comma-separated gap values (overrides d-min/d-max)", false, ""},
          {"d-min", "smallest gap", false, ""},
          {"d-max", "largest gap", false, ""},
          {"count", "number of gaps between d-min and d-max", false, "20"},
          {"m", "samples per profile", false, "201"},
          {"eps-tail", "series tail cutoff", false, "1e-12"},
          {"n-max", "maximum image depth", false, "200"}}},
        {"shells",
         "induced charges on nested conducting shells",
         {{"radii", "comma-separated sphere radii, strictly increasing", true, ""},
          {"q1", "charge on the core", true, ""},
          {"outer", "include the radius-1 outer sphere: true | false", false, "true"}}},
        {"flux",
         "Gauss-flux charge recovery over a sphere",
         {{"points", "charge CSV file (x,y,z,q[,component])", true, ""},
          {"center", "quadrature sphere center as x,y,z", false, "0,0,0"},
          {"radius", "quadrature sphere radius", true, ""},
          {"n-quad", "surface quadrature nodes", false, "2048"},
          {"yukawa", "use the screened kernel: true | false", false, "false"},
          {"n-vol", "volume nodes for the screened kernel", false, "100000"}}},
        {"levelset",
         "threshold the potential on a voxel grid and label components",
         {{"points", "charge CSV file", true, ""},
          {"threshold", "level value", true, ""},
          {"mode", "above | below", false, "above"},
          {"bbox", "xmin,ymin,zmin,xmax,ymax,zmax", true, ""},
          {"res", "voxels per axis: n or nx,ny,nz", false, "128"}}},
        {"grid",
         "sample the potential on a voxel grid",
         {{"points", "charge CSV file", true, ""},
          {"bbox", "xmin,ymin,zmin,xmax,ymax,zmax", true, ""},
          {"res", "voxels per axis: n or nx,ny,nz", false, "64"}}},
        {"trajectory",
         "electron path in a uniform magnetic field",
         {{"m", "electron mass", true, ""},
          {"v", "initial speed along OX", true, ""},
          {"e", "electron charge", true, ""},
          {"H", "field strength along OZ", true, ""},
          {"t", "time (curve end when steps > 1)", true, ""},
          {"steps", "number of samples in [0, t]", false, "1"}}},
        {"static-check",
         "verify the static-state conditions for a charge CSV",
         {{"points", "charge CSV file", true, ""},
          {"domain", "conductor type: ball | sphere | segment", true, ""},
          {"radius", "conductor radius (ball, sphere)", false, ""},
          {"center", "conductor center as x,y,z", false, "0,0,0"},
          {"a", "segment start as x,y,z", false, ""},
          {"b", "segment end as x,y,z", false, ""},
          {"tol", "force tolerance", false, "1e-8"}}},
        {"cavendish",
         "lower bound |grad U(0)| >= Q/d^2 - q/R^2, optionally measured",
         {{"Q", "external charge", true, ""},
          {"d", "external charge distance", true, ""},
          {"q", "total charge on the ball", true, ""},
          {"R", "ball radius", true, ""},
          {"n", "charges for the measured demonstration (0 = bound only)", false, "0"}}},
    };
    return table;
}

inline const CommandSpec* find_command(const std::string& name) {
    for (const auto& c : command_table())
        if (c.name == name) return &c;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Typed parameter access with diagnostics.

namespace detail {

class ParamReader {
  public:
    ParamReader(const ScenarioConfig& config, const CommandSpec& spec,
                std::vector<Diagnostic>& diags)
        : config_(config), spec_(spec), diags_(diags) {}

    std::optional<std::string> raw(const std::string& name) {
        auto it = config_.parameters.find(name);
        if (it != config_.parameters.end()) return it->second;
        for (const auto& p : spec_.params) {
            if (p.name != name) continue;
            if (p.required) {
                fail(name, "required parameter is missing");
                return std::nullopt;
            }
            if (!p.default_value.empty()) return p.default_value;
            return std::nullopt;
        }
        return std::nullopt;
    }

    std::optional<double> number(const std::string& name) {
        auto s = raw(name);
        if (!s) return std::nullopt;
        try {
            std::size_t used = 0;
            const double v = std::stod(*s, &used);
            if (used != s->size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            fail(name, "not a number: '" + *s + "'");
            return std::nullopt;
        }
    }

    std::optional<double> number(const std::string& name, double min,
                                 const std::string& constraint) {
        auto v = number(name);
        if (v && !(*v > min)) {
            fail(name, constraint);
            return std::nullopt;
        }
        return v;
    }

    std::optional<long long> integer(const std::string& name, long long min, long long max) {
        auto v = number(name);
        if (!v) return std::nullopt;
        const long long i = static_cast<long long>(*v);
        if (static_cast<double>(i) != *v || i < min || i > max) {
            fail(name, "must be an integer in [" + std::to_string(min) + ", " +
                           std::to_string(max) + "]");
            return std::nullopt;
        }
        return i;
    }

    std::optional<bool> boolean(const std::string& name) {
        auto s = raw(name);
        if (!s) return std::nullopt;
        if (*s == "true" || *s == "1") return true;
        if (*s == "false" || *s == "0") return false;
        fail(name, "must be true or false");
        return std::nullopt;
    }

    std::optional<std::vector<double>> number_list(const std::string& name) {
        auto s = raw(name);
        if (!s) return std::nullopt;
        std::vector<double> out;
        std::istringstream in(*s);
        std::string field;
        while (std::getline(in, field, ',')) {
            try {
                out.push_back(std::stod(field));
            } catch (const std::exception&) {
                fail(name, "not a comma-separated number list: '" + *s + "'");
                return std::nullopt;
            }
        }
        if (out.empty()) {
            fail(name, "empty list");
            return std::nullopt;
        }
        return out;
    }

    std::optional<Vec3> vec3(const std::string& name) {
        auto list = number_list(name);
        if (!list) return std::nullopt;
        if (list->size() != 3) {
            fail(name, "must be three comma-separated numbers");
            return std::nullopt;
        }
        return Vec3{(*list)[0], (*list)[1], (*list)[2]};
    }

    void fail(const std::string& field, const std::string& message) {
        diags_.push_back({field, message});
    }

    bool ok() const { return diags_.empty(); }

  private:
    const ScenarioConfig& config_;
    const CommandSpec& spec_;
    std::vector<Diagnostic>& diags_;
};

inline void check_known_parameters(const ScenarioConfig& config, const CommandSpec& spec,
                                   std::vector<Diagnostic>& diags) {
    for (const auto& [key, value] : config.parameters) {
        bool known = false;
        for (const auto& p : spec.params)
            if (p.name == key) known = true;
        if (!known) diags.push_back({key, "unknown parameter for command " + spec.name});
    }
}

inline std::optional<pointcharge::ChargeConfiguration> load_points(
    ParamReader& reader, std::vector<Diagnostic>& diags) {
    auto path = reader.raw("points");
    if (!path) return std::nullopt;
    std::ifstream in(*path);
    if (!in) {
        diags.push_back({"points", "cannot open file: " + *path});
        return std::nullopt;
    }
    try {
        return pointcharge::config_from_csv(in);
    } catch (const std::exception& e) {
        diags.push_back({"points", e.what()});
        return std::nullopt;
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Validation. Empty diagnostics <=> run() would start executing.

inline std::vector<Diagnostic> validate(const ScenarioConfig& config) {
    std::vector<Diagnostic> diags;
    const CommandSpec* spec = find_command(config.command);
    if (!spec) {
        diags.push_back({"command", "unrecognized command '" + config.command + "'"});
        return diags;
    }
    detail::check_known_parameters(config, *spec, diags);
    detail::ParamReader reader(config, *spec, diags);

    if (config.command == "equilibrium") {
        auto domain = reader.raw("domain");
        if (domain && *domain != "sphere" && *domain != "ball")
            reader.fail("domain", "must be sphere or ball");
        reader.number("radius", 0.0, "must be positive");
        reader.vec3("center");
        reader.integer("n", 1, 100000);
        reader.number("q");
        reader.integer("restarts", 1, 10000);
        reader.integer("max-iter", 1, 100000000);
        auto gtol = reader.number("gtol");
        if (gtol && *gtol < 0.0) reader.fail("gtol", "must be >= 0");
    } else if (config.command == "two-balls") {
        reader.number("R", 0.0, "must be positive");
        reader.number("Q");
        reader.number("r", 0.0, "must be positive");
        reader.number("q");
        reader.number("gap", 0.0,
                      "must be positive: the balls must have disjoint closures");
        reader.number("eps-tail", 0.0, "must be positive");
        reader.integer("n-max", 1, 100000);
    } else if (config.command == "oscillation") {
        reader.number("R", 0.0, "must be positive");
        reader.number("q");
        if (config.parameters.count("d-list")) {
            auto list = reader.number_list("d-list");
            if (list)
                for (double d : *list)
                    if (!(d > 0.0)) reader.fail("d-list", "gaps must be positive");
        } else if (config.parameters.count("d-min") || config.parameters.count("d-max")) {
            if (!config.parameters.count("d-min"))
                reader.fail("d-min", "required together with d-max");
            if (!config.parameters.count("d-max"))
                reader.fail("d-max", "required together with d-min");
            auto lo = reader.number("d-min", 0.0, "must be positive");
            auto hi = reader.number("d-max", 0.0, "must be positive");
            if (lo && hi && !(*lo <= *hi)) reader.fail("d-max", "must be >= d-min");
            reader.integer("count", 1, 100000);
        } else {
            reader.fail("d-list", "provide d-list or d-min/d-max");
        }
        reader.integer("m", 2, 1000000);
        reader.number("eps-tail", 0.0, "must be positive");
        reader.integer("n-max", 1, 100000);
    } else if (config.command == "shells") {
        auto radii = reader.number_list("radii");
        if (radii) {
            double prev = 0.0;
            for (double r : *radii) {
                if (!(r > prev)) {
                    reader.fail("radii", "must be positive and strictly increasing");
                    break;
                }
                prev = r;
            }
            if (radii->size() > 64) reader.fail("radii", "at most 64 shells supported");
            auto outer = reader.boolean("outer");
            if (outer && *outer && !(prev < 1.0))
                reader.fail("radii", "must stay below the outer sphere radius 1");
        }
        reader.number("q1");
    } else if (config.command == "flux") {
        detail::load_points(reader, diags);
        reader.vec3("center");
        reader.number("radius", 0.0, "must be positive");
        reader.integer("n-quad", 8, 100000000);
        auto yukawa = reader.boolean("yukawa");
        if (yukawa && *yukawa) reader.integer("n-vol", 8, 1000000000);
    } else if (config.command == "levelset" || config.command == "grid") {
        auto points = detail::load_points(reader, diags);
        auto bbox = reader.number_list("bbox");
        if (bbox && bbox->size() != 6) reader.fail("bbox", "must be six numbers");
        auto res = reader.number_list("res");
        if (res && res->size() != 1 && res->size() != 3)
            reader.fail("res", "must be one or three integers");
        if (res)
            for (double v : *res) {
                const int lo = config.command == "levelset" ? 8 : 2;
                if (v != std::floor(v) || v < lo || v > 512)
                    reader.fail("res", "voxels per axis must be integers in [" +
                                            std::to_string(lo) + ", 512]");
            }
        if (config.command == "levelset") {
            reader.number("threshold");
            auto mode = reader.raw("mode");
            if (mode && *mode != "above" && *mode != "below")
                reader.fail("mode", "must be above or below");
            // the bounding box must enclose every source with a margin of at
            // least twice the source extent
            if (points && bbox && bbox->size() == 6 && !points->positions.empty()) {
                Vec3 lo = points->positions[0];
                Vec3 hi = points->positions[0];
                for (const auto& p : points->positions) {
                    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
                    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
                }
                const double extent = 0.5 * norm(hi - lo);
                const double margin = 2.0 * extent;
                const bool enclosed =
                    (*bbox)[0] <= lo.x - margin && (*bbox)[1] <= lo.y - margin &&
                    (*bbox)[2] <= lo.z - margin && (*bbox)[3] >= hi.x + margin &&
                    (*bbox)[4] >= hi.y + margin && (*bbox)[5] >= hi.z + margin;
                if (!enclosed)
                    reader.fail("bbox", "must enclose all sources with margin >= 2x the "
                                        "source extent (" + float17(margin) + ")");
            }
        }
    } else if (config.command == "trajectory") {
        auto m = reader.number("m");
        if (m && *m == 0.0) reader.fail("m", "mass must be nonzero");
        reader.number("v");
        auto e = reader.number("e");
        auto H = reader.number("H");
        if (e && H && *e * *H == 0.0)
            reader.fail("H", "e*H must be nonzero (zero-field motion is a straight line)");
        reader.number("t");
        reader.integer("steps", 1, 100000000);
    } else if (config.command == "static-check") {
        detail::load_points(reader, diags);
        auto domain = reader.raw("domain");
        if (domain && *domain != "ball" && *domain != "sphere" && *domain != "segment") {
            reader.fail("domain", "must be ball, sphere or segment");
        } else if (domain && *domain == "segment") {
            if (!config.parameters.count("a") || !config.parameters.count("b"))
                reader.fail("a", "segment domain requires a and b");
            else {
                reader.vec3("a");
                reader.vec3("b");
            }
        } else if (domain) {
            if (!config.parameters.count("radius"))
                reader.fail("radius", "required for ball and sphere domains");
            else
                reader.number("radius", 0.0, "must be positive");
            reader.vec3("center");
        }
        reader.number("tol", 0.0, "must be positive");
    } else if (config.command == "cavendish") {
        reader.number("Q");
        auto d = reader.number("d", 0.0, "must be positive");
        reader.number("q");
        auto R = reader.number("R", 0.0, "must be positive");
        if (d && R && !(*d > *R)) reader.fail("d", "must exceed the ball radius R");
        reader.integer("n", 0, 1000000);
    }
    return diags;
}

// ---------------------------------------------------------------------------
// Execution.

namespace detail {

inline json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

struct RunContext {
    std::filesystem::path out_dir;
    json result;
    std::vector<std::string> artifacts;
    bool numerical_failure = false;
    std::string failure_message;

    void write_artifact(const std::string& name, const std::string& content) {
        write_text_file((out_dir / name).string(), content);
        artifacts.push_back(name);
    }
};

inline std::string curve_csv(const std::vector<std::pair<double, double>>& rows,
                             const std::string& header) {
    std::string out = header + "\n";
    for (const auto& [a, b] : rows) out += float17(a) + ',' + float17(b) + '\n';
    return out;
}

inline pointcharge::ChargeConfiguration must_load_points(const ScenarioConfig& config) {
    std::ifstream in(config.parameters.at("points"));
    return pointcharge::config_from_csv(in);
}

inline double param_number(const ScenarioConfig& config, const CommandSpec& spec,
                           const std::string& name) {
    auto it = config.parameters.find(name);
    if (it != config.parameters.end()) return std::stod(it->second);
    for (const auto& p : spec.params)
        if (p.name == name) return std::stod(p.default_value);
    throw Error("missing parameter " + name);
}

inline std::string param_string(const ScenarioConfig& config, const CommandSpec& spec,
                                const std::string& name) {
    auto it = config.parameters.find(name);
    if (it != config.parameters.end()) return it->second;
    for (const auto& p : spec.params)
        if (p.name == name) return p.default_value;
    return "";
}

inline std::vector<double> param_list(const ScenarioConfig& config, const CommandSpec& spec,
                                      const std::string& name) {
    std::vector<double> out;
    std::istringstream in(param_string(config, spec, name));
    std::string field;
    while (std::getline(in, field, ',')) out.push_back(std::stod(field));
    return out;
}

inline Vec3 param_vec3(const ScenarioConfig& config, const CommandSpec& spec,
                       const std::string& name) {
    const auto v = param_list(config, spec, name);
    return {v[0], v[1], v[2]};
}

inline void run_equilibrium(const ScenarioConfig& config, const CommandSpec& spec,
                            RunContext& ctx) {
    equilibrium::EquilibriumProblem problem;
    equilibrium::Component component;
    const double radius = param_number(config, spec, "radius");
    const Vec3 center = param_vec3(config, spec, "center");
    if (param_string(config, spec, "domain") == "ball")
        component.domain = geometry::Ball{center, radius};
    else
        component.domain = geometry::SphereSurface{center, radius};
    component.count = static_cast<std::size_t>(param_number(config, spec, "n"));
    component.charge = param_number(config, spec, "q");
    problem.components.push_back(component);
    problem.options.restarts = static_cast<int>(param_number(config, spec, "restarts"));
    problem.options.max_iterations =
        static_cast<std::size_t>(param_number(config, spec, "max-iter"));
    problem.options.gradient_tol = param_number(config, spec, "gtol");
    problem.options.rng_seed = config.seed;

    const auto result = equilibrium::minimize_energy(problem);

    ctx.write_artifact("points.csv", pointcharge::to_csv(result.config));
    double lambda_min = 0.0;
    if (!result.lagrange_multipliers.empty()) {
        lambda_min = result.lagrange_multipliers[0];
        for (double l : result.lagrange_multipliers) lambda_min = std::min(lambda_min, l);
    }
    ctx.result = {{"energy", result.energy},
                  {"converged", result.converged},
                  {"lambda_min", lambda_min},
                  {"boundary_max_distance", result.boundary_max_distance},
                  {"projected_gradient_norm", result.projected_gradient_norm},
                  {"seed", config.seed}};
    if (!result.converged) {
        ctx.numerical_failure = true;
        ctx.failure_message = "minimizer did not reach the gradient tolerance";
    }
}

inline void run_two_balls(const ScenarioConfig& config, const CommandSpec& spec,
                          RunContext& ctx) {
    imagecharge::TwoBallSpec two;
    two.R = param_number(config, spec, "R");
    two.Q = param_number(config, spec, "Q");
    two.r = param_number(config, spec, "r");
    two.q = param_number(config, spec, "q");
    const double gap = param_number(config, spec, "gap");
    two.center1 = {0.0, 0.0, 0.0};
    two.center2 = {two.R + gap + two.r, 0.0, 0.0};

    try {
        const auto sys = imagecharge::solve_two_balls(
            two, param_number(config, spec, "eps-tail"),
            static_cast<int>(param_number(config, spec, "n-max")));
        ctx.write_artifact("points.csv", pointcharge::to_csv(sys.as_point_charges()));
        double sum_d = 0.0, sum_c = 0.0;
        for (double v : sys.coeff_D) sum_d += v;
        for (double v : sys.coeff_C) sum_c += v;
        ctx.result = {{"C", sys.C},
                      {"D", sys.D},
                      {"A", {{sys.A[0][0], sys.A[0][1]}, {sys.A[1][0], sys.A[1][1]}}},
                      {"truncation_n", sys.truncation_n},
                      {"tail_bound", sys.tail_bound},
                      {"surface_potential_1", sys.C / sys.spec.R},
                      {"surface_potential_2", sys.D / sys.spec.r},
                      {"reconstructed_Q", sum_d},
                      {"reconstructed_q", sum_c}};
    } catch (const SeriesNotConverged& e) {
        ctx.numerical_failure = true;
        ctx.failure_message = e.what();
        ctx.result = {{"error", e.what()}};
    }
}

inline void run_oscillation(const ScenarioConfig& config, const CommandSpec& spec,
                            RunContext& ctx) {
    std::vector<double> gaps;
    if (config.parameters.count("d-list")) {
        gaps = param_list(config, spec, "d-list");
    } else {
        const double lo = param_number(config, spec, "d-min");
        const double hi = param_number(config, spec, "d-max");
        const int count = static_cast<int>(param_number(config, spec, "count"));
        for (int i = 0; i < count; ++i)
            gaps.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    }
    try {
        const auto curve = fieldscan::oscillation_curve(
            param_number(config, spec, "R"), param_number(config, spec, "q"), gaps,
            static_cast<int>(param_number(config, spec, "m")),
            param_number(config, spec, "eps-tail"),
            static_cast<int>(param_number(config, spec, "n-max")));
        ctx.write_artifact("curve.csv", curve_csv(curve, "d,E"));
        ctx.result = {{"gaps", gaps.size()},
                      {"E_first", curve.front().second},
                      {"E_last", curve.back().second}};
    } catch (const SeriesNotConverged& e) {
        ctx.numerical_failure = true;
        ctx.failure_message = e.what();
        ctx.result = {{"error", e.what()}};
    }
}

inline void run_shells(const ScenarioConfig& config, const CommandSpec& spec, RunContext& ctx) {
    const auto radii = param_list(config, spec, "radii");
    const auto sol = imagecharge::solve_nested_shells(
        radii, param_number(config, spec, "q1"),
        param_string(config, spec, "outer") == "true");
    std::string csv = "r,q\n";
    for (std::size_t i = 0; i < sol.radii.size(); ++i)
        csv += float17(sol.radii[i]) + ',' + float17(sol.charges[i]) + '\n';
    ctx.write_artifact("points.csv", csv);
    ctx.result = {{"charges", sol.charges},
                  {"potential_levels", sol.potential_levels},
                  {"outer_level", sol.outer_level},
                  {"with_outer_sphere", sol.with_outer_sphere}};
}

inline void run_flux(const ScenarioConfig& config, const CommandSpec& spec, RunContext& ctx) {
    const auto points = must_load_points(config);
    const fieldscan::PotentialSource source{fieldscan::PointSet{points}};
    const Vec3 center = param_vec3(config, spec, "center");
    const double radius = param_number(config, spec, "radius");
    const int n_quad = static_cast<int>(param_number(config, spec, "n-quad"));
    fieldscan::FluxResult flux;
    if (param_string(config, spec, "yukawa") == "true") {
        flux = fieldscan::yukawa_flux(source, center, radius, n_quad,
                                      static_cast<int>(param_number(config, spec, "n-vol")),
                                      config.seed);
    } else {
        flux = fieldscan::gauss_flux(source, center, radius, n_quad);
    }
    ctx.result = {{"enclosed_charge", flux.enclosed_charge},
                  {"quadrature_points", flux.quadrature_points},
                  {"estimated_error", flux.estimated_error}};
}

inline fieldscan::GridSpec make_grid_spec(const ScenarioConfig& config, const CommandSpec& spec) {
    const auto bbox = param_list(config, spec, "bbox");
    const auto res = param_list(config, spec, "res");
    fieldscan::GridSpec gs;
    gs.bbox_min = {bbox[0], bbox[1], bbox[2]};
    gs.bbox_max = {bbox[3], bbox[4], bbox[5]};
    gs.nx = static_cast<int>(res[0]);
    gs.ny = static_cast<int>(res.size() == 3 ? res[1] : res[0]);
    gs.nz = static_cast<int>(res.size() == 3 ? res[2] : res[0]);
    return gs;
}

inline void run_levelset(const ScenarioConfig& config, const CommandSpec& spec,
                         RunContext& ctx) {
    const auto points = must_load_points(config);
    const auto grid = fieldscan::level_components(
        fieldscan::PotentialSource{fieldscan::PointSet{points}},
        make_grid_spec(config, spec), param_number(config, spec, "threshold"),
        param_string(config, spec, "mode") == "below" ? fieldscan::ThresholdMode::Below
                                                      : fieldscan::ThresholdMode::Above);
    fieldscan::write_grid_values(grid, (ctx.out_dir / "grid.bin").string());
    ctx.artifacts.push_back("grid.bin");
    fieldscan::write_grid_labels(grid, (ctx.out_dir / "labels.bin").string());
    ctx.artifacts.push_back("labels.bin");
    ctx.result = json::parse(fieldscan::grid_header_json(grid));
}

inline void run_grid(const ScenarioConfig& config, const CommandSpec& spec, RunContext& ctx) {
    const auto points = must_load_points(config);
    const auto grid = fieldscan::sample_grid(
        fieldscan::PotentialSource{fieldscan::PointSet{points}}, make_grid_spec(config, spec));
    fieldscan::write_grid_values(grid, (ctx.out_dir / "grid.bin").string());
    ctx.artifacts.push_back("grid.bin");
    json header = json::parse(fieldscan::grid_header_json(grid));
    header.erase("threshold");
    header.erase("mode");
    header.erase("components");
    ctx.result = header;
}

inline void run_trajectory(const ScenarioConfig& config, const CommandSpec& spec,
                           RunContext& ctx) {
    const double m = param_number(config, spec, "m");
    const double v = param_number(config, spec, "v");
    const double e = param_number(config, spec, "e");
    const double H = param_number(config, spec, "H");
    const double t_end = param_number(config, spec, "t");
    const int steps = static_cast<int>(param_number(config, spec, "steps"));
    std::string csv = "t,x,y,z\n";
    Vec3 last{};
    for (int i = 0; i < steps; ++i) {
        const double t = steps == 1 ? t_end : t_end * i / (steps - 1);
        last = fieldscan::magnetic_trajectory(m, v, e, H, t);
        csv += float17(t) + ',' + float17(last.x) + ',' + float17(last.y) + ',' +
               float17(last.z) + '\n';
    }
    ctx.write_artifact("curve.csv", csv);
    ctx.result = {{"end_point", vec_json(last)}, {"gyration_radius", m * v / (e * H)}};
}

inline void run_static_check(const ScenarioConfig& config, const CommandSpec& spec,
                             RunContext& ctx) {
    const auto points = must_load_points(config);
    geometry::ConductorDomain domain;
    const std::string kind = param_string(config, spec, "domain");
    if (kind == "segment") {
        domain = geometry::Segment{param_vec3(config, spec, "a"), param_vec3(config, spec, "b")};
    } else if (kind == "sphere") {
        domain = geometry::SphereSurface{param_vec3(config, spec, "center"),
                                         param_number(config, spec, "radius")};
    } else {
        domain = geometry::Ball{param_vec3(config, spec, "center"),
                                param_number(config, spec, "radius")};
    }
    const auto report =
        pointcharge::static_state_check(points, domain, param_number(config, spec, "tol"));
    double worst_interior = 0.0;
    for (const auto& e : report.interior_residuals)
        worst_interior = std::max(worst_interior, e.force_norm);
    double worst_tangential = 0.0;
    double min_normal = 0.0;
    for (const auto& e : report.boundary_reports) {
        worst_tangential = std::max(worst_tangential, e.tangential_norm);
        min_normal = std::min(min_normal, e.normal_component);
    }
    ctx.result = {{"is_static", report.is_static},
                  {"interior_charges", report.interior_residuals.size()},
                  {"boundary_charges", report.boundary_reports.size()},
                  {"worst_interior_force", worst_interior},
                  {"worst_tangential_force", worst_tangential},
                  {"min_normal_component", min_normal}};
}

inline void run_cavendish(const ScenarioConfig& config, const CommandSpec& spec,
                          RunContext& ctx) {
    const double Q = param_number(config, spec, "Q");
    const double d = param_number(config, spec, "d");
    const double q = param_number(config, spec, "q");
    const double R = param_number(config, spec, "R");
    const double bound = pointcharge::cavendish_bound(Q, d, q, R);
    ctx.result = {{"bound", bound}};

    const int n = static_cast<int>(param_number(config, spec, "n"));
    if (n > 0) {
        // measured demonstration: n charges totalling q relax on the sphere
        // R in the presence of the immobile external charge Q at distance d
        equilibrium::EquilibriumProblem problem;
        problem.components.push_back(
            {geometry::SphereSurface{{0.0, 0.0, 0.0}, R}, static_cast<std::size_t>(n),
             q / n});
        problem.fixed.positions = {{d, 0.0, 0.0}};
        problem.fixed.charges = {Q};
        problem.options.rng_seed = config.seed;
        const auto result = equilibrium::minimize_energy(problem);

        pointcharge::ChargeConfiguration all = result.config;
        all.positions.push_back({d, 0.0, 0.0});
        all.charges.push_back(Q);
        all.component_index.push_back(1);
        const fieldscan::PotentialSource source{fieldscan::PointSet{all}};
        const double measured = norm(fieldscan::coulomb_gradient(source, {0.0, 0.0, 0.0}));
        ctx.result["measured_gradient_norm"] = measured;
        ctx.result["measured_minus_bound"] = measured - bound;
        ctx.result["converged"] = result.converged;
        ctx.write_artifact("points.csv", pointcharge::to_csv(all));
        if (!result.converged) {
            ctx.numerical_failure = true;
            ctx.failure_message = "equilibrium demonstration did not converge";
        }
    }
}

}  // namespace detail

// Runs a validated scenario: writes the command artifacts plus a run.json
// manifest into output_dir and returns the process exit status.
inline int run(const ScenarioConfig& config, std::ostream& err) {
    const auto diags = validate(config);
    if (!diags.empty()) {
        for (const auto& d : diags) err << "config error: " << d.field << ": " << d.message << "\n";
        return exit_validation;
    }
    const CommandSpec& spec = *find_command(config.command);

    detail::RunContext ctx;
    ctx.out_dir = config.output_dir.empty() ? "." : config.output_dir;
    std::filesystem::create_directories(ctx.out_dir);

    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (config.command == "equilibrium")
            detail::run_equilibrium(config, spec, ctx);
        else if (config.command == "two-balls")
            detail::run_two_balls(config, spec, ctx);
        else if (config.command == "oscillation")
            detail::run_oscillation(config, spec, ctx);
        else if (config.command == "shells")
            detail::run_shells(config, spec, ctx);
        else if (config.command == "flux")
            detail::run_flux(config, spec, ctx);
        else if (config.command == "levelset")
            detail::run_levelset(config, spec, ctx);
        else if (config.command == "grid")
            detail::run_grid(config, spec, ctx);
        else if (config.command == "trajectory")
            detail::run_trajectory(config, spec, ctx);
        else if (config.command == "static-check")
            detail::run_static_check(config, spec, ctx);
        else if (config.command == "cavendish")
            detail::run_cavendish(config, spec, ctx);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_validation;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json manifest;
    manifest["command"] = config.command;
    manifest["parameters"] = config.parameters;
    manifest["library_version"] = library_version;
    manifest["seed"] = config.seed;
    manifest["status"] = ctx.numerical_failure ? "numerical-failure" : "ok";
    if (ctx.numerical_failure) manifest["failure"] = ctx.failure_message;
    manifest["result"] = ctx.result;
    manifest["artifacts"] = ctx.artifacts;
    manifest["wall_time_seconds"] = wall;
    write_text_file((ctx.out_dir / "run.json").string(), manifest.dump(2) + "\n");

    if (ctx.numerical_failure) {
        err << "numerical failure: " << ctx.failure_message << "\n";
        return exit_numerical;
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// JSON config files: {"command": ..., "output_dir": ..., "seed": ...,
// "parameters": {...}}. Command-line flags override file values.

inline ScenarioConfig config_from_json(const json& j) {
    ScenarioConfig config;
    config.command = j.value("command", "");
    config.output_dir = j.value("output_dir", ".");
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("parameters")) {
        for (const auto& [key, value] : j.at("parameters").items()) {
            if (value.is_string())
                config.parameters[key] = value.get<std::string>();
            else if (value.is_boolean())
                config.parameters[key] = value.get<bool>() ? "true" : "false";
            else if (value.is_array()) {
                std::string joined;
                for (const auto& item : value) {
                    if (!joined.empty()) joined += ',';
                    joined += item.is_string() ? item.get<std::string>()
                                               : float17(item.get<double>());
                }
                config.parameters[key] = joined;
            } else {
                config.parameters[key] = float17(value.get<double>());
            }
        }
    }
    return config;
}

inline ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    json j = json::parse(in);
    return config_from_json(j);
}

}  // namespace fekete::cli
