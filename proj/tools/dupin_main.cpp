#include "CLI11.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dupin/charts.hpp"
#include "dupin/classify.hpp"
#include "dupin/config.hpp"
#include "dupin/legendre.hpp"
#include "dupin/liesphere.hpp"
#include "dupin/serialize.hpp"

// dupin: construct charts, classify them, sweep spectra and curvature
// spheres, factor transformations, and build sphere envelopes.
//
// Exit status: 0 when every verdict the command computes passes, 1 when one
// fails (the report carries a witness), 2 on unusable input.  Given the
// same options and seed the output is byte-identical; nothing here reads
// the clock, the environment, or the network.

namespace {

constexpr std::uint64_t default_seed = 0x9d2fULL;

// Options shared by the chart-driven subcommands.  A value of 0 (or an
// empty string) means "not set"; the resolution order is built-in default,
// then config file, then command line.
struct CommonOpts {
    std::string chart_spec;
    std::string config_path;
    std::string out_path;
    std::string format;
    std::string deform;
    int grid = 0;
    int normals = 0;
    double tol = 0.0;
    double fd_step = 0.0;
    std::uint64_t seed = 0;
    bool seed_set = false;

    // Config-file-only knobs with their built-in defaults.
    int curves = 2;
    double curve_length = 0.5;
    double rk_step = 1e-3;
    bool richardson = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, const char* chart_help) {
    cmd->add_option("chart", o.chart_spec, chart_help)->required();
    cmd->add_option("--config", o.config_path, "key-value run configuration file");
    cmd->add_option("--grid", o.grid, "sample points on the chart domain");
    cmd->add_option("--normals", o.normals, "normal directions per point (0 = automatic)");
    cmd->add_option("--tol", o.tol, "verdict tolerance (0 = per-chart default)");
    cmd->add_option("--fd-step", o.fd_step, "divided-difference step for jet-free charts");
    cmd->add_option("--seed", o.seed, "64-bit seed for every sampling decision")
        ->each([&o](const std::string&) { o.seed_set = true; });
    cmd->add_option("--out", o.out_path, "write the report here instead of stdout");
    cmd->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--mobius-deform", o.deform,
                    "deform the chart by a seeded Mobius transformation; "
                    "'seed=N[,strength=S]' or a bare seed");
}

// Keys a config file may set; anything else is a typo worth rejecting.
const std::vector<std::string> known_keys = {"grid",      "normals",      "tol",
                                             "fd-step",   "seed",         "curves",
                                             "curve-length", "rk-step",   "richardson"};

void merge_config(CommonOpts& o, const CLI::App* cmd) {
    if (o.config_path.empty()) return;
    const dupin::ConfigMap cfg = dupin::load_config(o.config_path);
    for (const auto& [key, value] : cfg.entries) {
        (void)value;
        bool ok = false;
        for (const auto& k : known_keys) ok = ok || k == key;
        if (!ok) throw dupin::invalid_input(cfg.origin + ": unknown key '" + key + "'");
    }
    // Command-line values win over the file.
    if (cmd->count("--grid") == 0) o.grid = cfg.get_int("grid", o.grid);
    if (cmd->count("--normals") == 0) o.normals = cfg.get_int("normals", o.normals);
    if (cmd->count("--tol") == 0) o.tol = cfg.get_double("tol", o.tol);
    if (cmd->count("--fd-step") == 0) o.fd_step = cfg.get_double("fd-step", o.fd_step);
    if (!o.seed_set && cfg.has("seed")) {
        o.seed = cfg.get_seed("seed", o.seed);
        o.seed_set = true;
    }
    o.curves = cfg.get_int("curves", o.curves);
    o.curve_length = cfg.get_double("curve-length", o.curve_length);
    o.rk_step = cfg.get_double("rk-step", o.rk_step);
    o.richardson = cfg.get_bool("richardson", o.richardson);
}

struct DeformSpec {
    std::uint64_t seed = 0;
    double strength = 0.4;
};

// Accepts "seed=N", "seed=N,strength=S", or a bare "N".
DeformSpec parse_deform(const std::string& s) {
    DeformSpec d;
    bool have_seed = false;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::string key = "seed", val = tok;
        if (const auto eq = tok.find('='); eq != std::string::npos) {
            key = tok.substr(0, eq);
            val = tok.substr(eq + 1);
        }
        try {
            if (key == "seed") {
                d.seed = std::stoull(val, nullptr, 0);
                have_seed = true;
            } else if (key == "strength") {
                d.strength = std::stod(val);
            } else {
                throw std::invalid_argument(key);
            }
        } catch (const std::exception&) {
            throw dupin::invalid_input("--mobius-deform: cannot parse '" + s + "'");
        }
    }
    if (!have_seed) throw dupin::invalid_input("--mobius-deform: no seed in '" + s + "'");
    return d;
}

// Chart construction: the named builtins, plus tube charts over the great
// circle ("circle-tube:t"), which live a level above the chart factory.
dupin::ImmersionChart make_chart(const CommonOpts& o, dupin::json* echo) {
    std::string name = o.chart_spec;
    if (const auto colon = name.find(':'); colon != std::string::npos) name.resize(colon);
    dupin::ImmersionChart ch;
    if (name == "circle-tube") {
        double t = 0.4;
        if (const auto colon = o.chart_spec.find(':'); colon != std::string::npos)
            t = std::stod(o.chart_spec.substr(colon + 1));
        ch = dupin::tube_chart(dupin::great_circle(), t);
    } else {
        ch = dupin::builtin_chart(o.chart_spec);
    }
    if (o.fd_step > 0.0) ch.fd_step = o.fd_step;
    ch.richardson = o.richardson;
    if (!o.deform.empty()) {
        const DeformSpec d = parse_deform(o.deform);
        ch = dupin::mobius_deform(ch, d.seed, d.strength);
        if (echo) (*echo)["mobius_deform"] = {{"seed", d.seed}, {"strength", d.strength}};
    }
    return ch;
}

void emit(const CommonOpts& o, const std::string& text) {
    if (o.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out_path);
    if (!f) throw dupin::invalid_input("cannot open output file '" + o.out_path + "'");
    f << text;
}

dupin::json front_matter(const char* command, const CommonOpts& o, std::uint64_t seed) {
    dupin::json j;
    j["schema_version"] = dupin::schema_version;
    j["command"] = command;
    j["chart_spec"] = o.chart_spec;
    j["seed"] = seed;
    return j;
}

void require_json(const CommonOpts& o, const char* command) {
    if (!o.format.empty() && o.format != "json")
        throw dupin::invalid_input(std::string(command) + " emits json only");
}

// ---- verify -------------------------------------------------------------

int run_verify(const CommonOpts& o) {
    require_json(o, "verify");
    const std::uint64_t seed = o.seed_set ? o.seed : default_seed;
    dupin::json echo;
    const dupin::ImmersionChart ch = make_chart(o, &echo);

    dupin::SamplePlan plan =
        dupin::make_plan(ch, o.grid > 0 ? o.grid : 24, o.normals, seed);
    plan.curve_count = o.curves;
    plan.curve_length = o.curve_length;

    const dupin::ClassificationReport rep = dupin::verify_all(ch, plan, o.tol, o.rk_step);

    dupin::json j = front_matter("verify", o, seed);
    if (echo.contains("mobius_deform")) j["mobius_deform"] = echo["mobius_deform"];
    const dupin::json body = dupin::report_json(rep, plan);
    for (const auto& [key, value] : body.items())
        if (key != "schema_version") j[key] = value;
    emit(o, j.dump(2) + "\n");

    bool all_pass = true;
    for (const dupin::VerdictEntry* e :
         {&rep.umbilical, &rep.weakly_umbilical, &rep.unipotent, &rep.cpc, &rep.dupin})
        if (e->evaluated && e->verdict != dupin::Verdict::pass) all_pass = false;
    return all_pass ? 0 : 1;
}

// ---- sweep --------------------------------------------------------------

int run_sweep(const CommonOpts& o) {
    const std::uint64_t seed = o.seed_set ? o.seed : default_seed;
    dupin::json echo;
    const dupin::ImmersionChart ch = make_chart(o, &echo);
    const dupin::SamplePlan plan =
        dupin::make_plan(ch, o.grid > 0 ? o.grid : 24, o.normals, seed);
    const double cluster_tol = ch.default_cluster_tol();

    const bool csv = o.format.empty() || o.format == "csv";
    std::ostringstream out;
    dupin::json samples = dupin::json::array();
    if (csv) {
        out << "# seed = " << seed << "\n";
        std::vector<std::string> head = {"sample", "point"};
        for (int i = 0; i < ch.intrinsic_dim; ++i) head.push_back("u" + std::to_string(i));
        for (int a = 0; a < ch.codim(); ++a) head.push_back("w" + std::to_string(a));
        head.insert(head.end(), {"cluster", "value", "multiplicity"});
        dupin::csv_row(out, head);
    }

    int sample = 0;
    for (std::size_t i = 0; i < plan.point_grid.size(); ++i) {
        const dupin::FundamentalForms ff = dupin::fundamental_forms(ch, plan.point_grid[i]);
        for (const auto& w : plan.normal_grid[i]) {
            const dupin::ShapeSpectrum spec = dupin::principal_spectrum(ff, w, cluster_tol);
            if (csv) {
                for (std::size_t c = 0; c < spec.clusters.size(); ++c) {
                    std::vector<std::string> row = {std::to_string(sample), std::to_string(i)};
                    for (int k = 0; k < ch.intrinsic_dim; ++k)
                        row.push_back(dupin::csv_num(plan.point_grid[i](k)));
                    for (int a = 0; a < ch.codim(); ++a) row.push_back(dupin::csv_num(w(a)));
                    row.push_back(std::to_string(c));
                    row.push_back(dupin::csv_num(spec.clusters[c].value));
                    row.push_back(std::to_string(spec.clusters[c].multiplicity));
                    dupin::csv_row(out, row);
                }
            } else {
                dupin::json s;
                s["point"] = dupin::vector_json(plan.point_grid[i]);
                s["normal"] = dupin::vector_json(w);
                s["values"] = dupin::json::array();
                s["multiplicities"] = dupin::json::array();
                for (const auto& cl : spec.clusters) {
                    s["values"].push_back(cl.value);
                    s["multiplicities"].push_back(cl.multiplicity);
                }
                samples.push_back(std::move(s));
            }
            ++sample;
        }
    }

    if (csv) {
        emit(o, out.str());
    } else {
        dupin::json j = front_matter("sweep", o, seed);
        if (echo.contains("mobius_deform")) j["mobius_deform"] = echo["mobius_deform"];
        j["cluster_tol"] = cluster_tol;
        j["samples"] = std::move(samples);
        emit(o, j.dump(2) + "\n");
    }
    return 0;
}

// ---- lift ---------------------------------------------------------------

int run_lift(const CommonOpts& o) {
    const std::uint64_t seed = o.seed_set ? o.seed : default_seed;
    dupin::json echo;
    const dupin::ImmersionChart ch = make_chart(o, &echo);
    const dupin::LegendreLift lift = dupin::legendre_lift(ch);
    const int dim = lift.d() + 3;
    const int count = o.grid > 0 ? o.grid : std::max(64, dim);

    // Family layout probed at the domain center; reducibility re-samples.
    auto sorted_spheres = [&lift](const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
        auto spheres = dupin::curvature_spheres(lift, u, w);
        std::sort(spheres.begin(), spheres.end(),
                  [](const dupin::CurvatureSphere& a, const dupin::CurvatureSphere& b) {
                      if (a.infinite != b.infinite) return b.infinite;
                      return a.principal_value < b.principal_value;
                  });
        return spheres;
    };
    const auto probe =
        sorted_spheres(ch.domain_center(), Eigen::VectorXd::Unit(lift.p, 0));

    const bool csv = o.format == "csv";
    if (csv) {
        std::ostringstream out;
        out << "# seed = " << seed << "\n";
        std::vector<std::string> head = {"sample", "family", "infinite"};
        for (int i = 0; i < ch.intrinsic_dim; ++i) head.push_back("u" + std::to_string(i));
        for (int a = 0; a < lift.p; ++a) head.push_back("w" + std::to_string(a));
        head.insert(head.end(), {"value", "multiplicity"});
        for (int k = 0; k < dim; ++k) head.push_back("rep" + std::to_string(k));
        dupin::csv_row(out, head);

        const auto points = dupin::box_covering(ch.domain_lo, ch.domain_hi, count, seed);
        const auto normals = dupin::sphere_covering(lift.p, count + count % 2, seed ^ 0x9e37ULL);
        for (int s = 0; s < count; ++s) {
            const auto spheres = sorted_spheres(points[s], normals[s]);
            for (std::size_t f = 0; f < spheres.size(); ++f) {
                const auto& cs = spheres[f];
                std::vector<std::string> row = {std::to_string(s), std::to_string(f),
                                                cs.infinite ? "1" : "0"};
                for (int k = 0; k < ch.intrinsic_dim; ++k)
                    row.push_back(dupin::csv_num(points[s](k)));
                for (int a = 0; a < lift.p; ++a) row.push_back(dupin::csv_num(normals[s](a)));
                row.push_back(cs.infinite ? "inf" : dupin::csv_num(cs.principal_value));
                row.push_back(std::to_string(cs.multiplicity));
                const Eigen::VectorXd rep = cs.representative.rep.coords.normalized();
                for (int k = 0; k < dim; ++k) row.push_back(dupin::csv_num(rep(k)));
                dupin::csv_row(out, row);
            }
        }
        emit(o, out.str());
        return 0;
    }

    dupin::json j = front_matter("lift", o, seed);
    if (echo.contains("mobius_deform")) j["mobius_deform"] = echo["mobius_deform"];
    j["n"] = lift.n();
    j["p"] = lift.p;
    j["d"] = lift.d();
    j["samples"] = count;
    j["families"] = dupin::json::array();
    for (std::size_t f = 0; f < probe.size(); ++f) {
        const dupin::ReducibilityReport rr =
            dupin::reducibility_rank(lift, static_cast<int>(f), count, seed);
        dupin::json fam;
        fam["index"] = f;
        fam["infinite"] = probe[f].infinite;
        if (!probe[f].infinite) fam["value_at_center"] = probe[f].principal_value;
        fam["multiplicity"] = probe[f].multiplicity;
        fam["rank"] = rr.rank;
        fam["ambient_dim"] = rr.ambient_dim;
        fam["reducible_candidate"] = rr.reducible_candidate;
        fam["singular_values"] = dupin::vector_json(rr.singular_values);
        j["families"].push_back(std::move(fam));
    }
    emit(o, j.dump(2) + "\n");
    return 0;
}

// ---- decompose ----------------------------------------------------------

int run_decompose(const CommonOpts& o) {
    require_json(o, "decompose");
    const std::uint64_t seed = o.seed_set ? o.seed : default_seed;
    const double tol = o.tol > 0.0 ? o.tol : 1e-8;

    dupin::json j;
    j["schema_version"] = dupin::schema_version;
    j["command"] = "decompose";
    j["input"] = o.chart_spec;  // positional reused as the matrix path
    j["seed"] = seed;

    const dupin::LieTransformation g = dupin::load_lie(o.chart_spec);
    j["d"] = g.d();
    try {
        const dupin::LieFactorization f = dupin::cecil_chern_decompose(g);
        j["kind"] = dupin::lie_kind_name(f.kind);
        j["t"] = f.t;
        j["residual"] = f.residual;
        j["pass"] = f.residual <= tol;
        j["tol"] = tol;
        j["phi1"] = dupin::lie_json(f.phi1);
        j["phi2"] = dupin::lie_json(f.phi2);
        emit(o, j.dump(2) + "\n");
        return f.residual <= tol ? 0 : 1;
    } catch (const dupin::decomposition_failed& e) {
        j["error"] = e.what();
        j["best_residual"] = e.best_residual;
        j["pass"] = false;
        j["tol"] = tol;
        emit(o, j.dump(2) + "\n");
        return 1;
    }
}

// ---- envelope -----------------------------------------------------------

int run_envelope(const CommonOpts& o) {
    require_json(o, "envelope");
    const std::uint64_t seed = o.seed_set ? o.seed : default_seed;
    const double tol = o.tol > 0.0 ? o.tol : 1e-9;
    const int samples = o.grid > 0 ? o.grid : 200;

    std::string name = o.chart_spec;
    std::vector<double> params;
    if (const auto colon = name.find(':'); colon != std::string::npos) {
        std::stringstream ss(name.substr(colon + 1));
        name.resize(colon);
        std::string tok;
        while (std::getline(ss, tok, ','))
            try {
                params.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw dupin::invalid_input("envelope: bad parameter '" + tok + "'");
            }
    }
    auto param = [&params](std::size_t i, double fb) {
        return i < params.size() ? params[i] : fb;
    };

    dupin::EnvelopeChart env;
    if (name == "cylinder")
        env = dupin::envelope_cylinder(param(0, 0.3));
    else if (name == "torus")
        env = dupin::envelope_torus(param(0, 1.0), param(1, 0.3));
    else if (name == "generic")
        env = dupin::envelope_generic(
            params.empty() ? seed : static_cast<std::uint64_t>(param(0, 0)));
    else
        throw dupin::invalid_input("envelope: unknown family '" + name +
                                   "' (cylinder, torus, generic)");

    const auto [res_dist, res_tan] = dupin::envelope_residuals(env, samples, seed);
    const dupin::EnvelopeClusterReport cluster =
        dupin::envelope_cluster_check(env, std::max(8, samples / 8), seed);
    const int expected_mult = env.fiber_sphere_dim;
    const bool residual_pass = res_dist <= tol && res_tan <= tol;
    const bool cluster_pass = cluster.value_residual <= 1e-6 &&
                              cluster.multiplicity == expected_mult;

    dupin::json j;
    j["schema_version"] = dupin::schema_version;
    j["command"] = "envelope";
    j["envelope_spec"] = o.chart_spec;
    j["seed"] = seed;
    j["n"] = env.chart.intrinsic_dim;
    j["base_dim"] = env.base_dim;
    j["fiber_dim"] = env.fiber_sphere_dim;
    j["samples"] = samples;
    j["residual_distance"] = res_dist;
    j["residual_tangency"] = res_tan;
    j["tol"] = tol;
    j["fiber_cluster"] = {{"value_residual", cluster.value_residual},
                          {"multiplicity", cluster.multiplicity},
                          {"expected_multiplicity", expected_mult},
                          {"tol", 1e-6},
                          {"pass", cluster_pass}};
    j["verdicts"] = {{"envelope_identities", residual_pass},
                     {"fiber_cluster", cluster_pass}};
    emit(o, j.dump(2) + "\n");
    return residual_pass && cluster_pass ? 0 : 1;
}

// ---- format documentation ----------------------------------------------

const char* formats_text = R"fmt(Formats
=======

Transformation JSON (decompose input, phi1/phi2 output):
  { "signature": "lie(3)",        quadric signature tag, d of S^d
    "matrix":    [[...], ...],    row-major (d+3) x (d+3), preserves the form
    "kind_hint": "mobius",        advisory: general | mobius |
                                  parallel_spherical | parallel_euclidean |
                                  parallel_hyperbolic
    "t":         0.3 }            parameter of the parallel kinds

Report JSON (verify): schema_version, command, chart_spec, seed, plan echo
  {points, normals_per_point, curves_per_point, curve_length, seed},
  tolerances, k (or "varies"), multiplicities, constancy_residual,
  shared_value / opposite_pair_residual when a bundle-constant cluster
  exists, antipodal_residual for codimension >= 2, verdicts {name: bool},
  checks {name: {verdict, residual, tol, reason, witness{point, normal,
  residual, detail}}}, nesting_consistent.

Sweep CSV: first line '# seed = N', then a header row and one row per
  (sample, cluster):
  sample, point, u0..u{n-1}, w0..w{p-1}, cluster, value, multiplicity
  u: chart coordinates; w: unit normal coordinates in the chart's frame.

Lift CSV: first line '# seed = N', then a header row and one row per
  (sample, curvature-sphere family):
  sample, family, infinite, u0.., w0.., value, multiplicity, rep0..rep{d+2}
  value is 'inf' for the point-sphere family; rep is the unit-norm quadric
  representative of the sphere.  Families sort finite values ascending,
  infinite last.

Config file (--config): 'key = value' lines, '#' comments, later lines win;
  '-' and '_' are interchangeable in keys.
  grid          sample points on the chart domain
  normals       normal directions per point (0 = automatic: max(2 p^2, 2))
  tol           verdict tolerance (0 = per-chart default)
  fd-step       divided-difference step
  seed          decimal or 0x hex
  curves        transport curves per point (verify)
  curve-length  parameter length of each transport curve
  rk-step       RK4 step for transport integration
  richardson    true/false: extrapolated divided differences
)fmt";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lie sphere geometry toolkit: classify charts, sweep "
                 "curvature spheres, factor transformations"};
    app.require_subcommand(0, 1);
    bool help_formats = false;
    app.add_flag("--help-formats", help_formats, "describe the JSON/CSV/config formats");

    CommonOpts vo, so, lo, dm, eo;
    CLI::App* verify = app.add_subcommand("verify", "classifier verdicts for one chart");
    add_common(verify, vo, "chart spec, e.g. veronese-R or ellipsoid:1.3,1,0.8");
    CLI::App* sweep = app.add_subcommand("sweep", "principal-spectrum table over a grid");
    add_common(sweep, so, "chart spec");
    CLI::App* lift = app.add_subcommand("lift", "curvature-sphere sweep and span ranks");
    add_common(lift, lo, "chart spec (must map into the unit sphere)");
    CLI::App* decompose =
        app.add_subcommand("decompose", "three-factor decomposition of a transformation");
    add_common(decompose, dm, "path to a transformation JSON file");
    CLI::App* envelope = app.add_subcommand("envelope", "sphere-envelope chart and residuals");
    add_common(envelope, eo, "envelope spec: cylinder[:r], torus[:R,r], generic[:seed]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    if (help_formats) {
        std::cout << formats_text;
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 2;
    }

    try {
        if (verify->parsed()) {
            merge_config(vo, verify);
            return run_verify(vo);
        }
        if (sweep->parsed()) {
            merge_config(so, sweep);
            return run_sweep(so);
        }
        if (lift->parsed()) {
            merge_config(lo, lift);
            return run_lift(lo);
        }
        if (decompose->parsed()) {
            merge_config(dm, decompose);
            return run_decompose(dm);
        }
        if (envelope->parsed()) {
            merge_config(eo, envelope);
            return run_envelope(eo);
        }
    } catch (const dupin::error& e) {
        std::cerr << "dupin: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "dupin: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
