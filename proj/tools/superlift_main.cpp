// Command-line front end: parses JSON inputs, dispatches to the library, and
// prints exactly one machine-readable JSON report per invocation.
//
// Exit codes: 0 every check passed; 1 a check failed or a cocycle is
// obstructed; 2 malformed input or usage.  Identical inputs produce
// byte-identical reports: every mapping in the output is emitted in a fixed
// key order.  The SUPERLIFT_LOG environment variable raises library
// verbosity.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <variant>

#include <CLI11.hpp>

#include "superlift/json_io.hpp"
#include "superlift/nsalg.hpp"
#include "superlift/sphere.hpp"

namespace {

using namespace superlift;

struct Options {
    double tol = 1e-9;
    int L = -1;
    int samples = 32;
};

int emit(const json& report, int code) {
    std::cout << report.dump(2) << "\n";
    return code;
}

json base_report(const std::string& command, const std::string& status) {
    json out = json::object();
    out["command"] = command;
    out["status"] = status;
    return out;
}

// Pointwise residual of the defining condition on a circle of radius one.
// Coefficientwise residuals decide pass/fail; the sampled figure is reported
// alongside because exponential transitions can dwarf any absolute scale.
double sampled_residual(const N2Map& h, int samples) {
    const ComponentFunction rhs =
        h.coords == N2Coords::homogeneous
            ? h.psi_a.derivative() * h.psi_b - h.psi_a * h.psi_b.derivative() + h.g_a * h.g_b
            : h.g_a * h.g_a + h.g_b * h.g_b - h.psi_a * h.psi_a.derivative() -
                  h.psi_b * h.psi_b.derivative();
    return sample_distance(h.f.derivative(), rhs, samples, 1.0);
}

double sampled_residual(const N1Map& h, int samples) {
    const double r1 = sample_distance(h.xi, h.g * h.psi, samples, 1.0);
    const double r2 =
        sample_distance(h.f.derivative() + h.psi * h.psi.derivative(), h.g * h.g, samples, 1.0);
    return std::max(r1, r2);
}

int run_verify(const std::string& file, const Options& opt) {
    const Transition t = read_transition(load_json_file(file), opt.L);
    double residual = 0.0;
    double sampled = 0.0;
    std::string kind;
    if (std::holds_alternative<N2Map>(t)) {
        const N2Map& h = std::get<N2Map>(t);
        kind = "n2";
        residual = superconformal_residual(h);
        sampled = sampled_residual(h, opt.samples);
    } else {
        const N1Map& h = std::get<N1Map>(t);
        kind = "n1";
        residual = n1_superconformal_residual(h);
        sampled = sampled_residual(h, opt.samples);
    }
    const bool ok = residual <= opt.tol;
    json rep = base_report("verify-superconformal", ok ? "pass" : "fail");
    rep["kind"] = kind;
    rep["residual"] = residual;
    rep["sampled_residual"] = sampled;
    rep["tol"] = opt.tol;
    return emit(rep, ok ? 0 : 1);
}

int run_compose(const std::string& file_a, const std::string& file_b, const Options& opt) {
    const Transition a = read_transition(load_json_file(file_a), opt.L);
    const Transition b = read_transition(load_json_file(file_b), opt.L);
    json rep = base_report("compose", "pass");
    if (std::holds_alternative<N1Map>(a) && std::holds_alternative<N1Map>(b))
        rep["map"] = write_map(compose(std::get<N1Map>(a), std::get<N1Map>(b)));
    else if (std::holds_alternative<N2Map>(a) && std::holds_alternative<N2Map>(b))
        rep["map"] = write_map(compose(std::get<N2Map>(a), std::get<N2Map>(b)));
    else
        throw InputError("compose needs two map records of the same kind");
    return emit(rep, 0);
}

int run_f1(const std::string& file, const Options& opt) {
    const Transition t = read_transition(load_json_file(file), opt.L);
    if (!std::holds_alternative<N2Map>(t)) throw InputError("f1 expects an n2 map record");
    json rep = base_report("f1", "pass");
    rep["map"] = write_map(f1_functor(std::get<N2Map>(t)));
    return emit(rep, 0);
}

int run_f2(const std::string& file, const Options& opt) {
    const Transition t = read_transition(load_json_file(file), opt.L);
    if (!std::holds_alternative<N1Map>(t)) throw InputError("f2 expects an n1 map record");
    json rep = base_report("f2", "pass");
    rep["map"] = write_map(f2_functor(std::get<N1Map>(t)));
    return emit(rep, 0);
}

// Shared by classify-sphere and uniformize; the latter also reports the
// canonical model and, on request, writes the two coordinate changes.
int run_uniformize(const std::string& command, const std::string& file,
                   const std::string& emit_path, const Options& opt) {
    const json input = load_json_file(file);
    UniformizationResult r;
    if (detail::has_member(input, "cover")) {
        r = uniformize_sphere(read_atlas(input, opt.L));
    } else {
        const Transition t = read_transition(input, opt.L);
        if (!std::holds_alternative<N2Map>(t))
            throw InputError(command + " expects an n2 map record or a sphere atlas");
        r = uniformize_sphere(std::get<N2Map>(t));
    }
    const bool ok = r.residual <= opt.tol;
    json rep = base_report(command, ok ? "pass" : "fail");
    rep["degree"] = r.degree;
    rep["residual"] = r.residual;
    rep["tol"] = opt.tol;
    if (!emit_path.empty()) {
        json changes = json::object();
        changes["degree"] = r.degree;
        changes["nor_change"] = write_map(r.nor_change);
        changes["sou_change"] = write_map(r.sou_change);
        changes["canonical"] = write_map(r.canonical.transition);
        std::ofstream out(emit_path);
        if (!out) throw InputError("cannot write output file: " + emit_path);
        out << changes.dump(2) << "\n";
        rep["changes_written"] = emit_path;
    }
    return emit(rep, ok ? 0 : 1);
}

int run_torus_check(const std::string& file, const Options& opt) {
    const ThetaType t = read_theta_type(load_json_file(file));
    const int chern = validate_theta_type(t);
    const TorusStructure s = make_supertorus(t);
    const CocycleReport cocycle = check_atlas_cocycle(torus_atlas(s));
    const bool ok = cocycle.pass(opt.tol);
    json rep = base_report("torus-check", ok ? "pass" : "fail");
    rep["chern"] = chern;
    rep["trivial"] = is_trivial_type(t);
    rep["cocycle_residual"] = cocycle.max_residual();
    rep["tol"] = opt.tol;
    return emit(rep, ok ? 0 : 1);
}

int run_torus_equiv(const std::string& file_a, const std::string& file_b) {
    const ThetaType a = read_theta_type(load_json_file(file_a));
    const ThetaType b = read_theta_type(load_json_file(file_b));
    const int chern_a = validate_theta_type(a);
    const int chern_b = validate_theta_type(b);
    const bool eq = types_equivalent(a, b);
    json rep = base_report("torus-equiv", eq ? "pass" : "fail");
    rep["equivalent"] = eq;
    rep["chern_difference"] = chern_a - chern_b;
    return emit(rep, eq ? 0 : 1);
}

int run_ns_verify(const std::string& family, int max_n, const Options& opt) {
    NsFamily fam = NsFamily::n1;
    if (family == "n1")
        fam = NsFamily::n1;
    else if (family == "n1-extended")
        fam = NsFamily::n1_extended;
    else if (family == "n2-nonhomogeneous")
        fam = NsFamily::n2_nonhomogeneous;
    else if (family == "n2-homogeneous")
        fam = NsFamily::n2_homogeneous;
    else
        throw InputError("unknown family \"" + family +
                         "\" (expected n1, n1-extended, n2-nonhomogeneous, or n2-homogeneous)");
    if (max_n < 0) throw InputError("--max-n must be nonnegative");
    const NsReport r = verify_ns_relations(fam, max_n, opt.tol);
    const bool ok = r.pass();
    json rep = base_report("ns-verify", ok ? "pass" : "fail");
    rep["family"] = family_name(fam);
    rep["max_n"] = r.max_n;
    rep["checked"] = r.checked;
    rep["worst"] = r.worst;
    if (!ok) {
        json arr = json::array();
        for (const NsMismatch& m : r.mismatches) {
            json entry = json::object();
            entry["relation"] = m.label;
            entry["computed"] = m.computed;
            entry["expected"] = m.expected;
            entry["residual"] = m.residual;
            arr.push_back(std::move(entry));
        }
        rep["mismatches"] = std::move(arr);
    }
    return emit(rep, ok ? 0 : 1);
}

int run_loop_exp(const std::string& file, const Options& opt) {
    const LoopData d = read_loop_data(load_json_file(file), opt.L);
    const N2Map m = loop_exponential(d.coeffs, d.a0);
    const double residual = superconformal_residual(m);
    const bool ok = residual <= opt.tol;
    json rep = base_report("loop-exp", ok ? "pass" : "fail");
    rep["residual"] = residual;
    rep["tol"] = opt.tol;
    rep["map"] = write_map(m);
    return emit(rep, ok ? 0 : 1);
}

// Every library error surfaces as a report naming the operation; obstruction
// data keeps its hole powers so callers can react without parsing prose.
int dispatch(const std::string& command, const std::function<int()>& body) {
    try {
        return body();
    } catch (const CechObstruction& e) {
        json rep = base_report(command, "obstructed");
        rep["error"] = e.what();
        json holes = json::array();
        for (int n : e.hole_powers()) holes.push_back(n);
        rep["hole_powers"] = std::move(holes);
        return emit(rep, 1);
    } catch (const InconsistentType& e) {
        json rep = base_report(command, "fail");
        rep["error"] = e.what();
        return emit(rep, 1);
    } catch (const std::exception& e) {
        json rep = base_report(command, "error");
        rep["error"] = e.what();
        return emit(rep, 2);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact arithmetic for superconformal structures on the sphere and torus"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--tol", opt.tol, "residual tolerance for pass/fail decisions")
        ->capture_default_str();
    app.add_option("--L", opt.L, "override the Grassmann generator count for inputs without one");
    app.add_option("--samples", opt.samples, "sample count for pointwise residuals")
        ->capture_default_str();

    std::string file_a, file_b, emit_path, family = "n1";
    int max_n = 2;

    CLI::App* verify =
        app.add_subcommand("verify-superconformal", "check the defining first-order condition");
    verify->add_option("map", file_a, "map record (JSON file)")->required();

    CLI::App* comp = app.add_subcommand("compose", "compose two maps of the same kind");
    comp->add_option("outer", file_a, "outer map record")->required();
    comp->add_option("inner", file_b, "inner map record")->required();

    CLI::App* f1 = app.add_subcommand("f1", "forget an n2 map down to its n1 data");
    f1->add_option("map", file_a, "n2 map record")->required();

    CLI::App* f2 = app.add_subcommand("f2", "enrich an n1 map to its n2 counterpart");
    f2->add_option("map", file_a, "n1 map record")->required();

    CLI::App* classify =
        app.add_subcommand("classify-sphere", "compute the degree of a two-chart sphere");
    classify->add_option("atlas", file_a, "sphere atlas or transition record")->required();

    CLI::App* unif =
        app.add_subcommand("uniformize", "reduce a two-chart sphere to its canonical model");
    unif->add_option("atlas", file_a, "sphere atlas or transition record")->required();
    unif->add_option("--emit-changes", emit_path, "write the coordinate changes to this file");

    CLI::App* tcheck =
        app.add_subcommand("torus-check", "validate a multiplier type and its torus cocycle");
    tcheck->add_option("type", file_a, "multiplier type (JSON file)")->required();

    CLI::App* tequiv = app.add_subcommand("torus-equiv", "decide equivalence of two supertori");
    tequiv->add_option("first", file_a, "first multiplier type")->required();
    tequiv->add_option("second", file_b, "second multiplier type")->required();

    CLI::App* ns = app.add_subcommand("ns-verify", "verify superalgebra relation tables");
    ns->add_option("--family", family, "n1, n1-extended, n2-nonhomogeneous, or n2-homogeneous")
        ->capture_default_str();
    ns->add_option("--max-n", max_n, "verify indices with |n| up to this bound")
        ->capture_default_str();

    CLI::App* loop = app.add_subcommand("loop-exp", "exponentiate scale-action coefficients");
    loop->add_option("coeffs", file_a, "exponent data (JSON file)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    if (verify->parsed())
        return dispatch("verify-superconformal", [&] { return run_verify(file_a, opt); });
    if (comp->parsed())
        return dispatch("compose", [&] { return run_compose(file_a, file_b, opt); });
    if (f1->parsed()) return dispatch("f1", [&] { return run_f1(file_a, opt); });
    if (f2->parsed()) return dispatch("f2", [&] { return run_f2(file_a, opt); });
    if (classify->parsed())
        return dispatch("classify-sphere",
                        [&] { return run_uniformize("classify-sphere", file_a, "", opt); });
    if (unif->parsed())
        return dispatch("uniformize",
                        [&] { return run_uniformize("uniformize", file_a, emit_path, opt); });
    if (tcheck->parsed()) return dispatch("torus-check", [&] { return run_torus_check(file_a, opt); });
    if (tequiv->parsed())
        return dispatch("torus-equiv", [&] { return run_torus_equiv(file_a, file_b); });
    if (ns->parsed()) return dispatch("ns-verify", [&] { return run_ns_verify(family, max_n, opt); });
    if (loop->parsed()) return dispatch("loop-exp", [&] { return run_loop_exp(file_a, opt); });
    return 2;
}
