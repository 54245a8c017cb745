#pragma once

// JSON encoding for the library's value types and the file formats the
// command-line driver exchanges: Grassmann numbers, component functions,
// superconformal map records, atlases, multiplier types, and the exponent
// data of scale actions.
//
// Wire conventions
//   - complex scalars are {"re": x, "im": y}; a bare number is accepted on
//     input as a real value;
//   - a Grassmann number is {"L": n, "terms": [{"idx": [i1 < i2 < ...],
//     "re": x, "im": y}, ...]} with 1-based, strictly increasing generator
//     indices and no repeated subset;
//   - a component function is one of the variants "laurent" (power ->
//     coefficient map), "exp_affine" (scale * e^{rate z} * prefactor), or
//     "exp_sum" (a list of {rate, poly} terms);
//   - a map record carries "kind" ("n1" or "n2"), "L", for n2 a "coords"
//     field, and one function per component slot;
//   - an atlas is {"cover": ..., "tau": ..., "transitions": {...}}.
//
// Readers throw InputError carrying a JSON-path context for every schema
// violation; loaders report the line and column of malformed JSON text.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "superlift/torus.hpp"

namespace superlift {

using json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void fail_json(const std::string& ctx, const std::string& what) {
    throw InputError(ctx + ": " + what);
}

inline bool has_member(const json& j, const char* key) {
    return j.is_object() && j.find(key) != j.end();
}

inline const json& expect_object(const json& j, const std::string& ctx) {
    if (!j.is_object()) fail_json(ctx, "expected an object");
    return j;
}

inline const json& expect_array(const json& j, const std::string& ctx) {
    if (!j.is_array()) fail_json(ctx, "expected an array");
    return j;
}

inline const json& expect_member(const json& j, const char* key, const std::string& ctx) {
    expect_object(j, ctx);
    const auto it = j.find(key);
    if (it == j.end()) fail_json(ctx, "missing field \"" + std::string(key) + "\"");
    return it.value();
}

inline double expect_number(const json& j, const std::string& ctx) {
    if (!j.is_number()) fail_json(ctx, "expected a number");
    return j.get<double>();
}

inline int expect_integer(const json& j, const std::string& ctx) {
    if (!j.is_number_integer()) fail_json(ctx, "expected an integer");
    return j.get<int>();
}

inline std::string expect_string(const json& j, const std::string& ctx) {
    if (!j.is_string()) fail_json(ctx, "expected a string");
    return j.get<std::string>();
}

inline double optional_number(const json& j, const char* key, const std::string& ctx) {
    if (!has_member(j, key)) return 0.0;
    return expect_number(j[key], ctx + "." + key);
}

inline int parse_power_key(const std::string& key, const std::string& ctx) {
    int value = 0;
    const char* last = key.data() + key.size();
    const auto [ptr, ec] = std::from_chars(key.data(), last, value);
    if (ec != std::errc{} || ptr != last)
        fail_json(ctx, "key \"" + key + "\" is not an integer power");
    return value;
}

}  // namespace detail

// ---- complex scalars -------------------------------------------------------

inline json write_complex(cplx z) {
    json out = json::object();
    out["re"] = z.real();
    out["im"] = z.imag();
    return out;
}

inline cplx read_complex(const json& j, const std::string& ctx = "$") {
    if (j.is_number()) return cplx{j.get<double>(), 0.0};
    detail::expect_object(j, ctx);
    return cplx{detail::optional_number(j, "re", ctx), detail::optional_number(j, "im", ctx)};
}

// ---- Grassmann numbers -----------------------------------------------------

inline json write_grassmann(const GrassmannNumber& g) {
    json out = json::object();
    out["L"] = g.generators();
    json terms = json::array();
    for (const auto& [mask, c] : g.terms()) {
        json term = json::object();
        json idx = json::array();
        for (int b = 0; b < GrassmannNumber::max_generators; ++b)
            if (mask & (uint32_t{1} << b)) idx.push_back(b + 1);
        term["idx"] = std::move(idx);
        term["re"] = c.real();
        term["im"] = c.imag();
        terms.push_back(std::move(term));
    }
    out["terms"] = std::move(terms);
    return out;
}

inline GrassmannNumber read_grassmann(const json& j, const std::string& ctx = "$") {
    detail::expect_object(j, ctx);
    const int L = detail::expect_integer(detail::expect_member(j, "L", ctx), ctx + ".L");
    if (L < 0 || L > GrassmannNumber::max_generators)
        detail::fail_json(ctx + ".L", "generator count must lie in [0, " +
                                          std::to_string(GrassmannNumber::max_generators) + "]");
    GrassmannNumber out(L);
    const json& terms =
        detail::expect_array(detail::expect_member(j, "terms", ctx), ctx + ".terms");
    std::set<uint32_t> seen;
    for (size_t i = 0; i < terms.size(); ++i) {
        const std::string here = ctx + ".terms[" + std::to_string(i) + "]";
        const json& t = detail::expect_object(terms[i], here);
        const json& idx = detail::expect_array(detail::expect_member(t, "idx", here), here + ".idx");
        uint32_t mask = 0;
        int prev = 0;
        for (size_t k = 0; k < idx.size(); ++k) {
            const int g = detail::expect_integer(idx[k], here + ".idx[" + std::to_string(k) + "]");
            if (g < 1 || g > L) detail::fail_json(here + ".idx", "generator index out of range");
            if (g <= prev) detail::fail_json(here + ".idx", "indices must be strictly increasing");
            prev = g;
            mask |= uint32_t{1} << (g - 1);
        }
        if (!seen.insert(mask).second) detail::fail_json(here, "duplicate generator subset");
        out.add_term(mask, cplx{detail::optional_number(t, "re", here),
                                detail::optional_number(t, "im", here)});
    }
    return out;
}

// ---- component functions ---------------------------------------------------

namespace detail {

inline std::map<int, GrassmannNumber> read_poly(const json& j, int L, const std::string& ctx) {
    expect_object(j, ctx);
    std::map<int, GrassmannNumber> out;
    for (const auto& [key, value] : j.items()) {
        const std::string here = ctx + "." + key;
        const int n = parse_power_key(key, ctx);
        GrassmannNumber c = read_grassmann(value, here);
        if (c.generators() != L)
            fail_json(here, "generator count differs from the enclosing record");
        if (!c.is_zero()) out.emplace(n, std::move(c));
    }
    return out;
}

inline json write_poly(const std::map<int, GrassmannNumber>& poly) {
    json out = json::object();
    for (const auto& [n, c] : poly) out[std::to_string(n)] = write_grassmann(c);
    return out;
}

// A rate may be written either as a complex scalar or as an even Grassmann
// number whose soul is folded into the polynomial part on construction.
inline GrassmannNumber read_rate(const json& j, int L, const std::string& ctx) {
    if (has_member(j, "L")) {
        GrassmannNumber r = read_grassmann(j, ctx);
        if (r.generators() != L) fail_json(ctx, "generator count differs from the enclosing record");
        if (!r.is_even()) fail_json(ctx, "exponential rate must be even");
        return r;
    }
    return GrassmannNumber(L, read_complex(j, ctx));
}

}  // namespace detail

inline ComponentFunction read_function(const json& j, int L, Parity parity,
                                       const std::string& ctx = "$") {
    detail::expect_object(j, ctx);
    const std::string variant =
        detail::expect_string(detail::expect_member(j, "variant", ctx), ctx + ".variant");
    const GrassmannNumber one(L, 1.0);
    if (variant == "laurent") {
        auto poly = detail::read_poly(detail::expect_member(j, "coeffs", ctx), L, ctx + ".coeffs");
        return ComponentFunction::laurent(L, parity, std::move(poly));
    }
    if (variant == "exp_affine") {
        const GrassmannNumber rate =
            detail::read_rate(detail::expect_member(j, "rate", ctx), L, ctx + ".rate");
        GrassmannNumber scale = one;
        if (detail::has_member(j, "scale")) {
            scale = read_grassmann(j["scale"], ctx + ".scale");
            if (scale.generators() != L)
                detail::fail_json(ctx + ".scale", "generator count differs from the enclosing record");
        }
        std::map<int, GrassmannNumber> pre{{0, one}};
        if (detail::has_member(j, "prefactor"))
            pre = detail::read_poly(j["prefactor"], L, ctx + ".prefactor");
        std::map<int, GrassmannNumber> poly;
        for (const auto& [n, c] : pre) {
            GrassmannNumber sc = gr_mul(scale, c);
            if (!sc.is_zero()) poly.emplace(n, std::move(sc));
        }
        // The scale rides in a Laurent factor so that odd slots can carry
        // exponential terms; the factory itself accepts only even scales.
        return ComponentFunction::laurent(L, parity, std::move(poly)) *
               ComponentFunction::exp_affine(L, one, rate);
    }
    if (variant == "exp_sum") {
        const json& terms =
            detail::expect_array(detail::expect_member(j, "terms", ctx), ctx + ".terms");
        ComponentFunction out = ComponentFunction::zero(L, parity);
        for (size_t i = 0; i < terms.size(); ++i) {
            const std::string here = ctx + ".terms[" + std::to_string(i) + "]";
            detail::expect_object(terms[i], here);
            const GrassmannNumber rate =
                detail::read_rate(detail::expect_member(terms[i], "rate", here), L, here + ".rate");
            auto poly =
                detail::read_poly(detail::expect_member(terms[i], "poly", here), L, here + ".poly");
            out = out + ComponentFunction::laurent(L, parity, std::move(poly)) *
                            ComponentFunction::exp_affine(L, one, rate);
        }
        return out;
    }
    detail::fail_json(ctx + ".variant", "unknown variant \"" + variant +
                                            "\" (expected laurent, exp_affine, or exp_sum)");
}

inline json write_function(const ComponentFunction& f) {
    if (f.is_sampled()) throw InputError("sampled functions have no exact serial form");
    std::vector<ComponentFunction::Term> terms = f.terms();
    std::sort(terms.begin(), terms.end(),
              [](const ComponentFunction::Term& a, const ComponentFunction::Term& b) {
                  if (a.rate.real() != b.rate.real()) return a.rate.real() < b.rate.real();
                  return a.rate.imag() < b.rate.imag();
              });
    json out = json::object();
    if (terms.empty()) {
        out["variant"] = "laurent";
        out["coeffs"] = json::object();
        return out;
    }
    if (terms.size() == 1 && terms.front().rate == 0.0) {
        out["variant"] = "laurent";
        out["coeffs"] = detail::write_poly(terms.front().poly);
        return out;
    }
    if (terms.size() == 1) {
        const ComponentFunction::Term& t = terms.front();
        out["variant"] = "exp_affine";
        if (t.poly.size() == 1 && t.poly.begin()->first == 0)
            out["scale"] = write_grassmann(t.poly.begin()->second);
        else
            out["prefactor"] = detail::write_poly(t.poly);
        out["rate"] = write_complex(t.rate);
        return out;
    }
    out["variant"] = "exp_sum";
    json arr = json::array();
    for (const ComponentFunction::Term& t : terms) {
        json term = json::object();
        term["rate"] = write_complex(t.rate);
        term["poly"] = detail::write_poly(t.poly);
        arr.push_back(std::move(term));
    }
    out["terms"] = std::move(arr);
    return out;
}

// ---- map records -----------------------------------------------------------

namespace detail {

inline int find_algebra_size(const json& j) {
    if (j.is_object()) {
        const auto it = j.find("L");
        if (it != j.end() && it->is_number_integer()) return it->get<int>();
        for (const auto& [key, value] : j.items()) {
            (void)key;
            const int found = find_algebra_size(value);
            if (found >= 0) return found;
        }
    } else if (j.is_array()) {
        for (const auto& value : j) {
            const int found = find_algebra_size(value);
            if (found >= 0) return found;
        }
    }
    return -1;
}

// Precedence: an explicit "L" field, then the caller's override, then the
// first generator count found anywhere below this node.
inline int resolve_algebra_size(const json& j, int L_hint, const std::string& ctx) {
    if (has_member(j, "L")) return expect_integer(j["L"], ctx + ".L");
    if (L_hint > 0) return L_hint;
    const int found = find_algebra_size(j);
    if (found < 0) fail_json(ctx, "cannot infer the generator count; add an \"L\" field");
    return found;
}

}  // namespace detail

inline json write_map(const N1Map& h) {
    json out = json::object();
    out["kind"] = "n1";
    out["L"] = h.f.generators();
    out["f"] = write_function(h.f);
    out["xi"] = write_function(h.xi);
    out["psi"] = write_function(h.psi);
    out["g"] = write_function(h.g);
    return out;
}

inline json write_map(const N2Map& h) {
    const bool homo = h.coords == N2Coords::homogeneous;
    json out = json::object();
    out["kind"] = "n2";
    out["coords"] = homo ? "homogeneous" : "nonhomogeneous";
    out["L"] = h.f.generators();
    out["f"] = write_function(h.f);
    out[homo ? "psi_plus" : "psi_1"] = write_function(h.psi_a);
    out[homo ? "psi_minus" : "psi_2"] = write_function(h.psi_b);
    out[homo ? "g_plus" : "g_1"] = write_function(h.g_a);
    out[homo ? "g_minus" : "g_2"] = write_function(h.g_b);
    return out;
}

inline json write_transition(const Transition& t) {
    return std::visit([](const auto& h) { return write_map(h); }, t);
}

inline N1Map read_n1_map(const json& j, int L_hint = -1, const std::string& ctx = "$") {
    detail::expect_object(j, ctx);
    const int L = detail::resolve_algebra_size(j, L_hint, ctx);
    auto slot = [&](const char* key, Parity p) {
        return read_function(detail::expect_member(j, key, ctx), L, p, ctx + "." + key);
    };
    ComponentFunction f = slot("f", Parity::even);
    ComponentFunction xi = slot("xi", Parity::odd);
    ComponentFunction psi = slot("psi", Parity::odd);
    ComponentFunction g = slot("g", Parity::even);
    return make_n1_map(std::move(f), std::move(xi), std::move(psi), std::move(g));
}

inline N2Map read_n2_map(const json& j, int L_hint = -1, const std::string& ctx = "$") {
    detail::expect_object(j, ctx);
    const int L = detail::resolve_algebra_size(j, L_hint, ctx);
    const std::string coords =
        detail::expect_string(detail::expect_member(j, "coords", ctx), ctx + ".coords");
    bool homo = true;
    if (coords == "homogeneous")
        homo = true;
    else if (coords == "nonhomogeneous")
        homo = false;
    else
        detail::fail_json(ctx + ".coords", "expected \"homogeneous\" or \"nonhomogeneous\"");
    auto slot = [&](const char* key, Parity p) {
        return read_function(detail::expect_member(j, key, ctx), L, p, ctx + "." + key);
    };
    ComponentFunction f = slot("f", Parity::even);
    ComponentFunction pa = slot(homo ? "psi_plus" : "psi_1", Parity::odd);
    ComponentFunction pb = slot(homo ? "psi_minus" : "psi_2", Parity::odd);
    ComponentFunction ga = slot(homo ? "g_plus" : "g_1", Parity::even);
    ComponentFunction gb = slot(homo ? "g_minus" : "g_2", Parity::even);
    return make_n2_map(homo ? N2Coords::homogeneous : N2Coords::nonhomogeneous, std::move(f),
                       std::move(pa), std::move(pb), std::move(ga), std::move(gb));
}

inline Transition read_transition(const json& j, int L_hint = -1, const std::string& ctx = "$") {
    detail::expect_object(j, ctx);
    if (!detail::has_member(j, "kind") && detail::has_member(j, "map"))
        return read_transition(j["map"], L_hint, ctx + ".map");
    const std::string kind =
        detail::expect_string(detail::expect_member(j, "kind", ctx), ctx + ".kind");
    if (kind == "n1") return Transition{read_n1_map(j, L_hint, ctx)};
    if (kind == "n2") return Transition{read_n2_map(j, L_hint, ctx)};
    detail::fail_json(ctx + ".kind", "expected \"n1\" or \"n2\"");
}

// ---- atlases ---------------------------------------------------------------

inline json write_atlas(const Atlas& a) {
    json out = json::object();
    switch (a.cover) {
        case CoverKind::sphere2: out["cover"] = "sphere2"; break;
        case CoverKind::torus: out["cover"] = "torus"; break;
        case CoverKind::generic: out["cover"] = "generic"; break;
    }
    if (a.cover == CoverKind::torus) out["tau"] = write_complex(a.tau);
    json tr = json::object();
    for (const auto& [key, t] : a.transitions) tr[key] = write_transition(t);
    out["transitions"] = std::move(tr);
    return out;
}

inline Atlas read_atlas(const json& j, int L_hint = -1, const std::string& ctx = "$") {
    detail::expect_object(j, ctx);
    const std::string cover =
        detail::expect_string(detail::expect_member(j, "cover", ctx), ctx + ".cover");
    Atlas out;
    if (cover == "sphere2")
        out.cover = CoverKind::sphere2;
    else if (cover == "torus")
        out.cover = CoverKind::torus;
    else if (cover == "generic")
        out.cover = CoverKind::generic;
    else
        detail::fail_json(ctx + ".cover", "expected \"sphere2\", \"torus\", or \"generic\"");
    if (out.cover == CoverKind::torus)
        out.tau = read_complex(detail::expect_member(j, "tau", ctx), ctx + ".tau");
    else if (detail::has_member(j, "tau"))
        out.tau = read_complex(j["tau"], ctx + ".tau");
    const json& tr =
        detail::expect_object(detail::expect_member(j, "transitions", ctx), ctx + ".transitions");
    for (const auto& [key, value] : tr.items())
        out.transitions.emplace(
            key, read_transition(value, L_hint, ctx + ".transitions[\"" + key + "\"]"));
    return out;
}

// ---- multiplier types ------------------------------------------------------

inline json write_theta_type(const ThetaType& t) {
    json out = json::object();
    out["tau"] = write_complex(t.tau);
    out["a1"] = write_grassmann(t.a1);
    out["a_tau"] = write_grassmann(t.a_tau);
    out["b1"] = write_grassmann(t.b1);
    out["b_tau"] = write_grassmann(t.b_tau);
    return out;
}

inline ThetaType read_theta_type(const json& j, const std::string& ctx = "$") {
    detail::expect_object(j, ctx);
    const cplx tau = read_complex(detail::expect_member(j, "tau", ctx), ctx + ".tau");
    auto slot = [&](const char* key) {
        return read_grassmann(detail::expect_member(j, key, ctx), ctx + "." + key);
    };
    ThetaType out{tau, slot("a1"), slot("a_tau"), slot("b1"), slot("b_tau")};
    const int L = out.a1.generators();
    if (out.a_tau.generators() != L || out.b1.generators() != L || out.b_tau.generators() != L)
        detail::fail_json(ctx, "the four characters must share one generator count");
    return out;
}

// ---- scale-action exponents ------------------------------------------------

struct LoopData {
    GrassmannNumber a0;
    std::map<int, GrassmannNumber> coeffs;
};

inline LoopData read_loop_data(const json& j, int L_hint = -1, const std::string& ctx = "$") {
    detail::expect_object(j, ctx);
    const int L = detail::resolve_algebra_size(j, L_hint, ctx);
    LoopData out{GrassmannNumber(L, 1.0), {}};
    if (detail::has_member(j, "a0")) {
        out.a0 = read_grassmann(j["a0"], ctx + ".a0");
        if (out.a0.generators() != L)
            detail::fail_json(ctx + ".a0", "generator count differs from the enclosing record");
    }
    if (detail::has_member(j, "coeffs"))
        out.coeffs = detail::read_poly(j["coeffs"], L, ctx + ".coeffs");
    return out;
}

// ---- files -----------------------------------------------------------------

inline json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open input file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        size_t line = 1, column = 1;
        const size_t stop = std::min(text.size(), e.byte == 0 ? size_t{0} : size_t(e.byte - 1));
        for (size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::ostringstream msg;
        msg << path << ": invalid JSON at line " << line << ", column " << column;
        throw InputError(msg.str());
    }
}

}  // namespace superlift
