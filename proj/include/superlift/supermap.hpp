#pragma once

#include <vector>

#include "superlift/superfield.hpp"

namespace superlift {

// ---- N=1 superanalytic maps -----------------------------------------------

// H(z, theta) = (f + theta xi, psi + theta g).
struct N1Map {
    ComponentFunction f, xi, psi, g;

    int generators() const { return f.generators(); }
};

// ---- N=2 superconformal maps ----------------------------------------------

enum class N2Coords { homogeneous, nonhomogeneous };

// Superconformal map determined by its data functions.  In homogeneous
// coordinates the slots (psi_a, psi_b, g_a, g_b) are (psi+, psi-, g+, g-);
// in nonhomogeneous coordinates they are (psi_1, psi_2, g_1, g_2).
struct N2Map {
    N2Coords coords = N2Coords::homogeneous;
    ComponentFunction f, psi_a, psi_b, g_a, g_b;

    int generators() const { return f.generators(); }
};

namespace detail {

inline int cf_top_generator(const ComponentFunction& f) {
    int top = 0;
    for (const auto& t : f.terms())
        for (const auto& [n, c] : t.poly) top = std::max(top, c.top_generator());
    return top;
}

inline void check_slot(const ComponentFunction& f, int L, Parity p, int max_top,
                       const char* what) {
    if (f.generators() != L) throw SizeMismatch("map slots use different generator counts");
    if (!f.is_zero() && f.parity() != p) throw ParityError(what);
    if (f.is_sampled()) return; // sampled slots carry no inspectable coefficients
    if (cf_top_generator(f) > max_top)
        throw InputError("map coefficients must avoid the reserved top generators");
}

} // namespace detail

// Coefficients of an N=1 map may use at most the first L-1 generators.
inline N1Map make_n1_map(ComponentFunction f, ComponentFunction xi, ComponentFunction psi,
                         ComponentFunction g) {
    const int L = f.generators();
    detail::check_slot(f, L, Parity::even, L - 1, "f must be even");
    detail::check_slot(xi, L, Parity::odd, L - 1, "xi must be odd");
    detail::check_slot(psi, L, Parity::odd, L - 1, "psi must be odd");
    detail::check_slot(g, L, Parity::even, L - 1, "g must be even");
    return N1Map{std::move(f), std::move(xi), std::move(psi), std::move(g)};
}

// Coefficients of an N=2 map may use at most the first L-2 generators.
inline N2Map make_n2_map(N2Coords coords, ComponentFunction f, ComponentFunction psi_a,
                         ComponentFunction psi_b, ComponentFunction g_a, ComponentFunction g_b) {
    const int L = f.generators();
    detail::check_slot(f, L, Parity::even, L - 2, "f must be even");
    detail::check_slot(psi_a, L, Parity::odd, L - 2, "psi slots must be odd");
    detail::check_slot(psi_b, L, Parity::odd, L - 2, "psi slots must be odd");
    detail::check_slot(g_a, L, Parity::even, L - 2, "g slots must be even");
    detail::check_slot(g_b, L, Parity::even, L - 2, "g slots must be even");
    return N2Map{coords, std::move(f), std::move(psi_a), std::move(psi_b), std::move(g_a),
                 std::move(g_b)};
}

// ---- expansion into superfields -------------------------------------------

struct FieldPair {
    SuperField z_out, theta_out;
};

struct FieldTriple {
    SuperField z_out, theta_a, theta_b;
};

inline FieldPair expand(const N1Map& h) {
    const int L = h.generators();
    FieldPair p{SuperField(L, 1, Parity::even), SuperField(L, 1, Parity::odd)};
    p.z_out.set_coeff(0, h.f);
    p.z_out.set_coeff(1, h.xi);
    p.theta_out.set_coeff(0, h.psi);
    p.theta_out.set_coeff(1, h.g);
    return p;
}

inline FieldTriple expand(const N2Map& h) {
    const int L = h.generators();
    FieldTriple t{SuperField(L, 2, Parity::even), SuperField(L, 2, Parity::odd),
                  SuperField(L, 2, Parity::odd)};
    if (h.coords == N2Coords::homogeneous) {
        // z~ = f + th+ g+ psi- + th- g- psi+ + th+ th- (psi+ psi-)'
        t.z_out.set_coeff(0, h.f);
        t.z_out.set_coeff(1, h.g_a * h.psi_b);
        t.z_out.set_coeff(2, h.g_b * h.psi_a);
        t.z_out.set_coeff(3, (h.psi_a * h.psi_b).derivative());
        // th~+- = psi+- + th+- g+- +- th+ th- (psi+-)'
        t.theta_a.set_coeff(0, h.psi_a);
        t.theta_a.set_coeff(1, h.g_a);
        t.theta_a.set_coeff(3, h.psi_a.derivative());
        t.theta_b.set_coeff(0, h.psi_b);
        t.theta_b.set_coeff(2, h.g_b);
        t.theta_b.set_coeff(3, h.psi_b.derivative() * cplx{-1.0});
    } else {
        // z~ = f + th1 (g1 psi1 + g2 psi2) + th2 (g1 psi2 - g2 psi1)
        //        - th1 th2 (psi1 psi2)'
        t.z_out.set_coeff(0, h.f);
        t.z_out.set_coeff(1, h.g_a * h.psi_a + h.g_b * h.psi_b);
        t.z_out.set_coeff(2, h.g_a * h.psi_b - h.g_b * h.psi_a);
        t.z_out.set_coeff(3, (h.psi_a * h.psi_b).derivative() * cplx{-1.0});
        // th~1 = psi1 + th1 g1 - th2 g2 + th1 th2 (psi2)'
        t.theta_a.set_coeff(0, h.psi_a);
        t.theta_a.set_coeff(1, h.g_a);
        t.theta_a.set_coeff(2, h.g_b * cplx{-1.0});
        t.theta_a.set_coeff(3, h.psi_b.derivative());
        // th~2 = psi2 + th1 g2 + th2 g1 - th1 th2 (psi1)'
        t.theta_b.set_coeff(0, h.psi_b);
        t.theta_b.set_coeff(1, h.g_b);
        t.theta_b.set_coeff(2, h.g_a);
        t.theta_b.set_coeff(3, h.psi_a.derivative() * cplx{-1.0});
    }
    return t;
}

// ---- superconformal conditions --------------------------------------------

// Residual of the defining first-order condition, coefficientwise.
inline double superconformal_residual(const N2Map& h) {
    ComponentFunction rhs = h.coords == N2Coords::homogeneous
                                ? h.psi_a.derivative() * h.psi_b - h.psi_a * h.psi_b.derivative() +
                                      h.g_a * h.g_b
                                : h.g_a * h.g_a + h.g_b * h.g_b - h.psi_a * h.psi_a.derivative() -
                                      h.psi_b * h.psi_b.derivative();
    return (h.f.derivative() - rhs).max_coeff_abs();
}

// Residual of  xi = g psi  and  f' = g^2 - psi psi'.
inline double n1_superconformal_residual(const N1Map& h) {
    const double r1 = (h.xi - h.g * h.psi).max_coeff_abs();
    const double r2 = (h.f.derivative() - h.g * h.g + h.psi * h.psi.derivative()).max_coeff_abs();
    return std::max(r1, r2);
}

// The superconformal data with g = sqrt(f' + psi psi'), xi = g psi.
inline N1Map build_n1_superconformal(const ComponentFunction& f, const ComponentFunction& psi,
                                     SqrtBranch branch = SqrtBranch::principal) {
    const ComponentFunction g = sqrt_fn(f.derivative() + psi * psi.derivative(), branch);
    return N1Map{f, g * psi, psi, g};
}

// ---- coordinate conversions (homogeneous <-> nonhomogeneous) --------------

inline N2Map to_nonhomogeneous(const N2Map& h) {
    if (h.coords == N2Coords::nonhomogeneous) return h;
    const cplx inv_rt2 = 1.0 / std::numbers::sqrt2;
    N2Map out;
    out.coords = N2Coords::nonhomogeneous;
    out.f = h.f;
    // psi_1 = (psi+ + psi-) / sqrt(2),  psi_2 = -i (psi+ - psi-) / sqrt(2)
    out.psi_a = (h.psi_a + h.psi_b) * inv_rt2;
    out.psi_b = (h.psi_a - h.psi_b) * (cplx{0.0, -1.0} * inv_rt2);
    // g_1 = (g+ + g-) / 2,  g_2 = -i (g+ - g-) / 2
    out.g_a = (h.g_a + h.g_b) * cplx{0.5};
    out.g_b = (h.g_a - h.g_b) * cplx{0.0, -0.5};
    return out;
}

inline N2Map to_homogeneous(const N2Map& h) {
    if (h.coords == N2Coords::homogeneous) return h;
    const cplx inv_rt2 = 1.0 / std::numbers::sqrt2;
    N2Map out;
    out.coords = N2Coords::homogeneous;
    out.f = h.f;
    // psi+- = (psi_1 +- i psi_2) / sqrt(2),  g+- = g_1 +- i g_2
    out.psi_a = (h.psi_a + h.psi_b * cplx{0.0, 1.0}) * inv_rt2;
    out.psi_b = (h.psi_a - h.psi_b * cplx{0.0, 1.0}) * inv_rt2;
    out.g_a = h.g_a + h.g_b * cplx{0.0, 1.0};
    out.g_b = h.g_a - h.g_b * cplx{0.0, 1.0};
    return out;
}

// ---- composition ----------------------------------------------------------

namespace detail {

inline FieldTriple substitute_triple(const FieldTriple& outer, const FieldTriple& inner) {
    const std::vector<SuperField> odd{inner.theta_a, inner.theta_b};
    FieldTriple out;
    out.z_out = sf_substitute(outer.z_out, inner.z_out, odd);
    out.theta_a = sf_substitute(outer.theta_a, inner.z_out, odd);
    out.theta_b = sf_substitute(outer.theta_b, inner.z_out, odd);
    return out;
}

// Read superconformal data back off a field triple in display shape.
inline N2Map extract_n2(const FieldTriple& t, N2Coords coords) {
    N2Map out;
    out.coords = coords;
    out.f = t.z_out.coeff(0);
    out.psi_a = t.theta_a.coeff(0);
    out.psi_b = t.theta_b.coeff(0);
    if (coords == N2Coords::homogeneous) {
        out.g_a = t.theta_a.coeff(1);
        out.g_b = t.theta_b.coeff(2);
    } else {
        out.g_a = t.theta_a.coeff(1);
        out.g_b = t.theta_b.coeff(1);
    }
    return out;
}

} // namespace detail

// h1(h2(.)); both maps must use the same coordinate system.
inline N2Map compose(const N2Map& h1, const N2Map& h2) {
    if (h1.coords != h2.coords)
        throw InputError("composition requires a common coordinate system");
    const FieldTriple t = detail::substitute_triple(expand(h1), expand(h2));
    return detail::extract_n2(t, h1.coords);
}

inline N1Map compose(const N1Map& h1, const N1Map& h2) {
    const FieldPair p1 = expand(h1), p2 = expand(h2);
    const std::vector<SuperField> odd{p2.theta_out};
    const SuperField z_new = sf_substitute(p1.z_out, p2.z_out, odd);
    const SuperField th_new = sf_substitute(p1.theta_out, p2.z_out, odd);
    return N1Map{z_new.coeff(0), z_new.coeff(1), th_new.coeff(0), th_new.coeff(1)};
}

// ---- inversion ------------------------------------------------------------

namespace detail {

inline FieldTriple identity_triple(int L) {
    FieldTriple t{SuperField(L, 2, Parity::even), SuperField(L, 2, Parity::odd),
                  SuperField(L, 2, Parity::odd)};
    t.z_out.set_coeff(0, ComponentFunction::identity_z(L));
    t.theta_a.set_coeff(1, ComponentFunction::constant(L, GrassmannNumber(L, 1.0)));
    t.theta_b.set_coeff(2, ComponentFunction::constant(L, GrassmannNumber(L, 1.0)));
    return t;
}

inline double triple_deviation(const FieldTriple& t, const FieldTriple& ref) {
    return std::max({(t.z_out - ref.z_out).max_coeff_abs(),
                     (t.theta_a - ref.theta_a).max_coeff_abs(),
                     (t.theta_b - ref.theta_b).max_coeff_abs()});
}

inline FieldTriple triple_reflect(const FieldTriple& id, const FieldTriple& p) {
    FieldTriple c;
    c.z_out = id.z_out * cplx{2.0} - p.z_out;
    c.theta_a = id.theta_a * cplx{2.0} - p.theta_a;
    c.theta_b = id.theta_b * cplx{2.0} - p.theta_b;
    return c;
}

// Inverse of the body part of f, for f body affine or c/z.
inline ComponentFunction body_inverse(const ComponentFunction& f) {
    const int L = f.generators();
    const BodyCore core = classify_body_core(body_projection(f));
    if (core.kind == BodyCore::reciprocal_z)
        return ComponentFunction::monomial(L, Parity::even, -1, GrassmannNumber(L, core.a));
    if (core.a == 0.0) throw NonInvertible("body of f is constant");
    return ComponentFunction::laurent(
        L, Parity::even,
        {{1, GrassmannNumber(L, 1.0 / core.a)}, {0, GrassmannNumber(L, -core.b / core.a)}});
}

} // namespace detail

// Inverse map K with h(K(.)) = id, by nilpotent Newton iteration on field
// triples; the body of f must be affine or c/z.
inline N2Map invert(const N2Map& h) {
    const int L = h.generators();
    ComponentFunction f0inv = detail::body_inverse(h.f);
    N2Map k0;
    k0.coords = h.coords;
    k0.f = f0inv;
    k0.psi_a = ComponentFunction::zero(L, Parity::odd);
    k0.psi_b = ComponentFunction::zero(L, Parity::odd);
    if (h.coords == N2Coords::homogeneous) {
        k0.g_a = reciprocal(compose(h.g_a, f0inv));
        k0.g_b = reciprocal(compose(h.g_b, f0inv));
    } else {
        // invert the body rotation (g1 + i g2)(g1 - i g2) = g1^2 + g2^2
        const ComponentFunction gp = compose(h.g_a + h.g_b * cplx{0.0, 1.0}, f0inv);
        const ComponentFunction gm = compose(h.g_a - h.g_b * cplx{0.0, 1.0}, f0inv);
        const ComponentFunction rp = reciprocal(gp), rm = reciprocal(gm);
        k0.g_a = (rp + rm) * cplx{0.5};
        k0.g_b = (rp - rm) * cplx{0.0, -0.5};
    }
    const FieldTriple id = detail::identity_triple(L);
    const FieldTriple ht = expand(h);
    FieldTriple k = expand(k0);
    for (int it = 0; it < 10; ++it) {
        const FieldTriple p = detail::substitute_triple(ht, k);
        if (detail::triple_deviation(p, id) < 1e-13) break;
        k = detail::substitute_triple(k, detail::triple_reflect(id, p));
    }
    {
        const FieldTriple p = detail::substitute_triple(ht, k);
        if (detail::triple_deviation(p, id) > kResidualTol)
            throw NonInvertible("inverse iteration did not converge");
    }
    return detail::extract_n2(k, h.coords);
}

// ---- the correspondence with N=1 superanalytic maps -----------------------

// Forgetful direction: (f, psi+-, g+-) -> (f + psi+ psi-, 2 g+ psi-, psi+, g+).
inline N1Map f1_functor(const N2Map& h_in) {
    const N2Map h = to_homogeneous(h_in);
    N1Map out;
    out.f = h.f + h.psi_a * h.psi_b;
    out.xi = (h.g_a * h.psi_b) * cplx{2.0};
    out.psi = h.psi_a;
    out.g = h.g_a;
    return out;
}

// Enriching direction; g must have an invertible (monomial) body and the
// data must fit the two-generators-reserved coefficient subalgebra.
inline N2Map f2_functor(const N1Map& h) {
    const int L = h.generators();
    for (const ComponentFunction* slot : {&h.f, &h.xi, &h.psi, &h.g})
        if (!slot->is_sampled() && detail::cf_top_generator(*slot) > L - 2)
            throw InputError("enriching a map requires coefficients clear of the top two generators");
    const ComponentFunction ginv = reciprocal(h.g);
    N2Map out;
    out.coords = N2Coords::homogeneous;
    out.f = h.f - (h.psi * h.xi * ginv) * cplx{0.5};
    out.g_a = h.g;
    out.g_b = h.f.derivative() * ginv - h.psi.derivative() * h.xi * (ginv * ginv);
    out.psi_a = h.psi;
    out.psi_b = (h.xi * ginv) * cplx{0.5};
    return out;
}

// ---- residual helpers ------------------------------------------------------

inline double data_distance(const N2Map& a, const N2Map& b) {
    if (a.coords != b.coords) throw InputError("comparing maps in different coordinates");
    return std::max({(a.f - b.f).max_coeff_abs(), (a.psi_a - b.psi_a).max_coeff_abs(),
                     (a.psi_b - b.psi_b).max_coeff_abs(), (a.g_a - b.g_a).max_coeff_abs(),
                     (a.g_b - b.g_b).max_coeff_abs()});
}

inline double data_distance(const N1Map& a, const N1Map& b) {
    return std::max({(a.f - b.f).max_coeff_abs(), (a.xi - b.xi).max_coeff_abs(),
                     (a.psi - b.psi).max_coeff_abs(), (a.g - b.g).max_coeff_abs()});
}

inline double sample_data_distance(const N2Map& a, const N2Map& b, int samples = 32,
                                   double radius = 1.0) {
    if (a.coords != b.coords) throw InputError("comparing maps in different coordinates");
    return std::max({sample_distance(a.f, b.f, samples, radius),
                     sample_distance(a.psi_a, b.psi_a, samples, radius),
                     sample_distance(a.psi_b, b.psi_b, samples, radius),
                     sample_distance(a.g_a, b.g_a, samples, radius),
                     sample_distance(a.g_b, b.g_b, samples, radius)});
}

inline N2Map identity_n2(int L, N2Coords coords) {
    N2Map out;
    out.coords = coords;
    out.f = ComponentFunction::identity_z(L);
    out.psi_a = ComponentFunction::zero(L, Parity::odd);
    out.psi_b = ComponentFunction::zero(L, Parity::odd);
    out.g_a = ComponentFunction::constant(L, GrassmannNumber(L, 1.0));
    out.g_b = ComponentFunction::constant(L, GrassmannNumber(L, 1.0));
    return out;
}

inline N1Map identity_n1(int L) {
    N1Map out;
    out.f = ComponentFunction::identity_z(L);
    out.xi = ComponentFunction::zero(L, Parity::odd);
    out.psi = ComponentFunction::zero(L, Parity::odd);
    out.g = ComponentFunction::constant(L, GrassmannNumber(L, 1.0));
    return out;
}

} // namespace superlift
