#pragma once

#include <cmath>
#include <utility>

#include "superlift/cech.hpp"

namespace superlift {

// ---- lattice character types ----------------------------------------------

// Values of the two character maps on the lattice generators 1 and tau.  The
// values on a general lattice point m + n*tau follow from the extension laws
//     a_{g+h} = a_g + a_h,
//     b_{g+h} = b_g + b_h + a_g * h   (mod Z on the body, exact on the soul),
// so only the generator data is stored.
struct ThetaType {
    cplx tau;
    GrassmannNumber a1, a_tau, b1, b_tau;
};

namespace detail {

inline void check_type_entries(const ThetaType& t) {
    const int L = t.a1.generators();
    for (const GrassmannNumber* v : {&t.a1, &t.a_tau, &t.b1, &t.b_tau}) {
        if (v->generators() != L)
            throw SizeMismatch("type entries disagree on the generator count");
        if (!v->is_even()) throw ParityError("type entries must be even");
    }
}

inline GrassmannNumber lattice_a(const ThetaType& t, int m, int n) {
    return t.a1 * double(m) + t.a_tau * double(n);
}

// Canonical extension of b along m unit steps followed by n tau steps; other
// step orders differ by integer multiples of the kind the body is reduced by.
inline GrassmannNumber lattice_b(const ThetaType& t, int m, int n) {
    const double cm = 0.5 * double(m) * double(m - 1);
    const double cn = 0.5 * double(n) * double(n - 1);
    return t.b1 * double(m) + t.b_tau * double(n) + t.a1 * cm +
           t.a1 * (t.tau * (double(m) * double(n))) + t.a_tau * (t.tau * cn);
}

inline bool near_integer(cplx v, double tol) {
    return std::abs(v.imag()) <= tol && std::abs(v.real() - double(std::llround(v.real()))) <= tol;
}

inline bool soul_below(const GrassmannNumber& v, double tol) {
    return approx_equal(v, GrassmannNumber(v.generators(), v.body()), tol);
}

} // namespace detail

// First Chern value a_1*tau - a_tau before integrality is enforced.
inline GrassmannNumber chern_field(const ThetaType& t) { return t.a1 * t.tau - t.a_tau; }

// Consistency of the extension laws on the generator pairs.  Extending b over
// g then h or h then g differs by a_g*h - a_h*g, so the extension is
// single-valued exactly when that skew term is a soul-free integer; on the
// generator pairs it equals +/- the Chern number or zero.
inline int validate_theta_type(const ThetaType& t) {
    detail::check_type_entries(t);
    if (!(t.tau.imag() > 0.0))
        throw InputError("lattice parameter needs positive imaginary part");
    const std::pair<int, int> gens[] = {{1, 0}, {0, 1}};
    for (const auto& g1 : gens) {
        for (const auto& g2 : gens) {
            const cplx w1 = double(g1.first) + double(g1.second) * t.tau;
            const cplx w2 = double(g2.first) + double(g2.second) * t.tau;
            const GrassmannNumber skew = detail::lattice_a(t, g1.first, g1.second) * w2 -
                                         detail::lattice_a(t, g2.first, g2.second) * w1;
            if (!detail::soul_below(skew, 1e-9))
                throw InconsistentType("character extension has a soul mismatch");
            if (!detail::near_integer(skew.body(), 1e-9))
                throw InconsistentType("character extension is off by a non-integer");
        }
    }
    return int(std::llround(chern_field(t).body().real()));
}

// A type is trivial when its multipliers come from a single global function
// e^{a z^2 + b z + c}: that forces a_g = (-i/pi) a g exactly and
// b_g = (-i/2pi)(b g + a g^2) up to body integers.  Eliminating a and b
// through the generator equations leaves one discriminant that must land in
// the lattice Z + tau*Z with vanishing soul.
inline bool is_trivial_type(const ThetaType& t) {
    detail::check_type_entries(t);
    if (!approx_equal(t.a_tau, t.a1 * t.tau, 1e-9)) return false;
    const GrassmannNumber disc =
        t.b_tau - t.b1 * t.tau - t.a1 * (0.5 * t.tau * (t.tau - 1.0));
    if (!detail::soul_below(disc, 1e-9)) return false;
    const cplx d = disc.body();
    const double q = d.imag() / t.tau.imag();
    const double p = (d - q * t.tau).real();
    return std::abs(q - double(std::llround(q))) <= 1e-9 &&
           std::abs(p - double(std::llround(p))) <= 1e-9;
}

inline ThetaType add_theta_types(const ThetaType& u, const ThetaType& v) {
    if (std::abs(u.tau - v.tau) > 1e-12)
        throw InputError("types live over different lattices");
    return ThetaType{u.tau, u.a1 + v.a1, u.a_tau + v.a_tau, u.b1 + v.b1, u.b_tau + v.b_tau};
}

inline ThetaType negate_theta_type(const ThetaType& t) {
    return ThetaType{t.tau, t.a1 * cplx{-1.0}, t.a_tau * cplx{-1.0}, t.b1 * cplx{-1.0},
                     t.b_tau * cplx{-1.0}};
}

inline bool types_equivalent(const ThetaType& u, const ThetaType& v) {
    if (std::abs(u.tau - v.tau) > 1e-12) return false;
    return is_trivial_type(add_theta_types(u, negate_theta_type(v)));
}

// Common examples: the multiplier system of the classical theta series, and
// the half-period type whose scales are the signs of a spin structure.
inline ThetaType jacobi_theta_type(int L, cplx tau) {
    return ThetaType{tau, GrassmannNumber(L, 0.0), GrassmannNumber(L, -1.0),
                     GrassmannNumber(L, 0.0), GrassmannNumber(L, -0.5 * tau)};
}

inline ThetaType spin_theta_type(int L, cplx tau) {
    return ThetaType{tau, GrassmannNumber(L, 0.0), GrassmannNumber(L, 0.0),
                     GrassmannNumber(L, 0.0), GrassmannNumber(L, 0.5)};
}

// ---- structures over the quotient torus -----------------------------------

// Generator translations (z + g, theta+ * e^{2 pi i (a_g z + b_g)},
// theta- * e^{-2 pi i (a_g z + b_g)}) stored together with their type.
struct TorusStructure {
    ThetaType type;
    N2Map h1, h_tau;
};

namespace detail {

inline N2Map torus_generator_map(const ThetaType& t, int m, int n) {
    const int L = t.a1.generators();
    const cplx gamma = double(m) + double(n) * t.tau;
    const cplx two_pi_i{0.0, 2.0 * std::numbers::pi};
    const GrassmannNumber a = lattice_a(t, m, n);
    const GrassmannNumber b = lattice_b(t, m, n);
    const ComponentFunction f =
        ComponentFunction::identity_z(L) +
        ComponentFunction::constant(L, GrassmannNumber(L, gamma));
    const ComponentFunction zero_odd = ComponentFunction::zero(L, Parity::odd);
    const ComponentFunction ga =
        ComponentFunction::exp_affine(L, gr_exp(b * two_pi_i), a * two_pi_i);
    const ComponentFunction gb =
        ComponentFunction::exp_affine(L, gr_exp(b * (-two_pi_i)), a * (-two_pi_i));
    return make_n2_map(N2Coords::homogeneous, f, zero_odd, zero_odd, ga, gb);
}

} // namespace detail

inline TorusStructure make_supertorus(const ThetaType& t) {
    validate_theta_type(t);
    TorusStructure s{t, detail::torus_generator_map(t, 1, 0),
                     detail::torus_generator_map(t, 0, 1)};
    if (superconformal_residual(s.h1) > kResidualTol ||
        superconformal_residual(s.h_tau) > kResidualTol)
        throw InconsistentType("generator translation failed its superconformality check");
    if (data_distance(compose(s.h1, s.h_tau), compose(s.h_tau, s.h1)) > kResidualTol)
        throw InconsistentType("generator translations do not commute");
    return s;
}

inline Atlas torus_atlas(const TorusStructure& s) {
    Atlas a;
    a.cover = CoverKind::torus;
    a.tau = s.type.tau;
    a.transitions.emplace("1", s.h1);
    a.transitions.emplace("tau", s.h_tau);
    return a;
}

inline bool supertori_equivalent(const TorusStructure& x, const TorusStructure& y) {
    return types_equivalent(x.type, y.type);
}

// ---- N=1 spin-structure tori ----------------------------------------------

namespace detail {

inline N1Map n1_translation(int L, cplx gamma, const ComponentFunction& xi,
                            const ComponentFunction& psi, const ComponentFunction& g) {
    const ComponentFunction f =
        ComponentFunction::identity_z(L) +
        ComponentFunction::constant(L, GrassmannNumber(L, gamma));
    return make_n1_map(f, xi, psi, g);
}

inline void check_torus_tau(cplx tau) {
    if (!(tau.imag() > 0.0))
        throw InputError("lattice parameter needs positive imaginary part");
}

} // namespace detail

// Generator translations (z + g, eps^{...} theta) for one of the three sign
// assignments that cannot be removed by a change of chart.
inline Atlas spin_structure_torus_n1(int L, cplx tau, int eps1, int eps2) {
    detail::check_torus_tau(tau);
    const bool valid = (eps1 == 1 && eps2 == -1) || (eps1 == -1 && eps2 == 1) ||
                       (eps1 == -1 && eps2 == -1);
    if (!valid) throw InputError("sign pair must contain at least one -1");
    const ComponentFunction zero_odd = ComponentFunction::zero(L, Parity::odd);
    auto gen = [&](cplx gamma, int eps) {
        return detail::n1_translation(
            L, gamma, zero_odd, zero_odd,
            ComponentFunction::constant(L, GrassmannNumber(L, double(eps))));
    };
    Atlas a;
    a.cover = CoverKind::torus;
    a.tau = tau;
    a.transitions.emplace("1", gen(1.0, eps1));
    a.transitions.emplace("tau", gen(tau, eps2));
    if (!check_atlas_cocycle(a).pass(kResidualTol))
        throw InconsistentType("generator translations do not commute");
    return a;
}

// Generator translations (z + 1, theta) and (z + tau + theta*delta,
// theta + delta): the removable sign assignment enriched by an odd shift.
inline Atlas spin_structure_torus_n1(int L, cplx tau, const GrassmannNumber& delta) {
    detail::check_torus_tau(tau);
    if (!delta.is_odd() && !delta.is_zero())
        throw ParityError("odd translation must be odd");
    if (delta.generators() != L)
        throw SizeMismatch("odd translation disagrees on the generator count");
    const ComponentFunction zero_odd = ComponentFunction::zero(L, Parity::odd);
    const ComponentFunction one =
        ComponentFunction::constant(L, GrassmannNumber(L, 1.0));
    const ComponentFunction dconst =
        delta.is_zero() ? zero_odd : ComponentFunction::constant(L, delta);
    Atlas a;
    a.cover = CoverKind::torus;
    a.tau = tau;
    a.transitions.emplace("1", detail::n1_translation(L, 1.0, zero_odd, zero_odd, one));
    a.transitions.emplace("tau", detail::n1_translation(L, tau, dconst, dconst, one));
    if (!check_atlas_cocycle(a).pass(kResidualTol))
        throw InconsistentType("generator translations do not commute");
    return a;
}

} // namespace superlift
