#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "superlift/cech.hpp"

namespace superlift {

// ---- points ---------------------------------------------------------------

struct SuperPoint {
    GrassmannNumber z;
    std::vector<GrassmannNumber> thetas;
};

inline SuperPoint make_super_point(GrassmannNumber z, std::vector<GrassmannNumber> thetas) {
    if (!z.is_even()) throw ParityError("even coordinate must be even");
    for (const auto& t : thetas)
        if (!t.is_odd() && !t.is_zero()) throw ParityError("odd coordinate must be odd");
    return SuperPoint{std::move(z), std::move(thetas)};
}

inline SuperPoint apply_map(const N2Map& h, const SuperPoint& p) {
    if (p.thetas.size() != 2) throw SizeMismatch("point needs two odd coordinates");
    const FieldTriple t = expand(h);
    return SuperPoint{t.z_out.eval(p.z, p.thetas),
                      {t.theta_a.eval(p.z, p.thetas), t.theta_b.eval(p.z, p.thetas)}};
}

inline SuperPoint apply_map(const N1Map& h, const SuperPoint& p) {
    if (p.thetas.size() != 1) throw SizeMismatch("point needs one odd coordinate");
    const FieldPair t = expand(h);
    return SuperPoint{t.z_out.eval(p.z, p.thetas), {t.theta_out.eval(p.z, p.thetas)}};
}

// ---- genus-zero structures ------------------------------------------------

// Two-chart structure over the Riemann sphere: the transition from the chart
// around zero to the chart around infinity is
//     (z, theta+, theta-) |-> (1/z, i theta+ g(z)/z, i theta- / (z g(z)))
// for a unit g on the punctured plane.
struct SphereStructure {
    N2Map transition;
    std::optional<int> degree;
};

namespace detail {

// A unit body never vanishes exactly when it is a single monomial times an
// exponential; a one-term Laurent body with several monomials always has a
// root in the punctured plane.  Remaining shapes are probed on circles.
inline void check_unit_body(const ComponentFunction& g) {
    if (!g.is_sampled()) {
        const auto mono = body_monomial(g);
        if (mono) {
            if (mono->coeff == 0.0) throw BodyVanishes("body is identically zero");
            return;
        }
        if (g.terms().size() == 1)
            throw BodyVanishes("multi-monomial body has a root in the punctured plane");
    }
    for (double r : {0.5, 1.0, 2.0}) {
        for (int k = 0; k < 512; ++k) {
            const double phi = 2.0 * std::numbers::pi * (k + 0.234567) / 512;
            if (std::abs(g.body_eval(r * std::exp(cplx{0.0, phi}))) < kResidualTol)
                throw BodyVanishes("body vanishes on a sample circle");
        }
    }
}

} // namespace detail

inline SphereStructure make_supersphere(const ComponentFunction& g) {
    const int L = g.generators();
    if (g.parity() != Parity::even) throw ParityError("transition scale must be even");
    detail::check_unit_body(g);
    const ComponentFunction izinv =
        ComponentFunction::monomial(L, Parity::even, -1, GrassmannNumber(L, cplx{0.0, 1.0}));
    N2Map t = make_n2_map(
        N2Coords::homogeneous,
        ComponentFunction::monomial(L, Parity::even, -1, GrassmannNumber(L, 1.0)),
        ComponentFunction::zero(L, Parity::odd), ComponentFunction::zero(L, Parity::odd),
        izinv * g, izinv * reciprocal(g));
    if (superconformal_residual(t) > kResidualTol)
        throw Error("sphere transition failed its superconformality check");
    return SphereStructure{std::move(t), std::nullopt};
}

// Winding degree of the unit recovered from the first odd scale.
inline int sphere_degree(const SphereStructure& s) {
    if (s.degree) return *s.degree;
    const int L = s.transition.f.generators();
    const ComponentFunction minus_iz =
        ComponentFunction::monomial(L, Parity::even, 1, GrassmannNumber(L, cplx{0.0, -1.0}));
    return winding_degree(minus_iz * s.transition.g_a);
}

inline bool spheres_equivalent(const SphereStructure& a, const SphereStructure& b) {
    return sphere_degree(a) == sphere_degree(b);
}

// ---- fractional-linear action on the canonical structures -----------------

enum class SphereChart { nor, sou };

struct ChartPoint {
    SphereChart chart;
    SuperPoint point;
};

// Group element: a unimodular 2x2 even matrix together with an invertible
// even scale acting on the odd directions.
struct MobiusTransform {
    GrassmannNumber a, b, c, d, eps;
};

namespace detail {

inline void check_mobius(const MobiusTransform& t) {
    const int L = t.a.generators();
    for (const GrassmannNumber* e : {&t.a, &t.b, &t.c, &t.d, &t.eps}) {
        if (!e->is_even()) throw ParityError("matrix entries and the scale must be even");
        if (e->top_generator() > L - 2)
            throw InputError("entries must avoid the top two generators");
    }
    const GrassmannNumber det = gr_mul(t.a, t.d) - gr_mul(t.b, t.c);
    if (!approx_equal(det, GrassmannNumber(t.a.generators(), 1.0), kResidualTol))
        throw InputError("matrix must have determinant one");
    if (std::abs(t.eps.body()) < kCoeffTol) throw ZeroBody("odd scale must be invertible");
}

inline SuperPoint mobius_value(const GrassmannNumber& num, const GrassmannNumber& den,
                               const GrassmannNumber& eps, int n, cplx twist,
                               const SuperPoint& p) {
    const GrassmannNumber ratio = gr_mul(num, gr_invert(den));
    const GrassmannNumber up = gr_mul(gr_mul(eps, gr_int_pow(den, n - 1)) * twist, p.thetas[0]);
    const GrassmannNumber dn =
        gr_mul(gr_mul(gr_invert(eps), gr_int_pow(den, -n - 1)) * twist, p.thetas[1]);
    return SuperPoint{ratio, {up, dn}};
}

} // namespace detail

// Action on a point of the degree-n canonical structure, expressed in one of
// the two charts.  When the naive image leaves the chart (vanishing
// denominator body at a soul-valued coordinate) the result switches chart and
// picks up the factor +/- i; away from that locus a vanishing denominator
// means the point must be presented in the other chart first.
inline ChartPoint mobius_action(int n, const MobiusTransform& t, const ChartPoint& cp) {
    detail::check_mobius(t);
    const SuperPoint& p = cp.point;
    if (p.thetas.size() != 2) throw SizeMismatch("point needs two odd coordinates");
    const GrassmannNumber& z = p.z;
    if (cp.chart == SphereChart::sou) {
        const GrassmannNumber den = gr_mul(t.c, z) + t.d;
        const GrassmannNumber num = gr_mul(t.a, z) + t.b;
        if (std::abs(den.body()) > kCoeffTol)
            return ChartPoint{SphereChart::sou,
                              detail::mobius_value(num, den, t.eps, n, 1.0, p)};
        if (std::abs(z.body()) <= kCoeffTol)
            return ChartPoint{SphereChart::nor,
                              detail::mobius_value(den, num, t.eps, n, cplx{0.0, -1.0}, p)};
        throw OutsideDomain("image leaves the chart; present the point around zero");
    }
    const GrassmannNumber den = t.a + gr_mul(t.b, z);
    const GrassmannNumber num = t.c + gr_mul(t.d, z);
    if (std::abs(den.body()) > kCoeffTol)
        return ChartPoint{SphereChart::nor, detail::mobius_value(num, den, t.eps, n, 1.0, p)};
    if (std::abs(z.body()) <= kCoeffTol)
        return ChartPoint{SphereChart::sou,
                          detail::mobius_value(den, num, t.eps, n, cplx{0.0, 1.0}, p)};
    throw OutsideDomain("image leaves the chart; present the point around infinity");
}

// ---- uniformization -------------------------------------------------------

struct UniformizationResult {
    int degree = 0;
    N2Map nor_change, sou_change;
    SphereStructure canonical;
    double residual = 0.0;
};

namespace detail {

struct MonomialBody {
    int power;
    cplx coeff;
};

inline MonomialBody require_monomial_body(const ComponentFunction& f, const char* what) {
    if (f.is_sampled() || !f.laurent_coeffs())
        throw UnsupportedBody(std::string(what) + " must be a Laurent polynomial");
    std::optional<MonomialBody> mono;
    for (const auto& [p, c] : f.level_coeffs(0)) {
        if (std::abs(c) <= kCoeffTol) continue;
        if (mono) throw UnsupportedBody(std::string(what) + " body must be a single monomial");
        mono = MonomialBody{p, c};
    }
    if (!mono) throw UnsupportedBody(std::string(what) + " body must not vanish");
    return *mono;
}

inline ComponentFunction level_function(const ComponentFunction& f, uint32_t mask) {
    const int L = f.generators();
    std::map<int, GrassmannNumber> coeffs;
    for (const auto& [p, c] : f.level_coeffs(mask))
        if (std::abs(c) > 1e-13) coeffs[p] = GrassmannNumber(L, c);
    return ComponentFunction::laurent(L, Parity::even, std::move(coeffs));
}

inline ComponentFunction odd_lift(uint32_t mask, const ComponentFunction& b) {
    return mul_const(GrassmannNumber::monomial(b.generators(), mask, 1.0), b);
}

inline N2Map prune_map(const N2Map& h) {
    return make_n2_map(h.coords, h.f.pruned(1e-13), h.psi_a.pruned(1e-13),
                       h.psi_b.pruned(1e-13), h.g_a.pruned(1e-13), h.g_b.pruned(1e-13));
}

} // namespace detail

// Three-stage reduction of a two-chart transition with body 1/z to the
// canonical shape: first each odd soul level of the theta translations is
// removed by a weighted splitting, then the soul of the even coordinate map
// against the weight -1/z^2, and finally the unit parts of the odd scales are
// split additively through their logarithm, one exponential per chart.  The
// returned chart changes conjugate the input to the canonical transition.
inline UniformizationResult uniformize_sphere(const N2Map& input) {
    const N2Map start =
        input.coords == N2Coords::homogeneous ? input : to_homogeneous(input);
    const int L = start.f.generators();

    const auto fb = detail::require_monomial_body(start.f, "even transition");
    if (fb.power != -1 || std::abs(fb.coeff - 1.0) > kCoeffTol)
        throw UnsupportedBody("even transition body must be 1/z");
    const auto gpb = detail::require_monomial_body(start.g_a, "first odd scale");
    const auto gmb = detail::require_monomial_body(start.g_b, "second odd scale");
    if (gpb.power + gmb.power != -2 ||
        std::abs(gpb.coeff * gmb.coeff + 1.0) > kResidualTol)
        throw UnsupportedBody("odd scale bodies must multiply to -1/z^2");
    for (const ComponentFunction* s : {&start.psi_a, &start.psi_b})
        if (s->is_sampled() || !s->laurent_coeffs())
            throw UnsupportedBody("theta translations must be Laurent polynomials");

    const ComponentFunction weight_plus = ComponentFunction::monomial(
        L, Parity::even, gpb.power, GrassmannNumber(L, gpb.coeff));
    const ComponentFunction weight_minus = ComponentFunction::monomial(
        L, Parity::even, gmb.power, GrassmannNumber(L, gmb.coeff));
    const ComponentFunction tangent_weight = ComponentFunction::monomial(
        L, Parity::even, -2, GrassmannNumber(L, -1.0));
    const ComponentFunction one = ComponentFunction::constant(L, GrassmannNumber(L, 1.0));
    const ComponentFunction id = ComponentFunction::identity_z(L);
    const ComponentFunction zero_odd = ComponentFunction::zero(L, Parity::odd);

    std::vector<uint32_t> masks;
    for (uint32_t m = 1; m < (uint32_t{1} << std::max(0, L - 2)); ++m) masks.push_back(m);
    std::sort(masks.begin(), masks.end(), multi_index_less);

    N2Map h = start;
    N2Map nor_total = identity_n2(L, N2Coords::homogeneous);
    N2Map sou_total = identity_n2(L, N2Coords::homogeneous);
    const auto apply_changes = [&](const N2Map& nor_step, const N2Map& sou_step) {
        h = detail::prune_map(compose(sou_step, compose(h, invert(nor_step))));
        nor_total = compose(nor_step, nor_total);
        sou_total = compose(sou_step, sou_total);
    };

    for (uint32_t m : masks) {
        if (!(std::popcount(m) & 1)) continue;
        const ComponentFunction lp = detail::level_function(h.psi_a, m);
        const ComponentFunction lm = detail::level_function(h.psi_b, m);
        if (lp.is_zero() && lm.is_zero()) continue;
        const CoboundarySplit sp = solve_coboundary(lp, weight_plus);
        const CoboundarySplit sm = solve_coboundary(lm, weight_minus);
        const N2Map nor_step =
            make_n2_map(N2Coords::homogeneous, id, detail::odd_lift(m, sp.b_nor),
                        detail::odd_lift(m, sm.b_nor), one, one);
        const N2Map sou_step =
            make_n2_map(N2Coords::homogeneous, id, detail::odd_lift(m, sp.b_sou),
                        detail::odd_lift(m, sm.b_sou), one, one);
        apply_changes(nor_step, sou_step);
    }

    for (uint32_t m : masks) {
        if (std::popcount(m) & 1) continue;
        const ComponentFunction lf = detail::level_function(h.f, m);
        if (lf.is_zero()) continue;
        const CoboundarySplit sf = solve_coboundary(lf, tangent_weight);
        const GrassmannNumber zeta = GrassmannNumber::monomial(L, m, 1.0);
        const ComponentFunction f_nor = id + mul_const(zeta, sf.b_nor);
        const ComponentFunction f_sou = id + mul_const(zeta, sf.b_sou);
        const N2Map nor_step = make_n2_map(N2Coords::homogeneous, f_nor, zero_odd, zero_odd,
                                           f_nor.derivative(), one);
        const N2Map sou_step = make_n2_map(N2Coords::homogeneous, f_sou, zero_odd, zero_odd,
                                           f_sou.derivative(), one);
        apply_changes(nor_step, sou_step);
    }

    const ComponentFunction unit_part =
        (h.g_a * ComponentFunction::monomial(L, Parity::even, -gpb.power,
                                             GrassmannNumber(L, 1.0 / gpb.coeff)))
            .pruned(1e-12);
    if ((unit_part - one).max_coeff_abs() > 1e-13) {
        const CoboundarySplit sg = solve_coboundary(log_fn(unit_part), one);
        const ComponentFunction h_nor = exp_fn(sg.b_nor);
        const ComponentFunction h_sou = exp_fn(sg.b_sou);
        apply_changes(make_n2_map(N2Coords::homogeneous, id, zero_odd, zero_odd, h_nor,
                                  reciprocal(h_nor)),
                      make_n2_map(N2Coords::homogeneous, id, zero_odd, zero_odd, h_sou,
                                  reciprocal(h_sou)));
    }

    if (std::abs(gpb.coeff - cplx{0.0, 1.0}) > kCoeffTol) {
        const ComponentFunction lam = ComponentFunction::constant(
            L, GrassmannNumber(L, gpb.coeff / cplx{0.0, 1.0}));
        apply_changes(
            make_n2_map(N2Coords::homogeneous, id, zero_odd, zero_odd, lam, reciprocal(lam)),
            identity_n2(L, N2Coords::homogeneous));
    }

    const ComponentFunction minus_iz = ComponentFunction::monomial(
        L, Parity::even, 1, GrassmannNumber(L, cplx{0.0, -1.0}));
    const int n = winding_degree(minus_iz * h.g_a);

    SphereStructure canonical = make_supersphere(
        ComponentFunction::monomial(L, Parity::even, n, GrassmannNumber(L, 1.0)));
    canonical.degree = n;
    const double residual = data_distance(h, canonical.transition);
    return UniformizationResult{n, nor_total, sou_total, std::move(canonical), residual};
}

inline UniformizationResult uniformize_sphere(const Atlas& atlas) {
    if (atlas.cover != CoverKind::sphere2)
        throw InputError("uniformization expects a two-chart cover");
    const auto it = atlas.transitions.find("sou|nor");
    if (it == atlas.transitions.end())
        throw InputError("two-chart cover requires the transition sou|nor");
    if (!std::holds_alternative<N2Map>(it->second))
        throw InputError("two-chart uniformization expects an N=2 transition");
    return uniformize_sphere(std::get<N2Map>(it->second));
}

} // namespace superlift
