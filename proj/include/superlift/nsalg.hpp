#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "superlift/supermap.hpp"

namespace superlift {

// ---- superderivations ------------------------------------------------------

// Variable set a derivation acts on: one even variable z plus one or two odd
// symbols.  The two-symbol sets differ by the linear change of odd variables
// th+- = (th1 +- i th2)/sqrt(2).
enum class DerivationCoords { n1, n2_nonhomogeneous, n2_homogeneous };

inline int odd_symbol_count(DerivationCoords c) {
    return c == DerivationCoords::n1 ? 1 : 2;
}

// First-order differential operator
//     X = a_z(z, th) d/dz + a_1(z, th) d/dth_1 [+ a_2(z, th) d/dth_2]
// whose coefficients live in (Laurent polynomials in z) tensor (exterior
// algebra on the odd symbols) with plain complex scalars.  A coefficient is a
// map from (z power, odd-symbol mask) to the scalar; mask bit 0 is the first
// odd symbol (th, th1, or th+), bit 1 the second (th2 or th-).
struct SuperDerivation {
    using Key = std::pair<int, int>;
    using Poly = std::map<Key, cplx>;

    DerivationCoords coords = DerivationCoords::n1;
    Poly dz, d1, d2; // d2 stays empty over the one-symbol variable set
};

namespace detail {

inline void prune_poly(SuperDerivation::Poly& p) {
    for (auto it = p.begin(); it != p.end();)
        it = (it->second == cplx{}) ? p.erase(it) : std::next(it);
}

// Parity of a coefficient: popcount of every mask mod 2, or mixed.
inline Parity poly_parity(const SuperDerivation::Poly& p) {
    int seen = -1;
    for (const auto& [key, c] : p) {
        const int par = std::popcount(unsigned(key.second)) & 1;
        if (seen == -1) seen = par;
        if (seen != par) return Parity::mixed;
    }
    if (seen == -1) return Parity::even; // zero coefficient fits either slot
    return seen ? Parity::odd : Parity::even;
}

inline SuperDerivation::Poly poly_mul(const SuperDerivation::Poly& a,
                                      const SuperDerivation::Poly& b) {
    SuperDerivation::Poly out;
    for (const auto& [ka, ca] : a)
        for (const auto& [kb, cb] : b) {
            if (ka.second & kb.second) continue; // repeated odd symbol
            const int sign = reorder_sign(unsigned(ka.second), unsigned(kb.second));
            out[{ka.first + kb.first, ka.second | kb.second}] +=
                ca * cb * double(sign);
        }
    prune_poly(out);
    return out;
}

inline SuperDerivation::Poly poly_dz(const SuperDerivation::Poly& a) {
    SuperDerivation::Poly out;
    for (const auto& [k, c] : a)
        if (k.first != 0) out[{k.first - 1, k.second}] = c * double(k.first);
    return out;
}

// Left derivative with respect to odd symbol j.
inline SuperDerivation::Poly poly_dtheta(const SuperDerivation::Poly& a, int j) {
    SuperDerivation::Poly out;
    const unsigned bit = 1u << j;
    for (const auto& [k, c] : a) {
        if (!(unsigned(k.second) & bit)) continue;
        const unsigned rest = unsigned(k.second) & ~bit;
        out[{k.first, int(rest)}] = c * double(reorder_sign(bit, rest));
    }
    return out;
}

inline void poly_axpy(SuperDerivation::Poly& out, const SuperDerivation::Poly& a,
                      cplx s) {
    for (const auto& [k, c] : a) out[k] += s * c;
    prune_poly(out);
}

// X applied to a coefficient function g, i.e. sum_s a_s * (d_s g).
inline SuperDerivation::Poly apply_derivation(const SuperDerivation& x,
                                              const SuperDerivation::Poly& g) {
    SuperDerivation::Poly out;
    poly_axpy(out, poly_mul(x.dz, poly_dz(g)), 1.0);
    poly_axpy(out, poly_mul(x.d1, poly_dtheta(g, 0)), 1.0);
    if (odd_symbol_count(x.coords) > 1)
        poly_axpy(out, poly_mul(x.d2, poly_dtheta(g, 1)), 1.0);
    return out;
}

} // namespace detail

// Parity of the operator: a term c * d/dz needs an even c for an even
// derivation, a term c * d/dth an odd c, and vice versa for odd derivations.
inline Parity derivation_parity(const SuperDerivation& x) {
    int seen = -1;
    const auto note = [&seen](Parity p, int slot_parity) {
        if (p == Parity::mixed) {
            seen = 2;
            return;
        }
        const int par = ((p == Parity::odd ? 1 : 0) + slot_parity) & 1;
        if (seen == -1) seen = par;
        if (seen != par && seen != 2) seen = 2;
    };
    if (!x.dz.empty()) note(detail::poly_parity(x.dz), 0);
    if (!x.d1.empty()) note(detail::poly_parity(x.d1), 1);
    if (!x.d2.empty()) note(detail::poly_parity(x.d2), 1);
    if (seen == -1) return Parity::even; // the zero operator
    if (seen == 2) return Parity::mixed;
    return seen ? Parity::odd : Parity::even;
}

inline bool is_zero_derivation(const SuperDerivation& x) {
    return x.dz.empty() && x.d1.empty() && x.d2.empty();
}

inline SuperDerivation operator+(const SuperDerivation& a, const SuperDerivation& b) {
    if (a.coords != b.coords)
        throw InputError("derivations act on different variable sets");
    SuperDerivation out = a;
    detail::poly_axpy(out.dz, b.dz, 1.0);
    detail::poly_axpy(out.d1, b.d1, 1.0);
    detail::poly_axpy(out.d2, b.d2, 1.0);
    return out;
}

inline SuperDerivation operator*(const SuperDerivation& a, cplx s) {
    SuperDerivation out = a;
    for (auto* p : {&out.dz, &out.d1, &out.d2})
        for (auto& [k, c] : *p) c *= s;
    if (s == cplx{}) out = SuperDerivation{a.coords, {}, {}, {}};
    return out;
}

inline SuperDerivation operator*(cplx s, const SuperDerivation& a) { return a * s; }

inline SuperDerivation operator-(const SuperDerivation& a, const SuperDerivation& b) {
    return a + b * cplx{-1.0};
}

// Largest coefficient magnitude of the difference, across all slots.
inline double deriv_distance(const SuperDerivation& a, const SuperDerivation& b) {
    if (a.coords != b.coords)
        throw InputError("derivations act on different variable sets");
    double worst = 0.0;
    const auto scan = [&worst](const SuperDerivation::Poly& x,
                               const SuperDerivation::Poly& y) {
        for (const auto& [k, c] : x) {
            const auto it = y.find(k);
            worst = std::max(worst, std::abs(c - (it == y.end() ? cplx{} : it->second)));
        }
        for (const auto& [k, c] : y)
            if (!x.count(k)) worst = std::max(worst, std::abs(c));
    };
    scan(a.dz, b.dz);
    scan(a.d1, b.d1);
    scan(a.d2, b.d2);
    return worst;
}

// Supercommutator [X, Y] = XY - (-1)^{|X||Y|} YX.  For derivations the
// second-order parts of the two products cancel, so the bracket is computed
// slotwise on the coefficient functions.
inline SuperDerivation super_bracket(const SuperDerivation& x, const SuperDerivation& y) {
    if (x.coords != y.coords)
        throw InputError("derivations act on different variable sets");
    const Parity px = derivation_parity(x);
    const Parity py = derivation_parity(y);
    if (px == Parity::mixed || py == Parity::mixed)
        throw ParityError("bracket operands must be parity homogeneous");
    const double swap = (px == Parity::odd && py == Parity::odd) ? 1.0 : -1.0;
    SuperDerivation out{x.coords, {}, {}, {}};
    out.dz = detail::apply_derivation(x, y.dz);
    detail::poly_axpy(out.dz, detail::apply_derivation(y, x.dz), swap);
    out.d1 = detail::apply_derivation(x, y.d1);
    detail::poly_axpy(out.d1, detail::apply_derivation(y, x.d1), swap);
    if (odd_symbol_count(x.coords) > 1) {
        out.d2 = detail::apply_derivation(x, y.d2);
        detail::poly_axpy(out.d2, detail::apply_derivation(y, x.d2), swap);
    }
    return out;
}

// ---- the standard generators ----------------------------------------------

// Basis operators.  L_n and J_n carry their integer index directly; the odd
// generators are indexed by the integer n of G_{n-1/2}, so index arithmetic
// stays exact.  G and G_star act on the one-symbol variables, G_1/G_2 on the
// nonhomogeneous pair, G_plus/G_minus on the homogeneous pair.
enum class GeneratorKind { L, J, G, G_star, G_1, G_2, G_plus, G_minus };

inline const char* generator_name(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::L: return "L";
        case GeneratorKind::J: return "J";
        case GeneratorKind::G: return "G";
        case GeneratorKind::G_star: return "G*";
        case GeneratorKind::G_1: return "G1";
        case GeneratorKind::G_2: return "G2";
        case GeneratorKind::G_plus: return "G+";
        case GeneratorKind::G_minus: return "G-";
    }
    return "?";
}

inline SuperDerivation make_generator(GeneratorKind kind, int n, DerivationCoords coords) {
    SuperDerivation x{coords, {}, {}, {}};
    const auto put = [](SuperDerivation::Poly& p, int zp, int mask, cplx c) {
        if (c != cplx{}) p[{zp, mask}] = c;
    };
    const cplx i{0.0, 1.0};
    switch (coords) {
        case DerivationCoords::n1:
            switch (kind) {
                case GeneratorKind::L: // -(z^{n+1} d/dz + ((n+1)/2) z^n th d/dth)
                    put(x.dz, n + 1, 0, -1.0);
                    put(x.d1, n, 1, -0.5 * (n + 1));
                    return x;
                case GeneratorKind::G: // -z^n (d/dth - th d/dz)
                    put(x.d1, n, 0, -1.0);
                    put(x.dz, n, 1, 1.0);
                    return x;
                case GeneratorKind::J: // z^n th d/dth
                    put(x.d1, n, 1, 1.0);
                    return x;
                case GeneratorKind::G_star: // i z^n (d/dth + th d/dz)
                    put(x.d1, n, 0, i);
                    put(x.dz, n, 1, i);
                    return x;
                default: break;
            }
            break;
        case DerivationCoords::n2_nonhomogeneous:
            switch (kind) {
                case GeneratorKind::L:
                    put(x.dz, n + 1, 0, -1.0);
                    put(x.d1, n, 1, -0.5 * (n + 1));
                    put(x.d2, n, 2, -0.5 * (n + 1));
                    return x;
                case GeneratorKind::J: // i z^n (th1 d/dth2 - th2 d/dth1)
                    put(x.d2, n, 1, i);
                    put(x.d1, n, 2, -i);
                    return x;
                case GeneratorKind::G_1:
                    // -(z^n (d/dth1 - th1 d/dz) - n z^{n-1} th1 th2 d/dth2)
                    put(x.d1, n, 0, -1.0);
                    put(x.dz, n, 1, 1.0);
                    put(x.d2, n - 1, 3, double(n));
                    return x;
                case GeneratorKind::G_2:
                    // -(z^n (d/dth2 - th2 d/dz) + n z^{n-1} th1 th2 d/dth1)
                    put(x.d2, n, 0, -1.0);
                    put(x.dz, n, 2, 1.0);
                    put(x.d1, n - 1, 3, -double(n));
                    return x;
                default: break;
            }
            break;
        case DerivationCoords::n2_homogeneous:
            switch (kind) {
                case GeneratorKind::L:
                    put(x.dz, n + 1, 0, -1.0);
                    put(x.d1, n, 1, -0.5 * (n + 1));
                    put(x.d2, n, 2, -0.5 * (n + 1));
                    return x;
                case GeneratorKind::J: // -z^n (th+ d/dth+ - th- d/dth-)
                    put(x.d1, n, 1, -1.0);
                    put(x.d2, n, 2, 1.0);
                    return x;
                case GeneratorKind::G_plus:
                    // -(z^n (d/dth+ - th- d/dz) + n z^{n-1} th+ th- d/dth+)
                    put(x.d1, n, 0, -1.0);
                    put(x.dz, n, 2, 1.0);
                    put(x.d1, n - 1, 3, -double(n));
                    return x;
                case GeneratorKind::G_minus:
                    // -(z^n (d/dth- - th+ d/dz) - n z^{n-1} th+ th- d/dth-)
                    put(x.d2, n, 0, -1.0);
                    put(x.dz, n, 1, 1.0);
                    put(x.d2, n - 1, 3, double(n));
                    return x;
                default: break;
            }
            break;
    }
    throw InputError("generator kind is not defined on this variable set");
}

// Render as a sum of monomial terms, slot by slot, for reports.
inline std::string format_derivation(const SuperDerivation& x) {
    const bool two = odd_symbol_count(x.coords) > 1;
    const char* th1 = x.coords == DerivationCoords::n1
                          ? "th"
                          : (x.coords == DerivationCoords::n2_homogeneous ? "th+" : "th1");
    const char* th2 = x.coords == DerivationCoords::n2_homogeneous ? "th-" : "th2";
    std::ostringstream out;
    bool first = true;
    const auto coeff = [&out](cplx c) {
        if (c.imag() == 0.0) out << c.real();
        else if (c.real() == 0.0) out << c.imag() << "i";
        else out << "(" << c.real() << (c.imag() > 0 ? "+" : "") << c.imag() << "i)";
    };
    const auto slot = [&](const SuperDerivation::Poly& p, const std::string& d) {
        for (const auto& [k, c] : p) {
            if (!first) out << " + ";
            first = false;
            coeff(c);
            if (k.first != 0) out << " z^" << k.first;
            if (k.second & 1) out << " " << th1;
            if (k.second & 2) out << " " << th2;
            out << " " << d;
        }
    };
    slot(x.dz, "d/dz");
    slot(x.d1, std::string("d/d") + th1);
    if (two) slot(x.d2, std::string("d/d") + th2);
    if (first) out << "0";
    return out.str();
}

// ---- relation verification -------------------------------------------------

// Generator families whose full bracket tables are checked: the one-symbol
// family {L, G}, its extension {L, G, J, G*} realizing the two-symbol algebra
// on one odd variable, and the two-symbol families in both coordinate systems.
enum class NsFamily { n1, n1_extended, n2_nonhomogeneous, n2_homogeneous };

inline DerivationCoords family_coords(NsFamily f) {
    switch (f) {
        case NsFamily::n1:
        case NsFamily::n1_extended: return DerivationCoords::n1;
        case NsFamily::n2_nonhomogeneous: return DerivationCoords::n2_nonhomogeneous;
        case NsFamily::n2_homogeneous: return DerivationCoords::n2_homogeneous;
    }
    return DerivationCoords::n1;
}

inline const char* family_name(NsFamily f) {
    switch (f) {
        case NsFamily::n1: return "n1";
        case NsFamily::n1_extended: return "n1-extended";
        case NsFamily::n2_nonhomogeneous: return "n2-nonhomogeneous";
        case NsFamily::n2_homogeneous: return "n2-homogeneous";
    }
    return "?";
}

struct NsMismatch {
    std::string label;    // e.g. "[L(2), G(-1)]"
    std::string computed; // rendered bracket value
    std::string expected; // rendered structure-constant combination
    double residual = 0.0;
};

struct NsReport {
    NsFamily family = NsFamily::n1;
    int max_n = 0;
    int checked = 0;     // number of generator pairs enumerated
    double worst = 0.0;  // largest residual seen, mismatch or not
    std::vector<NsMismatch> mismatches;

    bool pass() const { return mismatches.empty(); }
};

namespace detail {

inline std::vector<GeneratorKind> family_kinds(NsFamily f) {
    switch (f) {
        case NsFamily::n1: return {GeneratorKind::L, GeneratorKind::G};
        case NsFamily::n1_extended:
            return {GeneratorKind::L, GeneratorKind::J, GeneratorKind::G,
                    GeneratorKind::G_star};
        case NsFamily::n2_nonhomogeneous:
            return {GeneratorKind::L, GeneratorKind::J, GeneratorKind::G_1,
                    GeneratorKind::G_2};
        case NsFamily::n2_homogeneous:
            return {GeneratorKind::L, GeneratorKind::J, GeneratorKind::G_plus,
                    GeneratorKind::G_minus};
    }
    return {};
}

// Structure constants at central charge zero.  The pair (ka, a), (kb, b) is
// given in the enumeration order L < J < first G kind < second G kind; odd
// indices follow the G_{n-1/2} storage convention, which turns the usual
// half-integer relations into
//     [L_m, G<k>]  = (m/2 - k + 1/2) G<m+k>,
//     [G<a>, G<b>] = 2 L_{a+b-1},      [G<a>, G'<b>] = -i (a - b) J_{a+b-1},
//     [G+<a>, G-<b>] = 2 L_{a+b-1} + (a - b) J_{a+b-1}.
inline SuperDerivation expected_bracket(NsFamily f, GeneratorKind ka, int a,
                                        GeneratorKind kb, int b) {
    const DerivationCoords coords = family_coords(f);
    const auto gen = [&](GeneratorKind k, int n) { return make_generator(k, n, coords); };
    const auto zero = [&] { return SuperDerivation{coords, {}, {}, {}}; };
    const cplx i{0.0, 1.0};
    using K = GeneratorKind;

    if (ka == K::L && kb == K::L) return gen(K::L, a + b) * cplx{double(a - b)};
    if (ka == K::L && kb == K::J) return gen(K::J, a + b) * cplx{double(-b)};
    if (ka == K::J && kb == K::J) return zero();
    if (ka == K::L) // [L_m, G-type<k>]
        return gen(kb, a + b) * cplx{0.5 * a - b + 0.5};
    if (ka == K::J) {
        if (kb == K::G) return gen(K::G_star, a + b) * (-i);
        if (kb == K::G_star) return gen(K::G, a + b) * i;
        if (kb == K::G_1) return gen(K::G_2, a + b) * (-i);
        if (kb == K::G_2) return gen(K::G_1, a + b) * i;
        if (kb == K::G_plus) return gen(K::G_plus, a + b);
        if (kb == K::G_minus) return gen(K::G_minus, a + b) * cplx{-1.0};
    }
    if (ka == kb) { // same odd kind
        if (ka == K::G_plus || ka == K::G_minus) return zero();
        return gen(K::L, a + b - 1) * cplx{2.0};
    }
    // mixed odd kinds, first listed kind first
    if (ka == K::G_plus && kb == K::G_minus)
        return gen(K::L, a + b - 1) * cplx{2.0} +
               gen(K::J, a + b - 1) * cplx{double(a - b)};
    return gen(K::J, a + b - 1) * (-i * double(a - b));
}

} // namespace detail

// Computes every pairwise bracket of the family generators with indices in
// [-max_n, max_n] and compares against the structure constants; the d term is
// the zero operator here, so the tables are the central-charge-zero ones.
inline NsReport verify_ns_relations(NsFamily family, int max_n, double tol = 0.0) {
    const DerivationCoords coords = family_coords(family);
    std::vector<std::pair<GeneratorKind, int>> gens;
    for (GeneratorKind k : detail::family_kinds(family))
        for (int n = -max_n; n <= max_n; ++n) gens.emplace_back(k, n);

    NsReport report;
    report.family = family;
    report.max_n = max_n;
    for (size_t ia = 0; ia < gens.size(); ++ia) {
        for (size_t ib = ia; ib < gens.size(); ++ib) {
            const auto [ka, a] = gens[ia];
            const auto [kb, b] = gens[ib];
            const SuperDerivation lhs = super_bracket(make_generator(ka, a, coords),
                                                      make_generator(kb, b, coords));
            const SuperDerivation rhs = detail::expected_bracket(family, ka, a, kb, b);
            const double residual = deriv_distance(lhs, rhs);
            ++report.checked;
            report.worst = std::max(report.worst, residual);
            if (residual > tol) {
                std::ostringstream label;
                label << "[" << generator_name(ka) << "(" << a << "), "
                      << generator_name(kb) << "(" << b << ")]";
                report.mismatches.push_back(
                    {label.str(), format_derivation(lhs), format_derivation(rhs), residual});
            }
        }
    }
    return report;
}

// ---- loop-group exponentials -----------------------------------------------

namespace detail {

inline std::map<int, GrassmannNumber> laurent_conv(const std::map<int, GrassmannNumber>& a,
                                                   const std::map<int, GrassmannNumber>& b) {
    std::map<int, GrassmannNumber> out;
    for (const auto& [pa, ca] : a)
        for (const auto& [pb, cb] : b) {
            const GrassmannNumber prod = gr_mul(ca, cb);
            if (prod.is_zero()) continue;
            const auto it = out.find(pa + pb);
            if (it == out.end()) out.emplace(pa + pb, prod);
            else it->second += prod;
        }
    for (auto it = out.begin(); it != out.end();)
        it = it->second.is_zero() ? out.erase(it) : std::next(it);
    return out;
}

// exp of a Laurent polynomial all of whose coefficients are soul valued; the
// nilpotency makes the series terminate.
inline std::map<int, GrassmannNumber> laurent_exp_series(
    int L, const std::map<int, GrassmannNumber>& n) {
    std::map<int, GrassmannNumber> out{{0, GrassmannNumber(L, 1.0)}};
    std::map<int, GrassmannNumber> pow = out;
    double fact = 1.0;
    for (int k = 1; k <= L + 1; ++k) {
        pow = laurent_conv(pow, n);
        if (pow.empty()) break;
        fact *= k;
        for (const auto& [p, c] : pow) {
            const GrassmannNumber scaled = c * (1.0 / fact);
            const auto it = out.find(p);
            if (it == out.end()) out.emplace(p, scaled);
            else it->second += scaled;
        }
    }
    return out;
}

} // namespace detail

// One-parameter scale action (z, th+, th-) -> (z, th+ a0 e^{S(z)}, th- a0^{-1}
// e^{-S(z)}) with S(z) = sum_n A_n z^n.  The power-1 coefficient may carry a
// body (it becomes the exponential rate) and the power-0 coefficient is free;
// every other power must be soul valued so the expansion stays inside the
// Laurent-times-exponential function family.
inline N2Map loop_exponential(const std::map<int, GrassmannNumber>& coeffs,
                              const GrassmannNumber& a0) {
    const int L = a0.generators();
    if (!a0.is_even()) throw ParityError("the constant scale must be even");

    GrassmannNumber c0(L), c1(L);
    std::map<int, GrassmannNumber> soul_part;
    for (const auto& [n, c] : coeffs) {
        if (c.generators() != L)
            throw SizeMismatch("exponent coefficients use different generator counts");
        if (!c.is_even()) throw ParityError("exponent coefficients must be even");
        if (c.is_zero()) continue;
        if (n == 0) c0 = c;
        else if (n == 1) c1 = c;
        else if (std::abs(c.body()) > kCoeffTol)
            throw UnsupportedBody(
                "away from powers 0 and 1 the exponent coefficients must be soul valued");
        else soul_part.emplace(n, c.soul());
    }

    std::map<int, GrassmannNumber> neg;
    for (const auto& [n, c] : soul_part) neg.emplace(n, c * -1.0);

    const GrassmannNumber scale_a = gr_mul(a0, gr_exp(c0));
    const GrassmannNumber scale_b = gr_mul(gr_invert(a0), gr_exp(c0 * -1.0));
    const ComponentFunction g_a = ComponentFunction::exp_affine(
        L, scale_a, c1, detail::laurent_exp_series(L, soul_part));
    const ComponentFunction g_b = ComponentFunction::exp_affine(
        L, scale_b, c1 * -1.0, detail::laurent_exp_series(L, neg));
    return make_n2_map(N2Coords::homogeneous, ComponentFunction::identity_z(L),
                       ComponentFunction::zero(L, Parity::odd),
                       ComponentFunction::zero(L, Parity::odd), g_a, g_b);
}

} // namespace superlift
