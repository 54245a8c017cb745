#pragma once

// Builders for random transition maps used by the map-level tests and the
// acceptance checks.

#include <random>

#include "superlift/supermap.hpp"
#include "test_util.hpp"

namespace testutil {

using superlift::ComponentFunction;
using superlift::N1Map;
using superlift::N2Coords;
using superlift::N2Map;
using superlift::Parity;

// Laurent function with soul-only coefficients drawn from the first max_gen
// generators, scaled down to keep iterated products tame.
inline ComponentFunction random_soul_laurent(std::mt19937& rng, int L, Parity p, int min_pow,
                                             int max_pow, int max_gen, double scale = 0.5) {
    std::map<int, GrassmannNumber> coeffs;
    std::uniform_int_distribution<int> pow_d(min_pow, max_pow);
    for (int k = 0; k < 3; ++k) {
        const int n = pow_d(rng);
        GrassmannNumber c =
            random_grassmann(rng, L, p == Parity::even ? 0 : 1, false, 2, max_gen) * scale;
        auto [it, fresh] = coeffs.try_emplace(n, c);
        if (!fresh) it->second += c;
    }
    return ComponentFunction::laurent(L, p, std::move(coeffs));
}

// Random superconformal map in homogeneous coordinates with body f = z and
// soul supported on powers [min_pow, max_pow]; g_b is solved from the
// first-order condition, so the data is exact.
inline N2Map random_sc_hom_range(std::mt19937& rng, int L, int min_pow, int max_pow) {
    const int top = L - 2;
    ComponentFunction f = superlift::ComponentFunction::identity_z(L) +
                          random_soul_laurent(rng, L, Parity::even, min_pow, max_pow, top);
    ComponentFunction psi_a = random_soul_laurent(rng, L, Parity::odd, min_pow, max_pow, top);
    ComponentFunction psi_b = random_soul_laurent(rng, L, Parity::odd, min_pow, max_pow, top);
    ComponentFunction g_a =
        ComponentFunction::constant(L, GrassmannNumber(L, 1.0)) +
        random_soul_laurent(rng, L, Parity::even, min_pow, max_pow, top);
    const ComponentFunction g_b = superlift::reciprocal(g_a) *
                                  (f.derivative() - psi_a.derivative() * psi_b +
                                   psi_a * psi_b.derivative());
    return superlift::make_n2_map(N2Coords::homogeneous, f, psi_a, psi_b, g_a, g_b);
}

inline N2Map random_sc_hom(std::mt19937& rng, int L, int max_deg = 3) {
    return random_sc_hom_range(rng, L, -max_deg, max_deg);
}

// Chart change analytic at the origin of its chart: soul on nonnegative
// powers only.
inline N2Map random_sc_entire(std::mt19937& rng, int L, int max_deg = 3) {
    return random_sc_hom_range(rng, L, 0, max_deg);
}

// Random N=1 superanalytic map with invertible g and body f = z; coefficients
// stay clear of the top two generators so the map can be enriched.
inline N1Map random_n1(std::mt19937& rng, int L, int max_deg = 3) {
    const int top = L - 2;
    ComponentFunction f = superlift::ComponentFunction::identity_z(L) +
                          random_soul_laurent(rng, L, Parity::even, -max_deg, max_deg, top);
    ComponentFunction xi = random_soul_laurent(rng, L, Parity::odd, -max_deg, max_deg, top);
    ComponentFunction psi = random_soul_laurent(rng, L, Parity::odd, -max_deg, max_deg, top);
    ComponentFunction g =
        ComponentFunction::constant(L, GrassmannNumber(L, 1.0)) +
        random_soul_laurent(rng, L, Parity::even, -max_deg, max_deg, top);
    return superlift::make_n1_map(f, xi, psi, g);
}

// Random evaluation point: even z with invertible body plus odd thetas.
inline GrassmannNumber random_even_pt(std::mt19937& rng, int L) {
    GrassmannNumber z = random_grassmann(rng, L, 0, false, 3) * 0.3;
    z.add_term(0, random_unit_cplx(rng) * 1.3);
    return z;
}

inline GrassmannNumber random_odd_pt(std::mt19937& rng, int L) {
    return random_grassmann(rng, L, 1, false, 3) * 0.5;
}

} // namespace testutil
