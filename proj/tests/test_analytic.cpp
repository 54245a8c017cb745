#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "superlift/analytic.hpp"
#include "test_util.hpp"

using namespace superlift;
using testutil::random_grassmann;

namespace {

GrassmannNumber zeta(int L, int j) { return GrassmannNumber::generator(L, j); }

// Random Laurent function with Grassmann coefficients of the declared parity.
ComponentFunction random_laurent(std::mt19937& rng, int L, Parity p, int min_pow, int max_pow,
                                 bool with_body = true) {
    std::map<int, GrassmannNumber> coeffs;
    std::uniform_int_distribution<int> pow_dist(min_pow, max_pow);
    for (int k = 0; k < 4; ++k) {
        const int n = pow_dist(rng);
        GrassmannNumber c = random_grassmann(rng, L, p == Parity::even ? 0 : 1,
                                             /*with_body=*/p == Parity::even && with_body, 3);
        auto [it, fresh] = coeffs.try_emplace(n, c);
        if (!fresh) it->second += c;
    }
    return ComponentFunction::laurent(L, p, std::move(coeffs));
}

GrassmannNumber random_even_point(std::mt19937& rng, int L) {
    GrassmannNumber z = random_grassmann(rng, L, 0, false, 3) * 0.3;
    z.add_term(0, testutil::random_unit_cplx(rng) * 1.3);
    return z;
}

} // namespace

TEST_CASE("polynomial evaluation extends through nilpotent shifts") {
    const int L = 4;
    auto f = ComponentFunction::laurent(L, Parity::even,
                                        {{2, GrassmannNumber(L, 1.0)}}); // z^2
    GrassmannNumber z(L, 1.0);
    z.add_term(0b0011, 1.0); // 1 + zeta1 zeta2
    const GrassmannNumber v = f.eval_at(z);
    CHECK(std::abs(v.body() - 1.0) < 1e-12);
    CHECK(std::abs(v.coeff(0b0011) - 2.0) < 1e-12);
    CHECK(v.pruned(1e-12).terms().size() == 2);
}

TEST_CASE("Laurent evaluation inverts through the soul") {
    const int L = 4;
    auto f = ComponentFunction::laurent(L, Parity::even,
                                        {{-1, GrassmannNumber(L, 1.0)}}); // 1/z
    GrassmannNumber z(L, 2.0);
    z.add_term(0b0011, 1.0); // 2 + zeta1 zeta2
    const GrassmannNumber v = f.eval_at(z);
    CHECK(std::abs(v.body() - 0.5) < 1e-12);
    CHECK(std::abs(v.coeff(0b0011) - (-0.25)) < 1e-12);

    GrassmannNumber at_puncture(L);
    at_puncture.add_term(0b0011, 1.0);
    CHECK_THROWS_AS(f.eval_at(at_puncture), OutsideDomain);
}

TEST_CASE("exponential form evaluates through the soul") {
    const int L = 4;
    const cplx rate = cplx(0.0, std::numbers::pi); // e^{2 pi i (z/2)}
    auto f = ComponentFunction::exp_affine(L, GrassmannNumber(L, 1.0),
                                           GrassmannNumber::monomial(L, 0, rate));
    GrassmannNumber z(L, 1.0);
    z.add_term(0b1111, 1.0); // 1 + zeta1 zeta2 zeta3 zeta4
    const GrassmannNumber v = f.eval_at(z);
    CHECK(std::abs(v.body() - cplx(-1.0, 0.0)) < 1e-12);
    CHECK(std::abs(v.coeff(0b1111) - cplx(-1.0) * rate) < 1e-12);
}

TEST_CASE("soul rate folds into a terminating polynomial factor") {
    const int L = 4;
    GrassmannNumber rate(L, 0.7);
    rate.add_term(0b0011, 2.0);
    auto f = ComponentFunction::exp_affine(L, GrassmannNumber(L, 1.0), rate);
    REQUIRE(f.terms().size() == 1);
    CHECK(f.terms()[0].rate == cplx(0.7));
    // value check against gr_exp of the full exponent
    std::mt19937 rng(11);
    for (int it = 0; it < 10; ++it) {
        const GrassmannNumber z = random_even_point(rng, L);
        const GrassmannNumber expect = gr_exp(gr_mul(rate, z));
        CHECK(approx_equal(f.eval_at(z), expect, 1e-11));
    }
}

TEST_CASE("winding degree by the argument principle") {
    const int L = 4;
    CHECK(winding_degree(ComponentFunction::monomial(L, Parity::even, 3,
                                                     GrassmannNumber(L, 1.0))) == 3);
    auto g = ComponentFunction::laurent(
        L, Parity::even,
        {{0, GrassmannNumber(L, 2.0)}, {5, GrassmannNumber::monomial(L, 0b0011, 1.0)}});
    CHECK(winding_degree(g) == 0);
    CHECK(winding_degree(ComponentFunction::monomial(L, Parity::even, -2,
                                                     GrassmannNumber(L, 3.0))) == -2);
    auto soul_only = ComponentFunction::laurent(
        L, Parity::even, {{1, GrassmannNumber::monomial(L, 0b0011, 1.0)}});
    CHECK_THROWS_AS(winding_degree(soul_only), BodyVanishes);
}

TEST_CASE("winding degree is additive under products") {
    const int L = 4;
    std::mt19937 rng(17);
    for (int it = 0; it < 20; ++it) {
        std::uniform_int_distribution<int> nd(-3, 3);
        const int n1 = nd(rng), n2 = nd(rng);
        auto f = ComponentFunction::monomial(L, Parity::even, n1,
                                             GrassmannNumber(L, testutil::random_unit_cplx(rng)));
        auto g = ComponentFunction::monomial(L, Parity::even, n2,
                                             GrassmannNumber(L, testutil::random_unit_cplx(rng)));
        // soul-perturb both; souls never change the winding
        f = f + random_laurent(rng, L, Parity::even, -2, 2, false);
        g = g + random_laurent(rng, L, Parity::even, -2, 2, false);
        CHECK(winding_degree(f) == n1);
        CHECK(winding_degree(f * g) == n1 + n2);
    }
}

TEST_CASE("arithmetic commutes with evaluation") {
    const int L = 6;
    std::mt19937 rng(23);
    for (int it = 0; it < 25; ++it) {
        const auto f = random_laurent(rng, L, Parity::even, -3, 3);
        const auto g = random_laurent(rng, L, Parity::even, -3, 3);
        const auto h = random_laurent(rng, L, Parity::odd, -3, 3);
        const GrassmannNumber z = random_even_point(rng, L);
        CHECK(approx_equal((f + g).eval_at(z), f.eval_at(z) + g.eval_at(z), 1e-10));
        CHECK(approx_equal((f * g).eval_at(z), gr_mul(f.eval_at(z), g.eval_at(z)), 1e-9));
        CHECK(approx_equal((f * h).eval_at(z), gr_mul(f.eval_at(z), h.eval_at(z)), 1e-9));
        CHECK((f * h).parity() == Parity::odd);
        CHECK((h * h).parity() == Parity::even);
    }
}

TEST_CASE("symbolic derivative matches a central difference on the body") {
    const int L = 6;
    std::mt19937 rng(29);
    for (int it = 0; it < 20; ++it) {
        auto f = random_laurent(rng, L, Parity::even, -3, 3);
        f = f * ComponentFunction::exp_affine(
                    L, GrassmannNumber(L, 1.0),
                    GrassmannNumber::monomial(L, 0, 0.3 * testutil::random_unit_cplx(rng)));
        const ComponentFunction df = f.derivative();
        const cplx z0 = 1.1 * testutil::random_unit_cplx(rng);
        const double h = 1e-5;
        const cplx fd = (f.body_eval(z0 + h) - f.body_eval(z0 - h)) / (2.0 * h);
        const cplx sym = df.body_eval(z0);
        CHECK(std::abs(fd - sym) < 1e-6 * (1.0 + std::abs(sym)));
    }
}

TEST_CASE("derivative satisfies the product rule symbolically") {
    const int L = 6;
    std::mt19937 rng(31);
    for (int it = 0; it < 10; ++it) {
        const auto f = random_laurent(rng, L, Parity::even, -2, 2);
        const auto g = random_laurent(rng, L, Parity::odd, -2, 2);
        const auto lhs = (f * g).derivative();
        const auto rhs = f.derivative() * g + f * g.derivative();
        CHECK((lhs - rhs).max_coeff_abs() < 1e-10);
    }
}

TEST_CASE("composition agrees with pointwise evaluation") {
    const int L = 6;
    std::mt19937 rng(37);
    for (int it = 0; it < 15; ++it) {
        // affine body with a soul shift acting on a polynomial
        const auto f = random_laurent(rng, L, Parity::even, 0, 3);
        GrassmannNumber shift = random_grassmann(rng, L, 0, false, 2) * 0.4;
        shift.add_term(0, 0.3);
        auto g = ComponentFunction::laurent(
            L, Parity::even,
            {{1, GrassmannNumber(L, 1.5 * testutil::random_unit_cplx(rng))}, {0, shift}});
        const auto fg = compose(f, g);
        for (int k = 0; k < 4; ++k) {
            const GrassmannNumber z = random_even_point(rng, L);
            CHECK(approx_equal(fg.eval_at(z), f.eval_at(g.eval_at(z)), 1e-8));
        }

        // c/z body with an even soul on top of a full Laurent function
        const auto fl = random_laurent(rng, L, Parity::even, -3, 3);
        auto r = ComponentFunction::laurent(
            L, Parity::even,
            {{-1, GrassmannNumber(L, 2.0)},
             {1, random_grassmann(rng, L, 0, false, 2) * 0.3}});
        const auto fr = compose(fl, r);
        for (int k = 0; k < 4; ++k) {
            const GrassmannNumber z = random_even_point(rng, L);
            CHECK(approx_equal(fr.eval_at(z), fl.eval_at(r.eval_at(z)), 1e-8));
        }
    }
}

TEST_CASE("composition with exponential outer parts") {
    const int L = 6;
    std::mt19937 rng(41);
    const auto f = ComponentFunction::exp_affine(L, GrassmannNumber(L, 2.0),
                                                 GrassmannNumber::monomial(L, 0, cplx(0.0, 1.0)));
    GrassmannNumber shift = random_grassmann(rng, L, 0, false, 2) * 0.5;
    shift.add_term(0, -0.2);
    const auto g = ComponentFunction::laurent(
        L, Parity::even, {{1, GrassmannNumber(L, 0.7)}, {0, shift}});
    const auto fg = compose(f, g);
    for (int k = 0; k < 6; ++k) {
        const GrassmannNumber z = random_even_point(rng, L);
        CHECK(approx_equal(fg.eval_at(z), f.eval_at(g.eval_at(z)), 1e-9));
    }
}

TEST_CASE("unsupported inner bodies are rejected symbolically") {
    const int L = 4;
    const auto f = ComponentFunction::identity_z(L);
    const auto sq = ComponentFunction::monomial(L, Parity::even, 2, GrassmannNumber(L, 1.0));
    CHECK_THROWS_AS(compose(f, sq), UnsupportedComposition);
    const auto mix = ComponentFunction::laurent(
        L, Parity::even, {{-1, GrassmannNumber(L, 1.0)}, {1, GrassmannNumber(L, 1.0)}});
    CHECK_THROWS_AS(compose(f, mix), UnsupportedComposition);
    CHECK_THROWS_AS(compose(f, ComponentFunction::monomial(L, Parity::odd, 0, zeta(L, 1))),
                    ParityError);
}

TEST_CASE("sampled composition covers nonlinear inner bodies") {
    const int L = 6;
    std::mt19937 rng(43);
    const auto f = random_laurent(rng, L, Parity::even, 0, 3);
    const auto sq = ComponentFunction::laurent(
        L, Parity::even,
        {{2, GrassmannNumber(L, 1.0)}, {0, random_grassmann(rng, L, 0, false, 2) * 0.3}});
    const auto fg = compose(f, sq, /*allow_sampled=*/true);
    CHECK(fg.is_sampled());
    for (int k = 0; k < 6; ++k) {
        const GrassmannNumber z = random_even_point(rng, L);
        CHECK(approx_equal(fg.eval_at(z), f.eval_at(sq.eval_at(z)), 1e-8));
    }
}

TEST_CASE("reciprocal inverts monomial-body functions") {
    const int L = 6;
    std::mt19937 rng(47);
    for (int it = 0; it < 10; ++it) {
        std::uniform_int_distribution<int> nd(-3, 3);
        auto f = ComponentFunction::monomial(L, Parity::even, nd(rng),
                                             GrassmannNumber(L, testutil::random_unit_cplx(rng) * 2.0));
        f = f + random_laurent(rng, L, Parity::even, -2, 2, false);
        const auto g = reciprocal(f);
        const auto one = f * g;
        const auto unit = ComponentFunction::constant(L, GrassmannNumber(L, 1.0));
        CHECK((one - unit).max_coeff_abs() < 1e-10);
    }
    const auto two_mono = ComponentFunction::laurent(
        L, Parity::even, {{0, GrassmannNumber(L, 1.0)}, {1, GrassmannNumber(L, 1.0)}});
    CHECK_THROWS_AS(reciprocal(two_mono), NonInvertible);
    CHECK_THROWS_AS(reciprocal(ComponentFunction::zero(L, Parity::even)), NonInvertible);
}

TEST_CASE("square roots exist for even body winding and square back") {
    const int L = 6;
    std::mt19937 rng(53);
    for (int it = 0; it < 10; ++it) {
        std::uniform_int_distribution<int> nd(-1, 1);
        auto f = ComponentFunction::monomial(L, Parity::even, 2 * nd(rng),
                                             GrassmannNumber(L, testutil::random_unit_cplx(rng) * 3.0));
        f = f + random_laurent(rng, L, Parity::even, -1, 1, false);
        const auto r = sqrt_fn(f);
        CHECK((r * r - f).max_coeff_abs() < 1e-10);
        const auto rn = sqrt_fn(f, SqrtBranch::negative);
        CHECK((rn * rn - f).max_coeff_abs() < 1e-10);
        CHECK((r + rn).max_coeff_abs() < 1e-10);
    }
    CHECK_THROWS_AS(sqrt_fn(ComponentFunction::identity_z(L)), NoSquareRoot);
}

TEST_CASE("exp and log round-trip on their symbolic domains") {
    const int L = 6;
    std::mt19937 rng(59);
    for (int it = 0; it < 10; ++it) {
        // exp of affine-plus-soul, then log back
        auto a = ComponentFunction::laurent(
            L, Parity::even,
            {{0, GrassmannNumber(L, 0.4 * testutil::random_unit_cplx(rng))},
             {1, GrassmannNumber(L, 0.9 * testutil::random_unit_cplx(rng))}});
        a = a + random_laurent(rng, L, Parity::even, -2, 2, false);
        const auto e = exp_fn(a);
        for (int k = 0; k < 3; ++k) {
            const GrassmannNumber z = random_even_point(rng, L);
            CHECK(approx_equal(e.eval_at(z), gr_exp(a.eval_at(z)), 1e-9));
        }
        const auto back = log_fn(e);
        CHECK(sample_distance(back, a) < 1e-9);
    }
    CHECK_THROWS_AS(exp_fn(ComponentFunction::monomial(L, Parity::even, 2, GrassmannNumber(L, 1.0))),
                    UnsupportedComposition);
    CHECK_THROWS_AS(log_fn(ComponentFunction::identity_z(L)), UnsupportedComposition);
}

TEST_CASE("sampled functions expose windings of exponentiated Laurent data") {
    const int L = 4;
    // e^{p(z)} with p containing negative powers: winding 0 around |z| = 1
    const auto p = ComponentFunction::laurent(
        L, Parity::even,
        {{-1, GrassmannNumber(L, 0.7)}, {2, GrassmannNumber(L, cplx(0.0, 0.4))}});
    const auto f = ComponentFunction::sampled(
        L, Parity::even,
        [p, L](cplx z) {
            Jet j;
            j.base = z;
            j.deriv.push_back(GrassmannNumber(L, std::exp(p.body_eval(z))));
            return j;
        },
        0, Domain::annulus);
    CHECK(winding_degree(f) == 0);
}

TEST_CASE("jets reproduce derivatives and compose exactly") {
    const int L = 6;
    std::mt19937 rng(61);
    const auto f = random_laurent(rng, L, Parity::even, -2, 3);
    const Jet j = f.jet_at(1.3, 3);
    CHECK(approx_equal(j.deriv[1], f.derivative().eval_at(GrassmannNumber(L, 1.3)), 1e-10));
    CHECK(approx_equal(j.deriv[3],
                       f.derivative().derivative().derivative().eval_at(GrassmannNumber(L, 1.3)),
                       1e-9));
}
