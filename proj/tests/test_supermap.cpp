#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "superlift/supermap.hpp"
#include "map_util.hpp"

using namespace superlift;
using testutil::random_even_pt;
using testutil::random_n1;
using testutil::random_odd_pt;
using testutil::random_sc_hom;

namespace {

SuperField theta_sf(int L, int j) { return SuperField::theta_monomial(L, 2, j); }

// D^+ = d/dth+ + th- d/dz  and  D^- = d/dth- + th+ d/dz  on two odd variables
SuperField d_plus(const SuperField& s) {
    return s.theta_derivative(0) + theta_sf(s.generators(), 1) * s.z_derivative();
}
SuperField d_minus(const SuperField& s) {
    return s.theta_derivative(1) + theta_sf(s.generators(), 0) * s.z_derivative();
}
// D_j = d/dth_j + th_j d/dz (nonhomogeneous system)
SuperField d_j(const SuperField& s, int j) {
    return s.theta_derivative(j) + theta_sf(s.generators(), j) * s.z_derivative();
}

double triple_dev(const FieldTriple& a, const FieldTriple& b) {
    return std::max({(a.z_out - b.z_out).max_coeff_abs(),
                     (a.theta_a - b.theta_a).max_coeff_abs(),
                     (a.theta_b - b.theta_b).max_coeff_abs()});
}

} // namespace

TEST_CASE("square of an odd superderivation is the even derivative") {
    const int L = 6;
    std::mt19937 rng(101);
    // a generic mixed superfield assembled from random coefficients
    SuperField s(L, 2, Parity::even);
    s.set_coeff(0, testutil::random_soul_laurent(rng, L, Parity::even, -2, 2, L) +
                       ComponentFunction::identity_z(L));
    s.set_coeff(1, testutil::random_soul_laurent(rng, L, Parity::odd, -2, 2, L));
    s.set_coeff(2, testutil::random_soul_laurent(rng, L, Parity::odd, -2, 2, L));
    s.set_coeff(3, testutil::random_soul_laurent(rng, L, Parity::even, -2, 2, L));
    CHECK(d_plus(d_plus(s)).max_coeff_abs() < 1e-12);
    CHECK(d_minus(d_minus(s)).max_coeff_abs() < 1e-12);
    const SuperField anti = d_plus(d_minus(s)) + d_minus(d_plus(s));
    CHECK((anti - s.z_derivative() * cplx{2.0}).max_coeff_abs() < 1e-12);
}

TEST_CASE("homogeneous expansion satisfies the defining derivation identities") {
    const int L = 6;
    std::mt19937 rng(103);
    for (int it = 0; it < 10; ++it) {
        const N2Map h = random_sc_hom(rng, L);
        REQUIRE(superconformal_residual(h) < 1e-11);
        const FieldTriple t = expand(h);
        CHECK(d_plus(t.theta_b).max_coeff_abs() < 1e-11);
        CHECK(d_minus(t.theta_a).max_coeff_abs() < 1e-11);
        const SuperField r_p = d_plus(t.z_out) - t.theta_b * d_plus(t.theta_a);
        const SuperField r_m = d_minus(t.z_out) - t.theta_a * d_minus(t.theta_b);
        CHECK(r_p.max_coeff_abs() < 1e-11);
        CHECK(r_m.max_coeff_abs() < 1e-11);
    }
}

TEST_CASE("nonhomogeneous expansion satisfies its derivation identities") {
    const int L = 6;
    std::mt19937 rng(107);
    for (int it = 0; it < 10; ++it) {
        const N2Map h = to_nonhomogeneous(random_sc_hom(rng, L));
        CHECK(superconformal_residual(h) < 1e-11);
        const FieldTriple t = expand(h);
        CHECK((d_j(t.theta_a, 0) - d_j(t.theta_b, 1)).max_coeff_abs() < 1e-11);
        CHECK((d_j(t.theta_b, 0) + d_j(t.theta_a, 1)).max_coeff_abs() < 1e-11);
        for (int j = 0; j < 2; ++j) {
            const SuperField r = d_j(t.z_out, j) - t.theta_a * d_j(t.theta_a, j) -
                                 t.theta_b * d_j(t.theta_b, j);
            CHECK(r.max_coeff_abs() < 1e-11);
        }
    }
}

TEST_CASE("coordinate conversion round-trips and matches theta substitution") {
    const int L = 6;
    const cplx i{0.0, 1.0};
    const double rt2 = std::numbers::sqrt2;
    std::mt19937 rng(109);
    for (int it = 0; it < 6; ++it) {
        const N2Map h = random_sc_hom(rng, L);
        const N2Map nh = to_nonhomogeneous(h);
        CHECK(data_distance(to_homogeneous(nh), h) < 1e-12);

        // substitute th+ = (th1 + i th2)/sqrt2, th- = (th1 - i th2)/sqrt2 into
        // the homogeneous fields and compare with the nonhomogeneous expansion
        const SuperField th1 = theta_sf(L, 0), th2 = theta_sf(L, 1);
        const std::vector<SuperField> o{(th1 + th2 * i) * (1.0 / rt2),
                                        (th1 - th2 * i) * (1.0 / rt2)};
        const SuperField e = SuperField::lift(ComponentFunction::identity_z(L), 2);
        const FieldTriple th = expand(h);
        const FieldTriple tn = expand(nh);
        CHECK((sf_substitute(th.z_out, e, o) - tn.z_out).max_coeff_abs() < 1e-12);
        const SuperField tilde_p = sf_substitute(th.theta_a, e, o);
        const SuperField tilde_m = sf_substitute(th.theta_b, e, o);
        CHECK(((tilde_p + tilde_m) * (1.0 / rt2) - tn.theta_a).max_coeff_abs() < 1e-12);
        CHECK(((tilde_p - tilde_m) * (-i / rt2) - tn.theta_b).max_coeff_abs() < 1e-12);
    }
}

TEST_CASE("composition agrees with pointwise evaluation of the fields") {
    const int L = 6;
    std::mt19937 rng(113);
    for (int it = 0; it < 6; ++it) {
        const N2Map h1 = random_sc_hom(rng, L, 2);
        const N2Map h2 = random_sc_hom(rng, L, 2);
        const N2Map h12 = compose(h1, h2);
        const FieldTriple t1 = expand(h1), t2 = expand(h2), t12 = expand(h12);
        for (int k = 0; k < 5; ++k) {
            const GrassmannNumber z = random_even_pt(rng, L);
            const std::vector<GrassmannNumber> th{random_odd_pt(rng, L), random_odd_pt(rng, L)};
            const GrassmannNumber zm = t2.z_out.eval(z, th);
            const std::vector<GrassmannNumber> thm{t2.theta_a.eval(z, th),
                                                   t2.theta_b.eval(z, th)};
            CHECK(approx_equal(t12.z_out.eval(z, th), t1.z_out.eval(zm, thm), 1e-8));
            CHECK(approx_equal(t12.theta_a.eval(z, th), t1.theta_a.eval(zm, thm), 1e-8));
            CHECK(approx_equal(t12.theta_b.eval(z, th), t1.theta_b.eval(zm, thm), 1e-8));
        }
    }
}

TEST_CASE("composites of superconformal maps stay in display shape") {
    const int L = 6;
    std::mt19937 rng(127);
    for (int it = 0; it < 6; ++it) {
        const N2Map h1 = random_sc_hom(rng, L, 2);
        const N2Map h2 = random_sc_hom(rng, L, 2);
        const N2Map h12 = compose(h1, h2);
        CHECK(superconformal_residual(h12) < 1e-10);
        const FieldTriple direct = detail::substitute_triple(expand(h1), expand(h2));
        CHECK(triple_dev(direct, expand(h12)) < 1e-10);
    }
}

TEST_CASE("composition is associative") {
    const int L = 6;
    std::mt19937 rng(131);
    const N2Map a = random_sc_hom(rng, L, 2);
    const N2Map b = random_sc_hom(rng, L, 2);
    const N2Map c = random_sc_hom(rng, L, 2);
    CHECK(data_distance(compose(compose(a, b), c), compose(a, compose(b, c))) < 1e-9);
}

TEST_CASE("inverse of the degree-zero coordinate swap has the known data") {
    const int L = 4;
    // (1/z, i th+ / z, i th- / z): swaps the two half-sphere charts
    N2Map t;
    t.coords = N2Coords::homogeneous;
    t.f = ComponentFunction::monomial(L, Parity::even, -1, GrassmannNumber(L, 1.0));
    t.psi_a = ComponentFunction::zero(L, Parity::odd);
    t.psi_b = ComponentFunction::zero(L, Parity::odd);
    t.g_a = ComponentFunction::monomial(L, Parity::even, -1, GrassmannNumber(L, cplx{0.0, 1.0}));
    t.g_b = ComponentFunction::monomial(L, Parity::even, -1, GrassmannNumber(L, cplx{0.0, 1.0}));
    REQUIRE(superconformal_residual(t) < 1e-14);
    const N2Map k = invert(t);
    CHECK((k.f - t.f).max_coeff_abs() < 1e-12);
    CHECK((k.g_a - ComponentFunction::monomial(L, Parity::even, -1,
                                               GrassmannNumber(L, cplx{0.0, -1.0})))
              .max_coeff_abs() < 1e-12);
    CHECK(k.psi_a.is_zero());
}

TEST_CASE("inverse composes to the identity on both sides") {
    const int L = 6;
    std::mt19937 rng(137);
    const N2Map id = identity_n2(L, N2Coords::homogeneous);
    for (int it = 0; it < 5; ++it) {
        const N2Map h = random_sc_hom(rng, L, 2);
        const N2Map k = invert(h);
        CHECK(data_distance(compose(h, k), id) < 1e-9);
        CHECK(data_distance(compose(k, h), id) < 1e-9);
    }
    // nonhomogeneous data goes through the rotation-valued g slots
    for (int it = 0; it < 3; ++it) {
        const N2Map h = to_nonhomogeneous(random_sc_hom(rng, L, 2));
        const N2Map k = invert(h);
        CHECK(data_distance(compose(h, k), to_nonhomogeneous(id)) < 1e-9);
    }
}

TEST_CASE("inverse handles chart-swapping body maps") {
    const int L = 6;
    std::mt19937 rng(139);
    const N2Map id = identity_n2(L, N2Coords::homogeneous);
    for (int it = 0; it < 4; ++it) {
        N2Map h = random_sc_hom(rng, L, 2);
        // push the body into 1/z while keeping the data superconformal
        h.f = ComponentFunction::monomial(L, Parity::even, -1, GrassmannNumber(L, 1.0)) +
              testutil::random_soul_laurent(rng, L, Parity::even, -2, 2, L - 2);
        h.g_a = ComponentFunction::monomial(L, Parity::even, -1,
                                            GrassmannNumber(L, cplx{0.0, 1.0})) +
                testutil::random_soul_laurent(rng, L, Parity::even, -2, 2, L - 2);
        h.g_b = reciprocal(h.g_a) * (h.f.derivative() - h.psi_a.derivative() * h.psi_b +
                                     h.psi_a * h.psi_b.derivative());
        REQUIRE(superconformal_residual(h) < 1e-11);
        const N2Map k = invert(h);
        CHECK(data_distance(compose(h, k), id) < 1e-9);
    }
}

TEST_CASE("the two directions of the superanalytic correspondence cancel") {
    const int L = 6;
    std::mt19937 rng(149);
    for (int it = 0; it < 10; ++it) {
        const N2Map h = random_sc_hom(rng, L);
        CHECK(data_distance(f2_functor(f1_functor(h)), h) < 1e-12);
    }
    for (int it = 0; it < 10; ++it) {
        const N1Map h = random_n1(rng, L);
        CHECK(data_distance(f1_functor(f2_functor(h)), h) < 1e-12);
    }
}

TEST_CASE("the enriching direction lands on superconformal data") {
    const int L = 6;
    std::mt19937 rng(151);
    for (int it = 0; it < 10; ++it) {
        const N2Map h = f2_functor(random_n1(rng, L));
        CHECK(superconformal_residual(h) < 1e-11);
    }
}

TEST_CASE("the forgetful direction is conjugation by the shear change") {
    const int L = 6;
    std::mt19937 rng(153);
    // phi: (z, th+, th-) -> (z + th+ th-, th+, th-), with inverse using -th+th-
    const SuperField th_p = theta_sf(L, 0), th_m = theta_sf(L, 1);
    const SuperField zf = SuperField::lift(ComponentFunction::identity_z(L), 2);
    FieldTriple phi{zf + th_p * th_m, th_p, th_m};
    FieldTriple phi_inv{zf - th_p * th_m, th_p, th_m};
    for (int it = 0; it < 5; ++it) {
        const N2Map h = random_sc_hom(rng, L, 2);
        const FieldTriple conj = detail::substitute_triple(
            phi, detail::substitute_triple(expand(h), phi_inv));
        const N1Map n1 = f1_functor(h);
        // the (u, eta) block of the conjugated triple is the forgotten map and
        // carries no dependence on the dropped odd variable
        CHECK((conj.z_out.coeff(0) - n1.f).max_coeff_abs() < 1e-11);
        CHECK((conj.z_out.coeff(1) - n1.xi).max_coeff_abs() < 1e-11);
        CHECK(conj.z_out.coeff(2).max_coeff_abs() < 1e-11);
        CHECK(conj.z_out.coeff(3).max_coeff_abs() < 1e-11);
        CHECK((conj.theta_a.coeff(0) - n1.psi).max_coeff_abs() < 1e-11);
        CHECK((conj.theta_a.coeff(1) - n1.g).max_coeff_abs() < 1e-11);
        CHECK(conj.theta_a.coeff(2).max_coeff_abs() < 1e-11);
        CHECK(conj.theta_a.coeff(3).max_coeff_abs() < 1e-11);
    }
}

TEST_CASE("the forgetful direction preserves composition") {
    const int L = 6;
    std::mt19937 rng(157);
    for (int it = 0; it < 5; ++it) {
        const N2Map a = random_sc_hom(rng, L, 2);
        const N2Map b = random_sc_hom(rng, L, 2);
        const N1Map lhs = f1_functor(compose(a, b));
        const N1Map rhs = compose(f1_functor(a), f1_functor(b));
        CHECK(data_distance(lhs, rhs) < 1e-10);
    }
}

TEST_CASE("superconformal N=1 data from a square root") {
    const int L = 6;
    std::mt19937 rng(163);
    for (int it = 0; it < 8; ++it) {
        const ComponentFunction f =
            ComponentFunction::identity_z(L) +
            testutil::random_soul_laurent(rng, L, Parity::even, -2, 2, L - 1);
        const ComponentFunction psi =
            testutil::random_soul_laurent(rng, L, Parity::odd, -2, 2, L - 1);
        const N1Map h = build_n1_superconformal(f, psi);
        CHECK(n1_superconformal_residual(h) < 1e-11);
        const N1Map hn = build_n1_superconformal(f, psi, SqrtBranch::negative);
        CHECK((h.g + hn.g).max_coeff_abs() < 1e-11);
        CHECK(n1_superconformal_residual(hn) < 1e-11);
    }
}

TEST_CASE("N=1 composition keeps all four data slots") {
    const int L = 6;
    std::mt19937 rng(167);
    for (int it = 0; it < 5; ++it) {
        const N1Map a = random_n1(rng, L, 2);
        const N1Map b = random_n1(rng, L, 2);
        const N1Map ab = compose(a, b);
        const FieldPair pa = expand(a), pb = expand(b), pab = expand(ab);
        for (int k = 0; k < 5; ++k) {
            const GrassmannNumber z = random_even_pt(rng, L);
            const std::vector<GrassmannNumber> th{random_odd_pt(rng, L)};
            const GrassmannNumber zm = pb.z_out.eval(z, th);
            const std::vector<GrassmannNumber> thm{pb.theta_out.eval(z, th)};
            CHECK(approx_equal(pab.z_out.eval(z, th), pa.z_out.eval(zm, thm), 1e-8));
            CHECK(approx_equal(pab.theta_out.eval(z, th), pa.theta_out.eval(zm, thm), 1e-8));
        }
    }
}

TEST_CASE("map constructors enforce the coefficient subalgebra") {
    const int L = 6;
    // a psi coefficient that touches the last generator must be rejected
    const ComponentFunction bad_psi = ComponentFunction::monomial(
        L, Parity::odd, 0, GrassmannNumber::generator(L, L));
    CHECK_THROWS_AS(make_n2_map(N2Coords::homogeneous, ComponentFunction::identity_z(L),
                                bad_psi, ComponentFunction::zero(L, Parity::odd),
                                ComponentFunction::constant(L, GrassmannNumber(L, 1.0)),
                                ComponentFunction::constant(L, GrassmannNumber(L, 1.0))),
                    InputError);
    // the same coefficient is fine for an N=1 map, which reserves only one
    CHECK_NOTHROW(make_n1_map(ComponentFunction::identity_z(L),
                              ComponentFunction::zero(L, Parity::odd), bad_psi * cplx{0.0},
                              ComponentFunction::constant(L, GrassmannNumber(L, 1.0))));
    const ComponentFunction edge_psi = ComponentFunction::monomial(
        L, Parity::odd, 0, GrassmannNumber::generator(L, L - 1));
    CHECK_NOTHROW(make_n1_map(ComponentFunction::identity_z(L),
                              ComponentFunction::zero(L, Parity::odd), edge_psi,
                              ComponentFunction::constant(L, GrassmannNumber(L, 1.0))));
    CHECK_THROWS_AS(make_n2_map(N2Coords::homogeneous, ComponentFunction::identity_z(L),
                                edge_psi, ComponentFunction::zero(L, Parity::odd),
                                ComponentFunction::constant(L, GrassmannNumber(L, 1.0)),
                                ComponentFunction::constant(L, GrassmannNumber(L, 1.0))),
                    InputError);
}
