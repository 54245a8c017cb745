#pragma once

#include <array>
#include <vector>

#include "superlift/analytic.hpp"

namespace superlift {

// Polynomial in one or two odd variables with component-function coefficients,
//     S(z, theta) = sum_A theta^A c_A(z),
// theta monomials written to the left in ascending index order (bit 0 first).
// The declared parity is that of the whole field; the coefficient at mask A
// then has function parity  parity(S) xor |A|.
class SuperField {
public:
    SuperField() = default;

    SuperField(int L, int n_theta, Parity p) : L_(L), nt_(n_theta), par_(p) {
        if (n_theta != 1 && n_theta != 2)
            throw InputError("superfields carry one or two odd variables");
        for (auto& c : c_) c = ComponentFunction::zero(L, Parity::even);
        for (uint32_t a = 0; a < nmasks(); ++a)
            c_[a] = ComponentFunction::zero(L, coeff_parity(a));
    }

    static SuperField lift(const ComponentFunction& c, int n_theta) {
        SuperField s(c.generators(), n_theta, c.parity());
        s.c_[0] = c;
        return s;
    }

    // theta_j as a superfield (j is the 0-based variable index).
    static SuperField theta_monomial(int L, int n_theta, int j) {
        SuperField s(L, n_theta, Parity::odd);
        s.set_coeff(1u << j, ComponentFunction::constant(L, GrassmannNumber(L, 1.0)));
        return s;
    }

    int generators() const { return L_; }
    int n_theta() const { return nt_; }
    Parity parity() const { return par_; }
    uint32_t nmasks() const { return 1u << nt_; }

    const ComponentFunction& coeff(uint32_t mask) const {
        if (mask >= nmasks()) throw InputError("theta mask out of range");
        return c_[mask];
    }

    void set_coeff(uint32_t mask, ComponentFunction c) {
        if (mask >= nmasks()) throw InputError("theta mask out of range");
        if (c.generators() != L_) throw SizeMismatch("coefficient generator count");
        const Parity want = coeff_parity(mask);
        if (!c.is_zero() && c.parity() != want)
            throw ParityError("coefficient parity inconsistent with field parity");
        c_[mask] = c.is_zero() ? ComponentFunction::zero(L_, want) : std::move(c);
    }

    bool is_zero() const {
        for (uint32_t a = 0; a < nmasks(); ++a)
            if (!c_[a].is_zero()) return false;
        return true;
    }

    double max_coeff_abs() const {
        double m = 0.0;
        for (uint32_t a = 0; a < nmasks(); ++a) m = std::max(m, c_[a].max_coeff_abs());
        return m;
    }

    friend SuperField operator+(const SuperField& a, const SuperField& b) {
        a.check_combine(b);
        if (a.par_ != b.par_ && !a.is_zero() && !b.is_zero())
            throw ParityError("adding superfields of different parity");
        SuperField s(a.L_, a.nt_, a.is_zero() ? b.par_ : a.par_);
        for (uint32_t m = 0; m < a.nmasks(); ++m) {
            ComponentFunction sum = a.c_[m] + b.c_[m];
            s.c_[m] = sum.is_zero() ? ComponentFunction::zero(a.L_, s.coeff_parity(m))
                                    : std::move(sum);
        }
        return s;
    }

    friend SuperField operator-(const SuperField& a, const SuperField& b) {
        return a + (b * cplx{-1.0});
    }

    friend SuperField operator*(const SuperField& a, cplx s) {
        SuperField out = a;
        for (uint32_t m = 0; m < a.nmasks(); ++m) out.c_[m] = a.c_[m] * s;
        return out;
    }
    friend SuperField operator*(cplx s, const SuperField& a) { return a * s; }

    friend SuperField operator*(const SuperField& a, const SuperField& b) {
        a.check_combine(b);
        const Parity p = (a.par_ == b.par_) ? Parity::even : Parity::odd;
        SuperField s(a.L_, a.nt_, p);
        for (uint32_t ma = 0; ma < a.nmasks(); ++ma) {
            if (a.c_[ma].is_zero()) continue;
            for (uint32_t mb = 0; mb < b.nmasks(); ++mb) {
                if (b.c_[mb].is_zero()) continue;
                if (ma & mb) continue; // repeated odd variable
                double sign = reorder_sign(ma, mb);
                // moving c_A (of parity |c_A|) across theta^B
                if (a.c_[ma].parity() == Parity::odd && (std::popcount(mb) & 1)) sign = -sign;
                s.c_[ma | mb] = s.c_[ma | mb] + (a.c_[ma] * b.c_[mb]) * cplx(sign);
            }
        }
        return s;
    }

    // Left derivative with respect to theta_j.
    SuperField theta_derivative(int j) const {
        if (j < 0 || j >= nt_) throw InputError("odd variable index out of range");
        SuperField s(L_, nt_, par_ == Parity::even ? Parity::odd : Parity::even);
        const uint32_t bit = 1u << j;
        for (uint32_t m = 0; m < nmasks(); ++m) {
            if (!(m & bit) || c_[m].is_zero()) continue;
            const double sign = (std::popcount(m & (bit - 1)) & 1) ? -1.0 : 1.0;
            s.c_[m & ~bit] = s.c_[m & ~bit] + c_[m] * cplx(sign);
        }
        return s;
    }

    SuperField z_derivative() const {
        SuperField s(L_, nt_, par_);
        for (uint32_t m = 0; m < nmasks(); ++m)
            if (!c_[m].is_zero()) s.c_[m] = c_[m].derivative();
        return s;
    }

    // Full evaluation; thetas[j] must be odd points of the same algebra.
    GrassmannNumber eval(const GrassmannNumber& z,
                         const std::vector<GrassmannNumber>& thetas) const {
        if (static_cast<int>(thetas.size()) != nt_)
            throw SizeMismatch("one odd value per odd variable expected");
        for (const auto& t : thetas)
            if (!t.is_odd()) throw ParityError("odd arguments must be odd");
        GrassmannNumber out(L_);
        for (uint32_t m = 0; m < nmasks(); ++m) {
            if (c_[m].is_zero()) continue;
            GrassmannNumber mono(L_, 1.0);
            for (int j = 0; j < nt_; ++j)
                if (m & (1u << j)) mono = gr_mul(mono, thetas[j]);
            out += gr_mul(mono, c_[m].eval_at(z));
        }
        return out;
    }

private:
    Parity coeff_parity(uint32_t mask) const {
        const bool odd_mask = std::popcount(mask) & 1;
        const bool odd_field = par_ == Parity::odd;
        return (odd_mask != odd_field) ? Parity::odd : Parity::even;
    }

    void check_combine(const SuperField& b) const {
        if (L_ != b.L_) throw SizeMismatch("superfields use different generator counts");
        if (nt_ != b.nt_) throw SizeMismatch("superfields use different odd variable counts");
    }

    int L_ = 0;
    int nt_ = 1;
    Parity par_ = Parity::even;
    std::array<ComponentFunction, 4> c_{};
};

// max sampled distance between corresponding coefficients.
inline double sf_distance(const SuperField& a, const SuperField& b, int samples = 32,
                          double radius = 1.0) {
    double worst = 0.0;
    for (uint32_t m = 0; m < a.nmasks(); ++m)
        worst = std::max(worst, sample_distance(a.coeff(m), b.coeff(m), samples, radius));
    return worst;
}

// Composition f(W) of a component function with an even superfield, by the
// terminating Taylor series in the theta-carrying part N = W - c_0(W):
//     f(W) = sum_l N^l / l! f^(l)(c_0).
inline SuperField sf_compose(const ComponentFunction& f, const SuperField& w) {
    if (w.parity() != Parity::even && !w.is_zero())
        throw ParityError("substituted even slot requires an even superfield");
    const int nt = w.n_theta();
    const ComponentFunction w0 = w.coeff(0);
    SuperField n = w;
    n.set_coeff(0, ComponentFunction::zero(w.generators(), Parity::even));
    SuperField out(f.generators(), nt, f.parity());
    SuperField npow = SuperField::lift(
        ComponentFunction::constant(f.generators(), GrassmannNumber(f.generators(), 1.0)), nt);
    ComponentFunction fl = f;
    double fact = 1.0;
    for (int l = 0;; ++l) {
        if (l > 0) {
            npow = npow * n;
            if (npow.is_zero()) break;
            fact *= l;
            fl = fl.derivative();
        }
        out = out + npow * SuperField::lift(compose(fl, w0), nt) * cplx(1.0 / fact);
    }
    return out;
}

// Substitution of a full coordinate change into S: z -> E, theta_j -> O[j].
inline SuperField sf_substitute(const SuperField& s, const SuperField& e,
                                const std::vector<SuperField>& o) {
    if (static_cast<int>(o.size()) != s.n_theta())
        throw SizeMismatch("one odd field per odd variable expected");
    SuperField out(s.generators(), e.n_theta(), s.parity());
    for (uint32_t m = 0; m < s.nmasks(); ++m) {
        if (s.coeff(m).is_zero()) continue;
        SuperField mono = SuperField::lift(
            ComponentFunction::constant(s.generators(), GrassmannNumber(s.generators(), 1.0)),
            e.n_theta());
        for (int j = 0; j < s.n_theta(); ++j)
            if (m & (1u << j)) mono = mono * o[static_cast<size_t>(j)];
        out = out + mono * sf_compose(s.coeff(m), e);
    }
    return out;
}

} // namespace superlift
