#pragma once

#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include "superlift/grassmann.hpp"

namespace superlift {

enum class Domain { entire, punctured, annulus };

// Taylor data of a component function at a body point: deriv[l] = f^(l)(base).
struct Jet {
    cplx base = 0.0;
    std::vector<GrassmannNumber> deriv;

    int order() const { return static_cast<int>(deriv.size()) - 1; }
};

inline Jet jet_add(const Jet& a, const Jet& b) {
    Jet out;
    out.base = a.base;
    const size_t n = std::min(a.deriv.size(), b.deriv.size());
    out.deriv.reserve(n);
    for (size_t l = 0; l < n; ++l) out.deriv.push_back(a.deriv[l] + b.deriv[l]);
    return out;
}

// Leibniz rule; the result carries the shorter of the two orders.
inline Jet jet_mul(const Jet& a, const Jet& b) {
    Jet out;
    out.base = a.base;
    const size_t n = std::min(a.deriv.size(), b.deriv.size());
    for (size_t l = 0; l < n; ++l) {
        GrassmannNumber acc;
        double binom = 1.0;
        for (size_t k = 0; k <= l; ++k) {
            const GrassmannNumber prod = gr_mul(a.deriv[k], b.deriv[l - k]);
            acc = (k == 0) ? prod * binom : acc + prod * binom;
            binom = binom * double(l - k) / double(k + 1);
        }
        out.deriv.push_back(acc);
    }
    return out;
}

// Jet of f(g(.)) from the jet of f at body(g) and the jet of g, by truncated
// power-series composition; the constant nilpotent offset of g is absorbed
// through the higher derivatives of f, so the result is exact whenever the
// carried orders dominate both the series truncation and the nilpotency depth.
inline Jet compose_jets(const Jet& jf, const Jet& jg, int order) {
    Jet out;
    out.base = jg.base;
    if (jg.deriv.empty() || jf.deriv.empty()) return out;
    const int L = jg.deriv[0].generators();
    const int n = order + 1;
    std::vector<GrassmannNumber> w(n, GrassmannNumber(L));
    w[0] = jg.deriv[0].soul();
    {
        double fact = 1.0;
        for (int l = 1; l < n && l < static_cast<int>(jg.deriv.size()); ++l) {
            fact *= l;
            w[l] = jg.deriv[l] * (1.0 / fact);
        }
    }
    std::vector<GrassmannNumber> acc(n, GrassmannNumber(L));
    std::vector<GrassmannNumber> wpow(n, GrassmannNumber(L));
    wpow[0] = GrassmannNumber(L, 1.0);
    double mfact = 1.0;
    for (int m = 0; m < static_cast<int>(jf.deriv.size()); ++m) {
        if (m > 0) {
            mfact *= m;
            std::vector<GrassmannNumber> next(n, GrassmannNumber(L));
            bool nonzero = false;
            for (int i = 0; i < n; ++i) {
                if (wpow[i].is_zero()) continue;
                for (int j = 0; i + j < n; ++j) {
                    if (w[j].is_zero()) continue;
                    next[i + j] += gr_mul(wpow[i], w[j]);
                }
            }
            for (auto& e : next) nonzero = nonzero || !e.is_zero();
            wpow = std::move(next);
            if (!nonzero) break;
        }
        for (int l = 0; l < n; ++l)
            if (!wpow[l].is_zero()) acc[l] += gr_mul(wpow[l], jf.deriv[m]) * (1.0 / mfact);
    }
    out.deriv.resize(n, GrassmannNumber(L));
    double lfact = 1.0;
    for (int l = 0; l < n; ++l) {
        if (l > 0) lfact *= l;
        out.deriv[l] = acc[l] * lfact;
    }
    return out;
}

// Component analytic function of one even variable.  Symbolic form is a sum
// of Laurent polynomials times exponentials,
//     f(z) = sum_k P_k(z) e^{rate_k z},
// with Grassmann coefficients in the P_k and complex rates (a Grassmann soul
// in a supplied rate is folded into the polynomial part, which the nilpotent
// exponential series makes exact).  This family is closed under the arithmetic
// the transition-function algorithms need; everything else falls back to a
// sampled jet callable.
class ComponentFunction {
public:
    struct Term {
        cplx rate = 0.0;
        std::map<int, GrassmannNumber> poly;
    };

    ComponentFunction() = default;

    static ComponentFunction zero(int L, Parity p) {
        ComponentFunction f;
        f.L_ = L;
        f.par_ = p;
        return f;
    }

    static ComponentFunction laurent(int L, Parity p, std::map<int, GrassmannNumber> coeffs) {
        ComponentFunction f = zero(L, p);
        Term t;
        for (auto& [n, c] : coeffs) {
            check_coeff(L, p, c);
            if (!c.is_zero()) t.poly[n] = c;
        }
        if (!t.poly.empty()) f.terms_.push_back(std::move(t));
        return f;
    }

    static ComponentFunction constant(int L, const GrassmannNumber& c) {
        const Parity p = c.is_even() ? Parity::even : Parity::odd;
        return laurent(L, p, {{0, c}});
    }

    static ComponentFunction monomial(int L, Parity p, int power, const GrassmannNumber& c) {
        return laurent(L, p, {{power, c}});
    }

    static ComponentFunction identity_z(int L) {
        return laurent(L, Parity::even, {{1, GrassmannNumber(L, 1.0)}});
    }

    // scale * e^{rate z} * prefactor(z); rate and scale even, soul of the rate
    // folded into the polynomial part by the terminating exponential series.
    static ComponentFunction exp_affine(int L, const GrassmannNumber& scale,
                                        const GrassmannNumber& rate,
                                        std::map<int, GrassmannNumber> prefactor = {}) {
        if (!rate.is_even()) throw ParityError("exponential rate must be even");
        if (!scale.is_even()) throw ParityError("exponential scale must be even");
        ComponentFunction f = zero(L, Parity::even);
        Term t;
        t.rate = rate.body();
        if (prefactor.empty()) prefactor[0] = GrassmannNumber(L, 1.0);
        for (auto& [n, c] : prefactor) {
            check_coeff(L, Parity::even, c);
            GrassmannNumber sc = gr_mul(scale, c);
            if (!sc.is_zero()) t.poly[n] = sc;
        }
        if (t.poly.empty()) return f;
        const GrassmannNumber rs = rate.soul();
        if (!rs.is_zero()) {
            std::map<int, GrassmannNumber> series{{0, GrassmannNumber(L, 1.0)}};
            GrassmannNumber pow(L, 1.0);
            double fact = 1.0;
            for (int k = 1;; ++k) {
                pow = gr_mul(pow, rs);
                if (pow.is_zero()) break;
                fact *= k;
                series[k] = pow * (1.0 / fact);
            }
            t.poly = conv(t.poly, series);
        }
        f.terms_.push_back(std::move(t));
        return f;
    }

    static ComponentFunction sampled(int L, Parity p, std::function<Jet(cplx)> sampler,
                                     int jet_order, Domain dom = Domain::entire) {
        ComponentFunction f = zero(L, p);
        f.sampled_ = true;
        f.sampler_ = std::move(sampler);
        f.jet_order_ = jet_order;
        f.sampled_domain_ = dom;
        return f;
    }

    int generators() const { return L_; }
    Parity parity() const { return par_; }
    bool is_sampled() const { return sampled_; }
    int jet_order() const { return jet_order_; }
    const std::vector<Term>& terms() const { return terms_; }

    bool is_zero() const { return !sampled_ && terms_.empty(); }

    Domain domain() const {
        if (sampled_) return sampled_domain_;
        for (const auto& t : terms_)
            for (const auto& [n, c] : t.poly)
                if (n < 0) return Domain::punctured;
        return Domain::entire;
    }

    int min_power() const {
        int m = 0;
        for (const auto& t : terms_)
            if (!t.poly.empty()) m = std::min(m, t.poly.begin()->first);
        return m;
    }
    int max_power() const {
        int m = 0;
        for (const auto& t : terms_)
            if (!t.poly.empty()) m = std::max(m, t.poly.rbegin()->first);
        return m;
    }

    double max_coeff_abs() const {
        double m = 0.0;
        for (const auto& t : terms_)
            for (const auto& [n, c] : t.poly) m = std::max(m, c.max_abs());
        return m;
    }

    // Single Laurent polynomial view; null for sampled or exponential forms.
    const std::map<int, GrassmannNumber>* laurent_coeffs() const {
        static const std::map<int, GrassmannNumber> kEmpty;
        if (sampled_ || terms_.size() > 1) return nullptr;
        if (terms_.empty()) return &kEmpty;
        if (terms_[0].rate != 0.0) return nullptr;
        return &terms_[0].poly;
    }

    // Complex Laurent coefficients of one Grassmann level (rate-0 forms only).
    std::map<int, cplx> level_coeffs(uint32_t mask) const {
        if (sampled_) throw UnsupportedComposition("sampled function has no symbolic levels");
        std::map<int, cplx> out;
        for (const auto& t : terms_) {
            if (t.rate != 0.0)
                throw UnsupportedComposition("exponential term has no Laurent levels");
            for (const auto& [n, c] : t.poly) {
                const cplx v = c.coeff(mask);
                if (v != 0.0) out[n] += v;
            }
        }
        for (auto it = out.begin(); it != out.end();)
            it = (it->second == 0.0) ? out.erase(it) : std::next(it);
        return out;
    }

    ComponentFunction pruned(double tol) const {
        ComponentFunction f = zero(L_, par_);
        for (const auto& t : terms_) {
            Term nt;
            nt.rate = t.rate;
            for (const auto& [n, c] : t.poly) {
                GrassmannNumber pc = c.pruned(tol);
                if (!pc.is_zero()) nt.poly[n] = pc;
            }
            if (!nt.poly.empty()) f.terms_.push_back(std::move(nt));
        }
        return f;
    }

    ComponentFunction with_parity(Parity p) const {
        ComponentFunction f = *this;
        if (p != par_ && !f.is_zero()) throw ParityError("cannot retag a nonzero function");
        f.par_ = p;
        return f;
    }

    // ---- arithmetic -------------------------------------------------------

    friend ComponentFunction operator+(const ComponentFunction& a, const ComponentFunction& b) {
        a.check_combine(b);
        if (a.par_ != b.par_ && !a.is_zero() && !b.is_zero())
            throw ParityError("adding functions of different parity");
        const Parity p = a.is_zero() ? b.par_ : a.par_;
        if (a.sampled_ || b.sampled_) {
            auto sa = a.as_jet_source(), sb = b.as_jet_source();
            return sampled(a.L_, p, [sa, sb](cplx z) { return jet_add(sa(z), sb(z)); },
                           std::min(a.effective_order(), b.effective_order()),
                           worst_domain(a.domain(), b.domain()));
        }
        ComponentFunction f = zero(a.L_, p);
        std::vector<Term> all = a.terms_;
        all.insert(all.end(), b.terms_.begin(), b.terms_.end());
        f.terms_ = normalize(std::move(all));
        return f;
    }

    friend ComponentFunction operator-(const ComponentFunction& a, const ComponentFunction& b) {
        return a + (b * cplx{-1.0});
    }

    friend ComponentFunction operator*(const ComponentFunction& a, cplx s) {
        if (a.sampled_) {
            auto sa = a.sampler_;
            return sampled(a.L_, a.par_,
                           [sa, s](cplx z) {
                               Jet j = sa(z);
                               for (auto& d : j.deriv) d = d * s;
                               return j;
                           },
                           a.jet_order_, a.sampled_domain_);
        }
        ComponentFunction f = zero(a.L_, a.par_);
        if (s == 0.0) return f;
        f.terms_ = a.terms_;
        for (auto& t : f.terms_)
            for (auto& [n, c] : t.poly) c = c * s;
        return f;
    }
    friend ComponentFunction operator*(cplx s, const ComponentFunction& a) { return a * s; }

    // Left multiplication by a homogeneous Grassmann constant.
    friend ComponentFunction mul_const(const GrassmannNumber& g, const ComponentFunction& a) {
        if (g.parity() == Parity::mixed) throw ParityError("mixed-parity constant multiplier");
        const Parity p = (g.is_odd() && !g.is_zero()) ? flip(a.par_) : a.par_;
        if (a.sampled_) {
            auto sa = a.sampler_;
            return sampled(a.L_, p,
                           [sa, g](cplx z) {
                               Jet j = sa(z);
                               for (auto& d : j.deriv) d = gr_mul(g, d);
                               return j;
                           },
                           a.jet_order_, a.sampled_domain_);
        }
        ComponentFunction f = zero(a.L_, p);
        for (const auto& t : a.terms_) {
            Term nt;
            nt.rate = t.rate;
            for (const auto& [n, c] : t.poly) {
                GrassmannNumber gc = gr_mul(g, c);
                if (!gc.is_zero()) nt.poly[n] = gc;
            }
            if (!nt.poly.empty()) f.terms_.push_back(std::move(nt));
        }
        return f;
    }

    friend ComponentFunction operator*(const ComponentFunction& a, const ComponentFunction& b) {
        a.check_combine(b);
        const Parity p = (a.par_ == Parity::mixed || b.par_ == Parity::mixed)
                             ? Parity::mixed
                             : (a.par_ == b.par_ ? Parity::even : Parity::odd);
        if (a.sampled_ || b.sampled_) {
            auto sa = a.as_jet_source(), sb = b.as_jet_source();
            return sampled(a.L_, p, [sa, sb](cplx z) { return jet_mul(sa(z), sb(z)); },
                           std::min(a.effective_order(), b.effective_order()),
                           worst_domain(a.domain(), b.domain()));
        }
        ComponentFunction f = zero(a.L_, p);
        std::vector<Term> prods;
        for (const auto& ta : a.terms_)
            for (const auto& tb : b.terms_) {
                Term t;
                t.rate = ta.rate + tb.rate;
                t.poly = conv(ta.poly, tb.poly);
                if (!t.poly.empty()) prods.push_back(std::move(t));
            }
        f.terms_ = normalize(std::move(prods));
        return f;
    }

    ComponentFunction derivative() const {
        if (sampled_) {
            auto s = sampler_;
            return sampled(L_, par_,
                           [s](cplx z) {
                               Jet j = s(z);
                               if (!j.deriv.empty()) j.deriv.erase(j.deriv.begin());
                               return j;
                           },
                           jet_order_ > 0 ? jet_order_ - 1 : 0, sampled_domain_);
        }
        ComponentFunction f = zero(L_, par_);
        std::vector<Term> ts;
        for (const auto& t : terms_) {
            Term nt;
            nt.rate = t.rate;
            for (const auto& [n, c] : t.poly) {
                if (n != 0) add_poly(nt.poly, n - 1, c * cplx(double(n)));
                if (t.rate != 0.0) add_poly(nt.poly, n, c * t.rate);
            }
            if (!nt.poly.empty()) ts.push_back(std::move(nt));
        }
        f.terms_ = normalize(std::move(ts));
        return f;
    }

    // ---- evaluation -------------------------------------------------------

    // Superanalytic extension: exact Grassmann evaluation at an even point.
    GrassmannNumber eval_at(const GrassmannNumber& z) const {
        if (!z.is_even()) throw ParityError("evaluation point must be even");
        if (z.generators() != L_) throw SizeMismatch("evaluation point generator count");
        if (sampled_) {
            const Jet j = sampler_(z.body());
            GrassmannNumber out(L_);
            GrassmannNumber spow(L_, 1.0);
            const GrassmannNumber s = z.soul();
            double fact = 1.0;
            for (size_t l = 0; l < j.deriv.size(); ++l) {
                if (l > 0) {
                    spow = gr_mul(spow, s);
                    fact *= double(l);
                    if (spow.is_zero()) break;
                }
                out += gr_mul(spow, j.deriv[l]) * (1.0 / fact);
            }
            return out;
        }
        if (min_power() < 0 && std::abs(z.body()) < kCoeffTol)
            throw OutsideDomain("evaluation at the puncture of a Laurent function");
        GrassmannNumber out(L_);
        for (const auto& t : terms_) {
            GrassmannNumber tsum(L_);
            int cur = t.poly.begin()->first;
            GrassmannNumber zp = gr_int_pow(z, cur);
            for (const auto& [n, c] : t.poly) {
                for (; cur < n; ++cur) zp = gr_mul(zp, z);
                tsum += gr_mul(zp, c);
            }
            if (t.rate != 0.0) tsum = gr_mul(gr_exp(z * t.rate), tsum);
            out += tsum;
        }
        return out;
    }

    // Body projection evaluated at a complex point (winding, samplers).
    cplx body_eval(cplx z) const {
        if (sampled_) {
            const Jet j = sampler_(z);
            return j.deriv.empty() ? cplx{0.0} : j.deriv[0].body();
        }
        cplx out = 0.0;
        for (const auto& t : terms_) {
            cplx p = 0.0;
            for (const auto& [n, c] : t.poly) p += c.body() * pow_int(z, n);
            out += p * std::exp(t.rate * z);
        }
        return out;
    }

    // Jet at a body point; symbolic forms differentiate exactly.
    Jet jet_at(cplx z0, int order) const {
        if (sampled_) {
            Jet j = sampler_(z0);
            if (static_cast<int>(j.deriv.size()) > order + 1) j.deriv.resize(order + 1);
            return j;
        }
        Jet j;
        j.base = z0;
        ComponentFunction d = *this;
        for (int l = 0; l <= order; ++l) {
            j.deriv.push_back(d.eval_at(GrassmannNumber(L_, z0)));
            if (l < order) d = d.derivative();
        }
        return j;
    }

    int default_jet_order() const { return effective_order(); }

private:
    static Parity flip(Parity p) { return p == Parity::even ? Parity::odd : Parity::even; }

    static Domain worst_domain(Domain a, Domain b) {
        if (a == Domain::annulus || b == Domain::annulus) return Domain::annulus;
        if (a == Domain::punctured || b == Domain::punctured) return Domain::punctured;
        return Domain::entire;
    }

    static void check_coeff(int L, Parity p, const GrassmannNumber& c) {
        if (c.generators() != L) throw SizeMismatch("coefficient generator count");
        if (c.is_zero() || p == Parity::mixed) return;
        if (p == Parity::even ? !c.is_even() : !c.is_odd())
            throw ParityError("coefficient parity does not match the declared slot");
    }

    void check_combine(const ComponentFunction& b) const {
        if (L_ != b.L_) throw SizeMismatch("functions use different generator counts");
    }

    static void add_poly(std::map<int, GrassmannNumber>& poly, int n, const GrassmannNumber& c) {
        if (c.is_zero()) return;
        auto [it, fresh] = poly.try_emplace(n, c);
        if (!fresh) {
            it->second += c;
            if (it->second.is_zero()) poly.erase(it);
        }
    }

    // Cauchy product; left-factor coefficients stay on the left.
    static std::map<int, GrassmannNumber> conv(const std::map<int, GrassmannNumber>& a,
                                               const std::map<int, GrassmannNumber>& b) {
        std::map<int, GrassmannNumber> out;
        for (const auto& [na, ca] : a)
            for (const auto& [nb, cb] : b) add_poly(out, na + nb, gr_mul(ca, cb));
        return out;
    }

    static std::vector<Term> normalize(std::vector<Term> ts) {
        std::sort(ts.begin(), ts.end(), [](const Term& x, const Term& y) {
            if (x.rate.real() != y.rate.real()) return x.rate.real() < y.rate.real();
            return x.rate.imag() < y.rate.imag();
        });
        std::vector<Term> out;
        for (auto& t : ts) {
            if (t.poly.empty()) continue;
            if (!out.empty() && std::abs(out.back().rate - t.rate) <= 1e-9) {
                for (const auto& [n, c] : t.poly) add_poly(out.back().poly, n, c);
            } else {
                out.push_back(std::move(t));
            }
        }
        std::erase_if(out, [](const Term& t) { return t.poly.empty(); });
        return out;
    }

    static cplx pow_int(cplx z, int n) {
        if (n == 0) return 1.0;
        if (n < 0) return 1.0 / pow_int(z, -n);
        cplx out = 1.0, base = z;
        for (unsigned k = static_cast<unsigned>(n); k; k >>= 1) {
            if (k & 1) out *= base;
            if (k > 1) base *= base;
        }
        return out;
    }

    std::function<Jet(cplx)> as_jet_source() const {
        if (sampled_) return sampler_;
        ComponentFunction self = *this;
        const int ord = effective_order();
        return [self, ord](cplx z) { return self.jet_at(z, ord); };
    }

    int effective_order() const { return sampled_ ? jet_order_ : (L_ / 2 + 2); }

    int L_ = 0;
    Parity par_ = Parity::even;
    std::vector<Term> terms_;
    bool sampled_ = false;
    std::function<Jet(cplx)> sampler_;
    int jet_order_ = 0;
    Domain sampled_domain_ = Domain::entire;
};

// ---- free operations ------------------------------------------------------

namespace detail {

struct BodyMonomial {
    int power = 0;
    cplx coeff = 0.0;
    cplx rate = 0.0;
};

// The unique monomial c z^n e^{r z} carrying the whole body part; nullopt if
// the body is spread over several monomials, coeff == 0 if it vanishes.
inline std::optional<BodyMonomial> body_monomial(const ComponentFunction& f) {
    std::optional<BodyMonomial> mono;
    for (const auto& t : f.terms())
        for (const auto& [n, c] : t.poly) {
            if (c.body() == 0.0) continue;
            if (mono) return std::nullopt;
            mono = BodyMonomial{n, c.body(), t.rate};
        }
    if (!mono) mono = BodyMonomial{};
    return mono;
}

inline ComponentFunction monomial_fn(int L, const BodyMonomial& m) {
    ComponentFunction out =
        ComponentFunction::monomial(L, Parity::even, m.power, GrassmannNumber(L, m.coeff));
    if (m.rate != 0.0)
        out = out * ComponentFunction::exp_affine(L, GrassmannNumber(L, 1.0),
                                                  GrassmannNumber::monomial(L, 0, m.rate));
    return out;
}

} // namespace detail

// 1/f; the body part must be a single monomial c z^n e^{r z}.
inline ComponentFunction reciprocal(const ComponentFunction& f) {
    if (f.is_sampled()) throw UnsupportedComposition("reciprocal of a sampled function");
    const auto mono = detail::body_monomial(f);
    if (!mono) throw NonInvertible("body part is not a single monomial");
    if (mono->coeff == 0.0) throw NonInvertible("body part vanishes identically");
    const int L = f.generators();
    const ComponentFunction inv_m =
        detail::monomial_fn(L, {-mono->power, 1.0 / mono->coeff, -mono->rate});
    const ComponentFunction u = (f - detail::monomial_fn(L, *mono)) * inv_m; // soul-valued
    ComponentFunction acc = ComponentFunction::constant(L, GrassmannNumber(L, 1.0));
    ComponentFunction upow = acc;
    for (int k = 1;; ++k) {
        upow = upow * u;
        if (upow.is_zero()) break;
        acc = acc + upow * cplx(k % 2 ? -1.0 : 1.0);
    }
    return inv_m * acc;
}

// sqrt(f) for a body monomial of even power; branch picks the body root sign.
inline ComponentFunction sqrt_fn(const ComponentFunction& f,
                                 SqrtBranch branch = SqrtBranch::principal) {
    if (f.is_sampled()) throw NoSquareRoot("sqrt of a sampled function is unsupported");
    const auto mono = detail::body_monomial(f);
    if (!mono) throw NoSquareRoot("body part is not a single monomial");
    if (mono->coeff == 0.0) throw NoSquareRoot("body part vanishes identically");
    if (mono->power % 2 != 0)
        throw NoSquareRoot("odd body winding admits no single-valued square root");
    const int L = f.generators();
    cplx rc = std::sqrt(mono->coeff);
    if (branch == SqrtBranch::negative) rc = -rc;
    const ComponentFunction root =
        detail::monomial_fn(L, {mono->power / 2, rc, mono->rate * 0.5});
    const ComponentFunction m = detail::monomial_fn(L, *mono);
    const ComponentFunction u = (f - m) * reciprocal(m); // soul-valued
    ComponentFunction acc = ComponentFunction::constant(L, GrassmannNumber(L, 1.0));
    ComponentFunction upow = acc;
    double binom = 1.0;
    for (int k = 1;; ++k) {
        upow = upow * u;
        if (upow.is_zero()) break;
        binom *= (0.5 - double(k - 1)) / double(k);
        acc = acc + upow * binom;
    }
    return root * acc;
}

// exp(f) for f with an affine body part plus a soul remainder.
inline ComponentFunction exp_fn(const ComponentFunction& f) {
    if (f.is_sampled()) throw UnsupportedComposition("exp of a sampled function");
    const int L = f.generators();
    cplx a0 = 0.0, a1 = 0.0;
    for (const auto& t : f.terms())
        for (const auto& [n, c] : t.poly) {
            if (c.body() == 0.0) continue;
            if (t.rate != 0.0 || n < 0 || n > 1)
                throw UnsupportedComposition("exp of a non-affine body part");
            (n == 0 ? a0 : a1) += c.body();
        }
    const ComponentFunction body_part = ComponentFunction::laurent(
        L, Parity::even, {{0, GrassmannNumber(L, a0)}, {1, GrassmannNumber(L, a1)}});
    const ComponentFunction s = f - body_part;
    ComponentFunction out = ComponentFunction::exp_affine(L, GrassmannNumber(L, std::exp(a0)),
                                                          GrassmannNumber::monomial(L, 0, a1));
    ComponentFunction acc = ComponentFunction::constant(L, GrassmannNumber(L, 1.0));
    ComponentFunction spow = acc;
    double fact = 1.0;
    for (int k = 1;; ++k) {
        spow = spow * s;
        if (spow.is_zero()) break;
        fact *= k;
        acc = acc + spow * (1.0 / fact);
    }
    return out * acc;
}

// log(f) for f = c e^{r z}(1 + soul); nonzero winding has no symbolic log here.
inline ComponentFunction log_fn(const ComponentFunction& f) {
    if (f.is_sampled()) throw UnsupportedComposition("log of a sampled function");
    const auto mono = detail::body_monomial(f);
    if (!mono) throw UnsupportedComposition("log of a non-monomial body part");
    if (mono->coeff == 0.0) throw ZeroBody("log of a function with vanishing body");
    if (mono->power != 0) throw UnsupportedComposition("log of a function with nonzero winding");
    const int L = f.generators();
    const ComponentFunction m = detail::monomial_fn(L, *mono);
    const ComponentFunction u = (f - m) * reciprocal(m); // soul-valued
    ComponentFunction out = ComponentFunction::laurent(
        L, Parity::even,
        {{0, GrassmannNumber(L, std::log(mono->coeff))}, {1, GrassmannNumber(L, mono->rate)}});
    ComponentFunction upow = ComponentFunction::constant(L, GrassmannNumber(L, 1.0));
    for (int k = 1;; ++k) {
        upow = upow * u;
        if (upow.is_zero()) break;
        out = out + upow * cplx((k % 2 ? 1.0 : -1.0) / k);
    }
    return out;
}

// ---- composition ----------------------------------------------------------

// Body part of the inner map as complex data: a z + b, or a / z.
struct BodyCore {
    enum Kind { affine, reciprocal_z } kind = affine;
    cplx a = 1.0, b = 0.0;
};

inline BodyCore classify_body_core(const ComponentFunction& g) {
    BodyCore core;
    bool saw_recip = false, saw_affine = false;
    cplx a = 0.0, b = 0.0, r = 0.0;
    for (const auto& t : g.terms())
        for (const auto& [n, c] : t.poly) {
            if (c.body() == 0.0) continue;
            if (t.rate != 0.0)
                throw UnsupportedComposition("inner map body has an exponential part");
            if (n == 0) {
                b += c.body();
                saw_affine = true;
            } else if (n == 1) {
                a += c.body();
                saw_affine = true;
            } else if (n == -1) {
                r += c.body();
                saw_recip = true;
            } else {
                throw UnsupportedComposition("inner map body is not affine or c/z");
            }
        }
    if (saw_recip) {
        if (saw_affine || r == 0.0)
            throw UnsupportedComposition("inner map body mixes 1/z with affine terms");
        core.kind = BodyCore::reciprocal_z;
        core.a = r;
        return core;
    }
    core.kind = BodyCore::affine;
    core.a = a;
    core.b = b;
    return core;
}

inline ComponentFunction body_projection(const ComponentFunction& g) {
    const int L = g.generators();
    ComponentFunction out = ComponentFunction::zero(L, Parity::even);
    for (const auto& t : g.terms()) {
        std::map<int, GrassmannNumber> poly;
        for (const auto& [n, c] : t.poly)
            if (c.body() != 0.0) poly[n] = GrassmannNumber(L, c.body());
        if (poly.empty()) continue;
        ComponentFunction lp = ComponentFunction::laurent(L, Parity::even, std::move(poly));
        if (t.rate != 0.0)
            lp = lp * ComponentFunction::exp_affine(L, GrassmannNumber(L, 1.0),
                                                    GrassmannNumber::monomial(L, 0, t.rate));
        out = out + lp;
    }
    return out;
}

namespace detail {

// f(a z + b) with complex a, b.
inline ComponentFunction substitute_affine(const ComponentFunction& f, cplx a, cplx b) {
    const int L = f.generators();
    ComponentFunction out = ComponentFunction::zero(L, f.parity());
    for (const auto& t : f.terms()) {
        std::map<int, GrassmannNumber> poly;
        const cplx new_rate = t.rate * a;
        const cplx escale = (t.rate != 0.0) ? std::exp(t.rate * b) : cplx{1.0};
        for (const auto& [n, c] : t.poly) {
            if (n >= 0) {
                std::vector<cplx> apow(static_cast<size_t>(n) + 1), bpow(static_cast<size_t>(n) + 1);
                apow[0] = bpow[0] = 1.0;
                for (int i = 1; i <= n; ++i) {
                    apow[i] = apow[i - 1] * a;
                    bpow[i] = bpow[i - 1] * b;
                }
                double binom = 1.0; // C(n, k), updated in the loop
                for (int k = 0; k <= n; ++k) {
                    const cplx w = binom * apow[k] * bpow[n - k] * escale;
                    if (w != 0.0) {
                        auto [it, fresh] = poly.try_emplace(k, c * w);
                        if (!fresh) {
                            it->second += c * w;
                            if (it->second.is_zero()) poly.erase(it);
                        }
                    }
                    binom = binom * double(n - k) / double(k + 1);
                }
            } else {
                if (b != 0.0)
                    throw UnsupportedComposition("negative power under an affine shift");
                if (a == 0.0) throw OutsideDomain("inner map sends the chart into a puncture");
                cplx ak = 1.0;
                for (int i = 0; i < -n; ++i) ak /= a;
                auto [it, fresh] = poly.try_emplace(n, c * (ak * escale));
                if (!fresh) {
                    it->second += c * (ak * escale);
                    if (it->second.is_zero()) poly.erase(it);
                }
            }
        }
        if (poly.empty()) continue;
        ComponentFunction lp = ComponentFunction::laurent(L, f.parity(), std::move(poly));
        if (new_rate != 0.0)
            lp = lp * ComponentFunction::exp_affine(L, GrassmannNumber(L, 1.0),
                                                    GrassmannNumber::monomial(L, 0, new_rate));
        out = out + lp;
    }
    return out;
}

// f(c / z), defined for purely Laurent f.
inline ComponentFunction substitute_reciprocal(const ComponentFunction& f, cplx c) {
    const int L = f.generators();
    std::map<int, GrassmannNumber> out;
    for (const auto& t : f.terms()) {
        if (t.rate != 0.0) throw UnsupportedComposition("exponential term under z -> c/z");
        for (const auto& [n, cf] : t.poly) {
            cplx cn = 1.0;
            for (int i = 0; i < std::abs(n); ++i) cn *= c;
            if (n < 0) cn = 1.0 / cn;
            auto [it, fresh] = out.try_emplace(-n, cf * cn);
            if (!fresh) {
                it->second += cf * cn;
                if (it->second.is_zero()) out.erase(it);
            }
        }
    }
    return ComponentFunction::laurent(L, f.parity(), std::move(out));
}

} // namespace detail

// Symbolic composition f(g(z)).  The inner body must be affine or c/z; the
// soul remainder s = g - body(g) enters through the terminating Taylor series
// f(g0 + s) = sum_l s^l / l! f^(l)(g0).
inline ComponentFunction compose(const ComponentFunction& f, const ComponentFunction& g,
                                 bool allow_sampled = false) {
    if (g.parity() != Parity::even && !g.is_zero())
        throw ParityError("inner map of a composition must be even");
    const auto sampled_compose = [&]() {
        const ComponentFunction sf = f, sg = g;
        const int ord = std::min(sf.is_sampled() ? sf.jet_order() : sf.default_jet_order(),
                                 sg.is_sampled() ? sg.jet_order() : sg.default_jet_order());
        return ComponentFunction::sampled(
            f.generators(), f.parity(),
            [sf, sg, ord](cplx z) {
                const Jet jg = sg.jet_at(z, ord);
                const cplx base = jg.deriv.empty() ? cplx{0.0} : jg.deriv[0].body();
                const Jet jf = sf.jet_at(base, ord);
                return compose_jets(jf, jg, ord);
            },
            ord, Domain::annulus);
    };
    if (f.is_sampled() || g.is_sampled()) {
        if (!allow_sampled) throw UnsupportedComposition("sampled composition not requested");
        return sampled_compose();
    }
    BodyCore core;
    try {
        core = classify_body_core(g);
    } catch (const UnsupportedComposition&) {
        if (!allow_sampled) throw;
        return sampled_compose();
    }
    const ComponentFunction g0 = body_projection(g);
    const ComponentFunction s = g - g0;
    ComponentFunction fl = f;
    ComponentFunction out = ComponentFunction::zero(f.generators(), f.parity());
    ComponentFunction spow =
        ComponentFunction::constant(f.generators(), GrassmannNumber(f.generators(), 1.0));
    double fact = 1.0;
    for (int l = 0;; ++l) {
        if (l > 0) {
            spow = spow * s;
            if (spow.is_zero()) break;
            fact *= l;
            fl = fl.derivative();
        }
        const ComponentFunction base = (core.kind == BodyCore::affine)
                                           ? detail::substitute_affine(fl, core.a, core.b)
                                           : detail::substitute_reciprocal(fl, core.a);
        out = out + spow * base * cplx(1.0 / fact);
    }
    return out;
}

// Winding of the body around |z| = 1 by the argument principle.
inline int winding_degree(const ComponentFunction& f, int samples = 4096) {
    constexpr double phase0 = 0.234567; // dodge axis-aligned roots
    double total = 0.0;
    cplx prev = 0.0;
    double min_abs = 1e300;
    for (int k = 0; k <= samples; ++k) {
        const double phi = phase0 + 2.0 * std::numbers::pi * k / samples;
        const cplx v = f.body_eval(std::polar(1.0, phi));
        min_abs = std::min(min_abs, std::abs(v));
        if (k > 0) total += std::arg(v / prev);
        prev = v;
    }
    if (min_abs < 1e-9) throw BodyVanishes("body vanishes on the unit circle");
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

// max |f - g| over a sample circle, Grassmann coefficients included.
inline double sample_distance(const ComponentFunction& f, const ComponentFunction& g,
                              int samples = 32, double radius = 1.0) {
    constexpr double phase0 = 0.234567;
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double phi = phase0 + 2.0 * std::numbers::pi * k / samples;
        const GrassmannNumber z(f.generators(), std::polar(radius, phi));
        worst = std::max(worst, (f.eval_at(z) - g.eval_at(z)).max_abs());
    }
    return worst;
}

} // namespace superlift
