#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "superlift/common.hpp"

namespace superlift {

enum class Parity { even, odd, mixed };

// Element of the Grassmann algebra on L anticommuting generators zeta_1..zeta_L
// over the complex numbers.  Terms are stored sparsely as bitmask -> coefficient
// (bit j-1 set means zeta_j appears); exact zeros are pruned on the fly.
class GrassmannNumber {
public:
    static constexpr int max_generators = 12;

    GrassmannNumber() = default;

    explicit GrassmannNumber(int L, cplx body = 0.0) : L_(check_L(L)) {
        if (body != 0.0) terms_[0] = body;
    }

    static GrassmannNumber generator(int L, int j) {
        GrassmannNumber out(L);
        if (j < 1 || j > L) throw Error("generator index out of range");
        out.terms_[uint32_t{1} << (j - 1)] = 1.0;
        return out;
    }

    static GrassmannNumber monomial(int L, uint32_t mask, cplx c) {
        GrassmannNumber out(L);
        if (mask >> L) throw Error("monomial mask exceeds generator count");
        if (c != 0.0) out.terms_[mask] = c;
        return out;
    }

    int generators() const { return L_; }
    const std::map<uint32_t, cplx>& terms() const { return terms_; }

    cplx body() const {
        auto it = terms_.find(0);
        return it == terms_.end() ? cplx{0.0} : it->second;
    }

    GrassmannNumber soul() const {
        GrassmannNumber out(*this);
        out.terms_.erase(0);
        return out;
    }

    cplx coeff(uint32_t mask) const {
        auto it = terms_.find(mask);
        return it == terms_.end() ? cplx{0.0} : it->second;
    }

    bool is_zero() const { return terms_.empty(); }

    // Zero is vacuously both even and odd; parity() reports even for it.
    bool is_even() const {
        for (const auto& [m, c] : terms_)
            if (std::popcount(m) & 1) return false;
        return true;
    }
    bool is_odd() const {
        for (const auto& [m, c] : terms_)
            if (!(std::popcount(m) & 1)) return false;
        return true;
    }
    Parity parity() const {
        if (is_even()) return Parity::even;
        if (is_odd()) return Parity::odd;
        return Parity::mixed;
    }

    // Largest generator index used by any term; 0 for body-only elements.
    int top_generator() const {
        int top = 0;
        for (const auto& [m, c] : terms_)
            if (m) top = std::max(top, 32 - std::countl_zero(m));
        return top;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
        return m;
    }

    double norm1() const {
        double s = 0.0;
        for (const auto& [k, c] : terms_) s += std::abs(c);
        return s;
    }

    GrassmannNumber& add_term(uint32_t mask, cplx c) {
        if (mask >> L_) throw Error("term mask exceeds generator count");
        auto [it, fresh] = terms_.try_emplace(mask, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0.0) terms_.erase(it);
        } else if (c == 0.0) {
            terms_.erase(it);
        }
        return *this;
    }

    // Drops coefficients of magnitude <= tol (cleanup after verified kills).
    GrassmannNumber pruned(double tol) const {
        GrassmannNumber out(L_);
        for (const auto& [m, c] : terms_)
            if (std::abs(c) > tol) out.terms_[m] = c;
        return out;
    }

    GrassmannNumber operator-() const {
        GrassmannNumber out(L_);
        for (const auto& [m, c] : terms_) out.terms_[m] = -c;
        return out;
    }

    friend GrassmannNumber operator+(const GrassmannNumber& a, const GrassmannNumber& b) {
        GrassmannNumber out(a.merged_check(b));
        out.terms_ = a.terms_;
        for (const auto& [m, c] : b.terms_) out.add_term(m, c);
        return out;
    }
    friend GrassmannNumber operator-(const GrassmannNumber& a, const GrassmannNumber& b) {
        GrassmannNumber out(a.merged_check(b));
        out.terms_ = a.terms_;
        for (const auto& [m, c] : b.terms_) out.add_term(m, -c);
        return out;
    }
    friend GrassmannNumber operator*(const GrassmannNumber& a, cplx s) {
        GrassmannNumber out(a.L_);
        if (s != 0.0)
            for (const auto& [m, c] : a.terms_) out.terms_[m] = c * s;
        return out;
    }
    friend GrassmannNumber operator*(cplx s, const GrassmannNumber& a) { return a * s; }

    GrassmannNumber& operator+=(const GrassmannNumber& b) { return *this = *this + b; }
    GrassmannNumber& operator-=(const GrassmannNumber& b) { return *this = *this - b; }

private:
    static int check_L(int L) {
        if (L < 0 || L > max_generators)
            throw Error("generator count must be between 0 and 12");
        return L;
    }
    int merged_check(const GrassmannNumber& b) const {
        if (L_ != b.L_) throw SizeMismatch("operands use different generator counts");
        return L_;
    }

    int L_ = 0;
    std::map<uint32_t, cplx> terms_;
};

// Sign of reordering zeta_A . zeta_B into the ascending product zeta_{A|B}:
// each generator of B moves left past the generators of A above it.
inline int reorder_sign(uint32_t a, uint32_t b) {
    int swaps = 0;
    for (uint32_t rest = b; rest; rest &= rest - 1) {
        int j = std::countr_zero(rest);
        swaps += std::popcount(a >> (j + 1));
    }
    return (swaps & 1) ? -1 : 1;
}

inline GrassmannNumber gr_mul(const GrassmannNumber& a, const GrassmannNumber& b) {
    if (a.generators() != b.generators())
        throw SizeMismatch("operands use different generator counts");
    GrassmannNumber out(a.generators());
    for (const auto& [ma, ca] : a.terms()) {
        for (const auto& [mb, cb] : b.terms()) {
            if (ma & mb) continue; // repeated generator squares to zero
            out.add_term(ma | mb, ca * cb * static_cast<double>(reorder_sign(ma, mb)));
        }
    }
    return out;
}

inline GrassmannNumber operator*(const GrassmannNumber& a, const GrassmannNumber& b) {
    return gr_mul(a, b);
}

inline bool approx_equal(const GrassmannNumber& a, const GrassmannNumber& b,
                         double tol = kCoeffTol) {
    return (a - b).max_abs() <= tol;
}

// 1/a = (1/a_B) sum_n (-a_S/a_B)^n; the series terminates by nilpotency.
inline GrassmannNumber gr_invert(const GrassmannNumber& a, double body_tol = kCoeffTol) {
    const cplx b = a.body();
    if (std::abs(b) < body_tol) throw ZeroBody("cannot invert: body below tolerance");
    const GrassmannNumber u = a.soul() * (-1.0 / b);
    GrassmannNumber out(a.generators(), 1.0 / b);
    GrassmannNumber pow(a.generators(), 1.0);
    while (true) {
        pow = gr_mul(pow, u);
        if (pow.is_zero()) break;
        out += pow * (1.0 / b);
    }
    return out;
}

inline GrassmannNumber gr_exp(const GrassmannNumber& a) {
    const cplx eb = std::exp(a.body());
    const GrassmannNumber s = a.soul();
    GrassmannNumber out(a.generators(), 1.0);
    GrassmannNumber pow(a.generators(), 1.0);
    double fact = 1.0;
    for (int k = 1;; ++k) {
        pow = gr_mul(pow, s);
        if (pow.is_zero()) break;
        fact *= k;
        out += pow * (1.0 / fact);
    }
    return out * eb;
}

inline GrassmannNumber gr_log(const GrassmannNumber& a, double body_tol = kCoeffTol) {
    const cplx b = a.body();
    if (std::abs(b) < body_tol) throw ZeroBody("cannot take log: body below tolerance");
    const GrassmannNumber u = a.soul() * (1.0 / b);
    GrassmannNumber out(a.generators(), std::log(b));
    GrassmannNumber pow(a.generators(), 1.0);
    for (int k = 1;; ++k) {
        pow = gr_mul(pow, u);
        if (pow.is_zero()) break;
        out += pow * (((k & 1) ? 1.0 : -1.0) / k);
    }
    return out;
}

enum class SqrtBranch { principal, negative };

// sqrt(a) = sqrt(a_B) (1 + a_S/a_B)^{1/2} via the terminating binomial series.
inline GrassmannNumber gr_sqrt(const GrassmannNumber& a,
                               SqrtBranch branch = SqrtBranch::principal,
                               double body_tol = kCoeffTol) {
    const cplx b = a.body();
    if (std::abs(b) < body_tol) throw ZeroBody("cannot take sqrt: body below tolerance");
    cplx rb = std::sqrt(b);
    if (branch == SqrtBranch::negative) rb = -rb;
    const GrassmannNumber u = a.soul() * (1.0 / b);
    GrassmannNumber out(a.generators(), 1.0);
    GrassmannNumber pow(a.generators(), 1.0);
    double binom = 1.0; // C(1/2, k), built incrementally
    for (int k = 1;; ++k) {
        pow = gr_mul(pow, u);
        if (pow.is_zero()) break;
        binom *= (0.5 - (k - 1)) / k;
        out += pow * binom;
    }
    return out * rb;
}

inline GrassmannNumber gr_int_pow(const GrassmannNumber& a, int n) {
    if (n < 0) return gr_int_pow(gr_invert(a), -n);
    GrassmannNumber out(a.generators(), 1.0);
    GrassmannNumber base = a;
    for (unsigned k = static_cast<unsigned>(n); k; k >>= 1) {
        if (k & 1) out = gr_mul(out, base);
        if (k > 1) base = gr_mul(base, base);
    }
    return out;
}

// Ascending order on generator subsets: shorter support first, then
// lexicographic on the increasing index tuple.  This puts every proper
// product zeta_J . zeta_K strictly after zeta_K, so multiplication by an
// even unit is body*I plus a strictly lower triangular part.
inline bool multi_index_less(uint32_t x, uint32_t y) {
    const int px = std::popcount(x), py = std::popcount(y);
    if (px != py) return px < py;
    uint32_t a = x, b = y;
    while (a && b) {
        const int ia = std::countr_zero(a), ib = std::countr_zero(b);
        if (ia != ib) return ia < ib;
        a &= a - 1;
        b &= b - 1;
    }
    return false;
}

inline std::vector<uint32_t> odd_basis(int L) {
    std::vector<uint32_t> basis;
    for (uint32_t m = 0; m < (uint32_t{1} << L); ++m)
        if (std::popcount(m) & 1) basis.push_back(m);
    std::sort(basis.begin(), basis.end(), multi_index_less);
    return basis;
}

struct ComplexMatrix {
    int rows = 0, cols = 0;
    std::vector<cplx> data;

    ComplexMatrix() = default;
    ComplexMatrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}

    cplx& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    cplx operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols != b.rows) throw Error("matrix shape mismatch");
        ComplexMatrix out(a.rows, b.cols);
        for (int i = 0; i < a.rows; ++i)
            for (int k = 0; k < a.cols; ++k) {
                const cplx aik = a(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    double max_abs_diff(const ComplexMatrix& o) const {
        double m = 0.0;
        for (size_t i = 0; i < data.size(); ++i)
            m = std::max(m, std::abs(data[i] - o.data[i]));
        return m;
    }
};

// Matrix of theta -> g.theta on the odd subspace, in the ordering above.
inline ComplexMatrix odd_mult_matrix(const GrassmannNumber& g) {
    if (!g.is_even()) throw ParityError("odd_mult_matrix needs an even multiplier");
    if (std::abs(g.body()) < kCoeffTol) throw ZeroBody("odd_mult_matrix needs an invertible multiplier");
    const int L = g.generators();
    const auto basis = odd_basis(L);
    std::map<uint32_t, int> index;
    for (size_t i = 0; i < basis.size(); ++i) index[basis[i]] = static_cast<int>(i);
    ComplexMatrix out(static_cast<int>(basis.size()), static_cast<int>(basis.size()));
    for (size_t col = 0; col < basis.size(); ++col) {
        const GrassmannNumber prod =
            gr_mul(g, GrassmannNumber::monomial(L, basis[col], 1.0));
        for (const auto& [m, c] : prod.terms()) out(index.at(m), static_cast<int>(col)) = c;
    }
    return out;
}

} // namespace superlift
