#pragma once

#include <sstream>
#include <variant>
#include <vector>

#include "superlift/supermap.hpp"

namespace superlift {

// Splitting of a two-chart overlap function against a monomial weight:
//     ell(z) = w(z) * b_nor(z) - b_sou(1/z),
// with b_nor a polynomial in the z-chart variable and b_sou a polynomial in
// the opposite chart variable w = 1/z, both of degree at most the bound.
struct CoboundarySplit {
    ComponentFunction b_nor, b_sou;
};

// Raised when ell has support on powers no admissible split can reach: for a
// weight c z^m with m > 0 the powers 1 .. m-1 are structurally uncovered.
class CechObstruction : public Error {
public:
    CechObstruction(std::vector<int> holes, std::map<int, GrassmannNumber> residual)
        : Error(format(holes)), hole_powers_(std::move(holes)), residual_(std::move(residual)) {}

    const std::vector<int>& hole_powers() const { return hole_powers_; }
    const std::map<int, GrassmannNumber>& residual() const { return residual_; }

private:
    static std::string format(const std::vector<int>& holes) {
        std::ostringstream os;
        os << "cocycle obstructed on powers {";
        for (size_t i = 0; i < holes.size(); ++i) os << (i ? "," : "") << holes[i];
        os << "}";
        return os.str();
    }

    std::vector<int> hole_powers_;
    std::map<int, GrassmannNumber> residual_;
};

inline int default_degree_bound(const ComponentFunction& ell, const ComponentFunction& weight) {
    const int m = std::max({std::abs(ell.min_power()), std::abs(ell.max_power()),
                            std::abs(weight.min_power()), std::abs(weight.max_power())});
    return 2 * m + 4;
}

// Greedy power-by-power assignment.  Powers reachable through the weighted
// polynomial go there; the remaining nonpositive powers go to the opposite
// chart.  Powers outside both ranges raise DegreeBoundExceeded, and the
// structural hole of a positively-weighted split raises CechObstruction.
inline CoboundarySplit solve_coboundary(const ComponentFunction& ell,
                                        const ComponentFunction& weight, int degree_bound = -1) {
    const int L = ell.generators();
    const auto* lc = ell.laurent_coeffs();
    if (!lc) throw InputError("overlap function must be a Laurent polynomial");
    const auto* wc = weight.laurent_coeffs();
    if (!wc || wc->size() != 1)
        throw InputError("weight must be a single Laurent monomial");
    const int m = wc->begin()->first;
    const GrassmannNumber& wcoeff = wc->begin()->second;
    if (!wcoeff.soul().is_zero() || wcoeff.body() == 0.0)
        throw InputError("weight coefficient must be a nonzero complex number");
    const cplx c = wcoeff.body();
    const int d = degree_bound >= 0 ? degree_bound : default_degree_bound(ell, weight);

    std::map<int, GrassmannNumber> beta, gamma;
    std::vector<int> holes;
    std::map<int, GrassmannNumber> residual;
    for (const auto& [p, l] : *lc) {
        if (l.is_zero()) continue;
        if (p >= m && p <= m + d) {
            beta[p - m] = l * (1.0 / c);
        } else if (p <= 0 && p >= -d) {
            gamma[-p] = l * cplx{-1.0};
        } else if (m > 0 && p > 0 && p < m) {
            residual[p] = l;
        } else {
            throw DegreeBoundExceeded("overlap power outside the admissible degree range");
        }
    }
    if (!residual.empty()) {
        for (int p = 1; p < m; ++p) holes.push_back(p);
        throw CechObstruction(std::move(holes), std::move(residual));
    }
    const Parity par = ell.is_zero() ? Parity::even : ell.parity();
    return CoboundarySplit{ComponentFunction::laurent(L, par, std::move(beta)),
                           ComponentFunction::laurent(L, par, std::move(gamma))};
}

// Reassemble w(z) b_nor(z) - b_sou(1/z) to verify a split.
inline ComponentFunction coboundary_value(const CoboundarySplit& split,
                                          const ComponentFunction& weight) {
    const int L = weight.generators();
    const ComponentFunction recip =
        ComponentFunction::monomial(L, Parity::even, -1, GrassmannNumber(L, 1.0));
    return weight * split.b_nor - compose(split.b_sou, recip);
}

// ---- atlases and their pair/generator consistency ------------------------

enum class CoverKind { sphere2, torus, generic };

using Transition = std::variant<N1Map, N2Map>;

// A finite presentation of a cover: named transitions only.  For the
// two-chart sphere the single key "sou|nor" holds the map from the chart
// around zero to the chart around infinity; for a torus the keys "1" and
// "tau" hold the two lattice-generator translations.  Generic covers key
// transitions as "alpha|beta" for the map from chart beta to chart alpha.
struct Atlas {
    CoverKind cover = CoverKind::generic;
    cplx tau{0.0, 0.0};
    std::map<std::string, Transition> transitions;
};

struct CocycleReport {
    struct Entry {
        std::string label;
        double residual = 0.0;
    };
    std::vector<Entry> entries;

    double max_residual() const {
        double m = 0.0;
        for (const auto& e : entries) m = std::max(m, e.residual);
        return m;
    }
    bool pass(double tol = kResidualTol) const { return max_residual() <= tol; }
};

namespace detail {

inline double transition_distance(const Transition& a, const Transition& b) {
    if (a.index() != b.index()) throw InputError("comparing maps of different kinds");
    if (std::holds_alternative<N1Map>(a))
        return data_distance(std::get<N1Map>(a), std::get<N1Map>(b));
    return data_distance(std::get<N2Map>(a), std::get<N2Map>(b));
}

inline Transition compose_transitions(const Transition& a, const Transition& b) {
    if (a.index() != b.index()) throw InputError("composing maps of different kinds");
    if (std::holds_alternative<N1Map>(a))
        return compose(std::get<N1Map>(a), std::get<N1Map>(b));
    return compose(std::get<N2Map>(a), std::get<N2Map>(b));
}

inline Transition invert_transition(const Transition& t) {
    if (std::holds_alternative<N1Map>(t)) {
        const N1Map& h = std::get<N1Map>(t);
        const N2Map k = invert(f2_functor(h));
        return f1_functor(k);
    }
    return invert(std::get<N2Map>(t));
}

inline Transition identity_like(const Transition& t) {
    if (std::holds_alternative<N1Map>(t))
        return identity_n1(std::get<N1Map>(t).f.generators());
    const N2Map& h = std::get<N2Map>(t);
    return identity_n2(h.f.generators(), h.coords);
}

} // namespace detail

// Pairwise / generator-pair consistency of an atlas.  The two-chart sphere
// has no triple of distinct charts, so its only condition is that the stored
// transition composed with its inverse is the identity.  A torus cover must
// have commuting generator translations.  Generic covers are scanned for
// stored chains alpha|beta ∘ beta|gamma vs alpha|gamma.
inline CocycleReport check_atlas_cocycle(const Atlas& atlas) {
    CocycleReport report;
    if (atlas.cover == CoverKind::sphere2) {
        const auto it = atlas.transitions.find("sou|nor");
        if (it == atlas.transitions.end())
            throw InputError("two-chart cover requires the transition sou|nor");
        const Transition inv = detail::invert_transition(it->second);
        report.entries.push_back(
            {"sou|nor composed with its inverse vs identity",
             detail::transition_distance(detail::compose_transitions(it->second, inv),
                                         detail::identity_like(it->second))});
        const auto stored = atlas.transitions.find("nor|sou");
        if (stored != atlas.transitions.end())
            report.entries.push_back({"stored nor|sou vs inverted sou|nor",
                                      detail::transition_distance(stored->second, inv)});
        return report;
    }
    if (atlas.cover == CoverKind::torus) {
        const auto i1 = atlas.transitions.find("1");
        const auto it = atlas.transitions.find("tau");
        if (i1 == atlas.transitions.end() || it == atlas.transitions.end())
            throw InputError("torus cover requires transitions 1 and tau");
        report.entries.push_back(
            {"1 after tau vs tau after 1",
             detail::transition_distance(
                 detail::compose_transitions(i1->second, it->second),
                 detail::compose_transitions(it->second, i1->second))});
        return report;
    }
    for (const auto& [kab, tab] : atlas.transitions) {
        const auto bar = kab.find('|');
        if (bar == std::string::npos) continue;
        const std::string a = kab.substr(0, bar), b = kab.substr(bar + 1);
        for (const auto& [kbc, tbc] : atlas.transitions) {
            const auto bar2 = kbc.find('|');
            if (bar2 == std::string::npos || kbc.substr(0, bar2) != b) continue;
            const std::string c = kbc.substr(bar2 + 1);
            const auto iac = atlas.transitions.find(a + "|" + c);
            if (iac == atlas.transitions.end()) continue;
            report.entries.push_back(
                {kab + " after " + kbc + " vs " + a + "|" + c,
                 detail::transition_distance(detail::compose_transitions(tab, tbc),
                                             iac->second)});
        }
    }
    return report;
}

} // namespace superlift
