#pragma once

// Fixtures and independent oracles shared by the test binaries. Nothing here
// calls the library routine it is used to check.

#include <map>
#include <vector>

#include "fedq/fedq.hpp"

namespace fedq::testing {

inline Poly X1(int d = 2) { return Poly::variable(d, 0); }
inline Poly X2(int d = 2) { return Poly::variable(d, 1); }
inline Poly C(const Rational& c, int d = 2) { return Poly::constant(d, c); }
inline Poly P(const std::string& s, int d = 2) { return parse_poly(s, d); }

/// Flat R^2 at order N.
inline SymplecticConnection flat_connection(int order) { return SymplecticConnection(Chart::standard(1, order)); }

/// Gamma_111 = x2, the curved fixture.
inline SymplecticConnection curved_connection(int order) {
    return SymplecticConnection::from_entries(Chart::standard(1, order), {{0, 0, 0, X2()}});
}

/// Gamma_111 = x2 and Gamma_122 = x1; neither coordinate field preserves it,
/// so tau is nonzero on the fixture action.
inline SymplecticConnection twisted_connection(int order) {
    return SymplecticConnection::from_entries(Chart::standard(1, order), {{0, 0, 0, X2()}, {0, 1, 1, X1()}});
}

inline SymplecticVectorField d1(const ChartPtr& c) { return SymplecticVectorField::coordinate(c, 0); }
inline SymplecticVectorField d2(const ChartPtr& c) { return SymplecticVectorField::coordinate(c, 1); }
/// x1 d/dx1 - x2 d/dx2.
inline SymplecticVectorField hyperbolic(const ChartPtr& c) { return SymplecticVectorField::check(c, {X1(), -X2()}); }
/// x1^2 d/dx1 - 2 x1 x2 d/dx2, the Hamiltonian field of x1^2 x2.
inline SymplecticVectorField quadratic(const ChartPtr& c) {
    return SymplecticVectorField::check(c, {X1() * X1(), Rational(-2) * X1() * X2()});
}

/// The two-dimensional algebra [e1, e2] = e1 acting by e1 -> d1, e2 -> hyperbolic.
inline LieAction fixture_action(const ChartPtr& c) {
    auto alg = validate_lie({"e1", "e2"}, {{0, 1, 0, Rational(1)}, {1, 0, 0, Rational(-1)}});
    return validate_action(alg, {d1(c), hyperbolic(c)});
}

inline StarFunction F(const ChartPtr& c, const std::string& s) { return parse_star_function(s, c); }

// ---------------------------------------------------------------------------
// Oracles

/// Poisson tensor of the standard form: Pi^{i, n+i} = 1, Pi^{n+i, i} = -1.
inline Rational standard_pi(int n, int i, int j) {
    if (j == i + n) return Rational(1);
    if (i == j + n) return Rational(-1);
    return Rational(0);
}

/// {f, g} = sum_i (df/dq_i dg/dp_i - df/dp_i dg/dq_i) with q = x1..xn, p = x{n+1}..x{2n}.
inline Poly poisson_oracle(const Poly& f, const Poly& g) {
    const int n = f.dim() / 2;
    Poly r(f.dim());
    for (int i = 0; i < n; ++i) r += f.diff(i) * g.diff(n + i) - f.diff(n + i) * g.diff(i);
    return r;
}

/// Flat-chart Moyal product by its bidifferential expansion:
/// f * g = sum_q (h/2)^q / q! Pi^{i1 j1} .. Pi^{iq jq} d_I f d_J g,
/// applied one Pi-contraction at a time to the list of pairs.
inline std::map<int, Poly> moyal_oracle(const Poly& f, const Poly& g, int max_h) {
    const int d = f.dim(), n = d / 2;
    std::map<int, Poly> out;
    std::vector<std::pair<Poly, Poly>> pairs{{f, g}};
    Rational weight(1);
    for (int q = 0; q <= max_h && !pairs.empty(); ++q) {
        Poly sum(d);
        for (const auto& [a, b] : pairs) sum += a * b;
        if (!(sum * weight).is_zero()) out.emplace(q, sum * weight);
        std::vector<std::pair<Poly, Poly>> next;
        for (const auto& [a, b] : pairs)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    Rational pij = standard_pi(n, i, j);
                    if (pij == 0) continue;
                    Poly da = a.diff(i), db = b.diff(j);
                    if (da.is_zero() || db.is_zero()) continue;
                    next.emplace_back(da * pij, db);
                }
        pairs = std::move(next);
        weight /= Rational(2 * (q + 1));
    }
    return out;
}

/// y-derivative of a 0-form in the Weyl algebra.
inline WeylForm dy(const WeylForm& a, int i) {
    WeylForm r(a.ctx(), a.order());
    for (const auto& [k, c] : a.terms()) {
        if (k.y[i] == 0) continue;
        WeylKey k2 = k;
        k2.y.decrement(i);
        r.add_term(k2, c * Rational(k.y[i]));
    }
    return r;
}

/// Fiberwise Moyal product of 0-forms on the standard chart by the
/// exponential series: sum_q (h/2)^q / q! Pi^{i1 j1} .. d_y^I a d_y^J b.
inline WeylForm fiber_moyal_oracle(const WeylForm& a, const WeylForm& b, int order) {
    const int d = a.dim(), n = d / 2;
    WeylForm total(a.ctx(), order);
    std::vector<std::pair<WeylForm, WeylForm>> pairs{{a, b}};
    Rational weight(1);
    for (int q = 0; !pairs.empty(); ++q) {
        for (const auto& [x, y] : pairs)
            for (const auto& [kx, cx] : x.terms())
                for (const auto& [ky, cy] : y.terms()) {
                    WeylKey k;
                    k.y = kx.y + ky.y;
                    k.h = kx.h + ky.h + q;
                    total.add_term(k, cx * cy * weight);
                }
        std::vector<std::pair<WeylForm, WeylForm>> next;
        for (const auto& [x, y] : pairs)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    Rational pij = standard_pi(n, i, j);
                    if (pij == 0) continue;
                    WeylForm dxi = dy(x, i), dyj = dy(y, j);
                    if (dxi.is_zero() || dyj.is_zero()) continue;
                    next.emplace_back(pij * dxi, dyj);
                }
        pairs = std::move(next);
        weight /= Rational(2 * (q + 1));
    }
    return total;
}

/// Curvature tensor brute force: R_ijkl = d_k G_ijl - d_l G_ijk
/// + G_ikp G^p_lj - G_ilp G^p_kj with G^p_lj = omega^{pq} G_qlj.
inline Poly curvature_oracle(const SymplecticConnection& conn, int i, int j, int k, int l) {
    const int d = conn.dim(), n = d / 2;
    auto up = [&](int p, int a, int b) {
        Poly r(d);
        // omega^{pq} = -Pi^{pq} for the standard form.
        for (int q = 0; q < d; ++q) {
            Rational w = -standard_pi(n, p, q);
            if (w != 0) r += conn.lower(q, a, b) * w;
        }
        return r;
    };
    Poly r = conn.lower(i, j, l).diff(k) - conn.lower(i, j, k).diff(l);
    for (int p = 0; p < d; ++p) r += conn.lower(i, k, p) * up(p, l, j) - conn.lower(i, l, p) * up(p, k, j);
    return r;
}

// ---------------------------------------------------------------------------
// Classical cross product through its action by differential operators on
// C[x]: f acts by multiplication and e_i by the vector field X_i. For the
// fixture action the PBW monomials map to operators that are independent
// over C[x], so comparing operators on enough test polynomials decides
// equality.

using ClassicalOp = std::map<Word, Poly, WordLess>;

inline Poly apply_op(const ClassicalOp& u, const Poly& phi, const LieAction& act) {
    Poly r(phi.dim());
    for (const auto& [w, f] : u) {
        Poly v = phi;
        for (std::size_t p = w.size(); p-- > 0;) v = act.image(w[p]).apply(v);
        r += f * v;
    }
    return r;
}

/// All monomials of degree <= deg in dim variables.
inline std::vector<Poly> test_monomials(int dim, int deg) {
    std::vector<Poly> out;
    std::vector<Exponent> layer{Exponent{}};
    for (int t = 0; t <= deg; ++t) {
        for (const auto& e : layer) out.push_back(Poly::monomial(dim, e, Rational(1)));
        std::vector<Exponent> next;
        for (const auto& e : layer)
            for (int i = 0; i < dim; ++i) {
                Exponent f = e;
                f.increment(i);
                if (std::find(next.begin(), next.end(), f) == next.end()) next.push_back(f);
            }
        layer = std::move(next);
    }
    return out;
}

inline ClassicalOp classical_part(const CrossElement& u) {
    ClassicalOp r;
    for (const auto& [w, f] : u.terms()) {
        Poly p = f.coefficient(0);
        if (!p.is_zero()) r.emplace(w, p);
    }
    return r;
}

}  // namespace fedq::testing
