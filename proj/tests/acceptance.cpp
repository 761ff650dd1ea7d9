// Acceptance gate: one PASS/FAIL line per criterion. A criterion passes only
// when every identity holds exactly and the wall time stays under its target.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "support.hpp"

using namespace fedq;
using namespace fedq::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    long checks = 0;

    /// Records one identity; keeps the first failure message.
    void expect(bool ok, const std::string& what) {
        ++checks;
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

struct Criterion {
    int id;
    std::string title;
    double target_seconds;  // 0: exactness only
    std::function<Outcome()> body;
};

using Fields = std::vector<std::pair<std::string, SymplecticVectorField>>;

Fields fixture_fields(const ChartPtr& c) {
    return {{"d1", d1(c)}, {"d2", d2(c)}, {"x1d1-x2d2", hyperbolic(c)}, {"x1^2d1-2x1x2d2", quadratic(c)}};
}

std::vector<Word> pbw_words(int m, int len) {
    std::vector<Word> out{Word{}}, layer{Word{}};
    for (int l = 1; l <= len; ++l) {
        std::vector<Word> next;
        for (const auto& w : layer)
            for (int i = w.empty() ? 0 : w.back(); i < m; ++i) {
                Word v = w;
                v.push_back(i);
                next.push_back(v);
            }
        out.insert(out.end(), next.begin(), next.end());
        layer = std::move(next);
    }
    return out;
}

// 1. Flat chart: x1*x2 - x2*x1 = h and the bidifferential Moyal expansion.
Outcome flat_moyal() {
    Outcome o;
    auto sol = solve_r(flat_connection(6));
    const auto& fc = sol->function_ctx();
    o.expect(star(F(fc, "x1"), F(fc, "x2"), *sol) - star(F(fc, "x2"), F(fc, "x1"), *sol) == F(fc, "h"),
             "x1*x2 - x2*x1 != h");
    Sampler rs(1001);
    for (int s = 0; s < 20; ++s) {
        Poly f = rs.poly(2, 3, 4), g = rs.poly(2, 3, 4);
        StarFunction expect(fc);
        for (const auto& [q, c] : moyal_oracle(f, g, fc->order() / 2)) expect.add(q, c);
        o.expect(star(StarFunction::from_poly(fc, f), StarFunction::from_poly(fc, g), *sol) == expect,
                 "pair " + f.str() + " ; " + g.str());
    }
    return o;
}

// 2. D^2 = 0 modulo degree > N-2 on the curved fixture at N = 8.
Outcome d_squared() {
    Outcome o;
    auto sol = solve_r(curved_connection(8));
    Sampler rs(1002);
    bool moved = false;
    for (int s = 0; s < 10; ++s) {
        WeylForm a = rs.form(sol->ctx(), 8, 5, 2, 2);
        WeylForm Da = sol->D(a);
        moved = moved || !Da.truncated(6).is_zero();
        o.expect(sol->D(Da).truncated(6).is_zero(), "form " + a.str());
    }
    o.expect(moved, "D vanished on every sample");
    return o;
}

// 3. Associativity on the curved fixture at N = 8.
Outcome associativity() {
    Outcome o;
    auto sol = solve_r(curved_connection(8));
    const auto& fc = sol->function_ctx();
    Sampler rs(1003);
    for (int s = 0; s < 10; ++s) {
        StarFunction f = rs.star_function(fc, 2), g = rs.star_function(fc, 2), h = rs.star_function(fc, 2);
        StarFunction lhs = star(star(f, g, *sol), h, *sol), rhs = star(f, star(g, h, *sol), *sol);
        o.expect(lhs.mod_h(4) == rhs.mod_h(4), "triple " + f.str() + " ; " + g.str() + " ; " + h.str());
        // The truncation contract keeps h^4 as well; check it too.
        o.expect(lhs == rhs, "h^4 coefficient, triple " + f.str() + " ; " + g.str() + " ; " + h.str());
    }
    return o;
}

// 4. First-order antisymmetrization equals the Poisson bracket.
Outcome first_order_bracket() {
    Outcome o;
    Sampler rs(1004);
    for (const auto& conn : {flat_connection(6), curved_connection(6)}) {
        auto sol = solve_r(conn);
        const auto& fc = sol->function_ctx();
        for (int s = 0; s < 20; ++s) {
            Poly f = rs.poly(2, 3, 4), g = rs.poly(2, 3, 4);
            StarFunction sf = StarFunction::from_poly(fc, f), sg = StarFunction::from_poly(fc, g);
            StarFunction c = star(sf, sg, *sol) - star(sg, sf, *sol);
            o.expect(c.coefficient(0).is_zero(), "h^0 part of the commutator");
            o.expect(c.coefficient(1) == poisson_oracle(f, g), "pair " + f.str() + " ; " + g.str());
        }
    }
    return o;
}

// 5. Unit and constants.
Outcome unit_center() {
    Outcome o;
    Sampler rs(1005);
    for (const auto& conn : {flat_connection(8), curved_connection(8), twisted_connection(8)}) {
        auto sol = solve_r(conn);
        const auto& fc = sol->function_ctx();
        StarFunction one = StarFunction::constant(fc, Rational(1));
        for (int s = 0; s < 5; ++s) {
            StarFunction f = rs.star_function(fc, 3, 2);
            Rational k = rs.coefficient();
            StarFunction c = StarFunction::constant(fc, k);
            o.expect(star(one, f, *sol) == f && star(f, one, *sol) == f, "unit on " + f.str());
            o.expect(star(c, f, *sol) == f * k && star(f, c, *sol) == f * k, "constant " + k.get_str());
        }
    }
    return o;
}

// 6. X~(f*g) = X~f*g + f*X~g for the three fixture fields.
Outcome derivation_law() {
    Outcome o;
    Sampler rs(1006);
    for (const auto& conn : {flat_connection(8), curved_connection(8)}) {
        auto sol = solve_r(conn);
        const auto& fc = sol->function_ctx();
        const auto& c = sol->ctx();
        for (const auto& X : {d1(c), hyperbolic(c), quadratic(c)}) {
            QuantizedDerivation q(X, sol);
            for (int s = 0; s < 5; ++s) {
                StarFunction f = rs.star_function(fc, 2, 1), g = rs.star_function(fc, 2, 1);
                StarFunction lhs = q.apply(star(f, g, *sol));
                StarFunction rhs = star(q.apply(f), g, *sol) + star(f, q.apply(g), *sol);
                o.expect(lhs.mod_h(4) == rhs.mod_h(4), X.str() + " on " + f.str() + " ; " + g.str());
                o.expect(lhs == rhs, "h^4 coefficient, " + X.str() + " on " + f.str() + " ; " + g.str());
            }
        }
    }
    return o;
}

// 7. D eta = 0, D u = -eta/h, L_X delta = delta L_X, [D, L_X] = [eta/h, .],
// and the two routes to eta.
Outcome fedosov_lie() {
    Outcome o;
    Sampler rs(1007);
    for (const auto& conn : {flat_connection(8), curved_connection(8), twisted_connection(8)}) {
        auto sol = solve_r(conn);
        const int N = sol->order();
        for (const auto& [name, X] : fixture_fields(sol->ctx())) {
            QuantizedDerivation q(X, sol);
            const WeylForm& eta = q.eta().form;
            o.expect(sol->D(eta).is_zero(), name + ": D eta");
            WeylForm Du = sol->D(q.u().form);
            o.expect(Du == (-over_h(eta)).truncated(Du.order()), name + ": D u");
            o.expect(eta == eta_by_definition(X, *sol), name + ": eta routes");
            for (int s = 0; s < 3; ++s) {
                WeylForm a = rs.form(sol->ctx(), N, 4, 2, 2);
                o.expect(lie_derivative(X, op_delta(a)) == op_delta(lie_derivative(X, a)), name + ": L_X delta");
                WeylForm lhs = sol->D(lie_derivative(X, a)) - lie_derivative(X, sol->D(a));
                o.expect(lhs.truncated(N - 1) == commutator_over_h(eta, a).truncated(N - 1), name + ": [D, L_X]");
            }
        }
    }
    return o;
}

// 8. eta cocycle, the tau commutator identity, and cyclic tau closure.
Outcome cocycles() {
    Outcome o;
    Sampler rs(1008);
    for (const auto& conn : {curved_connection(8), twisted_connection(8)}) {
        auto sol = solve_r(conn);
        const auto& fc = sol->function_ctx();
        const auto& c = sol->ctx();
        std::vector<SymplecticVectorField> fs{d1(c), d2(c), hyperbolic(c)};
        std::vector<QuantizedDerivation> qs;
        for (const auto& X : fs) qs.emplace_back(X, sol);
        auto qd = [&](const SymplecticVectorField& X) { return QuantizedDerivation(X, sol); };
        auto t = [&](const SymplecticVectorField& X, const SymplecticVectorField& Y) { return tau(X, Y, sol).symbol; };
        for (std::size_t i = 0; i < fs.size(); ++i)
            for (std::size_t j = 0; j < fs.size(); ++j) {
                if (i == j) continue;
                SymplecticVectorField br = field_bracket(fs[i], fs[j]);
                QuantizedDerivation qb = qd(br);
                o.expect(lie_derivative(fs[i], qs[j].eta().form) - lie_derivative(fs[j], qs[i].eta().form) ==
                             qb.eta().form,
                         "eta cocycle " + fs[i].str() + " , " + fs[j].str());
                StarFunction tv = tau_from(qs[i], qs[j], qb).symbol;
                for (int s = 0; s < 2; ++s) {
                    StarFunction f = rs.star_function(fc, 3, 1);
                    StarFunction lhs = qs[i].apply(qs[j].apply(f)) - qs[j].apply(qs[i].apply(f)) - qb.apply(f);
                    o.expect(lhs.mod_h(4) == star_commutator(tv, f, *sol).mod_h(4),
                             "tau commutator " + fs[i].str() + " , " + fs[j].str() + " on " + f.str());
                }
            }
        const auto &X = fs[0], &Y = fs[1], &Z = fs[2];
        StarFunction lhs = t(field_bracket(X, Y), Z) + t(field_bracket(Y, Z), X) + t(field_bracket(Z, X), Y);
        StarFunction rhs = qs[0].apply(t(Y, Z)) + qs[1].apply(t(Z, X)) + qs[2].apply(t(X, Y));
        o.expect(lhs == rhs, "tau closure: " + lhs.str() + " vs " + rhs.str());
    }
    return o;
}

struct CrossFixture {
    SolutionPtr sol = solve_r(twisted_connection(8));
    CrossProduct cp{fixture_action(sol->ctx()), sol};
    const ChartPtr& fc = sol->function_ctx();

    CrossElement mono(const std::string& f, const Word& w) const { return CrossElement::monomial(fc, F(fc, f), w); }

    /// Pure PBW words of degree <= 2.
    std::vector<CrossElement> words() const {
        std::vector<CrossElement> out;
        for (const Word& w : pbw_words(2, 2)) out.push_back(mono("1", w));
        return out;
    }

    /// Degree <= 2 monomials with nonconstant coefficients.
    std::vector<CrossElement> mixed() const {
        return {mono("x1", {}),       mono("x2", {}),          mono("x1", {0}),    mono("x2", {1}),
                mono("x1*x2", {0, 1}), mono("x2", {0, 0}),     mono("x1^2", {1, 1})};
    }
};

std::string show(const CrossElement& u) { return u.str({"e1", "e2"}); }

// 9. Pair-bracket Jacobi, cross-product associativity, diamond confluence.
Outcome cross_product() {
    Outcome o;
    CrossFixture fx;
    const CrossProduct& cp = fx.cp;
    Sampler rs(1009);
    auto pair = [&] { return CrossPairElement{rs.star_function(fx.fc, 2, 1), rs.vector(2)}; };
    for (int s = 0; s < 10; ++s) {
        auto u = pair(), v = pair(), w = pair();
        auto a = cross_pair_bracket(cross_pair_bracket(u, v, cp), w, cp);
        auto b = cross_pair_bracket(cross_pair_bracket(v, w, cp), u, cp);
        auto c = cross_pair_bracket(cross_pair_bracket(w, u, cp), v, cp);
        bool zero = (a.a + b.a + c.a).is_zero();
        for (std::size_t i = 0; i < a.g.size(); ++i) zero = zero && a.g[i] + b.g[i] + c.g[i] == 0;
        o.expect(zero, "Jacobi on " + u.a.str() + " ; " + v.a.str() + " ; " + w.a.str());
    }
    for (const auto& set : {fx.words(), fx.mixed()})
        for (const auto& u : set)
            for (const auto& v : set) {
                CrossElement uv = cp.mul(u, v);
                for (const auto& w : set)
                    o.expect(cp.mul(uv, w) == cp.mul(u, cp.mul(v, w)),
                             "associativity " + show(u) + " ; " + show(v) + " ; " + show(w));
            }
    for (int len = 2; len <= 4; ++len) {
        Word w(static_cast<std::size_t>(len));
        for (int code = 0; code < (1 << len); ++code) {
            for (int p = 0; p < len; ++p) w[static_cast<std::size_t>(p)] = (code >> p) & 1;
            CrossElement ref = cp.normalize(w, RewriteStrategy::Leftmost);
            o.expect(cp.normalize(w, RewriteStrategy::Rightmost) == ref, "diamond, strategies differ");
            for (std::size_t p = 0; p + 1 < w.size(); ++p)
                if (w[p] > w[p + 1])
                    o.expect(cp.rewrite_at(w, p, RewriteStrategy::Rightmost) == ref, "diamond at a descent");
        }
    }
    return o;
}

// 10. h -> 0 limit of the product against operator composition on C[x].
Outcome classical_limit_check() {
    Outcome o;
    CrossFixture fx;
    const LieAction& act = fx.cp.action();
    auto tests = test_monomials(2, 4);
    for (const auto& set : {fx.words(), fx.mixed()})
        for (const auto& u : set)
            for (const auto& v : set) {
                ClassicalOp prod = classical_part(classical_limit(fx.cp.mul(u, v)));
                ClassicalOp ou = classical_part(u), ov = classical_part(v);
                bool same = true;
                for (const Poly& phi : tests) same = same && apply_op(prod, phi, act) == apply_op(ou, apply_op(ov, phi, act), act);
                o.expect(same, show(u) + " ; " + show(v));
            }
    return o;
}

// 11. Star coefficients and tau agree between N and N+2 within the lower contract.
Outcome truncation_stability() {
    Outcome o;
    Sampler rs(1011);
    std::vector<std::pair<Poly, Poly>> pairs;
    for (int s = 0; s < 6; ++s) pairs.emplace_back(rs.poly(2, 3, 4), rs.poly(2, 3, 4));
    for (int N : {6, 8}) {
        for (const auto& mk : {curved_connection, twisted_connection}) {
            auto lo = solve_r(mk(N)), hi = solve_r(mk(N + 2));
            for (const auto& [f, g] : pairs) {
                StarFunction a = star(StarFunction::from_poly(lo->function_ctx(), f),
                                      StarFunction::from_poly(lo->function_ctx(), g), *lo);
                StarFunction b = star(StarFunction::from_poly(hi->function_ctx(), f),
                                      StarFunction::from_poly(hi->function_ctx(), g), *hi);
                for (int q = 0; q <= N / 2; ++q)
                    o.expect(a.coefficient(q) == b.coefficient(q),
                             "B_" + std::to_string(q) + " at N=" + std::to_string(N) + " on " + f.str() + " ; " + g.str());
            }
            auto fl = fixture_fields(lo->ctx()), fh = fixture_fields(hi->ctx());
            for (std::size_t i = 0; i < fl.size(); ++i)
                for (std::size_t j = i + 1; j < fl.size(); ++j) {
                    StarFunction a = tau(fl[i].second, fl[j].second, lo).symbol;
                    StarFunction b = tau(fh[i].second, fh[j].second, hi).symbol;
                    o.expect(a == b.mod_h(N / 2 + 1),
                             "tau(" + fl[i].first + ", " + fl[j].first + ") at N=" + std::to_string(N));
                }
        }
    }
    return o;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "flat-chart Moyal equivalence", 1.0, flat_moyal},
        {2, "D^2 = 0 on the curved fixture", 10.0, d_squared},
        {3, "star associativity mod h^4", 30.0, associativity},
        {4, "first-order bracket is Poisson", 5.0, first_order_bracket},
        {5, "unit and constants", 0.0, unit_center},
        {6, "quantized derivation law", 60.0, derivation_law},
        {7, "Fedosov-Lie identities", 60.0, fedosov_lie},
        {8, "cocycle identities", 120.0, cocycles},
        {9, "cross product Jacobi, associativity, diamond", 120.0, cross_product},
        {10, "classical limit", 0.0, classical_limit_check},
        {11, "truncation stability", 0.0, truncation_stability},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = c.target_seconds == 0 || secs < c.target_seconds;
        bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        char timing[96];
        if (c.target_seconds > 0) std::snprintf(timing, sizeof timing, "%.2f s, target < %.0f s", secs, c.target_seconds);
        else std::snprintf(timing, sizeof timing, "%.2f s, exact", secs);
        std::cout << (pass ? "PASS" : "FAIL") << "  C" << c.id << "  " << c.title << "  [" << o.checks
                  << " identities, " << timing << "]";
        if (!o.pass) std::cout << "  first failure: " << o.detail;
        else if (!in_time) std::cout << "  over the runtime target";
        std::cout << std::endl;
    }
    std::cout << (failed ? "FAILED " : "OK ") << criteria.size() - static_cast<std::size_t>(failed) << "/"
              << criteria.size() << " criteria" << std::endl;
    return failed ? 1 : 0;
}
