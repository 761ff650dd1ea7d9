#pragma once

#include <functional>
#include <set>
#include <sstream>

#include "problem.hpp"
#include "random.hpp"

namespace fedq {

struct IdentityCheck {
    std::string id;  // "module.identity"
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    std::uint64_t seed = 0;
    int order = 0;
    std::string suite;
    std::vector<IdentityCheck> checks;

    bool ok() const {
        return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.pass; });
    }
    std::size_t passed() const {
        return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return c.pass; }));
    }

    /// One line per identity, then a summary; no timings so reruns diff clean.
    std::string text() const {
        std::ostringstream os;
        os << "seed " << seed << " order " << order << " suite " << suite << "\n";
        for (const auto& c : checks) os << (c.pass ? "PASS " : "FAIL ") << c.id << "  " << c.detail << "\n";
        os << (ok() ? "OK " : "FAILED ") << passed() << "/" << checks.size() << " identities\n";
        return os.str();
    }
};

struct VerifyOptions {
    std::string suite = "all";  // all, ring, weyl, fedosov, symfield, liecross, cli
    int samples = 4;
};

inline const std::vector<std::string>& verify_suites() {
    static const std::vector<std::string> s{"all", "ring", "weyl", "fedosov", "symfield", "liecross", "cli"};
    return s;
}

namespace detail {

/// Fields and their quantizations, built once per verification run.
class FieldBank {
public:
    FieldBank(const ProblemFile& pf, SolutionPtr sol) : sol_(std::move(sol)) {
        if (!pf.fields.empty()) {
            names_ = pf.field_names;
            fields_ = pf.fields;
        } else {
            for (int i = 0; i < pf.dim; ++i) {
                names_.push_back("d" + std::to_string(i + 1));
                fields_.push_back(SymplecticVectorField::coordinate(pf.chart, i));
            }
            Poly x1 = Poly::variable(pf.dim, 0), x2 = Poly::variable(pf.dim, 1);
            names_.push_back("ham(x1^2*x2)");
            fields_.push_back(SymplecticVectorField::hamiltonian(pf.chart, x1 * x1 * x2));
        }
    }

    std::size_t size() const { return fields_.size(); }
    const std::string& name(std::size_t i) const { return names_[i]; }
    const SymplecticVectorField& field(std::size_t i) const { return fields_[i]; }

    const QuantizedDerivation& quantized(const SymplecticVectorField& X) {
        std::string key = X.str();
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, QuantizedDerivation(X, sol_)).first;
        return it->second;
    }

    StarFunction tau(const SymplecticVectorField& X, const SymplecticVectorField& Y) {
        return tau_from(quantized(X), quantized(Y), quantized(field_bracket(X, Y))).symbol;
    }

private:
    SolutionPtr sol_;
    std::vector<std::string> names_;
    std::vector<SymplecticVectorField> fields_;
    std::map<std::string, QuantizedDerivation> cache_;
};

inline WeylForm form_degree_part(const WeylForm& a, int k) {
    WeylForm r(a.ctx(), a.order());
    for (const auto& [key, c] : a.terms())
        if (key.form_degree() == k) r.add_term(key, c);
    return r;
}

inline bool admissible(const WeylForm& a) {
    return std::all_of(a.terms().begin(), a.terms().end(), [](const auto& t) { return t.first.total_degree() >= 0; });
}

/// Coefficients of a classical cross product element: word -> polynomial.
using ClassicalElement = std::map<Word, Poly, WordLess>;

/// Normal form of a word in U(g) by bubbling descents, no cocycle.
inline std::map<Word, Rational, WordLess> classical_normalize(const Word& w, const LieAlgebra& g) {
    std::map<Word, Rational, WordLess> out;
    std::vector<std::pair<Word, Rational>> pending{{w, Rational(1)}};
    while (!pending.empty()) {
        auto [v, c] = pending.back();
        pending.pop_back();
        std::size_t p = 0;
        while (p + 1 < v.size() && v[p] <= v[p + 1]) ++p;
        if (p + 1 >= v.size()) {
            out[v] += c;
            continue;
        }
        Word s = v;
        std::swap(s[p], s[p + 1]);
        pending.push_back({s, c});
        for (int k = 0; k < g.dim(); ++k) {
            Rational ck = g.c(v[p], v[p + 1], k);
            if (ck == 0) continue;
            Word t(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(p));
            t.push_back(k);
            t.insert(t.end(), v.begin() + static_cast<std::ptrdiff_t>(p) + 2, v.end());
            pending.push_back({t, c * ck});
        }
    }
    for (auto it = out.begin(); it != out.end();) it = it->second == 0 ? out.erase(it) : std::next(it);
    return out;
}

/// Undeformed product in C[x] >< U(g): w g = sum over subsets S of the
/// positions of w of (X_{w_S} g) w_{S^c}, followed by normal ordering in U(g).
inline ClassicalElement classical_mul(const ClassicalElement& u, const ClassicalElement& v, const LieAction& act) {
    ClassicalElement r;
    auto add = [&r](const Word& w, const Poly& p) {
        if (p.is_zero()) return;
        auto [it, fresh] = r.try_emplace(w, p);
        if (!fresh) {
            it->second += p;
            if (it->second.is_zero()) r.erase(it);
        }
    };
    for (const auto& [w1, f] : u)
        for (const auto& [w2, g] : v) {
            const std::size_t n = w1.size();
            for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
                Poly h = g;
                for (std::size_t p = n; p-- > 0;)
                    if (mask & (1u << p)) h = act.image(w1[p]).apply(h);
                if (h.is_zero()) continue;
                Word rest;
                for (std::size_t p = 0; p < n; ++p)
                    if (!(mask & (1u << p))) rest.push_back(w1[p]);
                rest.insert(rest.end(), w2.begin(), w2.end());
                for (const auto& [w, c] : classical_normalize(rest, act.algebra())) add(w, f * h * c);
            }
        }
    return r;
}

inline ClassicalElement to_classical(const CrossElement& u) {
    ClassicalElement r;
    for (const auto& [w, f] : u.terms()) {
        Poly p = f.coefficient(0);
        if (!p.is_zero()) r.emplace(w, p);
    }
    return r;
}

/// All normal words of length <= len over m generators.
inline std::vector<Word> normal_words(int m, int len) {
    std::vector<Word> out{Word{}};
    std::vector<Word> frontier{Word{}};
    for (int l = 1; l <= len; ++l) {
        std::vector<Word> next;
        for (const Word& w : frontier)
            for (int i = w.empty() ? 0 : w.back(); i < m; ++i) {
                Word v = w;
                v.push_back(i);
                next.push_back(v);
            }
        out.insert(out.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return out;
}

/// Words of length len with at least two descents.
inline std::vector<Word> multi_descent_words(int m, int len) {
    std::vector<Word> out;
    Word w(static_cast<std::size_t>(len), 0);
    for (;;) {
        int descents = 0;
        for (std::size_t p = 0; p + 1 < w.size(); ++p) descents += w[p] > w[p + 1];
        if (descents >= 2) out.push_back(w);
        std::size_t p = 0;
        while (p < w.size() && ++w[p] == m) w[p++] = 0;
        if (p == w.size()) break;
    }
    return out;
}

class Runner {
public:
    explicit Runner(VerifyReport& rep) : rep_(rep) {}

    /// Runs body(); it returns "" on success or a counterexample description.
    /// Exceptions are failures.
    void run(const std::string& id, const std::string& what, const std::function<std::string()>& body) {
        IdentityCheck c{id, false, what};
        try {
            std::string bad = body();
            c.pass = bad.empty();
            if (!c.pass) c.detail = what + ": " + bad;
        } catch (const std::exception& e) {
            c.detail = what + ": exception: " + e.what();
        }
        rep_.checks.push_back(std::move(c));
    }

private:
    VerifyReport& rep_;
};

inline std::string samples_text(int n) { return std::to_string(n) + " samples"; }

inline void verify_ring(Runner& run, Sampler& rs, const ProblemFile& pf, int samples) {
    const int d = pf.dim;
    run.run("ring.associativity", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            Poly a = rs.poly(d, 3), b = rs.poly(d, 3), c = rs.poly(d, 3);
            if (!((a * b) * c == a * (b * c))) return a.str() + ", " + b.str() + ", " + c.str();
        }
        return "";
    });
    run.run("ring.commutativity", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            Poly a = rs.poly(d, 3), b = rs.poly(d, 3);
            if (!(a * b == b * a) || !(a + b == b + a)) return a.str() + ", " + b.str();
        }
        return "";
    });
    run.run("ring.distributivity", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            Poly a = rs.poly(d, 3), b = rs.poly(d, 3), c = rs.poly(d, 3);
            if (!(a * (b + c) == a * b + a * c)) return a.str() + ", " + b.str() + ", " + c.str();
        }
        return "";
    });
    run.run("ring.derivation", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            Poly a = rs.poly(d, 3), b = rs.poly(d, 3);
            int i = rs.uniform(0, d - 1);
            if (!((a * b).diff(i) == a.diff(i) * b + a * b.diff(i))) return a.str() + ", " + b.str();
        }
        return "";
    });
    run.run("ring.mixed_partials", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            Poly a = rs.poly(d, 4, 4);
            int i = rs.uniform(0, d - 1), j = rs.uniform(0, d - 1);
            if (!(a.diff(i).diff(j) == a.diff(j).diff(i))) return a.str();
        }
        return "";
    });
}

inline void verify_weyl(Runner& run, Sampler& rs, const ProblemFile& pf, int samples) {
    const ChartPtr& c = pf.chart;
    const int N = pf.order;
    auto form = [&](bool neg = false) { return rs.form(c, N, 4, 2, 2, neg); };
    run.run("weyl.associativity", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            WeylForm a = form(true), b = form(), e = form(true);
            if (!(moyal_mul(moyal_mul(a, b), e) == moyal_mul(a, moyal_mul(b, e)))) return a.str();
        }
        return "";
    });
    run.run("weyl.delta_squared", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            WeylForm a = form(true);
            if (!op_delta(op_delta(a)).is_zero()) return "delta delta " + a.str();
            if (!op_delta_star(op_delta_star(a)).is_zero()) return "delta* delta* " + a.str();
        }
        return "";
    });
    run.run("weyl.hodge_decomposition", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            WeylForm a = form(true);
            WeylForm sum = op_delta(op_delta_inv(a)) + op_delta_inv(op_delta(a)) + scalar_part(a);
            if (!(sum.truncated(N) == a)) return a.str();
        }
        return "";
    });
    run.run("weyl.delta_graded_derivation", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            int k = rs.uniform(0, 2);
            WeylForm a = form_degree_part(form(true), k), b = form(true);
            WeylForm lhs = op_delta(moyal_mul(a, b)).truncated(N - 1);
            WeylForm rhs = moyal_mul(op_delta(a), b) + Rational(k % 2 ? -1 : 1) * moyal_mul(a, op_delta(b));
            if (!(lhs == rhs.truncated(N - 1))) return a.str() + " ; " + b.str();
        }
        return "";
    });
    run.run("weyl.delta_is_inner", samples_text(samples), [&]() -> std::string {
        WeylForm gen = delta_generator(c, N);
        for (int s = 0; s < samples; ++s) {
            WeylForm a = form(true);
            if (!(op_delta(a) == commutator_over_h(gen, a).truncated(N - 1))) return a.str();
        }
        return "";
    });
    run.run("weyl.filtration", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            WeylForm a = form(true), b = form(true);
            WeylForm p = moyal_mul(a, b);
            if (p.is_zero()) continue;
            if (p.degrees().total_degree_min < a.degrees().total_degree_min + b.degrees().total_degree_min)
                return a.str() + " ; " + b.str();
        }
        return "";
    });
    run.run("weyl.admissibility", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            WeylForm a = form(true), b = form(true);
            for (const WeylForm& r : {moyal_mul(a, b), graded_commutator(a, b), op_delta(a), op_delta_star(a),
                                      op_delta_inv(a), commutator_over_h(a, b), exterior_d(a)})
                if (!admissible(r)) return a.str() + " ; " + b.str();
        }
        return "";
    });
    run.run("weyl.commutator_routes", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            WeylForm a = form(true), b = form(true);
            if (!(graded_commutator(a, b) == graded_commutator_by_products(a, b, N))) return a.str() + " ; " + b.str();
        }
        return "";
    });
}

inline void verify_fedosov(Runner& run, Sampler& rs, const ProblemFile& pf, const SolutionPtr& sol, int samples) {
    const int N = pf.order;
    const FedosovSolution& S = *sol;
    const ChartPtr& fc = S.function_ctx();
    auto fn = [&](int deg = 2, int h = 1) { return rs.star_function(fc, deg, h); };
    run.run("fedosov.d_squared", samples_text(samples) + ", modulo degree > N-2", [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            WeylForm a = rs.form(S.ctx(), N, 4, 2, 2);
            if (!S.D(S.D(a)).truncated(N - 2).is_zero()) return a.str();
        }
        return "";
    });
    run.run("fedosov.r_normalization", "delta^-1 r = 0, r in W_3", [&]() -> std::string {
        if (!op_delta_inv(S.r()).is_zero()) return "delta^-1 r != 0";
        if (!S.r().is_zero() && S.r().degrees().total_degree_min < 3) return "r not in W_3";
        return "";
    });
    run.run("fedosov.r_routes", "graded vs iterative", [&]() -> std::string {
        return solve_r_iterative(S.connection(), N)->r() == S.r() ? "" : "r differs";
    });
    run.run("fedosov.sigma_lift", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            StarFunction f = fn(3, 2);
            if (!(StarFunction::from_symbol(fc, sigma_project(lift(f, S))) == f)) return f.str();
        }
        return "";
    });
    run.run("fedosov.lift_sigma", samples_text(samples) + " on products of flat sections", [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            StarFunction f = fn(), g = fn();
            WeylForm a = moyal_mul(lift(f, S), lift(g, S));
            if (!S.D(a).is_zero()) return "product not flat: " + f.str() + " ; " + g.str();
            if (!(lift(StarFunction::from_symbol(fc, sigma_project(a)), S) == a)) return f.str() + " ; " + g.str();
        }
        return "";
    });
    run.run("fedosov.lift_routes", samples_text(samples) + ", graded vs iterative", [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            StarFunction f = fn(3, 1);
            if (!(lift_flat_iterative(f, S).form == lift(f, S))) return f.str();
        }
        return "";
    });
    run.run("fedosov.associativity", samples_text(samples) + ", modulo h^(N/2+1)", [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            StarFunction f = fn(), g = fn(), h = fn();
            if (!(star(star(f, g, S), h, S) == star(f, star(g, h, S), S)))
                return f.str() + " ; " + g.str() + " ; " + h.str();
        }
        return "";
    });
    run.run("fedosov.unit", samples_text(samples), [&]() -> std::string {
        StarFunction one = StarFunction::constant(fc, Rational(1));
        for (int s = 0; s < samples; ++s) {
            StarFunction f = fn(3, 2);
            if (!(star(one, f, S) == f) || !(star(f, one, S) == f)) return f.str();
        }
        return "";
    });
    run.run("fedosov.center", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            Rational k = rs.coefficient();
            StarFunction c = StarFunction::constant(fc, k), f = fn(3, 2);
            if (!(star(c, f, S) == f * k) || !(star(f, c, S) == f * k)) return k.get_str() + " ; " + f.str();
        }
        return "";
    });
    run.run("fedosov.poisson_bracket", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            StarFunction f = fn(3, 1), g = fn(3, 1);
            StarFunction lhs = star_commutator(f, g, S).divided_by_h().mod_h(1);
            StarFunction rhs = StarFunction::from_poly(fc, poisson(f.coefficient(0), g.coefficient(0), *fc));
            if (!(lhs == rhs)) return f.str() + " ; " + g.str();
        }
        return "";
    });
    run.run("fedosov.truncation_stability", samples_text(samples) + ", N vs N+2", [&]() -> std::string {
        SolutionPtr wide = solve_r(S.connection(), N + 2);
        if (!(wide->r().truncated(S.working_order()) == S.r())) return "r differs below the working order";
        for (int s = 0; s < samples; ++s) {
            StarFunction f = fn(), g = fn();
            if (!(star(f, g, *wide).mod_h(N / 2 + 1) == star(f, g, S))) return f.str() + " ; " + g.str();
        }
        return "";
    });
}

inline void verify_symfield(Runner& run, Sampler& rs, const ProblemFile& pf, const SolutionPtr& sol, FieldBank& bank,
                            int samples) {
    const int N = pf.order;
    const FedosovSolution& S = *sol;
    const ChartPtr& fc = S.function_ctx();
    const std::size_t nf = bank.size();
    std::string all = std::to_string(nf) + " fields";
    auto form = [&]() { return rs.form(S.ctx(), N, 4, 2, 2); };
    auto each_field = [&](const std::function<std::string(const SymplecticVectorField&)>& body) -> std::string {
        for (std::size_t i = 0; i < nf; ++i) {
            std::string bad = body(bank.field(i));
            if (!bad.empty()) return bank.name(i) + ": " + bad;
        }
        return "";
    };
    auto each_pair = [&](const std::function<std::string(const SymplecticVectorField&, const SymplecticVectorField&)>& body)
        -> std::string {
        for (std::size_t i = 0; i < nf; ++i)
            for (std::size_t j = i + 1; j < nf; ++j) {
                std::string bad = body(bank.field(i), bank.field(j));
                if (!bad.empty()) return bank.name(i) + ", " + bank.name(j) + ": " + bad;
            }
        return "";
    };
    std::string pairs = std::to_string(nf * (nf - 1) / 2) + " pairs";

    run.run("symfield.partial_lie", all + " x " + samples_text(samples), [&]() {
        return each_field([&](const SymplecticVectorField& X) -> std::string {
            WeylForm dg = gamma_X_crosscheck(X, S.connection()).form(N) - S.connection().form(N);
            for (int s = 0; s < samples; ++s) {
                WeylForm a = form();
                WeylForm lhs = op_partial(lie_derivative(X, a), S.connection()) -
                               lie_derivative(X, op_partial(a, S.connection()));
                if (!(lhs == commutator_over_h(dg, a))) return a.str();
            }
            return "";
        });
    });
    run.run("symfield.d_lie", all + " x " + samples_text(samples), [&]() {
        return each_field([&](const SymplecticVectorField& X) -> std::string {
            const WeylForm& eta = bank.quantized(X).eta().form;
            for (int s = 0; s < samples; ++s) {
                WeylForm a = form();
                WeylForm lhs = S.D(lie_derivative(X, a)) - lie_derivative(X, S.D(a));
                if (!(lhs.truncated(N - 1) == commutator_over_h(eta, a).truncated(N - 1))) return a.str();
            }
            return "";
        });
    });
    run.run("symfield.lie_delta", all + " x " + samples_text(samples), [&]() {
        return each_field([&](const SymplecticVectorField& X) -> std::string {
            for (int s = 0; s < samples; ++s) {
                WeylForm a = form();
                if (!(lie_derivative(X, op_delta(a)) == op_delta(lie_derivative(X, a)))) return a.str();
            }
            return "";
        });
    });
    run.run("symfield.eta_closed", all, [&]() {
        return each_field([&](const SymplecticVectorField& X) -> std::string {
            return S.D(bank.quantized(X).eta().form).is_zero() ? "" : "D eta != 0";
        });
    });
    run.run("symfield.u_equation", all, [&]() {
        return each_field([&](const SymplecticVectorField& X) -> std::string {
            const auto& q = bank.quantized(X);
            WeylForm Du = S.D(q.u().form);
            return Du == (-over_h(q.eta().form)).truncated(Du.order()) ? "" : "D u != -eta/h";
        });
    });
    run.run("symfield.eta_routes", all + ", Lie derivative vs Christoffel rule", [&]() {
        return each_field([&](const SymplecticVectorField& X) -> std::string {
            return eta_by_definition(X, S) == bank.quantized(X).eta().form ? "" : "routes differ";
        });
    });
    run.run("symfield.u_routes", all + ", graded vs iterative", [&]() {
        return each_field([&](const SymplecticVectorField& X) -> std::string {
            const auto& q = bank.quantized(X);
            return solve_u_iterative(q.eta(), S).form == q.u().form ? "" : "routes differ";
        });
    });
    run.run("symfield.eta_cocycle", pairs, [&]() {
        return each_pair([&](const SymplecticVectorField& X, const SymplecticVectorField& Y) -> std::string {
            WeylForm lhs = lie_derivative(X, bank.quantized(Y).eta().form) - lie_derivative(Y, bank.quantized(X).eta().form);
            return lhs == bank.quantized(field_bracket(X, Y)).eta().form ? "" : "L_X eta_Y - L_Y eta_X != eta_[X,Y]";
        });
    });
    run.run("symfield.linearity", pairs, [&]() {
        return each_pair([&](const SymplecticVectorField& X, const SymplecticVectorField& Y) -> std::string {
            const auto& qs = bank.quantized(X + Y);
            if (!(qs.eta().form == bank.quantized(X).eta().form + bank.quantized(Y).eta().form)) return "eta";
            if (!(qs.u().form == bank.quantized(X).u().form + bank.quantized(Y).u().form)) return "u";
            return "";
        });
    });
    run.run("symfield.derivation_law", all + " x " + samples_text(samples) + ", modulo h^(N/2+1)", [&]() {
        return each_field([&](const SymplecticVectorField& X) -> std::string {
            const auto& q = bank.quantized(X);
            for (int s = 0; s < samples; ++s) {
                StarFunction f = rs.star_function(fc, 2, 1), g = rs.star_function(fc, 2, 1);
                StarFunction lhs = q.apply(star(f, g, S));
                StarFunction rhs = star(q.apply(f), g, S) + star(f, q.apply(g), S);
                if (!(lhs == rhs)) return f.str() + " ; " + g.str();
            }
            return "";
        });
    });
    run.run("symfield.derivation_commutator", pairs + " x " + samples_text(samples), [&]() {
        return each_pair([&](const SymplecticVectorField& X, const SymplecticVectorField& Y) -> std::string {
            const auto& qx = bank.quantized(X);
            const auto& qy = bank.quantized(Y);
            const auto& qxy = bank.quantized(field_bracket(X, Y));
            StarFunction t = bank.tau(X, Y);
            for (int s = 0; s < samples; ++s) {
                StarFunction f = rs.star_function(fc, 3, 1);
                StarFunction lhs = qx.apply(qy.apply(f)) - qy.apply(qx.apply(f)) - qxy.apply(f);
                if (!(lhs == star_commutator(t, f, S))) return f.str();
            }
            return "";
        });
    });
    run.run("symfield.tau_closure", nf >= 3 ? "first three fields" : "skipped, fewer than three fields", [&]() -> std::string {
        if (nf < 3) return "";
        const auto &X = bank.field(0), &Y = bank.field(1), &Z = bank.field(2);
        StarFunction lhs = bank.tau(field_bracket(X, Y), Z) + bank.tau(field_bracket(Y, Z), X) +
                           bank.tau(field_bracket(Z, X), Y);
        StarFunction rhs = bank.quantized(X).apply(bank.tau(Y, Z)) + bank.quantized(Y).apply(bank.tau(Z, X)) +
                           bank.quantized(Z).apply(bank.tau(X, Y));
        return lhs == rhs ? "" : "lhs " + lhs.str() + " rhs " + rhs.str();
    });
    run.run("symfield.tau_stability", pairs + ", N vs N+2", [&]() {
        SolutionPtr wide = solve_r(S.connection(), N + 2);
        return each_pair([&](const SymplecticVectorField& X, const SymplecticVectorField& Y) -> std::string {
            StarFunction a = tau(X, Y, wide).symbol.mod_h(N / 2 + 1);
            StarFunction b = bank.tau(X, Y);
            return a == b ? "" : "N+2: " + a.str() + " N: " + b.str();
        });
    });
}

inline void verify_liecross(Runner& run, Sampler& rs, const ProblemFile& pf, const SolutionPtr& sol, int samples) {
    if (!pf.action) {
        run.run("liecross.skipped", "no Lie algebra action in the problem", [] { return std::string(); });
        return;
    }
    CrossProduct cp(*pf.action, sol);
    const int m = cp.dim();
    const ChartPtr& fc = cp.ctx();
    const int d = pf.dim;
    auto pair = [&]() { return CrossPairElement{rs.star_function(fc, 2, 1), rs.vector(m)}; };
    auto pair_sum = [](CrossPairElement a, const CrossPairElement& b) {
        a.a += b.a;
        for (std::size_t i = 0; i < a.g.size(); ++i) a.g[i] += b.g[i];
        return a;
    };
    auto pair_zero = [](const CrossPairElement& a) {
        return a.a.is_zero() && std::all_of(a.g.begin(), a.g.end(), [](const Rational& q) { return q == 0; });
    };
    auto monomial = [&]() {
        auto words = normal_words(m, 2);
        Word w = words[static_cast<std::size_t>(rs.uniform(0, static_cast<int>(words.size()) - 1))];
        Poly f = Poly::monomial(d, rs.exponent(d, rs.uniform(0, 2)), Rational(1));
        return CrossElement::monomial(fc, StarFunction::from_poly(fc, f), w);
    };

    run.run("liecross.pair_antisymmetry", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            auto u = pair(), v = pair();
            auto a = cross_pair_bracket(u, v, cp), b = cross_pair_bracket(v, u, cp);
            if (!pair_zero(pair_sum(a, b))) return u.a.str() + " ; " + v.a.str();
        }
        return "";
    });
    run.run("liecross.pair_jacobi", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            auto u = pair(), v = pair(), w = pair();
            auto j = pair_sum(pair_sum(cross_pair_bracket(cross_pair_bracket(u, v, cp), w, cp),
                                       cross_pair_bracket(cross_pair_bracket(v, w, cp), u, cp)),
                              cross_pair_bracket(cross_pair_bracket(w, u, cp), v, cp));
            if (!pair_zero(j)) return u.a.str() + " ; " + v.a.str() + " ; " + w.a.str();
        }
        return "";
    });
    run.run("liecross.associativity", samples_text(samples * 4) + " monomial triples", [&]() -> std::string {
        for (int s = 0; s < samples * 4; ++s) {
            auto u = monomial(), v = monomial(), w = monomial();
            if (!(cp.mul(cp.mul(u, v), w) == cp.mul(u, cp.mul(v, w))))
                return u.str(cp.algebra().names()) + " ; " + v.str(cp.algebra().names()) + " ; " +
                       w.str(cp.algebra().names());
        }
        return "";
    });
    run.run("liecross.diamond", "words of length 3 and 4 with two descents", [&]() -> std::string {
        for (int len = 3; len <= 4; ++len)
            for (const Word& w : multi_descent_words(m, len)) {
                std::vector<CrossElement> results;
                for (std::size_t p = 0; p + 1 < w.size(); ++p)
                    if (w[p] > w[p + 1]) results.push_back(cp.rewrite_at(w, p, RewriteStrategy::Leftmost));
                results.push_back(cp.normalize(w, RewriteStrategy::Rightmost));
                for (const auto& r : results)
                    if (!(r == results.front())) return "word " + CrossElement::monomial(fc, StarFunction::constant(fc, Rational(1)), w).str();
            }
        return "";
    });
    run.run("liecross.rewriting_routes", samples_text(samples * 2) + ", recursive vs rewriting", [&]() -> std::string {
        for (int s = 0; s < samples * 2; ++s) {
            auto u = monomial(), v = monomial();
            auto p = cp.mul(u, v);
            if (!(p == cp.mul_by_rewriting(u, v, RewriteStrategy::Leftmost)) ||
                !(p == cp.mul_by_rewriting(u, v, RewriteStrategy::Rightmost)))
                return u.str() + " ; " + v.str();
        }
        return "";
    });
    run.run("liecross.classical_limit", samples_text(samples * 2) + " monomial pairs", [&]() -> std::string {
        for (int s = 0; s < samples * 2; ++s) {
            auto u = monomial(), v = monomial();
            if (!(to_classical(classical_limit(cp.mul(u, v))) == classical_mul(to_classical(u), to_classical(v), cp.action())))
                return u.str() + " ; " + v.str();
        }
        return "";
    });
    run.run("liecross.embedding", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            StarFunction f = rs.star_function(fc, 2, 1), g = rs.star_function(fc, 2, 1);
            auto lhs = cp.mul(CrossElement::function(fc, f), CrossElement::function(fc, g));
            if (!(lhs == CrossElement::function(fc, star(f, g, cp.solution())))) return f.str() + " ; " + g.str();
        }
        return "";
    });
}

inline void verify_cli(Runner& run, Sampler& rs, const ProblemFile& pf, const SolutionPtr& sol, int samples) {
    const ChartPtr& fc = sol->function_ctx();
    run.run("cli.roundtrip_poly", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            Poly p = rs.poly(pf.dim, 4, 4);
            if (!(parse_poly(p.str(), pf.dim) == p)) return p.str();
        }
        return "";
    });
    run.run("cli.roundtrip_star_function", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            StarFunction f = rs.star_function(fc, 3, fc->order() / 2);
            if (!(parse_star_function(f.str(), fc) == f)) return f.str();
        }
        return "";
    });
    run.run("cli.roundtrip_weyl", samples_text(samples), [&]() -> std::string {
        for (int s = 0; s < samples; ++s) {
            WeylForm a = rs.form(pf.chart, pf.order, 5, 2, 2, true);
            if (!(parse_weyl(a.str(), pf.chart) == a)) return a.str();
        }
        return "";
    });
    run.run("cli.roundtrip_cross", samples_text(samples), [&]() -> std::string {
        const int m = pf.action ? pf.action->algebra().dim() : 2;
        std::vector<std::string> names = pf.action ? pf.action->algebra().names() : std::vector<std::string>{"e1", "e2"};
        auto words = normal_words(m, 3);
        for (int s = 0; s < samples; ++s) {
            CrossElement u(fc);
            for (int t = 0; t < 3; ++t)
                u.add(words[static_cast<std::size_t>(rs.uniform(0, static_cast<int>(words.size()) - 1))],
                      rs.star_function(fc, 2, 2));
            if (!(parse_cross(u.str(names), fc, names) == u)) return u.str(names);
        }
        return "";
    });
    run.run("cli.roundtrip_problem", "render then parse", [&]() -> std::string {
        std::string r = render_problem(pf);
        return render_problem(parse_problem(r)) == r ? "" : "rendered problem does not re-parse identically";
    });
}

}  // namespace detail

/// Runs the identity suite on a problem. Randomness comes from the
/// problem's seed, so any failure replays with the same file.
inline VerifyReport verify(const ProblemFile& pf, const VerifyOptions& opts = {}) {
    if (std::find(verify_suites().begin(), verify_suites().end(), opts.suite) == verify_suites().end())
        throw InvalidInput("unknown suite '" + opts.suite + "'");
    VerifyReport rep;
    rep.seed = pf.seed;
    rep.order = pf.order;
    rep.suite = opts.suite;
    detail::Runner run(rep);
    Sampler rs(pf.seed);
    auto want = [&](const char* s) { return opts.suite == "all" || opts.suite == s; };
    const int n = opts.samples;

    if (want("ring")) detail::verify_ring(run, rs, pf, n);
    if (want("weyl")) detail::verify_weyl(run, rs, pf, n);
    if (opts.suite == "ring" || opts.suite == "weyl") return rep;

    SolutionPtr sol;
    run.run("fedosov.solve", "r solved and checked", [&]() -> std::string {
        sol = solve_r(pf.connection, pf.order);
        return "";
    });
    if (!sol) return rep;
    if (want("fedosov")) detail::verify_fedosov(run, rs, pf, sol, n);
    if (want("symfield")) {
        detail::FieldBank bank(pf, sol);
        detail::verify_symfield(run, rs, pf, sol, bank, n);
    }
    if (want("liecross")) detail::verify_liecross(run, rs, pf, sol, n);
    if (want("cli")) detail::verify_cli(run, rs, pf, sol, n);
    return rep;
}

}  // namespace fedq
