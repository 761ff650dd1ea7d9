#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "symfield.hpp"

namespace fedq {

/// One nonzero structure constant c^k_ij, i.e. [e_i, e_j] contains c e_k
/// (0-based indices).
struct StructureConstant {
    int i, j, k;
    Rational c;
};

/// Finite-dimensional Lie algebra given by a basis and structure constants.
class LieAlgebra {
public:
    LieAlgebra() = default;

    /// Validates antisymmetry and the Jacobi identity; the message names the
    /// first violated instance.
    static LieAlgebra validate(std::vector<std::string> names, const std::vector<StructureConstant>& entries) {
        LieAlgebra g;
        g.m_ = static_cast<int>(names.size());
        if (g.m_ < 1) throw InvalidInput("Lie algebra needs at least one basis element");
        g.names_ = std::move(names);
        for (int i = 0; i < g.m_; ++i)
            if (g.find(g.names_[static_cast<std::size_t>(i)]) != i)
                throw InvalidInput("duplicate basis name '" + g.names_[static_cast<std::size_t>(i)] + "'");
        g.c_.assign(static_cast<std::size_t>(g.m_ * g.m_ * g.m_), Rational(0));
        for (const auto& e : entries) {
            for (int idx : {e.i, e.j, e.k})
                if (idx < 0 || idx >= g.m_) throw InvalidInput("structure constant index out of range");
            g.c_[g.index(e.i, e.j, e.k)] += e.c;
        }
        for (int i = 0; i < g.m_; ++i)
            for (int j = 0; j < g.m_; ++j)
                for (int k = 0; k < g.m_; ++k)
                    if (g.c(i, j, k) != -g.c(j, i, k))
                        throw InvalidInput("antisymmetry fails: c^" + g.names_[static_cast<std::size_t>(k)] + "_" +
                                           g.names_[static_cast<std::size_t>(i)] + g.names_[static_cast<std::size_t>(j)] +
                                           " != -c^" + g.names_[static_cast<std::size_t>(k)] + "_" +
                                           g.names_[static_cast<std::size_t>(j)] + g.names_[static_cast<std::size_t>(i)]);
        for (int i = 0; i < g.m_; ++i)
            for (int j = 0; j < g.m_; ++j)
                for (int k = 0; k < g.m_; ++k)
                    for (int l = 0; l < g.m_; ++l) {
                        Rational s(0);
                        for (int p = 0; p < g.m_; ++p)
                            s += g.c(i, j, p) * g.c(p, k, l) + g.c(j, k, p) * g.c(p, i, l) + g.c(k, i, p) * g.c(p, j, l);
                        if (s != 0)
                            throw InvalidInput("Jacobi identity fails for (" + g.name(i) + ", " + g.name(j) + ", " +
                                               g.name(k) + ") in component " + g.name(l));
                    }
        return g;
    }

    int dim() const { return m_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(int i) const { return names_.at(static_cast<std::size_t>(i)); }
    const Rational& c(int i, int j, int k) const { return c_[index(i, j, k)]; }

    /// Index of a basis name, or -1.
    int find(const std::string& n) const {
        for (int i = 0; i < m_; ++i)
            if (names_[static_cast<std::size_t>(i)] == n) return i;
        return -1;
    }

    /// [x, y]_k = x_i y_j c^k_ij in basis coordinates.
    std::vector<Rational> bracket(const std::vector<Rational>& x, const std::vector<Rational>& y) const {
        std::vector<Rational> r(static_cast<std::size_t>(m_), Rational(0));
        for (int i = 0; i < m_; ++i) {
            if (x[static_cast<std::size_t>(i)] == 0) continue;
            for (int j = 0; j < m_; ++j) {
                if (y[static_cast<std::size_t>(j)] == 0) continue;
                for (int k = 0; k < m_; ++k)
                    r[static_cast<std::size_t>(k)] += x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] * c(i, j, k);
            }
        }
        return r;
    }

private:
    std::size_t index(int i, int j, int k) const { return static_cast<std::size_t>((i * m_ + j) * m_ + k); }

    int m_ = 0;
    std::vector<std::string> names_;
    std::vector<Rational> c_;
};

inline LieAlgebra validate_lie(std::vector<std::string> names, const std::vector<StructureConstant>& entries) {
    return LieAlgebra::validate(std::move(names), entries);
}

/// A Lie algebra homomorphism from g into symplectic vector fields.
class LieAction {
public:
    /// Checks [Phi(e_i), Phi(e_j)] = c^k_ij Phi(e_k) for every pair.
    static LieAction validate(LieAlgebra alg, std::vector<SymplecticVectorField> images) {
        if (static_cast<int>(images.size()) != alg.dim())
            throw InvalidInput("action needs one field per basis element");
        for (std::size_t i = 1; i < images.size(); ++i) images[0].same(images[i]);
        for (int i = 0; i < alg.dim(); ++i)
            for (int j = i + 1; j < alg.dim(); ++j) {
                SymplecticVectorField lhs = field_bracket(images[static_cast<std::size_t>(i)], images[static_cast<std::size_t>(j)]);
                SymplecticVectorField rhs(images[0].ctx());
                for (int k = 0; k < alg.dim(); ++k)
                    if (alg.c(i, j, k) != 0) rhs += alg.c(i, j, k) * images[static_cast<std::size_t>(k)];
                if (!(lhs == rhs))
                    throw InvalidInput("action is not a homomorphism on [" + alg.name(i) + ", " + alg.name(j) +
                                       "]: field bracket " + lhs.str() + " != " + rhs.str());
            }
        LieAction a;
        a.alg_ = std::move(alg);
        a.images_ = std::move(images);
        return a;
    }

    const LieAlgebra& algebra() const { return alg_; }
    const SymplecticVectorField& image(int i) const { return images_.at(static_cast<std::size_t>(i)); }
    const std::vector<SymplecticVectorField>& images() const { return images_; }

    /// Phi(x) for basis coordinates x.
    SymplecticVectorField image(const std::vector<Rational>& x) const {
        SymplecticVectorField r(images_.front().ctx());
        for (std::size_t i = 0; i < images_.size(); ++i)
            if (x[i] != 0) r += x[i] * images_[i];
        return r;
    }

private:
    LieAlgebra alg_;
    std::vector<SymplecticVectorField> images_;
};

inline LieAction validate_action(LieAlgebra alg, std::vector<SymplecticVectorField> images) {
    return LieAction::validate(std::move(alg), std::move(images));
}

/// PBW word: a sequence of basis indices. Normal order is non-decreasing.
using Word = std::vector<int>;

struct WordLess {
    bool operator()(const Word& a, const Word& b) const {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    }
};

inline bool is_normal(const Word& w) { return std::is_sorted(w.begin(), w.end()); }

/// Element sum f_w (x) e_w of the deformed cross product, with star-algebra
/// coefficients on the left of normal-ordered PBW monomials.
class CrossElement {
public:
    using TermMap = std::map<Word, StarFunction, WordLess>;

    explicit CrossElement(ChartPtr ctx) : ctx_(std::move(ctx)) {}

    static CrossElement one(ChartPtr ctx) { return function(ctx, StarFunction::constant(ctx, Rational(1))); }
    static CrossElement function(ChartPtr ctx, const StarFunction& f) {
        CrossElement e(std::move(ctx));
        e.add(Word{}, f);
        return e;
    }
    static CrossElement monomial(ChartPtr ctx, const StarFunction& f, Word w) {
        if (!is_normal(w)) throw InvalidInput("monomial is not in normal order");
        CrossElement e(std::move(ctx));
        e.add(std::move(w), f);
        return e;
    }
    static CrossElement generator(ChartPtr ctx, int i) {
        return monomial(ctx, StarFunction::constant(ctx, Rational(1)), Word{i});
    }

    const ChartPtr& ctx() const { return ctx_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    StarFunction coefficient(const Word& w) const {
        auto it = terms_.find(w);
        return it == terms_.end() ? StarFunction(ctx_) : it->second;
    }

    /// Adds f (x) e_w; w must already be in normal order.
    void add(Word w, const StarFunction& f) {
        if (!ctx_->compatible(*f.ctx())) throw ContextMismatch("cross element coefficient lives on another chart");
        if (!is_normal(w)) throw InvalidInput("monomial is not in normal order");
        if (f.is_zero()) return;
        auto [it, inserted] = terms_.try_emplace(std::move(w), f);
        if (!inserted) {
            it->second += f;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    CrossElement& operator+=(const CrossElement& o) {
        for (const auto& [w, f] : o.terms_) add(w, f);
        return *this;
    }
    CrossElement& operator-=(const CrossElement& o) {
        for (const auto& [w, f] : o.terms_) add(w, -f);
        return *this;
    }
    CrossElement& operator*=(const Rational& s) {
        if (s == 0) terms_.clear();
        else
            for (auto& [w, f] : terms_) f *= s;
        return *this;
    }
    friend CrossElement operator+(CrossElement a, const CrossElement& b) { return a += b; }
    friend CrossElement operator-(CrossElement a, const CrossElement& b) { return a -= b; }
    friend CrossElement operator*(const Rational& s, CrossElement a) { return a *= s; }
    friend bool operator==(const CrossElement& a, const CrossElement& b) { return a.terms_ == b.terms_; }

    /// `f * e1*e2 + g * e2 + ...`; multi-term coefficients are parenthesized and
    /// the empty monomial prints as the bare coefficient.
    std::string str(const std::vector<std::string>& names = {}) const {
        if (terms_.empty()) return "0";
        std::string out;
        bool first = true;
        for (const auto& [w, f] : terms_) {
            std::string coef = f.str();
            bool single = f.summands() == 1;
            bool negative = single && coef.front() == '-';
            if (negative) coef = coef.substr(1);
            if (!single) coef = "(" + coef + ")";
            std::string mono;
            for (std::size_t p = 0; p < w.size(); ++p) {
                if (p) mono += "*";
                int i = w[p];
                mono += names.empty() ? "e" + std::to_string(i + 1) : names.at(static_cast<std::size_t>(i));
            }
            std::string body = mono.empty() ? coef : (coef == "1" ? mono : coef + " * " + mono);
            if (first) out += negative ? "-" + body : body;
            else out += (negative ? " - " : " + ") + body;
            first = false;
        }
        return out;
    }

private:
    ChartPtr ctx_;
    TermMap terms_;
};

/// All coefficients reduced modulo h.
inline CrossElement classical_limit(const CrossElement& u) {
    CrossElement r(u.ctx());
    for (const auto& [w, f] : u.terms()) r.add(w, f.mod_h(1));
    return r;
}

/// Element (a, x) of the Lie algebra A x_tau g.
struct CrossPairElement {
    StarFunction a;
    std::vector<Rational> g;

    friend bool operator==(const CrossPairElement& p, const CrossPairElement& q) { return p.a == q.a && p.g == q.g; }
};

/// Choice of descent to rewrite first when normal-ordering a word.
enum class RewriteStrategy { Leftmost, Rightmost };

/// The deformed cross product A >< U(g) for a Lie action on a solved Fedosov
/// chart: caches X~_i and tau(e_i, e_j), and multiplies in PBW normal form.
/// Cache access is serialized, so one instance may be shared between threads.
class CrossProduct {
public:
    CrossProduct(LieAction action, SolutionPtr sol) : action_(std::move(action)), sol_(std::move(sol)) {
        const int m = action_.algebra().dim();
        for (int i = 0; i < m; ++i) {
            if (!action_.image(i).ctx()->compatible(*sol_->ctx()))
                throw ContextMismatch("action and solution live on different charts");
            derivations_.emplace_back(action_.image(i), sol_);
        }
        tau_.assign(static_cast<std::size_t>(m * m), StarFunction(sol_->function_ctx()));
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                SymplecticVectorField br(action_.image(i).ctx());
                for (int k = 0; k < m; ++k)
                    if (action_.algebra().c(i, j, k) != 0) br += action_.algebra().c(i, j, k) * action_.image(k);
                QuantizedDerivation qbr(br, sol_);
                StarFunction t = tau_from(derivations_[static_cast<std::size_t>(i)],
                                          derivations_[static_cast<std::size_t>(j)], qbr)
                                     .symbol;
                tau_[static_cast<std::size_t>(i * m + j)] = t;
                tau_[static_cast<std::size_t>(j * m + i)] = -t;
            }
    }

    const LieAction& action() const { return action_; }
    const LieAlgebra& algebra() const { return action_.algebra(); }
    const FedosovSolution& solution() const { return *sol_; }
    const ChartPtr& ctx() const { return sol_->function_ctx(); }
    int dim() const { return action_.algebra().dim(); }
    const QuantizedDerivation& derivation(int i) const { return derivations_.at(static_cast<std::size_t>(i)); }

    /// tau(Phi e_i, Phi e_j).
    const StarFunction& tau(int i, int j) const { return tau_.at(static_cast<std::size_t>(i * dim() + j)); }

    /// X~_i f, memoized.
    StarFunction rho(int i, const StarFunction& f) const {
        if (f.is_zero()) return StarFunction(ctx());
        std::string key = std::to_string(i) + "|" + f.str();
        {
            std::lock_guard lock(mutex_);
            auto it = rho_cache_.find(key);
            if (it != rho_cache_.end()) return it->second;
        }
        StarFunction v = derivations_.at(static_cast<std::size_t>(i)).apply(f);
        std::lock_guard lock(mutex_);
        rho_cache_.emplace(std::move(key), v);
        return v;
    }

    /// rho_x f = sum x_i X~_i f.
    StarFunction rho(const std::vector<Rational>& x, const StarFunction& f) const {
        StarFunction r(ctx());
        for (int i = 0; i < dim(); ++i)
            if (x[static_cast<std::size_t>(i)] != 0) r += rho(i, f) * x[static_cast<std::size_t>(i)];
        return r;
    }

    /// tau(x, y) = x_i y_j tau(e_i, e_j).
    StarFunction tau(const std::vector<Rational>& x, const std::vector<Rational>& y) const {
        StarFunction r(ctx());
        for (int i = 0; i < dim(); ++i)
            for (int j = 0; j < dim(); ++j)
                if (x[static_cast<std::size_t>(i)] != 0 && y[static_cast<std::size_t>(j)] != 0)
                    r += tau(i, j) * (x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)]);
        return r;
    }

    /// f * g, short-circuiting when either side is central (h-constant).
    StarFunction mul(const StarFunction& f, const StarFunction& g) const {
        if (f.is_zero() || g.is_zero()) return StarFunction(ctx());
        if (is_scalar(f)) return scale(f, g);
        if (is_scalar(g)) return scale(g, f);
        return star(f, g, *sol_);
    }

    /// f * u with f multiplied into every coefficient from the left.
    CrossElement mul(const StarFunction& f, const CrossElement& u) const {
        CrossElement r(ctx());
        for (const auto& [w, g] : u.terms()) r.add(w, mul(f, g));
        return r;
    }

    /// e_i * e_v for a normal-ordered word v, in normal form.
    CrossElement generator_times_word(int i, const Word& v) const {
        if (v.empty() || i <= v.front()) {
            Word w{i};
            w.insert(w.end(), v.begin(), v.end());
            return CrossElement::monomial(ctx(), unit(), std::move(w));
        }
        std::string key = std::to_string(i) + ":" + word_key(v);
        {
            std::lock_guard lock(mutex_);
            auto it = gen_cache_.find(key);
            if (it != gen_cache_.end()) return it->second;
        }
        // e_i e_{v0} = e_{v0} e_i + c^k_{i v0} e_k + tau(e_i, e_{v0}), v0 < i
        const int v0 = v.front();
        Word rest(v.begin() + 1, v.end());
        CrossElement r = generator_times(v0, generator_times_word(i, rest));
        for (int k = 0; k < dim(); ++k)
            if (algebra().c(i, v0, k) != 0) {
                CrossElement t = generator_times_word(k, rest);
                t *= algebra().c(i, v0, k);
                r += t;
            }
        const StarFunction& t = tau(i, v0);
        if (!t.is_zero()) r.add(rest, t);
        std::lock_guard lock(mutex_);
        gen_cache_.emplace(std::move(key), r);
        return r;
    }

    /// e_i * u, using e_i f = f e_i + X~_i(f).
    CrossElement generator_times(int i, const CrossElement& u) const {
        CrossElement r(ctx());
        for (const auto& [w, f] : u.terms()) {
            r += mul(f, generator_times_word(i, w));
            StarFunction xf = rho(i, f);
            if (!xf.is_zero()) r.add(w, xf);
        }
        return r;
    }

    /// e_w * u for any word w.
    CrossElement word_times(const Word& w, CrossElement u) const {
        for (auto it = w.rbegin(); it != w.rend(); ++it) u = generator_times(*it, u);
        return u;
    }

    /// Product in the deformed cross product.
    CrossElement mul(const CrossElement& u, const CrossElement& v) const {
        check(u);
        check(v);
        CrossElement r(ctx());
        for (const auto& [w, f] : u.terms()) r += mul(f, word_times(w, v));
        return r;
    }

    /// Reference normalizer: rewrites any word to normal order with
    /// e_j e_i -> e_i e_j + c^k_ji e_k + tau_ji at a chosen descent, moving
    /// the coefficient tau_ji left across the prefix with e_a g -> g e_a + X~_a g.
    CrossElement normalize(const Word& w, RewriteStrategy strategy) const {
        if (is_normal(w)) return CrossElement::monomial(ctx(), unit(), w);
        std::string key = std::string(strategy == RewriteStrategy::Leftmost ? "L" : "R") + word_key(w);
        {
            std::lock_guard lock(mutex_);
            auto it = norm_cache_.find(key);
            if (it != norm_cache_.end()) return it->second;
        }
        std::size_t p = 0;
        if (strategy == RewriteStrategy::Leftmost) {
            while (w[p] <= w[p + 1]) ++p;
        } else {
            p = w.size() - 2;
            while (w[p] <= w[p + 1]) --p;
        }
        CrossElement r = rewrite_at(w, p, strategy);
        std::lock_guard lock(mutex_);
        norm_cache_.emplace(std::move(key), r);
        return r;
    }

    /// One rewriting step at the descent w[p] > w[p+1], then full normalization.
    CrossElement rewrite_at(const Word& w, std::size_t p, RewriteStrategy strategy) const {
        if (p + 1 >= w.size() || w[p] <= w[p + 1]) throw InvalidInput("no descent at the requested position");
        const int j = w[p], i = w[p + 1];
        Word swapped = w;
        std::swap(swapped[p], swapped[p + 1]);
        CrossElement r = normalize(swapped, strategy);
        Word prefix(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(p));
        Word suffix(w.begin() + static_cast<std::ptrdiff_t>(p) + 2, w.end());
        for (int k = 0; k < dim(); ++k) {
            if (algebra().c(j, i, k) == 0) continue;
            Word shorter = prefix;
            shorter.push_back(k);
            shorter.insert(shorter.end(), suffix.begin(), suffix.end());
            CrossElement t = normalize(shorter, strategy);
            t *= algebra().c(j, i, k);
            r += t;
        }
        const StarFunction& t = tau(j, i);
        if (!t.is_zero())
            for (const auto& [g, v] : move_left(prefix, t)) {
                Word tail = v;
                tail.insert(tail.end(), suffix.begin(), suffix.end());
                r += mul(g, normalize(tail, strategy));
            }
        return r;
    }

    /// Product computed by concatenating words and normalizing with the
    /// reference rewriter.
    CrossElement mul_by_rewriting(const CrossElement& u, const CrossElement& v,
                                  RewriteStrategy strategy = RewriteStrategy::Leftmost) const {
        check(u);
        check(v);
        CrossElement r(ctx());
        for (const auto& [w1, f] : u.terms())
            for (const auto& [w2, g] : v.terms())
                for (const auto& [h, x] : move_left(w1, g)) {
                    Word tail = x;
                    tail.insert(tail.end(), w2.begin(), w2.end());
                    r += mul(mul(f, h), normalize(tail, strategy));
                }
        return r;
    }

    void check(const CrossElement& u) const {
        if (!u.ctx()->compatible(*ctx())) throw ContextMismatch("cross element lives on another chart");
        for (const auto& [w, f] : u.terms()) {
            for (int i : w)
                if (i < 0 || i >= dim()) throw InvalidInput("generator index out of range");
            if (!f.is_zero() && f.coeffs().rbegin()->first > ctx()->order() / 2)
                throw InvalidInput("h-order overflow: coefficient h^" + std::to_string(f.coeffs().rbegin()->first) +
                                   " exceeds the truncation contract h^" + std::to_string(ctx()->order() / 2));
        }
    }

private:
    StarFunction unit() const { return StarFunction::constant(ctx(), Rational(1)); }

    static bool is_scalar(const StarFunction& f) {
        return std::all_of(f.coeffs().begin(), f.coeffs().end(), [](const auto& t) { return t.second.is_constant(); });
    }

    /// f * g for f with constant coefficients: a polynomial in h times g.
    StarFunction scale(const StarFunction& f, const StarFunction& g) const {
        StarFunction r(ctx());
        for (const auto& [l, c] : f.coeffs()) r += g.times_h(l) * c.constant_term();
        return r;
    }

    static std::string word_key(const Word& w) {
        std::string s;
        for (int i : w) s += std::to_string(i) + ",";
        return s;
    }

    /// e_w g = sum h (x) e_x with x a subword of w (not normal-ordered).
    std::vector<std::pair<StarFunction, Word>> move_left(const Word& w, const StarFunction& g) const {
        std::vector<std::pair<StarFunction, Word>> cur{{g, Word{}}};
        for (auto it = w.rbegin(); it != w.rend(); ++it) {
            std::vector<std::pair<StarFunction, Word>> next;
            for (const auto& [h, x] : cur) {
                Word with = x;
                with.insert(with.begin(), *it);
                next.emplace_back(h, std::move(with));
                StarFunction xh = rho(*it, h);
                if (!xh.is_zero()) next.emplace_back(std::move(xh), x);
            }
            cur = std::move(next);
        }
        return cur;
    }

    LieAction action_;
    SolutionPtr sol_;
    std::vector<QuantizedDerivation> derivations_;
    std::vector<StarFunction> tau_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, StarFunction> rho_cache_;
    mutable std::map<std::string, CrossElement> gen_cache_;
    mutable std::map<std::string, CrossElement> norm_cache_;
};

inline CrossElement cross_mul(const CrossElement& u, const CrossElement& v, const CrossProduct& cp) {
    return cp.mul(u, v);
}

/// [(a, x), (b, y)] = ([a, b]_* + rho_x b - rho_y a + tau(x, y), [x, y]).
inline CrossPairElement cross_pair_bracket(const CrossPairElement& u, const CrossPairElement& v, const CrossProduct& cp) {
    const FedosovSolution& sol = cp.solution();
    StarFunction a = star(u.a, v.a, sol) - star(v.a, u.a, sol);
    a += cp.rho(u.g, v.a);
    a -= cp.rho(v.g, u.a);
    a += cp.tau(u.g, v.g);
    return CrossPairElement{std::move(a), cp.algebra().bracket(u.g, v.g)};
}

}  // namespace fedq
