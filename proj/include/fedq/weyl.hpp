#pragma once

#include <algorithm>
#include <bit>
#include <climits>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "chart.hpp"

namespace fedq {

/// Bit i set means dx^{i+1} is present; the wedge factor is always read in
/// increasing index order.
using DxMask = std::uint16_t;

inline int form_degree(DxMask m) { return std::popcount(static_cast<unsigned>(m)); }

/// Sign of dx^I ^ dx^J after sorting into increasing order; 0 if I and J meet.
inline int wedge_sign(DxMask I, DxMask J) {
    if (I & J) return 0;
    int swaps = 0;
    for (unsigned j = J; j != 0; j &= j - 1) {
        int bit = std::countr_zero(j);
        swaps += std::popcount(static_cast<unsigned>(I) >> (bit + 1));
    }
    return swaps % 2 == 0 ? 1 : -1;
}

/// Canonical key of a Weyl term: y^yexp dx^dx h^h.
struct WeylKey {
    Exponent y;
    DxMask dx = 0;
    int h = 0;

    int y_degree() const { return y.total(); }
    int total_degree() const { return y.total() + 2 * h; }
    int form_degree() const { return fedq::form_degree(dx); }
    bool operator==(const WeylKey&) const = default;
};

struct WeylKeyLess {
    bool operator()(const WeylKey& a, const WeylKey& b) const {
        int ta = a.total_degree(), tb = b.total_degree();
        if (ta != tb) return ta < tb;
        int fa = a.form_degree(), fb = b.form_degree();
        if (fa != fb) return fa < fb;
        if (a.dx != b.dx) return a.dx > b.dx;
        if (!(a.y == b.y)) return GrLex{}(a.y, b.y);
        return a.h < b.h;
    }
};

/// Summary of which filtration level and which form degrees a form occupies.
struct FormDegrees {
    int total_degree_min = INT_MAX;  // INT_MAX for the zero form
    std::set<int> antisym_degrees;
};

/// Truncated element of W+ (x) Lambda over a Darboux chart: a finite sum of
/// Poly(x) * y^alpha * dx^I * h^l with |alpha| + 2l >= 0. Terms of total degree
/// above order() are not stored; all arithmetic is exact modulo that ideal.
class WeylForm {
public:
    using TermMap = std::map<WeylKey, Poly, WeylKeyLess>;

    explicit WeylForm(ChartPtr ctx) : WeylForm(ctx, ctx->order()) {}
    WeylForm(ChartPtr ctx, int order) : ctx_(std::move(ctx)), order_(order) {}

    static WeylForm scalar(ChartPtr ctx, const Poly& f) {
        WeylForm a(ctx);
        a.add_term(WeylKey{}, f);
        return a;
    }
    static WeylForm constant(ChartPtr ctx, const Rational& c) {
        int d = ctx->dim();
        return scalar(std::move(ctx), Poly::constant(d, c));
    }
    /// Single term c * y^y dx^dx h^h.
    static WeylForm term(ChartPtr ctx, const WeylKey& key, const Poly& c) {
        WeylForm a(ctx);
        a.add_term(key, c);
        return a;
    }
    static WeylForm y(ChartPtr ctx, int i) {
        WeylKey k;
        k.y = Exponent::unit(i);
        int d = ctx->dim();
        return term(std::move(ctx), k, Poly::constant(d, 1));
    }
    static WeylForm dx(ChartPtr ctx, int i) {
        WeylKey k;
        k.dx = static_cast<DxMask>(1u << i);
        int d = ctx->dim();
        return term(std::move(ctx), k, Poly::constant(d, 1));
    }
    static WeylForm hbar(ChartPtr ctx, int power = 1) {
        WeylKey k;
        k.h = power;
        int d = ctx->dim();
        return term(std::move(ctx), k, Poly::constant(d, 1));
    }

    const ChartPtr& ctx() const { return ctx_; }
    int dim() const { return ctx_->dim(); }
    int order() const { return order_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    Poly coefficient(const WeylKey& k) const {
        auto it = terms_.find(k);
        return it == terms_.end() ? Poly(dim()) : it->second;
    }

    /// Adds c to the coefficient of `k`. Terms above the truncation order are
    /// dropped; terms outside W+ are rejected.
    void add_term(const WeylKey& k, const Poly& c) {
        if (c.is_zero()) return;
        int t = k.total_degree();
        if (t < 0) throw InvalidInput("term outside W+: y-degree + 2*(h-power) is negative");
        if (t > order_) return;
        auto [it, inserted] = terms_.try_emplace(k, c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    /// Adds s * c to the coefficient of `k`, with the same rules as add_term.
    void add_scaled_term(const WeylKey& k, const Poly& c, const Rational& s) {
        if (c.is_zero() || s == 0) return;
        int t = k.total_degree();
        if (t < 0) throw InvalidInput("term outside W+: y-degree + 2*(h-power) is negative");
        if (t > order_) return;
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            terms_.emplace(k, c * s);
        } else {
            it->second.add_scaled(c, s);
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    WeylForm& operator+=(const WeylForm& o) {
        check_same_chart(o);
        if (o.order_ < order_) *this = truncated(o.order_);
        for (const auto& [k, c] : o.terms_) add_term(k, c);
        return *this;
    }
    WeylForm& operator-=(const WeylForm& o) {
        check_same_chart(o);
        if (o.order_ < order_) *this = truncated(o.order_);
        for (const auto& [k, c] : o.terms_) add_term(k, -c);
        return *this;
    }
    WeylForm& operator*=(const Rational& s) {
        if (s == 0) terms_.clear();
        else
            for (auto& [k, c] : terms_) c *= s;
        return *this;
    }

    friend WeylForm operator+(WeylForm a, const WeylForm& b) { return a += b; }
    friend WeylForm operator-(WeylForm a, const WeylForm& b) { return a -= b; }
    friend WeylForm operator-(WeylForm a) { return a *= Rational(-1); }
    friend WeylForm operator*(WeylForm a, const Rational& s) { return a *= s; }
    friend WeylForm operator*(const Rational& s, WeylForm a) { return a *= s; }

    /// Multiplication by a scalar function; equals f o a since scalars are central.
    friend WeylForm operator*(const Poly& f, const WeylForm& a) {
        WeylForm r(a.ctx_, a.order_);
        for (const auto& [k, c] : a.terms_) r.add_term(k, f * c);
        return r;
    }

    /// Exact equality of the stored terms (the truncation order is not compared).
    friend bool operator==(const WeylForm& a, const WeylForm& b) {
        return a.ctx_->compatible(*b.ctx_) && a.terms_ == b.terms_;
    }

    /// Same element with a new truncation order; raising the order does not
    /// invent terms.
    WeylForm truncated(int order) const {
        if (order < 0) throw InvalidInput("truncation order must be nonnegative");
        WeylForm r(ctx_, order);
        for (const auto& [k, c] : terms_)
            if (k.total_degree() <= order) r.terms_.emplace(k, c);
        return r;
    }

    /// Part of total degree exactly k.
    WeylForm homogeneous(int k) const {
        WeylForm r(ctx_, order_);
        for (const auto& [key, c] : terms_)
            if (key.total_degree() == k) r.terms_.emplace(key, c);
        return r;
    }

    /// Part of antisymmetric degree k.
    WeylForm component(int k) const {
        WeylForm r(ctx_, order_);
        for (const auto& [key, c] : terms_)
            if (key.form_degree() == k) r.terms_.emplace(key, c);
        return r;
    }

    /// Sum of the parts of odd (parity 1) or even (parity 0) antisymmetric degree.
    WeylForm parity_part(int parity) const {
        WeylForm r(ctx_, order_);
        for (const auto& [key, c] : terms_)
            if (key.form_degree() % 2 == parity) r.terms_.emplace(key, c);
        return r;
    }

    FormDegrees degrees() const {
        FormDegrees d;
        for (const auto& [k, c] : terms_) {
            d.total_degree_min = std::min(d.total_degree_min, k.total_degree());
            d.antisym_degrees.insert(k.form_degree());
        }
        return d;
    }

    int min_h_power() const {
        int m = INT_MAX;
        for (const auto& [k, c] : terms_) m = std::min(m, k.h);
        return m;
    }
    int max_h_power() const {
        int m = INT_MIN;
        for (const auto& [k, c] : terms_) m = std::max(m, k.h);
        return m;
    }

    /// Canonical text: terms in increasing key order joined by +/-, each
    /// written as `coef * y1*y1 * dx1*dx2 * h^1` with absent parts omitted.
    std::string str() const {
        if (terms_.empty()) return "0";
        std::string out;
        bool first = true;
        for (const auto& [k, c] : terms_) {
            std::string coef = c.str();
            bool negative = c.size() == 1 && c.terms().begin()->second < 0;
            if (negative) coef = (-c).str();
            if (c.size() > 1) coef = "(" + coef + ")";
            std::string factors = factor_text(k);
            std::string body;
            if (factors.empty()) body = coef;
            else if (coef == "1") body = factors;
            else body = coef + " * " + factors;
            if (first) out += negative ? "-" + body : body;
            else out += (negative ? " - " : " + ") + body;
            first = false;
        }
        return out;
    }

    void check_same_chart(const WeylForm& o) const {
        if (!ctx_->compatible(*o.ctx_)) throw ContextMismatch("Weyl forms live on different charts");
    }

private:
    std::string factor_text(const WeylKey& k) const {
        std::string s;
        auto append = [&s](const std::string& part) {
            if (!s.empty()) s += " * ";
            s += part;
        };
        std::string ys;
        for (int i = 0; i < dim(); ++i)
            for (int e = 0; e < k.y[i]; ++e) ys += (ys.empty() ? "" : "*") + std::string("y") + std::to_string(i + 1);
        if (!ys.empty()) append(ys);
        std::string dxs;
        for (int i = 0; i < dim(); ++i)
            if (k.dx & (1u << i)) dxs += (dxs.empty() ? "" : "*") + std::string("dx") + std::to_string(i + 1);
        if (!dxs.empty()) append(dxs);
        if (k.h != 0) append("h^" + std::to_string(k.h));
        return s;
    }

    ChartPtr ctx_;
    int order_;
    TermMap terms_;
};

namespace detail {

inline int min_order(const WeylForm& a, const WeylForm& b) { return std::min(a.order(), b.order()); }

}  // namespace detail

/// Fiberwise Moyal product combined with the wedge product, truncated at `cap`.
inline WeylForm moyal_mul(const WeylForm& a, const WeylForm& b, int cap) {
    a.check_same_chart(b);
    const Chart& chart = *a.ctx();
    WeylForm r(a.ctx(), cap);
    for (const auto& [ka, ca] : a.terms()) {
        for (const auto& [kb, cb] : b.terms()) {
            int sign = wedge_sign(ka.dx, kb.dx);
            if (sign == 0) continue;
            // every Moyal term keeps the total degree
            if (ka.total_degree() + kb.total_degree() > cap) continue;
            Poly c = ca * cb;
            auto kernel = chart.moyal_kernel(ka.y, kb.y);
            WeylKey k;
            k.dx = static_cast<DxMask>(ka.dx | kb.dx);
            for (const auto& t : *kernel) {
                k.y = t.gamma;
                k.h = ka.h + kb.h + t.hbar;
                r.add_scaled_term(k, c, sign < 0 ? Rational(-t.coef) : t.coef);
            }
        }
    }
    return r;
}

inline WeylForm moyal_mul(const WeylForm& a, const WeylForm& b) { return moyal_mul(a, b, detail::min_order(a, b)); }

/// Graded commutator a o b - (-1)^{kl} b o a, extended bilinearly. Swapping
/// the factors of a Moyal term flips the sign of every odd-q contribution and
/// the wedge sign cancels the (-1)^{kl}, so only odd q survive, doubled.
inline WeylForm graded_commutator(const WeylForm& a, const WeylForm& b, int cap) {
    a.check_same_chart(b);
    const Chart& chart = *a.ctx();
    WeylForm r(a.ctx(), cap);
    for (const auto& [ka, ca] : a.terms()) {
        if (ka.y_degree() == 0) continue;
        for (const auto& [kb, cb] : b.terms()) {
            if (kb.y_degree() == 0) continue;
            int sign = wedge_sign(ka.dx, kb.dx);
            if (sign == 0) continue;
            if (ka.total_degree() + kb.total_degree() > cap) continue;
            auto kernel = chart.moyal_kernel(ka.y, kb.y);
            Poly c(a.dim());
            WeylKey k;
            k.dx = static_cast<DxMask>(ka.dx | kb.dx);
            for (const auto& t : *kernel) {
                if (t.hbar % 2 == 0) continue;
                if (c.is_zero()) c = ca * cb;
                k.y = t.gamma;
                k.h = ka.h + kb.h + t.hbar;
                r.add_scaled_term(k, c, 2 * (sign < 0 ? Rational(-t.coef) : t.coef));
            }
        }
    }
    return r;
}

inline WeylForm graded_commutator(const WeylForm& a, const WeylForm& b) {
    return graded_commutator(a, b, detail::min_order(a, b));
}

/// Reference route: a o b - (-1)^{kl} b o a from two Moyal products.
inline WeylForm graded_commutator_by_products(const WeylForm& a, const WeylForm& b, int cap) {
    WeylForm r = moyal_mul(a, b, cap) - moyal_mul(b, a, cap);
    WeylForm a_odd = a.parity_part(1), b_odd = b.parity_part(1);
    if (!a_odd.is_zero() && !b_odd.is_zero()) r += Rational(2) * moyal_mul(b_odd, a_odd, cap);
    return r;
}

/// Divides by h. Total degree drops by 2 and so does the truncation order;
/// fails if a term would leave W+.
inline WeylForm over_h(const WeylForm& a) {
    if (a.order() < 2) throw InvalidInput("cannot divide by h below truncation order 2");
    WeylForm r(a.ctx(), a.order() - 2);
    for (const auto& [k, c] : a.terms()) {
        WeylKey k2 = k;
        k2.h -= 1;
        if (k2.total_degree() < 0) throw InvalidInput("division by h leaves W+ for term of y-degree " +
                                                      std::to_string(k.y_degree()));
        r.add_term(k2, c);
    }
    return r;
}

/// Multiplies by h^p; the truncation order moves by 2p.
inline WeylForm times_h(const WeylForm& a, int p) {
    WeylForm r(a.ctx(), a.order() + 2 * p);
    for (const auto& [k, c] : a.terms()) {
        WeylKey k2 = k;
        k2.h += p;
        r.add_term(k2, c);
    }
    return r;
}

/// [a, b] / h computed with two degrees of headroom, so the result carries
/// the operands' truncation order.
inline WeylForm commutator_over_h(const WeylForm& a, const WeylForm& b) {
    int cap = detail::min_order(a, b);
    return over_h(graded_commutator(a, b, cap + 2));
}

/// (a o b) / h with two degrees of headroom.
inline WeylForm product_over_h(const WeylForm& a, const WeylForm& b) {
    int cap = detail::min_order(a, b);
    return over_h(moyal_mul(a, b, cap + 2));
}

/// delta a = dx^i ^ da/dy^i. The truncation order drops by one.
inline WeylForm op_delta(const WeylForm& a) {
    WeylForm r(a.ctx(), std::max(a.order() - 1, 0));
    for (const auto& [k, c] : a.terms()) {
        for (int i = 0; i < a.dim(); ++i) {
            if (k.y[i] == 0) continue;
            DxMask bit = static_cast<DxMask>(1u << i);
            int sign = wedge_sign(bit, k.dx);
            if (sign == 0) continue;
            WeylKey k2 = k;
            k2.y.decrement(i);
            k2.dx = static_cast<DxMask>(k.dx | bit);
            r.add_term(k2, c * Rational(sign * k.y[i]));
        }
    }
    return r;
}

namespace detail {

/// Adds scale * delta*(c y^k dx^I) to r.
inline void add_delta_star_term(WeylForm& r, const WeylKey& k, const Poly& c, const Rational& scale) {
    for (unsigned m = k.dx; m != 0; m &= m - 1) {
        int i = std::countr_zero(m);
        DxMask bit = static_cast<DxMask>(1u << i);
        int before = std::popcount(static_cast<unsigned>(k.dx) & (bit - 1u));
        WeylKey k2 = k;
        k2.y.increment(i);
        k2.dx = static_cast<DxMask>(k.dx & ~bit);
        r.add_scaled_term(k2, c, before % 2 == 0 ? scale : Rational(-scale));
    }
}

}  // namespace detail

/// delta* a = y^i iota_{d/dx^i} a. The truncation order rises by one.
inline WeylForm op_delta_star(const WeylForm& a) {
    WeylForm r(a.ctx(), a.order() + 1);
    for (const auto& [k, c] : a.terms()) detail::add_delta_star_term(r, k, c, Rational(1));
    return r;
}

/// delta^{-1}: (1/(k+l)) delta* on the part of y-degree k and form degree l,
/// zero when k + l = 0.
inline WeylForm op_delta_inv(const WeylForm& a) {
    WeylForm r(a.ctx(), a.order() + 1);
    for (const auto& [k, c] : a.terms()) {
        int kl = k.y_degree() + k.form_degree();
        if (kl == 0) continue;
        detail::add_delta_star_term(r, k, c, Rational(1, kl));
    }
    return r;
}

/// sigma(a) = a|_{y=0}.
inline WeylForm sigma_project(const WeylForm& a) {
    WeylForm r(a.ctx(), a.order());
    for (const auto& [k, c] : a.terms())
        if (k.y_degree() == 0) r.add_term(k, c);
    return r;
}

/// a_00 = a|_{y=0, dx=0}.
inline WeylForm scalar_part(const WeylForm& a) {
    WeylForm r(a.ctx(), a.order());
    for (const auto& [k, c] : a.terms())
        if (k.y_degree() == 0 && k.dx == 0) r.add_term(k, c);
    return r;
}

/// True iff a has no y-dependence, i.e. lies in the graded center.
inline bool center_test(const WeylForm& a) {
    return std::all_of(a.terms().begin(), a.terms().end(), [](const auto& t) { return t.first.y_degree() == 0; });
}

inline WeylForm truncate(const WeylForm& a, int order) { return a.truncated(order); }

/// de Rham differential in the base coordinates: da = dx^i ^ da/dx^i.
inline WeylForm exterior_d(const WeylForm& a) {
    WeylForm r(a.ctx(), a.order());
    for (const auto& [k, c] : a.terms()) {
        for (int i = 0; i < a.dim(); ++i) {
            DxMask bit = static_cast<DxMask>(1u << i);
            int sign = wedge_sign(bit, k.dx);
            if (sign == 0) continue;
            Poly dc = c.diff(i);
            if (dc.is_zero()) continue;
            WeylKey k2 = k;
            k2.dx = static_cast<DxMask>(k.dx | bit);
            r.add_term(k2, sign < 0 ? -dc : dc);
        }
    }
    return r;
}

/// The 1-form omega_ij y^i dx^j, whose commutator divided by h is delta.
inline WeylForm delta_generator(const ChartPtr& ctx, int order) {
    WeylForm r(ctx, order);
    for (int i = 0; i < ctx->dim(); ++i)
        for (int j = 0; j < ctx->dim(); ++j) {
            if (ctx->omega(i, j) == 0) continue;
            WeylKey k;
            k.y = Exponent::unit(i);
            k.dx = static_cast<DxMask>(1u << j);
            r.add_term(k, Poly::constant(ctx->dim(), ctx->omega(i, j)));
        }
    return r;
}

}  // namespace fedq
