#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "weyl.hpp"

namespace fedq {

/// Extra total degree carried by the Fedosov 1-form r beyond the nominal
/// order N. Two degrees make D exact modulo degree > N - 1 on inputs known to
/// degree N, and leave room for the 1/h in eta_X / h.
inline constexpr int kHeadroom = 2;

/// A formal power series f_0 + f_1 h + f_2 h^2 + ... in C(M)[[h]], kept up to
/// h^{floor(N/2)} where N is the chart's truncation order.
class StarFunction {
public:
    explicit StarFunction(ChartPtr ctx) : ctx_(std::move(ctx)) {}

    static StarFunction from_poly(ChartPtr ctx, const Poly& f) {
        StarFunction s(std::move(ctx));
        s.add(0, f);
        return s;
    }
    static StarFunction constant(ChartPtr ctx, const Rational& c) {
        int d = ctx->dim();
        return from_poly(std::move(ctx), Poly::constant(d, c));
    }

    const ChartPtr& ctx() const { return ctx_; }
    int dim() const { return ctx_->dim(); }
    /// Largest retained h-power, floor(N/2).
    int max_power() const { return ctx_->order() / 2; }
    const std::map<int, Poly>& coeffs() const { return coeffs_; }
    bool is_zero() const { return coeffs_.empty(); }

    Poly coefficient(int l) const {
        auto it = coeffs_.find(l);
        return it == coeffs_.end() ? Poly(dim()) : it->second;
    }

    /// Adds f h^l; powers beyond max_power() are dropped, negative powers rejected.
    void add(int l, const Poly& f) {
        if (l < 0) throw InvalidInput("negative h-power in a star-algebra element");
        if (l > max_power() || f.is_zero()) return;
        auto [it, inserted] = coeffs_.try_emplace(l, f);
        if (!inserted) {
            it->second += f;
            if (it->second.is_zero()) coeffs_.erase(it);
        }
    }

    StarFunction& operator+=(const StarFunction& o) {
        check(o);
        for (const auto& [l, f] : o.coeffs_) add(l, f);
        return *this;
    }
    StarFunction& operator-=(const StarFunction& o) {
        check(o);
        for (const auto& [l, f] : o.coeffs_) add(l, -f);
        return *this;
    }
    StarFunction& operator*=(const Rational& s) {
        if (s == 0) coeffs_.clear();
        else
            for (auto& [l, f] : coeffs_) f *= s;
        return *this;
    }
    friend StarFunction operator+(StarFunction a, const StarFunction& b) { return a += b; }
    friend StarFunction operator-(StarFunction a, const StarFunction& b) { return a -= b; }
    friend StarFunction operator-(StarFunction a) { return a *= Rational(-1); }
    friend StarFunction operator*(StarFunction a, const Rational& s) { return a *= s; }
    friend StarFunction operator*(const Rational& s, StarFunction a) { return a *= s; }
    friend bool operator==(const StarFunction& a, const StarFunction& b) {
        return a.ctx_->compatible(*b.ctx_) && a.coeffs_ == b.coeffs_;
    }

    /// Multiplication by h^p (p >= 0).
    StarFunction times_h(int p) const {
        StarFunction r(ctx_);
        for (const auto& [l, f] : coeffs_) r.add(l + p, f);
        return r;
    }

    /// Drops every power h^l with l >= k.
    StarFunction mod_h(int k) const {
        StarFunction r(ctx_);
        for (const auto& [l, f] : coeffs_)
            if (l < k) r.add(l, f);
        return r;
    }

    /// (this - constant term) / h, requires the h^0 part to vanish.
    StarFunction divided_by_h() const {
        StarFunction r(ctx_);
        for (const auto& [l, f] : coeffs_) {
            if (l == 0) throw InvalidInput("element is not divisible by h");
            r.add(l - 1, f);
        }
        return r;
    }

    /// The scalar Weyl 0-form sum f_l h^l.
    WeylForm to_form(int order) const {
        WeylForm a(ctx_, order);
        for (const auto& [l, f] : coeffs_) {
            WeylKey k;
            k.h = l;
            a.add_term(k, f);
        }
        return a;
    }

    /// sigma of a 0-form, read back as a series in h.
    static StarFunction from_symbol(ChartPtr ctx, const WeylForm& a) {
        StarFunction s(std::move(ctx));
        for (const auto& [k, c] : a.terms()) {
            if (k.y_degree() != 0 || k.dx != 0) continue;
            s.add(k.h, c);
        }
        return s;
    }

    /// Number of top-level summands in str().
    std::size_t summands() const {
        std::size_t n = 0;
        for (const auto& [l, f] : coeffs_) n += l == 0 ? f.size() : 1;
        return n;
    }

    /// `p0 + p1*h + p2*h^2 + ...`; multi-term coefficients of h-powers are
    /// parenthesized.
    std::string str() const {
        if (coeffs_.empty()) return "0";
        std::string out;
        bool first = true;
        for (const auto& [l, f] : coeffs_) {
            std::string hpart = l == 0 ? "" : (l == 1 ? "h" : "h^" + std::to_string(l));
            std::string body;
            bool negative = false;
            if (l == 0) {
                body = f.str();
                if (!first && body.front() == '-' && f.size() == 1) {
                    negative = true;
                    body = (-f).str();
                }
            } else if (f.size() == 1) {
                negative = f.terms().begin()->second < 0;
                std::string mag = negative ? (-f).str() : f.str();
                body = mag == "1" ? hpart : mag + "*" + hpart;
            } else {
                body = "(" + f.str() + ")*" + hpart;
            }
            if (first) out += negative ? "-" + body : body;
            else out += (negative ? " - " : " + ") + body;
            first = false;
        }
        return out;
    }

private:
    void check(const StarFunction& o) const {
        if (!ctx_->compatible(*o.ctx_)) throw ContextMismatch("star functions live on different charts");
    }

    ChartPtr ctx_;
    std::map<int, Poly> coeffs_;
};

/// One user-supplied Christoffel entry Gamma_ijk = value (0-based indices).
struct ConnectionEntry {
    int i, j, k;
    Poly value;
};

/// Symplectic connection on a Darboux chart, stored through its totally
/// symmetric lowered symbols Gamma_ijk = omega_il Gamma^l_jk.
class SymplecticConnection {
public:
    /// The flat connection Gamma = 0.
    explicit SymplecticConnection(ChartPtr ctx)
        : ctx_(std::move(ctx)), lower_(static_cast<std::size_t>(cube(ctx_->dim())), Poly(ctx_->dim())) {}

    /// Installs each entry at all permutations of its indices; a permutation
    /// already holding a different value is a symmetry conflict.
    static SymplecticConnection from_entries(ChartPtr ctx, const std::vector<ConnectionEntry>& entries) {
        SymplecticConnection c(ctx);
        int d = ctx->dim();
        std::vector<bool> set(static_cast<std::size_t>(cube(d)), false);
        for (const auto& e : entries) {
            for (int idx : {e.i, e.j, e.k})
                if (idx < 0 || idx >= d) throw InvalidInput("connection index out of range");
            if (e.value.dim() != d) throw ContextMismatch("connection entry has wrong dimension");
            std::array<int, 3> p{e.i, e.j, e.k};
            std::sort(p.begin(), p.end());
            do {
                auto slot = c.index(p[0], p[1], p[2]);
                if (set[slot] && !(c.lower_[slot] == e.value))
                    throw InvalidInput("symmetry conflict at Gamma_" + std::to_string(p[0] + 1) +
                                       std::to_string(p[1] + 1) + std::to_string(p[2] + 1) + ": " +
                                       c.lower_[slot].str() + " vs " + e.value.str());
                c.lower_[slot] = e.value;
                set[slot] = true;
            } while (std::next_permutation(p.begin(), p.end()));
        }
        return c;
    }

    /// Builds from a full lowered tensor, rejecting it unless totally symmetric.
    static SymplecticConnection from_tensor(ChartPtr ctx, std::vector<Poly> lower) {
        int d = ctx->dim();
        if (static_cast<int>(lower.size()) != cube(d)) throw InvalidInput("connection tensor has wrong size");
        SymplecticConnection c(ctx);
        c.lower_ = std::move(lower);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    const Poly& v = c.lower(i, j, k);
                    if (!(v == c.lower(j, i, k)) || !(v == c.lower(i, k, j)))
                        throw InvalidInput("Gamma_ijk is not totally symmetric at (" + std::to_string(i + 1) + "," +
                                           std::to_string(j + 1) + "," + std::to_string(k + 1) + ")");
                }
        return c;
    }

    const ChartPtr& ctx() const { return ctx_; }
    int dim() const { return ctx_->dim(); }
    const Poly& lower(int i, int j, int k) const { return lower_[index(i, j, k)]; }

    /// Gamma^l_jk = omega^li Gamma_ijk.
    Poly upper(int l, int j, int k) const {
        Poly r(dim());
        for (int i = 0; i < dim(); ++i)
            if (ctx_->omega_inv(l, i) != 0) r += lower(i, j, k) * ctx_->omega_inv(l, i);
        return r;
    }

    bool is_flat() const {
        return std::all_of(lower_.begin(), lower_.end(), [](const Poly& p) { return p.is_zero(); });
    }

    /// Gamma = 1/2 Gamma_ijk y^i y^j dx^k.
    WeylForm form(int order) const {
        WeylForm g(ctx_, order);
        int d = dim();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    const Poly& v = lower(i, j, k);
                    if (v.is_zero()) continue;
                    WeylKey key;
                    key.y = Exponent::unit(i) + Exponent::unit(j);
                    key.dx = static_cast<DxMask>(1u << k);
                    g.add_term(key, v * Rational(1, 2));
                }
        return g;
    }

    friend bool operator==(const SymplecticConnection& a, const SymplecticConnection& b) {
        return a.ctx_->compatible(*b.ctx_) && a.lower_ == b.lower_;
    }

private:
    static int cube(int d) { return d * d * d; }
    std::size_t index(int i, int j, int k) const {
        int d = dim();
        return static_cast<std::size_t>((i * d + j) * d + k);
    }

    ChartPtr ctx_;
    std::vector<Poly> lower_;
};

/// Curvature of a symplectic connection: the tensor R_ijkl =
/// omega(d_i, R(d_k, d_l) d_j) with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y],
/// and the Weyl 2-form R = 1/4 R_ijkl y^i y^j dx^k ^ dx^l.
struct CurvatureForm {
    std::vector<Poly> tensor;  // index ((i*d + j)*d + k)*d + l
    WeylForm form;

    const Poly& at(int d, int i, int j, int k, int l) const {
        return tensor[static_cast<std::size_t>(((i * d + j) * d + k) * d + l)];
    }
};

inline CurvatureForm curvature(const SymplecticConnection& conn, int order) {
    int d = conn.dim();
    std::vector<Poly> upper(static_cast<std::size_t>(d * d * d), Poly(d));
    for (int p = 0; p < d; ++p)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) upper[static_cast<std::size_t>((p * d + j) * d + k)] = conn.upper(p, j, k);
    auto up = [&](int p, int j, int k) -> const Poly& { return upper[static_cast<std::size_t>((p * d + j) * d + k)]; };

    CurvatureForm out{std::vector<Poly>(static_cast<std::size_t>(d * d * d * d), Poly(d)), WeylForm(conn.ctx(), order)};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    Poly v = conn.lower(i, j, l).diff(k) - conn.lower(i, j, k).diff(l);
                    for (int p = 0; p < d; ++p) {
                        v += conn.lower(i, k, p) * up(p, l, j);
                        v -= conn.lower(i, l, p) * up(p, k, j);
                    }
                    if (v.is_zero()) continue;
                    WeylKey key;
                    key.y = Exponent::unit(i) + Exponent::unit(j);
                    DxMask kb = static_cast<DxMask>(1u << k), lb = static_cast<DxMask>(1u << l);
                    int sign = wedge_sign(kb, lb);
                    if (sign != 0) {
                        key.dx = static_cast<DxMask>(kb | lb);
                        out.form.add_term(key, v * Rational(sign, 4));
                    }
                    out.tensor[static_cast<std::size_t>(((i * d + j) * d + k) * d + l)] = std::move(v);
                }
    return out;
}

inline CurvatureForm curvature(const SymplecticConnection& conn) { return curvature(conn, conn.ctx()->order()); }

/// The symplectic covariant derivative on Weyl forms: da - [Gamma/h, a].
inline WeylForm op_partial(const WeylForm& a, const SymplecticConnection& conn) {
    if (!a.ctx()->compatible(*conn.ctx())) throw ContextMismatch("form and connection live on different charts");
    WeylForm r = exterior_d(a);
    if (!conn.is_flat()) r -= commutator_over_h(conn.form(a.order()), a);
    return r;
}

/// Poisson bracket {f, g} = -omega^ij df/dx^i dg/dx^j, so {x^i, x^j} = -omega^ij.
inline Poly poisson(const Poly& f, const Poly& g, const Chart& ctx) {
    int d = ctx.dim();
    if (f.dim() != d || g.dim() != d) throw ContextMismatch("poisson: dimension mismatch");
    Poly r(d);
    for (int i = 0; i < d; ++i) {
        Poly fi = f.diff(i);
        if (fi.is_zero()) continue;
        for (int j = 0; j < d; ++j)
            if (ctx.omega_inv(i, j) != 0) r -= fi * g.diff(j) * ctx.omega_inv(i, j);
    }
    return r;
}

/// The Fedosov data of a connection at nominal truncation order N: the
/// unique r in W_3 (x) Lambda^1 with delta r = R + dr - r^2/h and
/// delta^{-1} r = 0, stored with kHeadroom extra degrees.
class FedosovSolution {
public:
    FedosovSolution(SymplecticConnection conn, int order, WeylForm r, WeylForm gamma, CurvatureForm curv,
                    int iterations)
        : conn_(std::move(conn)),
          order_(order),
          function_ctx_(conn_.ctx()->order() == order ? conn_.ctx() : conn_.ctx()->with_order(order)),
          r_(std::move(r)),
          gamma_(std::move(gamma)),
          curv_(std::move(curv)),
          iterations_(iterations) {}

    const SymplecticConnection& connection() const { return conn_; }
    const ChartPtr& ctx() const { return conn_.ctx(); }
    /// Chart carrying the nominal order N; star-algebra results live here.
    const ChartPtr& function_ctx() const { return function_ctx_; }
    int order() const { return order_; }
    int working_order() const { return r_.order(); }
    const WeylForm& r() const { return r_; }
    const WeylForm& gamma() const { return gamma_; }
    const CurvatureForm& curvature() const { return curv_; }
    int iterations() const { return iterations_; }

    /// (D + delta) a = da - [Gamma/h, a] - [r/h, a]; keeps the order of a.
    WeylForm d_plus_delta(const WeylForm& a) const {
        check(a);
        WeylForm r = exterior_d(a);
        if (!conn_.is_flat()) r -= commutator_over_h(gamma_, a);
        if (!r_.is_zero()) r -= commutator_over_h(r_, a);
        return r;
    }

    /// Fedosov connection D a = -delta a + da - [Gamma/h, a] - [r/h, a].
    /// The result is exact modulo degree > order(a) - 1.
    WeylForm D(const WeylForm& a) const { return d_plus_delta(a) - op_delta(a); }

    /// Memo of flat lifts of coefficient monomials x^alpha, filled by lift().
    std::optional<WeylForm> cached_lift(const Exponent& e) const {
        std::lock_guard lock(lift_mutex_);
        auto it = lift_cache_.find(e);
        if (it == lift_cache_.end()) return std::nullopt;
        return it->second;
    }
    void store_lift(const Exponent& e, const WeylForm& a) const {
        std::lock_guard lock(lift_mutex_);
        lift_cache_.emplace(e, a);
    }

private:
    void check(const WeylForm& a) const {
        if (!a.ctx()->compatible(*ctx())) throw ContextMismatch("form and Fedosov solution live on different charts");
        if (a.order() > r_.order())
            throw InvalidInput("form order " + std::to_string(a.order()) + " exceeds the solution's working order " +
                               std::to_string(r_.order()));
    }

    SymplecticConnection conn_;
    int order_;
    ChartPtr function_ctx_;
    WeylForm r_;
    WeylForm gamma_;
    CurvatureForm curv_;
    int iterations_;
    mutable std::mutex lift_mutex_;
    mutable std::map<Exponent, WeylForm, GrLex> lift_cache_;
};

using SolutionPtr = std::shared_ptr<const FedosovSolution>;

namespace detail {

inline void check_function(const StarFunction& f, const FedosovSolution& sol) {
    if (!f.ctx()->compatible(*sol.ctx())) throw ContextMismatch("function and solution live on different charts");
    if (!f.is_zero() && f.coeffs().rbegin()->first > sol.order() / 2)
        throw InvalidInput("h-order overflow: h^" + std::to_string(f.coeffs().rbegin()->first) +
                           " exceeds the truncation contract h^" + std::to_string(sol.order() / 2) + " of order " +
                           std::to_string(sol.order()));
}

/// Result of a graded solve: the solution, the accumulated right-hand side
/// rhs + L(a) and the number of nonzero homogeneous pieces.
struct GradedSolve {
    WeylForm a;
    WeylForm rhs;
    int steps = 0;
};

/// Solves a = base + delta^{-1}(rhs + L(a)) one total degree at a time. The
/// degree-k piece of a only needs the degree-(k-1) part of the right-hand
/// side, and L never lowers degree, so each piece is final once computed.
/// `increment(piece, prev)` returns L(prev + piece) - L(prev).
template <class Increment>
GradedSolve solve_graded(const WeylForm& base, WeylForm rhs, int order, Increment&& increment) {
    GradedSolve out{WeylForm(base.ctx(), order), std::move(rhs), 0};
    for (int k = 0; k <= order; ++k) {
        WeylForm piece(base.ctx(), order);
        piece += base.homogeneous(k);
        if (k > 0) piece += op_delta_inv(out.rhs.homogeneous(k - 1));
        if (piece.is_zero()) continue;
        ++out.steps;
        out.rhs += increment(piece, out.a);
        out.a += piece;
    }
    return out;
}

/// delta a = rhs up to degree order(a) - 1, i.e. the solved equation holds.
inline bool satisfies(const GradedSolve& s) {
    WeylForm lhs = op_delta(s.a);
    return lhs == s.rhs.truncated(lhs.order());
}

inline void check_r(const WeylForm& r, const CurvatureForm& curv, const SymplecticConnection& conn) {
    if (!op_delta_inv(r).is_zero()) throw IdentityFailure("solved r has nonzero delta^{-1} r");
    if (r.degrees().total_degree_min < 3) throw IdentityFailure("solved r is not in W_3");
    WeylForm lhs = op_delta(r);
    WeylForm rhs = (curv.form + op_partial(r, conn) - product_over_h(r, r)).truncated(lhs.order());
    if (!(lhs == rhs)) throw IdentityFailure("solved r violates delta r = R + dr - r^2/h");
}

inline SolutionPtr make_solution(const SymplecticConnection& conn, int order, WeylForm r, CurvatureForm curv,
                                 int steps) {
    check_r(r, curv, conn);
    WeylForm gamma = conn.form(r.order());
    return std::make_shared<const FedosovSolution>(conn, order, std::move(r), std::move(gamma), std::move(curv),
                                                   steps);
}

}  // namespace detail

/// One step of the r recursion: delta^{-1}(R + dr - [Gamma/h, r] - r o r / h).
inline WeylForm r_iteration(const WeylForm& r, const WeylForm& R, const SymplecticConnection& conn) {
    int order = r.order();
    WeylForm rhs = R.truncated(order) + op_partial(r, conn) - product_over_h(r, r);
    return op_delta_inv(rhs).truncated(order);
}

/// Solves delta r = R + dr - r^2/h, delta^{-1} r = 0 degree by degree at the
/// working order N + kHeadroom and verifies both equations.
inline SolutionPtr solve_r(const SymplecticConnection& conn, int order) {
    if (order < 0) throw InvalidInput("truncation order must be nonnegative");
    const int working = order + kHeadroom;
    CurvatureForm curv = curvature(conn, working);
    auto solved = detail::solve_graded(
        WeylForm(conn.ctx(), working), curv.form, working, [&conn](const WeylForm& piece, const WeylForm& prev) {
            WeylForm inc = op_partial(piece, conn) - product_over_h(piece, piece);
            if (!prev.is_zero()) inc -= product_over_h(piece, prev) + product_over_h(prev, piece);
            return inc;
        });
    if (!detail::satisfies(solved)) throw IdentityFailure("solved r violates delta r = R + dr - r^2/h");
    if (!op_delta_inv(solved.a).is_zero()) throw IdentityFailure("solved r has nonzero delta^{-1} r");
    if (solved.a.degrees().total_degree_min < 3) throw IdentityFailure("solved r is not in W_3");
    WeylForm gamma = conn.form(working);
    return std::make_shared<const FedosovSolution>(conn, order, std::move(solved.a), std::move(gamma),
                                                   std::move(curv), solved.steps);
}

inline SolutionPtr solve_r(const SymplecticConnection& conn) { return solve_r(conn, conn.ctx()->order()); }

/// Reference route: iterates r <- delta^{-1}(R + dr - r^2/h) from r = 0 until
/// an iterate repeats, with a hard cap of working order + 1 iterations.
inline SolutionPtr solve_r_iterative(const SymplecticConnection& conn, int order) {
    if (order < 0) throw InvalidInput("truncation order must be nonnegative");
    const int working = order + kHeadroom;
    CurvatureForm curv = curvature(conn, working);
    WeylForm r(conn.ctx(), working);
    int iterations = 0;
    for (;;) {
        if (iterations > working + 1)
            throw NonConvergence("r recursion did not stabilize within " + std::to_string(working + 1) + " iterations");
        WeylForm next = r_iteration(r, curv.form, conn);
        ++iterations;
        if (next == r) break;
        r = std::move(next);
    }
    return detail::make_solution(conn, order, std::move(r), std::move(curv), iterations);
}

inline WeylForm op_D(const WeylForm& a, const FedosovSolution& sol) { return sol.D(a); }

/// A flat section of D: the form and its symbol sigma(form).
struct FlatSection {
    WeylForm form;
    StarFunction symbol;
};

/// The unique a with D a = 0 and sigma(a) = f, solving
/// a = f + delta^{-1}((D + delta) a) degree by degree at the nominal order.
inline FlatSection lift_flat(const StarFunction& f, const FedosovSolution& sol) {
    detail::check_function(f, sol);
    const int order = sol.order();
    auto solved = detail::solve_graded(f.to_form(order), WeylForm(sol.ctx(), order), order,
                                       [&sol](const WeylForm& piece, const WeylForm&) { return sol.d_plus_delta(piece); });
    if (!detail::satisfies(solved)) throw IdentityFailure("lifted section is not flat");
    return FlatSection{std::move(solved.a), f};
}

/// Reference route: iterates a <- f + delta^{-1}((D + delta) a) from a = f
/// until an iterate repeats, with a hard cap of N + 1 iterations.
inline FlatSection lift_flat_iterative(const StarFunction& f, const FedosovSolution& sol) {
    detail::check_function(f, sol);
    const int order = sol.order();
    WeylForm base = f.to_form(order);
    WeylForm a = base;
    for (int it = 0;; ++it) {
        if (it > order + 1)
            throw NonConvergence("flat lift did not stabilize within " + std::to_string(order + 1) + " iterations");
        WeylForm next = base + op_delta_inv(sol.d_plus_delta(a)).truncated(order);
        if (next == a) break;
        a = std::move(next);
    }
    if (!sol.D(a).is_zero()) throw IdentityFailure("lifted section is not flat");
    return FlatSection{std::move(a), f};
}

/// Flat section of an element of the star algebra given by its symbol.
/// Lifting is linear and commutes with h, so the result is assembled from
/// memoized lifts of the monomials x^alpha.
inline WeylForm lift(const StarFunction& f, const FedosovSolution& sol) {
    detail::check_function(f, sol);
    const int order = sol.order();
    WeylForm a(sol.ctx(), order);
    for (const auto& [l, p] : f.coeffs())
        for (const auto& [e, c] : p.terms()) {
            std::optional<WeylForm> m = sol.cached_lift(e);
            if (!m) {
                m = lift_flat(StarFunction::from_poly(sol.function_ctx(), Poly::monomial(f.dim(), e, Rational(1))), sol).form;
                sol.store_lift(e, *m);
            }
            a += (times_h(*m, l) * c).truncated(order);
        }
    return a;
}

/// f * g = sigma(lift(f) o lift(g)); coefficients of h^q are exact for 2q <= N.
inline StarFunction star(const StarFunction& f, const StarFunction& g, const FedosovSolution& sol) {
    WeylForm prod = moyal_mul(lift(f, sol), lift(g, sol));
    return StarFunction::from_symbol(sol.function_ctx(), sigma_project(prod));
}

/// f * g - g * f.
inline StarFunction star_commutator(const StarFunction& f, const StarFunction& g, const FedosovSolution& sol) {
    WeylForm a = lift(f, sol), b = lift(g, sol);
    WeylForm c = graded_commutator(a, b);
    return StarFunction::from_symbol(sol.function_ctx(), sigma_project(c));
}

}  // namespace fedq
