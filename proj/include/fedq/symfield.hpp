#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fedosov.hpp"

namespace fedq {

/// Polynomial vector field X = X^i d/dx^i on a Darboux chart with L_X omega = 0.
class SymplecticVectorField {
public:
    /// The zero field.
    explicit SymplecticVectorField(ChartPtr ctx)
        : ctx_(std::move(ctx)), comp_(static_cast<std::size_t>(ctx_->dim()), Poly(ctx_->dim())) {}

    /// Validates dX^k/dx^i omega_kj = dX^k/dx^j omega_ki for all i, j and
    /// reports the first violating pair (1-based) otherwise.
    static SymplecticVectorField check(ChartPtr ctx, std::vector<Poly> components) {
        const int d = ctx->dim();
        if (static_cast<int>(components.size()) != d)
            throw InvalidInput("vector field needs " + std::to_string(d) + " components, got " +
                               std::to_string(components.size()));
        for (const auto& c : components)
            if (c.dim() != d) throw ContextMismatch("vector field component has wrong dimension");
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                Poly lhs(d), rhs(d);
                for (int k = 0; k < d; ++k) {
                    const Poly& xk = components[static_cast<std::size_t>(k)];
                    if (ctx->omega(k, j) != 0) lhs += xk.diff(i) * ctx->omega(k, j);
                    if (ctx->omega(k, i) != 0) rhs += xk.diff(j) * ctx->omega(k, i);
                }
                if (!(lhs == rhs))
                    throw InvalidInput("vector field is not symplectic: condition fails at (i,j)=(" +
                                       std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
            }
        SymplecticVectorField x(std::move(ctx));
        x.comp_ = std::move(components);
        return x;
    }

    /// The constant field d/dx^{i+1}.
    static SymplecticVectorField coordinate(ChartPtr ctx, int i) {
        SymplecticVectorField x(ctx);
        x.comp_.at(static_cast<std::size_t>(i)) = Poly::constant(ctx->dim(), Rational(1));
        return x;
    }

    /// The Hamiltonian field of H, X^i = -omega^ij dH/dx^j, so that X f = {f, H}.
    static SymplecticVectorField hamiltonian(ChartPtr ctx, const Poly& H) {
        const int d = ctx->dim();
        std::vector<Poly> c(static_cast<std::size_t>(d), Poly(d));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (ctx->omega_inv(i, j) != 0) c[static_cast<std::size_t>(i)] -= H.diff(j) * ctx->omega_inv(i, j);
        return check(std::move(ctx), std::move(c));
    }

    const ChartPtr& ctx() const { return ctx_; }
    int dim() const { return ctx_->dim(); }
    const std::vector<Poly>& components() const { return comp_; }
    const Poly& operator[](int i) const { return comp_[static_cast<std::size_t>(i)]; }
    bool is_zero() const {
        return std::all_of(comp_.begin(), comp_.end(), [](const Poly& p) { return p.is_zero(); });
    }

    /// X f = X^i df/dx^i.
    Poly apply(const Poly& f) const {
        Poly r(dim());
        for (int i = 0; i < dim(); ++i)
            if (!comp_[static_cast<std::size_t>(i)].is_zero()) r += comp_[static_cast<std::size_t>(i)] * f.diff(i);
        return r;
    }

    SymplecticVectorField& operator+=(const SymplecticVectorField& o) {
        same(o);
        for (int i = 0; i < dim(); ++i) comp_[static_cast<std::size_t>(i)] += o[i];
        return *this;
    }
    SymplecticVectorField& operator-=(const SymplecticVectorField& o) {
        same(o);
        for (int i = 0; i < dim(); ++i) comp_[static_cast<std::size_t>(i)] -= o[i];
        return *this;
    }
    SymplecticVectorField& operator*=(const Rational& s) {
        for (auto& c : comp_) c *= s;
        return *this;
    }
    friend SymplecticVectorField operator+(SymplecticVectorField a, const SymplecticVectorField& b) { return a += b; }
    friend SymplecticVectorField operator-(SymplecticVectorField a, const SymplecticVectorField& b) { return a -= b; }
    friend SymplecticVectorField operator*(const Rational& s, SymplecticVectorField a) { return a *= s; }
    friend bool operator==(const SymplecticVectorField& a, const SymplecticVectorField& b) {
        return a.ctx_->compatible(*b.ctx_) && a.comp_ == b.comp_;
    }

    /// `[X1, X2, ...]`
    std::string str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < comp_.size(); ++i) s += (i ? ", " : "") + comp_[i].str();
        return s + "]";
    }

    void same(const SymplecticVectorField& o) const {
        if (!ctx_->compatible(*o.ctx_)) throw ContextMismatch("vector fields live on different charts");
    }

private:
    ChartPtr ctx_;
    std::vector<Poly> comp_;
};

/// [X, Y]^i = X^j dY^i/dx^j - Y^j dX^i/dx^j, revalidated as symplectic.
inline SymplecticVectorField field_bracket(const SymplecticVectorField& X, const SymplecticVectorField& Y) {
    X.same(Y);
    std::vector<Poly> c;
    c.reserve(static_cast<std::size_t>(X.dim()));
    for (int i = 0; i < X.dim(); ++i) c.push_back(X.apply(Y[i]) - Y.apply(X[i]));
    return SymplecticVectorField::check(X.ctx(), std::move(c));
}

/// Lie derivative on Weyl forms: X on coefficients, L_X y^i = dX^i/dx^j y^j and
/// L_X dx^i = dX^i/dx^j dx^j, extended by the Leibniz rule.
inline WeylForm lie_derivative(const SymplecticVectorField& X, const WeylForm& a) {
    if (!X.ctx()->compatible(*a.ctx())) throw ContextMismatch("field and form live on different charts");
    const int d = a.dim();
    // J[i][j] = dX^i/dx^j
    std::vector<Poly> J(static_cast<std::size_t>(d * d), Poly(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) J[static_cast<std::size_t>(i * d + j)] = X[i].diff(j);
    auto jac = [&](int i, int j) -> const Poly& { return J[static_cast<std::size_t>(i * d + j)]; };

    WeylForm r(a.ctx(), a.order());
    for (const auto& [k, c] : a.terms()) {
        r.add_term(k, X.apply(c));
        for (int i = 0; i < d; ++i) {
            if (k.y[i] == 0) continue;
            for (int j = 0; j < d; ++j) {
                if (jac(i, j).is_zero()) continue;
                WeylKey k2 = k;
                k2.y.decrement(i);
                k2.y.increment(j);
                r.add_term(k2, c * jac(i, j) * Rational(k.y[i]));
            }
        }
        for (unsigned m = k.dx; m != 0; m &= m - 1) {
            int i = std::countr_zero(m);
            DxMask bit = static_cast<DxMask>(1u << i);
            DxMask rest = static_cast<DxMask>(k.dx & ~bit);
            int before = std::popcount(static_cast<unsigned>(k.dx) & (bit - 1u));
            for (int j = 0; j < d; ++j) {
                if (jac(i, j).is_zero()) continue;
                DxMask jb = static_cast<DxMask>(1u << j);
                int sign = wedge_sign(jb, rest);
                if (sign == 0) continue;
                if (before % 2 == 1) sign = -sign;
                WeylKey k2 = k;
                k2.dx = static_cast<DxMask>(rest | jb);
                r.add_term(k2, c * jac(i, j) * Rational(sign));
            }
        }
    }
    return r;
}

/// lambda_X = 1/2 omega_il d^2 X^l / dx^j dx^k y^i y^j dx^k.
inline WeylForm lambda_term(const SymplecticVectorField& X, int order) {
    const ChartPtr& ctx = X.ctx();
    const int d = ctx->dim();
    WeylForm r(ctx, order);
    for (int l = 0; l < d; ++l) {
        if (X[l].degree() < 2) continue;
        for (int j = 0; j < d; ++j) {
            Poly xj = X[l].diff(j);
            for (int k = 0; k < d; ++k) {
                Poly xjk = xj.diff(k);
                if (xjk.is_zero()) continue;
                for (int i = 0; i < d; ++i) {
                    if (ctx->omega(i, l) == 0) continue;
                    WeylKey key;
                    key.y = Exponent::unit(i) + Exponent::unit(j);
                    key.dx = static_cast<DxMask>(1u << k);
                    r.add_term(key, xjk * (ctx->omega(i, l) / 2));
                }
            }
        }
    }
    return r;
}

/// Lowered Christoffel symbols of nabla^X = nabla + L_X nabla, from the
/// transformation rule of the raised symbols (Gamma^X)^l_jk.
inline std::vector<Poly> gamma_X_lower(const SymplecticVectorField& X, const SymplecticConnection& conn) {
    const ChartPtr& ctx = conn.ctx();
    const int d = ctx->dim();
    auto idx = [d](int a, int b, int c) { return static_cast<std::size_t>((a * d + b) * d + c); };
    std::vector<Poly> up(static_cast<std::size_t>(d * d * d), Poly(d));
    for (int l = 0; l < d; ++l)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) up[idx(l, j, k)] = conn.upper(l, j, k);

    std::vector<Poly> upX(up.size(), Poly(d));
    for (int l = 0; l < d; ++l)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                Poly v = up[idx(l, j, k)] + X.apply(up[idx(l, j, k)]) + X[l].diff(j).diff(k);
                for (int p = 0; p < d; ++p) {
                    v -= X[l].diff(p) * up[idx(p, j, k)];
                    v += X[p].diff(j) * up[idx(l, p, k)];
                    v += X[p].diff(k) * up[idx(l, j, p)];
                }
                upX[idx(l, j, k)] = std::move(v);
            }

    std::vector<Poly> low(up.size(), Poly(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    if (ctx->omega(i, l) != 0) low[idx(i, j, k)] += upX[idx(l, j, k)] * ctx->omega(i, l);
    return low;
}

/// nabla^X as a connection; its total symmetry is checked on construction.
inline SymplecticConnection gamma_X_crosscheck(const SymplecticVectorField& X, const SymplecticConnection& conn) {
    return SymplecticConnection::from_tensor(conn.ctx(), gamma_X_lower(X, conn));
}

/// The 1-form eta_X with D eta_X = 0, carried at the solution's working order.
struct EtaForm {
    WeylForm form;
};

/// eta_X = L_X Gamma + L_X r + lambda_X; verifies D eta_X = 0.
inline EtaForm eta_of(const SymplecticVectorField& X, const FedosovSolution& sol) {
    const int order = sol.working_order();
    WeylForm eta = lambda_term(X, order);
    if (!X.is_zero()) {
        eta += lie_derivative(X, sol.gamma());
        eta += lie_derivative(X, sol.r());
    }
    if (!sol.D(eta).is_zero()) throw IdentityFailure("D eta_X != 0 for X = " + X.str());
    return EtaForm{std::move(eta)};
}

/// eta_X = Gamma^X - Gamma + L_X r with Gamma^X from the Christoffel
/// transformation rule; an independent route to eta_of.
inline WeylForm eta_by_definition(const SymplecticVectorField& X, const FedosovSolution& sol) {
    const int order = sol.working_order();
    SymplecticConnection gx = gamma_X_crosscheck(X, sol.connection());
    return gx.form(order) - sol.connection().form(order) + lie_derivative(X, sol.r());
}

/// Throws unless both routes to eta_X agree exactly.
inline void check_eta_routes(const SymplecticVectorField& X, const FedosovSolution& sol) {
    if (!(eta_of(X, sol).form == eta_by_definition(X, sol)))
        throw IdentityFailure("eta_X routes disagree for X = " + X.str());
}

/// The 0-form u_X in W+_1 solving u = delta^{-1}((D + delta) u + eta_X / h).
struct UElement {
    WeylForm form;
    int iterations = 0;
};

/// One step of the u recursion.
inline WeylForm u_iteration(const WeylForm& u, const WeylForm& eta_over_h, const FedosovSolution& sol) {
    return op_delta_inv(sol.d_plus_delta(u) + eta_over_h).truncated(u.order());
}

namespace detail {

inline void check_u(const WeylForm& u, const WeylForm& eta_h, const FedosovSolution& sol) {
    WeylForm Du = sol.D(u);
    if (!(Du == (-eta_h).truncated(Du.order()))) throw IdentityFailure("D u_X != -eta_X / h");
}

}  // namespace detail

/// Solves u = delta^{-1}((D + delta) u + eta_X / h) degree by degree at the
/// nominal order, then verifies D u_X = -eta_X / h.
inline UElement solve_u(const EtaForm& eta, const FedosovSolution& sol) {
    const int order = sol.order();
    WeylForm eta_h = over_h(eta.form.truncated(order + 2));
    auto solved = detail::solve_graded(WeylForm(sol.ctx(), order), eta_h, order,
                                       [&sol](const WeylForm& piece, const WeylForm&) { return sol.d_plus_delta(piece); });
    if (!detail::satisfies(solved)) throw IdentityFailure("D u_X != -eta_X / h");
    return UElement{std::move(solved.a), solved.steps};
}

/// Reference route: iterates the u recursion from u = 0 until an iterate
/// repeats, with a hard cap of N + 1 iterations.
inline UElement solve_u_iterative(const EtaForm& eta, const FedosovSolution& sol) {
    const int order = sol.order();
    WeylForm eta_h = over_h(eta.form.truncated(order + 2));
    WeylForm u(sol.ctx(), order);
    int it = 0;
    for (;;) {
        if (it > order + 1)
            throw NonConvergence("u recursion did not stabilize within " + std::to_string(order + 1) + " iterations");
        WeylForm next = u_iteration(u, eta_h, sol);
        ++it;
        if (next == u) break;
        u = std::move(next);
    }
    detail::check_u(u, eta_h, sol);
    return UElement{std::move(u), it};
}

inline UElement solve_u(const SymplecticVectorField& X, const FedosovSolution& sol) {
    return solve_u(eta_of(X, sol), sol);
}

/// X^ = L_X + [u_X, .], acting on flat sections; X~ f = sigma(X^ lift f).
class QuantizedDerivation {
public:
    QuantizedDerivation(SymplecticVectorField X, SolutionPtr sol)
        : X_(std::move(X)), sol_(std::move(sol)), eta_(eta_of(X_, *sol_)), u_(solve_u(eta_, *sol_)) {}

    const SymplecticVectorField& field() const { return X_; }
    const FedosovSolution& solution() const { return *sol_; }
    const SolutionPtr& solution_ptr() const { return sol_; }
    const EtaForm& eta() const { return eta_; }
    const UElement& u() const { return u_; }

    WeylForm apply(const WeylForm& a) const {
        WeylForm r = lie_derivative(X_, a);
        if (!u_.form.is_zero()) r += graded_commutator(u_.form, a);
        return r;
    }

    StarFunction apply(const StarFunction& f) const {
        WeylForm out = apply(lift(f, *sol_));
        if (out.min_h_power() < 0) throw IdentityFailure("quantized derivation produced negative h-powers");
        return StarFunction::from_symbol(sol_->function_ctx(), sigma_project(out));
    }

private:
    SymplecticVectorField X_;
    SolutionPtr sol_;
    EtaForm eta_;
    UElement u_;
};

inline StarFunction quantized_apply(const QuantizedDerivation& Xq, const StarFunction& f) { return Xq.apply(f); }

inline StarFunction quantized_apply(const SymplecticVectorField& X, const StarFunction& f, const SolutionPtr& sol) {
    return QuantizedDerivation(X, sol).apply(f);
}

/// The flat section tau(X, Y) = [u_X, u_Y] - u_[X,Y] + L_X u_Y - L_Y u_X.
struct TauValue {
    WeylForm form;
    StarFunction symbol;
};

inline TauValue tau_from(const QuantizedDerivation& X, const QuantizedDerivation& Y, const QuantizedDerivation& XY) {
    const WeylForm& ux = X.u().form;
    const WeylForm& uy = Y.u().form;
    WeylForm t = graded_commutator(ux, uy) - XY.u().form + lie_derivative(X.field(), uy) -
                 lie_derivative(Y.field(), ux);
    const FedosovSolution& sol = X.solution();
    if (!sol.D(t).is_zero()) throw IdentityFailure("tau(X, Y) is not flat");
    if (t.min_h_power() < 0) throw IdentityFailure("tau(X, Y) has negative h-powers");
    StarFunction s = StarFunction::from_symbol(sol.function_ctx(), sigma_project(t));
    return TauValue{std::move(t), std::move(s)};
}

inline TauValue tau(const SymplecticVectorField& X, const SymplecticVectorField& Y, const SolutionPtr& sol) {
    QuantizedDerivation qx(X, sol), qy(Y, sol), qxy(field_bracket(X, Y), sol);
    return tau_from(qx, qy, qxy);
}

}  // namespace fedq
