#pragma once

#include <cstdint>
#include <random>

#include "liecross.hpp"

namespace fedq {

/// Seeded generator of random algebraic data. Draws use only raw
/// mt19937_64 output, so a seed replays identically on every platform.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    /// Uniform integer in [lo, hi].
    int uniform(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }

    bool coin() { return rng_() & 1u; }

    /// Nonzero rational p/q with |p| <= 3 and q in {1, 2, 3}.
    Rational coefficient() {
        int p = uniform(1, 3) * (coin() ? 1 : -1);
        int q = uniform(1, 3);
        return make_rational(p, q);
    }

    /// Exponent of total degree `degree` in `dim` variables.
    Exponent exponent(int dim, int degree) {
        Exponent e;
        for (int k = 0; k < degree; ++k) e.increment(uniform(0, dim - 1));
        return e;
    }

    /// Polynomial with up to `terms` monomials of degree <= max_degree.
    Poly poly(int dim, int max_degree, int terms = 3) {
        Poly p(dim);
        for (int t = 0; t < terms; ++t) p.add_term(exponent(dim, uniform(0, max_degree)), coefficient());
        return p;
    }

    /// Nonzero polynomial.
    Poly nonzero_poly(int dim, int max_degree, int terms = 3) {
        for (;;) {
            Poly p = poly(dim, max_degree, terms);
            if (!p.is_zero()) return p;
        }
    }

    /// Series with an h^0 part of degree <= max_degree and, when max_h > 0,
    /// a few higher h-coefficients.
    StarFunction star_function(const ChartPtr& ctx, int max_degree, int max_h = 0) {
        StarFunction f(ctx);
        f.add(0, nonzero_poly(ctx->dim(), max_degree));
        for (int l = 1; l <= std::min(max_h, f.max_power()); ++l)
            if (coin()) f.add(l, poly(ctx->dim(), max_degree, 2));
        return f;
    }

    /// Random Weyl form with `terms` terms of total degree <= order, form
    /// degree <= max_form_degree and coefficients of degree <= coef_degree.
    /// With `negative_h`, some terms carry h^-1 while staying in W+.
    WeylForm form(const ChartPtr& ctx, int order, int terms, int max_form_degree = 2, int coef_degree = 2,
                  bool negative_h = false) {
        const int d = ctx->dim();
        WeylForm a(ctx, order);
        for (int t = 0; t < terms; ++t) {
            WeylKey k;
            int total = uniform(0, order);
            k.h = uniform(0, total / 2);
            if (negative_h && coin() && total + 2 <= order) {
                k.h = -1;
                total += 2;
            }
            k.y = exponent(d, total - 2 * k.h);
            int fd = uniform(0, std::min(max_form_degree, d));
            for (int j = 0; j < fd; ++j) k.dx = static_cast<DxMask>(k.dx | (1u << uniform(0, d - 1)));
            a.add_term(k, nonzero_poly(d, coef_degree, 2));
        }
        return a;
    }

    /// Random vector in Q^m with small entries.
    std::vector<Rational> vector(int m) {
        std::vector<Rational> v;
        for (int i = 0; i < m; ++i) v.push_back(coin() ? coefficient() : Rational(0));
        return v;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

}  // namespace fedq
