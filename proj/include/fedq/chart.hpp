#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "poly.hpp"

namespace fedq {

/// Dense square matrix of rationals, row-major.
class RationalMatrix {
public:
    RationalMatrix() = default;
    explicit RationalMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n * n)) {}

    int size() const { return n_; }
    Rational& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * n_ + j)]; }
    const Rational& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * n_ + j)]; }
    bool operator==(const RationalMatrix&) const = default;

    /// Exact inverse by Gauss-Jordan elimination; throws if singular.
    RationalMatrix inverse() const {
        RationalMatrix m = *this;
        RationalMatrix inv(n_);
        for (int i = 0; i < n_; ++i) inv(i, i) = 1;
        for (int col = 0; col < n_; ++col) {
            int pivot = -1;
            for (int r = col; r < n_; ++r)
                if (m(r, col) != 0) {
                    pivot = r;
                    break;
                }
            if (pivot < 0) throw InvalidInput("matrix is singular");
            if (pivot != col)
                for (int c = 0; c < n_; ++c) {
                    std::swap(m(pivot, c), m(col, c));
                    std::swap(inv(pivot, c), inv(col, c));
                }
            Rational p = m(col, col);
            for (int c = 0; c < n_; ++c) {
                m(col, c) /= p;
                inv(col, c) /= p;
            }
            for (int r = 0; r < n_; ++r) {
                if (r == col || m(r, col) == 0) continue;
                Rational f = m(r, col);
                for (int c = 0; c < n_; ++c) {
                    m(r, c) -= f * m(col, c);
                    inv(r, c) -= f * inv(col, c);
                }
            }
        }
        return inv;
    }

private:
    int n_ = 0;
    std::vector<Rational> a_;
};

/// One term of the Moyal kernel of a pair of y-monomials:
/// y^alpha o y^beta = sum coef * y^gamma * h^hbar.
struct MoyalKernelTerm {
    Rational coef;
    Exponent gamma;
    int hbar;
};

class Chart;
using ChartPtr = std::shared_ptr<const Chart>;

/// A Darboux chart R^{2n} with constant symplectic matrix omega_ij, its
/// inverse omega^ij and the default truncation order N of Weyl computations.
class Chart {
public:
    /// Standard block form omega_{i, n+i} = 1.
    static ChartPtr standard(int n, int order) {
        if (n < 1 || 2 * n > kMaxVars) throw InvalidInput("chart half-dimension out of range");
        RationalMatrix w(2 * n);
        for (int i = 0; i < n; ++i) {
            w(i, n + i) = 1;
            w(n + i, i) = -1;
        }
        return make(std::move(w), order);
    }

    static ChartPtr make(RationalMatrix omega, int order) {
        return std::make_shared<const Chart>(Token{}, std::move(omega), order);
    }

    struct Token {};
    Chart(Token, RationalMatrix omega, int order) : omega_(std::move(omega)), order_(order) {
        int d = omega_.size();
        if (d < 2 || d % 2 != 0 || d > kMaxVars) throw InvalidInput("chart dimension must be even and in 2..8");
        if (order < 0) throw InvalidInput("truncation order must be nonnegative");
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (omega_(i, j) != -omega_(j, i)) throw InvalidInput("omega is not antisymmetric");
        omega_inv_ = omega_.inverse();
    }

    int dim() const { return omega_.size(); }
    int half_dim() const { return omega_.size() / 2; }
    int order() const { return order_; }
    const Rational& omega(int i, int j) const { return omega_(i, j); }
    const Rational& omega_inv(int i, int j) const { return omega_inv_(i, j); }
    const RationalMatrix& omega_matrix() const { return omega_; }

    /// Same symplectic structure (the truncation order may differ).
    bool compatible(const Chart& o) const { return this == &o || omega_ == o.omega_; }

    /// Same chart with another default truncation order.
    ChartPtr with_order(int order) const { return make(omega_, order); }

    /// Moyal product of y^alpha and y^beta, obtained by iterating the
    /// bidifferential step omega^ij d/dy^i (x) d/dy^j. Memoized; safe to call
    /// from several threads.
    std::shared_ptr<const std::vector<MoyalKernelTerm>> moyal_kernel(const Exponent& alpha,
                                                                     const Exponent& beta) const {
        Key key{alpha, beta};
        {
            std::lock_guard lock(cache_mutex_);
            auto it = kernel_cache_.find(key);
            if (it != kernel_cache_.end()) return it->second;
        }
        auto value = std::make_shared<const std::vector<MoyalKernelTerm>>(compute_kernel(alpha, beta));
        std::lock_guard lock(cache_mutex_);
        kernel_cache_.emplace(key, value);
        return value;
    }

private:
    struct Key {
        Exponent a, b;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const { return k.a.hash() * 31 + k.b.hash(); }
    };
    struct ExponentHash {
        std::size_t operator()(const Exponent& e) const { return e.hash(); }
    };
    struct PairHash {
        std::size_t operator()(const std::pair<Exponent, Exponent>& k) const {
            return k.first.hash() * 131 + k.second.hash();
        }
    };

    std::vector<MoyalKernelTerm> compute_kernel(const Exponent& alpha, const Exponent& beta) const {
        const int d = dim();
        std::vector<MoyalKernelTerm> out;
        std::unordered_map<std::pair<Exponent, Exponent>, Rational, PairHash> level;
        level.emplace(std::make_pair(alpha, beta), Rational(1));
        Rational weight(1);  // (1/q!) (-1/2)^q
        for (int q = 0; !level.empty(); ++q) {
            if (q > 0) weight *= Rational(-1, 2 * q);
            std::unordered_map<Exponent, Rational, ExponentHash> merged;
            for (const auto& [ab, c] : level) merged[ab.first + ab.second] += c;
            for (auto& [g, c] : merged)
                if (c != 0) out.push_back({c * weight, g, q});
            std::unordered_map<std::pair<Exponent, Exponent>, Rational, PairHash> next;
            for (const auto& [ab, c] : level) {
                const auto& [a, b] = ab;
                for (int i = 0; i < d; ++i) {
                    if (a[i] == 0) continue;
                    for (int j = 0; j < d; ++j) {
                        if (b[j] == 0 || omega_inv_(i, j) == 0) continue;
                        Exponent a2 = a, b2 = b;
                        a2.decrement(i);
                        b2.decrement(j);
                        next[{a2, b2}] += c * omega_inv_(i, j) * a[i] * b[j];
                    }
                }
            }
            std::erase_if(next, [](const auto& kv) { return kv.second == 0; });
            level = std::move(next);
        }
        return out;
    }

    RationalMatrix omega_;
    RationalMatrix omega_inv_;
    int order_;
    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<Key, std::shared_ptr<const std::vector<MoyalKernelTerm>>, KeyHash> kernel_cache_;
};

}  // namespace fedq
