#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace fedq {

/// Upper bound on the number of chart coordinates (2n <= 8).
inline constexpr int kMaxVars = 8;

/// Exponent vector of a monomial in at most kMaxVars variables. Unused
/// slots are zero, so equality and hashing ignore the dimension.
class Exponent {
public:
    using value_type = std::uint16_t;

    constexpr Exponent() : e_{}, total_(0) {}

    static Exponent unit(int i) {
        Exponent e;
        e.e_.at(static_cast<std::size_t>(i)) = 1;
        e.total_ = 1;
        return e;
    }

    value_type operator[](int i) const { return e_[static_cast<std::size_t>(i)]; }

    void set(int i, int v) {
        if (v < 0 || v > 0xffff) throw InvalidInput("exponent out of range");
        auto& slot = e_.at(static_cast<std::size_t>(i));
        total_ += v - slot;
        slot = static_cast<value_type>(v);
    }
    void increment(int i, int by = 1) { set(i, e_[static_cast<std::size_t>(i)] + by); }
    void decrement(int i) { set(i, e_[static_cast<std::size_t>(i)] - 1); }

    int total() const { return total_; }

    Exponent operator+(const Exponent& o) const {
        Exponent r;
        for (std::size_t i = 0; i < e_.size(); ++i) {
            int v = e_[i] + o.e_[i];
            if (v > 0xffff) throw InvalidInput("exponent overflow");
            r.e_[i] = static_cast<value_type>(v);
        }
        r.total_ = total_ + o.total_;
        return r;
    }

    bool operator==(const Exponent& o) const { return e_ == o.e_; }

    /// Lexicographic comparison on raw slots.
    bool lex_less(const Exponent& o) const { return e_ < o.e_; }

    std::size_t hash() const {
        std::size_t h = 1469598103934665603ull;
        for (auto v : e_) h = (h ^ v) * 1099511628211ull;
        return h;
    }

private:
    std::array<value_type, kMaxVars> e_;
    int total_;
};

/// Graded lexicographic order: total degree first, then lex with x1 largest.
struct GrLex {
    bool operator()(const Exponent& a, const Exponent& b) const {
        int da = a.total(), db = b.total();
        if (da != db) return da < db;
        return a.lex_less(b);
    }
};

/// Sparse multivariate polynomial over the rationals in `dim` variables
/// x1..x{dim}. Zero coefficients are never stored.
class Poly {
public:
    using TermMap = std::map<Exponent, Rational, GrLex>;

    explicit Poly(int dim = 0) : dim_(dim) {
        if (dim < 0 || dim > kMaxVars) throw InvalidInput("polynomial dimension out of range");
    }

    static Poly constant(int dim, const Rational& c) {
        Poly p(dim);
        p.add_term(Exponent{}, c);
        return p;
    }

    /// The coordinate x_{i+1} (0-based index).
    static Poly variable(int dim, int i) {
        Poly p(dim);
        p.check_index(i);
        p.add_term(Exponent::unit(i), Rational(1));
        return p;
    }

    static Poly monomial(int dim, const Exponent& e, const Rational& c) {
        Poly p(dim);
        p.add_term(e, c);
        return p;
    }

    int dim() const { return dim_; }
    const TermMap& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.total() == 0);
    }

    Rational constant_term() const {
        auto it = terms_.find(Exponent{});
        return it == terms_.end() ? Rational(0) : it->second;
    }

    Rational coefficient(const Exponent& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    /// Total degree; -1 for the zero polynomial.
    int degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first.total(); }

    void add_term(const Exponent& e, const Rational& c) {
        if (c == 0) return;
        auto [it, inserted] = terms_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    /// this += s * o without a temporary.
    void add_scaled(const Poly& o, const Rational& s) {
        check_dim(o);
        if (s == 0) return;
        for (const auto& [e, c] : o.terms_) add_term(e, c * s);
    }

    Poly& operator+=(const Poly& o) {
        check_dim(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }

    Poly& operator-=(const Poly& o) {
        check_dim(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }

    Poly& operator*=(const Rational& s) {
        if (s == 0) {
            terms_.clear();
        } else {
            for (auto& [e, c] : terms_) c *= s;
        }
        return *this;
    }

    Poly& operator*=(const Poly& o) {
        *this = *this * o;
        return *this;
    }

    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator-(Poly a) {
        for (auto& [e, c] : a.terms_) c = -c;
        return a;
    }
    friend Poly operator*(Poly a, const Rational& s) { return a *= s; }
    friend Poly operator*(const Rational& s, Poly a) { return a *= s; }

    friend Poly operator*(const Poly& a, const Poly& b) {
        a.check_dim(b);
        Poly r(a.dim_);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) r.add_term(ea + eb, ca * cb);
        return r;
    }

    friend bool operator==(const Poly& a, const Poly& b) {
        return a.dim_ == b.dim_ && a.terms_ == b.terms_;
    }

    /// Partial derivative with respect to x_{i+1}.
    Poly diff(int i) const {
        check_index(i);
        Poly r(dim_);
        for (const auto& [e, c] : terms_) {
            int k = e[i];
            if (k == 0) continue;
            Exponent f = e;
            f.decrement(i);
            r.add_term(f, c * k);
        }
        return r;
    }

    /// Evaluate at a rational point.
    Rational evaluate(const std::vector<Rational>& point) const {
        if (static_cast<int>(point.size()) != dim_) throw InvalidInput("evaluation point has wrong dimension");
        Rational total(0);
        for (const auto& [e, c] : terms_) {
            Rational t = c;
            for (int i = 0; i < dim_; ++i) t *= pow(point[static_cast<std::size_t>(i)], e[i]);
            total += t;
        }
        return total;
    }

    /// Canonical text, highest grlex term first, e.g. `2*x1^2*x2 - 1/3`.
    std::string str() const {
        if (terms_.empty()) return "0";
        std::string out;
        bool first = true;
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            const auto& [e, c] = *it;
            Rational mag = abs(c);
            if (first) {
                if (c < 0) out += "-";
            } else {
                out += c < 0 ? " - " : " + ";
            }
            first = false;
            std::string mono = monomial_text(e);
            if (mono.empty()) {
                out += mag.get_str();
            } else if (mag == 1) {
                out += mono;
            } else {
                out += mag.get_str() + "*" + mono;
            }
        }
        return out;
    }

    void check_index(int i) const {
        if (i < 0 || i >= dim_)
            throw InvalidInput("coordinate index " + std::to_string(i + 1) + " out of range 1.." +
                               std::to_string(dim_));
    }

private:
    void check_dim(const Poly& o) const {
        if (o.dim_ != dim_)
            throw ContextMismatch("polynomial dimension mismatch: " + std::to_string(dim_) + " vs " +
                                  std::to_string(o.dim_));
    }

    std::string monomial_text(const Exponent& e) const {
        std::string s;
        for (int i = 0; i < dim_; ++i) {
            if (e[i] == 0) continue;
            if (!s.empty()) s += "*";
            s += "x" + std::to_string(i + 1);
            if (e[i] > 1) s += "^" + std::to_string(e[i]);
        }
        return s;
    }

    int dim_;
    TermMap terms_;
};

}  // namespace fedq
