#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "liecross.hpp"

namespace fedq {

/// 1-based position of a token in the input.
struct SourcePos {
    int line = 1;
    int column = 1;
};

struct Token {
    enum Kind { Number, Ident, Op, End } kind;
    std::string text;
    SourcePos pos;
};

/// Splits an expression into numbers, identifiers and single-character
/// operators `+ - * / ^ ( ) [ ] , =`. Whitespace is skipped.
class Lexer {
public:
    explicit Lexer(std::string_view src, SourcePos start = {}) : src_(src), pos_(start) {}

    std::vector<Token> tokens() {
        std::vector<Token> out;
        while (i_ < src_.size()) {
            char c = src_[i_];
            if (c == '\n') {
                ++pos_.line;
                pos_.column = 1;
                ++i_;
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
                continue;
            }
            SourcePos at = pos_;
            if (std::isdigit(static_cast<unsigned char>(c))) {
                std::string s;
                while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) s += advance();
                out.push_back({Token::Number, s, at});
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string s;
                while (i_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
                    s += advance();
                out.push_back({Token::Ident, s, at});
            } else if (std::string_view("+-*/^()[],=").find(c) != std::string_view::npos) {
                out.push_back({Token::Op, std::string(1, advance()), at});
            } else {
                throw ParseError(std::string("unexpected character '") + c + "'", at.line, at.column);
            }
        }
        out.push_back({Token::End, "", pos_});
        return out;
    }

private:
    char advance() {
        ++pos_.column;
        return src_[i_++];
    }

    std::string_view src_;
    std::size_t i_ = 0;
    SourcePos pos_;
};

/// Which symbols an expression may use.
struct SymbolTable {
    int dim = 0;
    bool allow_h = false;
    bool allow_negative_h = false;
    bool allow_y_dx = false;
    std::vector<std::string> generators;
};

namespace detail {

/// Monomial key of the commutative-graded symbol algebra used while parsing.
struct RawKey {
    Word word;
    Exponent x, y;
    DxMask dx = 0;
    int h = 0;

    bool operator<(const RawKey& o) const {
        if (word != o.word) return WordLess{}(word, o.word);
        if (!(x == o.x)) return GrLex{}(x, o.x);
        if (!(y == o.y)) return GrLex{}(y, o.y);
        if (dx != o.dx) return dx < o.dx;
        return h < o.h;
    }
};

using RawValue = std::map<RawKey, Rational>;

inline void raw_add(RawValue& v, const RawKey& k, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = v.try_emplace(k, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) v.erase(it);
    }
}

inline bool raw_is_constant(const RawValue& v) {
    return v.empty() || (v.size() == 1 && v.begin()->first.word.empty() && v.begin()->first.x.total() == 0 &&
                         v.begin()->first.y.total() == 0 && v.begin()->first.dx == 0 && v.begin()->first.h == 0);
}

inline Rational raw_constant(const RawValue& v) { return v.empty() ? Rational(0) : v.begin()->second; }

/// Pratt parser over RawValue. Products are commutative on x, y and h,
/// graded on dx, and concatenate generator words; a non-constant
/// coefficient may not follow a generator.
class ExprParser {
public:
    ExprParser(std::vector<Token> toks, SymbolTable syms) : t_(std::move(toks)), syms_(std::move(syms)) {}

    RawValue parse_all() {
        RawValue v = parse(0);
        if (peek().kind != Token::End) fail("unexpected '" + peek().text + "'", peek());
        return v;
    }

    /// Parses one expression and stops at `,` `]` or end of input.
    RawValue parse_one() { return parse(0); }

    const Token& peek() const { return t_[p_]; }
    const Token& next() { return t_[p_++]; }
    void expect(const std::string& op) {
        if (peek().kind != Token::Op || peek().text != op) fail("expected '" + op + "'", peek());
        ++p_;
    }

    [[noreturn]] static void fail(const std::string& msg, const Token& at) {
        throw ParseError(msg, at.pos.line, at.pos.column);
    }

private:
    static int infix_bp(const Token& t) {
        if (t.kind != Token::Op) return -1;
        if (t.text == "+" || t.text == "-") return 10;
        if (t.text == "*" || t.text == "/") return 20;
        if (t.text == "^") return 30;
        return -1;
    }

    RawValue parse(int min_bp) {
        RawValue lhs = prefix();
        for (;;) {
            const Token& op = peek();
            int bp = infix_bp(op);
            if (bp < 0 || bp <= min_bp) break;
            ++p_;
            if (op.text == "^") {
                lhs = power(lhs, op);
                continue;
            }
            RawValue rhs = parse(bp);
            if (op.text == "+") lhs = add(lhs, rhs, 1);
            else if (op.text == "-") lhs = add(lhs, rhs, -1);
            else if (op.text == "*") lhs = mul(lhs, rhs, op);
            else lhs = divide(lhs, rhs, op);
        }
        return lhs;
    }

    RawValue prefix() {
        const Token& t = next();
        if (t.kind == Token::Number) {
            RawValue v;
            raw_add(v, RawKey{}, Rational(t.text));
            return v;
        }
        if (t.kind == Token::Op && t.text == "-") {
            RawValue v = parse(25);
            for (auto& [k, c] : v) c = -c;
            return v;
        }
        if (t.kind == Token::Op && t.text == "+") return parse(25);
        if (t.kind == Token::Op && t.text == "(") {
            RawValue v = parse(0);
            expect(")");
            return v;
        }
        if (t.kind == Token::Ident) return symbol(t);
        if (t.kind == Token::End) fail("unexpected end of expression", t);
        fail("unexpected '" + t.text + "'", t);
    }

    RawValue symbol(const Token& t) {
        RawKey k;
        const std::string& s = t.text;
        for (std::size_t g = 0; g < syms_.generators.size(); ++g)
            if (syms_.generators[g] == s) {
                k.word.push_back(static_cast<int>(g));
                return RawValue{{k, Rational(1)}};
            }
        if (s == "h") {
            if (!syms_.allow_h) fail("'h' is not allowed in a polynomial", t);
            k.h = 1;
            return RawValue{{k, Rational(1)}};
        }
        auto indexed = [&](std::string_view prefix, bool allowed) -> int {
            if (s.size() <= prefix.size() || s.compare(0, prefix.size(), prefix) != 0) return -1;
            std::string digits = s.substr(prefix.size());
            if (!std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
                return -1;
            if (!allowed) fail("'" + s + "' is not allowed here", t);
            int i = digits.size() > 3 ? 1000 : std::stoi(digits);
            if (i < 1 || i > syms_.dim)
                fail("index of '" + s + "' out of range 1.." + std::to_string(syms_.dim), t);
            return i - 1;
        };
        if (int i = indexed("dx", syms_.allow_y_dx); i >= 0) {
            k.dx = static_cast<DxMask>(1u << i);
            return RawValue{{k, Rational(1)}};
        }
        if (int i = indexed("x", true); i >= 0) {
            k.x = Exponent::unit(i);
            return RawValue{{k, Rational(1)}};
        }
        if (int i = indexed("y", syms_.allow_y_dx); i >= 0) {
            k.y = Exponent::unit(i);
            return RawValue{{k, Rational(1)}};
        }
        fail("unknown symbol '" + s + "'", t);
    }

    static RawValue add(RawValue a, const RawValue& b, int sign) {
        for (const auto& [k, c] : b) raw_add(a, k, sign > 0 ? c : Rational(-c));
        return a;
    }

    static RawValue mul(const RawValue& a, const RawValue& b, const Token& at) {
        RawValue r;
        for (const auto& [ka, ca] : a)
            for (const auto& [kb, cb] : b) {
                bool b_scalar = kb.x.total() == 0 && kb.y.total() == 0 && kb.dx == 0 && kb.h == 0;
                if (!ka.word.empty() && !b_scalar) fail("coefficients must precede generators", at);
                int sign = wedge_sign(ka.dx, kb.dx);
                if (sign == 0) continue;
                RawKey k;
                k.word = ka.word;
                k.word.insert(k.word.end(), kb.word.begin(), kb.word.end());
                k.x = ka.x + kb.x;
                k.y = ka.y + kb.y;
                k.dx = static_cast<DxMask>(ka.dx | kb.dx);
                k.h = ka.h + kb.h;
                raw_add(r, k, sign < 0 ? Rational(-ca * cb) : Rational(ca * cb));
            }
        return r;
    }

    static RawValue divide(const RawValue& a, const RawValue& b, const Token& at) {
        if (!raw_is_constant(b) || raw_constant(b) == 0) fail("divisor must be a nonzero constant", at);
        Rational d = raw_constant(b);
        RawValue r = a;
        for (auto& [k, c] : r) c /= d;
        return r;
    }

    RawValue power(const RawValue& base, const Token& op) {
        bool negative = false;
        if (peek().kind == Token::Op && peek().text == "-") {
            negative = true;
            ++p_;
        }
        const Token& e = next();
        if (e.kind != Token::Number) fail("exponent must be an integer literal", e);
        if (e.text.size() > 4) fail("exponent too large", e);
        int n = std::stoi(e.text);
        if (negative) {
            bool pure_h = base.size() == 1 && base.begin()->second == 1 && base.begin()->first.h == 1 &&
                          base.begin()->first.word.empty() && base.begin()->first.x.total() == 0 &&
                          base.begin()->first.y.total() == 0 && base.begin()->first.dx == 0;
            if (!pure_h) fail("only h may carry a negative exponent", op);
            if (!syms_.allow_negative_h && n != 0) fail("negative powers of h are not allowed here", e);
            RawKey k;
            k.h = -n;
            return RawValue{{k, Rational(1)}};
        }
        RawValue r{{RawKey{}, Rational(1)}};
        for (int i = 0; i < n; ++i) r = mul(r, base, op);
        return r;
    }

    std::vector<Token> t_;
    std::size_t p_ = 0;
    SymbolTable syms_;
};

inline SourcePos pos_of(const std::vector<Token>& toks) { return toks.front().pos; }

inline RawValue parse_raw(std::string_view text, const SymbolTable& syms, SourcePos start) {
    auto toks = Lexer(text, start).tokens();
    SourcePos at = pos_of(toks);
    if (toks.front().kind == Token::End) throw ParseError("empty expression", at.line, at.column);
    return ExprParser(std::move(toks), syms).parse_all();
}

inline Poly raw_to_poly(const RawValue& v, int dim) {
    Poly p(dim);
    for (const auto& [k, c] : v) p.add_term(k.x, c);
    return p;
}

inline StarFunction raw_to_star(const RawValue& v, const ChartPtr& ctx, SourcePos at) {
    std::map<int, Poly> parts;
    for (const auto& [k, c] : v) {
        auto it = parts.try_emplace(k.h, Poly(ctx->dim())).first;
        it->second.add_term(k.x, c);
    }
    StarFunction f(ctx);
    for (const auto& [l, p] : parts) {
        if (p.is_zero()) continue;
        if (l > f.max_power())
            throw ParseError("h-order overflow: h^" + std::to_string(l) + " exceeds h^" + std::to_string(f.max_power()) +
                                 " at truncation order " + std::to_string(ctx->order()),
                             at.line, at.column);
        f.add(l, p);
    }
    return f;
}

}  // namespace detail

/// Polynomial in x1..x{dim}, e.g. `2*x1^2*x2 - 1/3`.
inline Poly parse_poly(std::string_view text, int dim, SourcePos start = {}) {
    SymbolTable syms;
    syms.dim = dim;
    return detail::raw_to_poly(detail::parse_raw(text, syms, start), dim);
}

/// Series p0 + p1*h + ... in C[x][[h]]; powers beyond floor(N/2) are rejected.
inline StarFunction parse_star_function(std::string_view text, const ChartPtr& ctx, SourcePos start = {}) {
    SymbolTable syms;
    syms.dim = ctx->dim();
    syms.allow_h = true;
    return detail::raw_to_star(detail::parse_raw(text, syms, start), ctx, start);
}

/// Weyl form in x, y, dx and h (negative h-powers allowed when the term stays
/// in W+); terms above the chart's truncation order are rejected.
inline WeylForm parse_weyl(std::string_view text, const ChartPtr& ctx, SourcePos start = {}) {
    SymbolTable syms;
    syms.dim = ctx->dim();
    syms.allow_h = true;
    syms.allow_negative_h = true;
    syms.allow_y_dx = true;
    auto v = detail::parse_raw(text, syms, start);
    std::map<WeylKey, Poly, WeylKeyLess> parts;
    for (const auto& [k, c] : v) {
        WeylKey wk{k.y, k.dx, k.h};
        auto it = parts.try_emplace(wk, Poly(ctx->dim())).first;
        it->second.add_term(k.x, c);
    }
    WeylForm a(ctx);
    for (const auto& [k, p] : parts) {
        if (p.is_zero()) continue;
        if (k.total_degree() < 0)
            throw ParseError("term outside W+: y-degree + 2*(h-power) is negative", start.line, start.column);
        if (k.total_degree() > ctx->order())
            throw ParseError("term of total degree " + std::to_string(k.total_degree()) +
                                 " exceeds truncation order " + std::to_string(ctx->order()),
                             start.line, start.column);
        a.add_term(k, p);
    }
    return a;
}

/// Cross product element `f * e1*e2 + g * e2 + ...`, coefficients before
/// generators. Words out of normal order are normalized through `cp` when
/// given and rejected otherwise.
inline CrossElement parse_cross(std::string_view text, const ChartPtr& ctx, const std::vector<std::string>& names,
                                const CrossProduct* cp = nullptr, SourcePos start = {}) {
    SymbolTable syms;
    syms.dim = ctx->dim();
    syms.allow_h = true;
    syms.generators = names;
    auto v = detail::parse_raw(text, syms, start);
    std::map<Word, detail::RawValue, WordLess> by_word;
    for (const auto& [k, c] : v) {
        detail::RawKey coef = k;
        coef.word.clear();
        detail::raw_add(by_word[k.word], coef, c);
    }
    const ChartPtr& fctx = cp ? cp->ctx() : ctx;
    CrossElement out(fctx);
    for (const auto& [w, raw] : by_word) {
        StarFunction f = detail::raw_to_star(raw, fctx, start);
        if (is_normal(w)) {
            out.add(w, f);
        } else if (cp) {
            out += cp->mul(f, cp->normalize(w, RewriteStrategy::Leftmost));
        } else {
            throw ParseError("monomial is not in normal order", start.line, start.column);
        }
    }
    return out;
}

}  // namespace fedq
