#pragma once

#include <cstdint>
#include <optional>
#include <sstream>

#include "text.hpp"

namespace fedq {

/// A validated problem: chart, connection, named fields and an optional
/// Lie algebra action.
///
/// Grammar, one statement per line, `#` starts a comment:
///
///     dim 2
///     order 8
///     seed 42
///     omega 1 2 = 1              # omega_ij, antisymmetry implied
///     gamma 1 1 1 = x2           # Gamma_ijk, installed at every permutation
///     field Y = [x1, -x2]        # components X^1 .. X^dim
///     lie e1 e2                  # basis names of g
///     bracket e1 e2 = e1         # [e1, e2] as a rational combination
///     action e2 = Y              # field name or inline [..]
///
/// `dim`, `order`, `seed` and `omega` may appear anywhere; indices are 1-based.
struct ProblemFile {
    int dim = 2;
    int order = 6;
    std::uint64_t seed = 1;
    std::optional<RationalMatrix> omega;
    ChartPtr chart;
    SymplecticConnection connection{Chart::standard(1, 0)};
    std::vector<std::string> field_names;
    std::vector<SymplecticVectorField> fields;
    std::optional<LieAction> action;

    const SymplecticVectorField& field(const std::string& name) const {
        for (std::size_t i = 0; i < field_names.size(); ++i)
            if (field_names[i] == name) return fields[i];
        throw InvalidInput("unknown field '" + name + "'");
    }
};

namespace detail {

struct Line {
    int number;
    std::vector<Token> toks;
};

[[noreturn]] inline void fail_at(const Token& t, const std::string& msg) {
    throw ParseError(msg, t.pos.line, t.pos.column);
}

/// Tokens [b, e) of a line followed by an End marker.
inline std::vector<Token> slice(const std::vector<Token>& toks, std::size_t b, std::size_t e) {
    std::vector<Token> out(toks.begin() + static_cast<std::ptrdiff_t>(b), toks.begin() + static_cast<std::ptrdiff_t>(e));
    out.push_back({Token::End, "", toks[e].pos});
    return out;
}

inline RawValue parse_tokens(const std::vector<Token>& toks, std::size_t b, std::size_t e, const SymbolTable& syms) {
    if (b >= e) fail_at(toks[e], "expected an expression");
    return ExprParser(slice(toks, b, e), syms).parse_all();
}

inline int parse_int(const Token& t, const std::string& what) {
    if (t.kind != Token::Number || t.text.size() > 6) fail_at(t, "expected " + what);
    return std::stoi(t.text);
}

inline int parse_index(const Token& t, int dim) {
    int i = parse_int(t, "an index");
    if (i < 1 || i > dim) fail_at(t, "index " + t.text + " out of range 1.." + std::to_string(dim));
    return i - 1;
}

inline void expect_op(const std::vector<Token>& toks, std::size_t i, const std::string& op) {
    if (toks[i].kind != Token::Op || toks[i].text != op) fail_at(toks[i], "expected '" + op + "'");
}

inline bool is_reserved(const std::string& s) {
    if (s == "h") return true;
    for (std::string_view p : {"dx", "x", "y"})
        if (s.size() > p.size() && s.compare(0, p.size(), p) == 0 &&
            std::all_of(s.begin() + static_cast<std::ptrdiff_t>(p.size()), s.end(),
                        [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            return true;
    return false;
}

inline const Token& name_token(const std::vector<Token>& toks, std::size_t i) {
    if (toks[i].kind != Token::Ident) fail_at(toks[i], "expected a name");
    if (is_reserved(toks[i].text)) fail_at(toks[i], "'" + toks[i].text + "' is reserved for a coordinate symbol");
    return toks[i];
}

/// `[p1, ..., pd]` spanning tokens [b, e).
inline SymplecticVectorField parse_field_tokens(const std::vector<Token>& toks, std::size_t b, std::size_t e,
                                                const ChartPtr& chart) {
    expect_op(toks, b, "[");
    if (e == 0 || toks[e - 1].kind != Token::Op || toks[e - 1].text != "]") fail_at(toks[e], "expected ']'");
    SymbolTable syms;
    syms.dim = chart->dim();
    std::vector<Poly> comps;
    std::size_t start = b + 1;
    int depth = 0;
    for (std::size_t i = b + 1; i < e; ++i) {
        const Token& t = toks[i];
        bool close = i == e - 1;
        if (t.kind == Token::Op && t.text == "(") ++depth;
        if (t.kind == Token::Op && t.text == ")") --depth;
        if (close || (depth == 0 && t.kind == Token::Op && t.text == ",")) {
            comps.push_back(raw_to_poly(parse_tokens(toks, start, i, syms), syms.dim));
            start = i + 1;
        }
    }
    if (static_cast<int>(comps.size()) != chart->dim())
        fail_at(toks[b], "field needs " + std::to_string(chart->dim()) + " components, got " +
                             std::to_string(comps.size()));
    try {
        return SymplecticVectorField::check(chart, std::move(comps));
    } catch (const InvalidInput& err) {
        fail_at(toks[b], err.what());
    }
}

}  // namespace detail

/// Parses and validates a problem. `order_override` replaces the file's
/// truncation order; `seed_override` its seed.
inline ProblemFile parse_problem(std::string_view text, std::optional<int> order_override = std::nullopt,
                                 std::optional<std::uint64_t> seed_override = std::nullopt) {
    using namespace detail;
    std::vector<Line> lines;
    {
        int number = 1;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t nl = text.find('\n', pos);
            std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            std::size_t hash = raw.find('#');
            if (hash != std::string_view::npos) raw = raw.substr(0, hash);
            auto toks = Lexer(raw, SourcePos{number, 1}).tokens();
            if (toks.size() > 1) lines.push_back({number, std::move(toks)});
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
            ++number;
        }
    }

    ProblemFile pf;
    std::vector<std::pair<const Line*, std::size_t>> omega_lines;
    // Header pass: dimension, order, seed and omega.
    for (const Line& ln : lines) {
        const auto& t = ln.toks;
        if (t[0].kind != Token::Ident) fail_at(t[0], "expected a keyword");
        const std::string& kw = t[0].text;
        if (kw == "dim" || kw == "order" || kw == "seed") {
            if (t.size() != 3) fail_at(t[std::min<std::size_t>(2, t.size() - 1)], kw + " takes one integer");
            if (kw == "seed") {
                if (t[1].kind != Token::Number || t[1].text.size() > 19) fail_at(t[1], "expected an integer seed");
                pf.seed = std::stoull(t[1].text);
                continue;
            }
            int v = parse_int(t[1], "an integer");
            if (kw == "dim") {
                if (v < 2 || v % 2 != 0 || v > kMaxVars) fail_at(t[1], "dim must be even and in 2..8");
                pf.dim = v;
            } else {
                if (v < 0 || v > 64) fail_at(t[1], "order must be in 0..64");
                pf.order = v;
            }
        } else if (kw == "omega") {
            omega_lines.push_back({&ln, 0});
        } else if (kw != "gamma" && kw != "field" && kw != "lie" && kw != "bracket" && kw != "action") {
            fail_at(t[0], "unknown keyword '" + kw + "'");
        }
    }
    if (order_override) pf.order = *order_override;
    if (seed_override) pf.seed = *seed_override;

    if (!omega_lines.empty()) {
        RationalMatrix w(pf.dim);
        SymbolTable syms;
        syms.dim = pf.dim;
        for (auto [ln, unused] : omega_lines) {
            const auto& t = ln->toks;
            if (t.size() < 6) fail_at(t.back(), "expected 'omega i j = value'");
            int i = parse_index(t[1], pf.dim), j = parse_index(t[2], pf.dim);
            expect_op(t, 3, "=");
            auto v = parse_tokens(t, 4, t.size() - 1, syms);
            if (!raw_is_constant(v)) fail_at(t[4], "omega entries must be constants");
            if (i == j && raw_constant(v) != 0) fail_at(t[1], "omega must vanish on the diagonal");
            w(i, j) = raw_constant(v);
            w(j, i) = -raw_constant(v);
        }
        try {
            pf.chart = Chart::make(w, pf.order);
        } catch (const Error& err) {
            fail_at(omega_lines.front().first->toks[0], err.what());
        }
        pf.omega = w;
    } else {
        pf.chart = Chart::standard(pf.dim / 2, pf.order);
    }

    SymbolTable poly_syms;
    poly_syms.dim = pf.dim;
    std::vector<ConnectionEntry> entries;
    std::map<std::array<int, 3>, Poly> installed;
    std::vector<std::string> gen_names;
    const Token* lie_tok = nullptr;
    std::vector<StructureConstant> consts;
    std::map<std::pair<int, int>, const Token*> bracket_seen;
    std::vector<std::optional<SymplecticVectorField>> images;
    std::vector<const Token*> action_toks;
    std::vector<const Token*> gen_toks;

    auto check_fresh = [&](const Token& t) {
        for (const auto& n : pf.field_names)
            if (n == t.text) fail_at(t, "name '" + t.text + "' is already a field");
        for (const auto& n : gen_names)
            if (n == t.text) fail_at(t, "name '" + t.text + "' is already a Lie algebra generator");
    };
    auto gen_index = [&](const Token& t) {
        if (t.kind != Token::Ident) fail_at(t, "expected a generator name");
        for (std::size_t g = 0; g < gen_names.size(); ++g)
            if (gen_names[g] == t.text) return static_cast<int>(g);
        fail_at(t, "unknown generator '" + t.text + "'");
    };

    for (const Line& ln : lines) {
        const auto& t = ln.toks;
        const std::size_t end = t.size() - 1;
        const std::string& kw = t[0].text;
        if (kw == "gamma") {
            if (end < 6) fail_at(t[end], "expected 'gamma i j k = poly'");
            int i = parse_index(t[1], pf.dim), j = parse_index(t[2], pf.dim), k = parse_index(t[3], pf.dim);
            expect_op(t, 4, "=");
            Poly v = raw_to_poly(parse_tokens(t, 5, end, poly_syms), pf.dim);
            std::array<int, 3> key{i, j, k};
            std::sort(key.begin(), key.end());
            auto [it, fresh] = installed.try_emplace(key, v);
            if (!fresh && !(it->second == v))
                fail_at(t[1], "symmetry conflict at Gamma_" + std::to_string(key[0] + 1) + std::to_string(key[1] + 1) +
                                  std::to_string(key[2] + 1) + ": " + it->second.str() + " vs " + v.str());
            entries.push_back({i, j, k, v});
        } else if (kw == "field") {
            if (end < 4) fail_at(t[end], "expected 'field NAME = [..]'");
            const Token& name = name_token(t, 1);
            check_fresh(name);
            expect_op(t, 2, "=");
            pf.fields.push_back(parse_field_tokens(t, 3, end, pf.chart));
            pf.field_names.push_back(name.text);
        } else if (kw == "lie") {
            if (lie_tok) fail_at(t[0], "Lie algebra already declared");
            if (end < 2) fail_at(t[end], "expected generator names");
            lie_tok = &t[0];
            for (std::size_t i = 1; i < end; ++i) {
                const Token& name = name_token(t, i);
                check_fresh(name);
                gen_names.push_back(name.text);
                gen_toks.push_back(&name);
            }
            images.assign(gen_names.size(), std::nullopt);
            action_toks.assign(gen_names.size(), nullptr);
        } else if (kw == "bracket") {
            if (!lie_tok) fail_at(t[0], "bracket before 'lie'");
            if (end < 5) fail_at(t[end], "expected 'bracket a b = combination'");
            int a = gen_index(t[1]), b = gen_index(t[2]);
            expect_op(t, 3, "=");
            if (a == b) fail_at(t[2], "[" + t[1].text + ", " + t[2].text + "] is zero by antisymmetry");
            auto key = std::minmax(a, b);
            if (bracket_seen.count(key)) fail_at(t[1], "bracket of this pair already given");
            bracket_seen[key] = &t[1];
            SymbolTable syms;
            syms.dim = pf.dim;
            syms.generators = gen_names;
            auto v = parse_tokens(t, 4, end, syms);
            for (const auto& [k, c] : v) {
                if (k.word.size() != 1 || k.x.total() != 0)
                    fail_at(t[4], "bracket must be a rational combination of generators");
                consts.push_back({a, b, k.word[0], c});
                consts.push_back({b, a, k.word[0], -c});
            }
        } else if (kw == "action") {
            if (!lie_tok) fail_at(t[0], "action before 'lie'");
            if (end < 4) fail_at(t[end], "expected 'action e = FIELD'");
            int g = gen_index(t[1]);
            expect_op(t, 2, "=");
            if (images[static_cast<std::size_t>(g)]) fail_at(t[1], "action of '" + t[1].text + "' already given");
            if (t[3].kind == Token::Op && t[3].text == "[") {
                images[static_cast<std::size_t>(g)] = parse_field_tokens(t, 3, end, pf.chart);
            } else {
                if (end != 4 || t[3].kind != Token::Ident) fail_at(t[3], "expected a field name or [..]");
                bool found = false;
                for (std::size_t f = 0; f < pf.field_names.size(); ++f)
                    if (pf.field_names[f] == t[3].text) {
                        images[static_cast<std::size_t>(g)] = pf.fields[f];
                        found = true;
                    }
                if (!found) fail_at(t[3], "unknown field '" + t[3].text + "'");
            }
            action_toks[static_cast<std::size_t>(g)] = &t[0];
        }
    }

    pf.connection = SymplecticConnection::from_entries(pf.chart, entries);

    if (lie_tok) {
        LieAlgebra alg;
        try {
            alg = validate_lie(gen_names, consts);
        } catch (const InvalidInput& err) {
            fail_at(bracket_seen.empty() ? *lie_tok : *bracket_seen.begin()->second, err.what());
        }
        std::vector<SymplecticVectorField> imgs;
        for (std::size_t g = 0; g < images.size(); ++g) {
            if (!images[g]) fail_at(*gen_toks[g], "no action given for '" + gen_names[g] + "'");
            imgs.push_back(*images[g]);
        }
        try {
            pf.action = validate_action(alg, imgs);
        } catch (const InvalidInput& err) {
            // Blame the bracket line of the first failing pair, else its action line.
            const Token* at = lie_tok;
            for (int i = 0; i < alg.dim() && at == lie_tok; ++i)
                for (int j = i + 1; j < alg.dim() && at == lie_tok; ++j) {
                    SymplecticVectorField rhs(pf.chart);
                    for (int k = 0; k < alg.dim(); ++k)
                        if (alg.c(i, j, k) != 0) rhs += alg.c(i, j, k) * imgs[static_cast<std::size_t>(k)];
                    if (field_bracket(imgs[static_cast<std::size_t>(i)], imgs[static_cast<std::size_t>(j)]) == rhs) continue;
                    auto b = bracket_seen.find({i, j});
                    at = b != bracket_seen.end() ? b->second : action_toks[static_cast<std::size_t>(j)];
                }
            fail_at(*at, err.what());
        }
    }
    return pf;
}

/// Renders a problem back to the line format; parse_problem inverts it.
inline std::string render_problem(const ProblemFile& pf) {
    std::ostringstream os;
    os << "dim " << pf.dim << "\norder " << pf.order << "\nseed " << pf.seed << "\n";
    if (pf.omega)
        for (int i = 0; i < pf.dim; ++i)
            for (int j = i + 1; j < pf.dim; ++j) {
                Rational v = pf.chart->omega(i, j);
                if (v != 0) os << "omega " << i + 1 << " " << j + 1 << " = " << v.get_str() << "\n";
            }
    const auto& conn = pf.connection;
    for (int i = 0; i < pf.dim; ++i)
        for (int j = i; j < pf.dim; ++j)
            for (int k = j; k < pf.dim; ++k)
                if (!conn.lower(i, j, k).is_zero())
                    os << "gamma " << i + 1 << " " << j + 1 << " " << k + 1 << " = " << conn.lower(i, j, k).str() << "\n";
    for (std::size_t f = 0; f < pf.fields.size(); ++f) os << "field " << pf.field_names[f] << " = " << pf.fields[f].str() << "\n";
    if (pf.action) {
        const LieAlgebra& alg = pf.action->algebra();
        os << "lie";
        for (const auto& n : alg.names()) os << " " << n;
        os << "\n";
        for (int i = 0; i < alg.dim(); ++i)
            for (int j = i + 1; j < alg.dim(); ++j) {
                std::string rhs;
                for (int k = 0; k < alg.dim(); ++k) {
                    Rational c = alg.c(i, j, k);
                    if (c == 0) continue;
                    if (!rhs.empty()) rhs += " + ";
                    rhs += "(" + c.get_str() + ")*" + alg.name(k);
                }
                if (!rhs.empty()) os << "bracket " << alg.name(i) << " " << alg.name(j) << " = " << rhs << "\n";
            }
        for (int i = 0; i < alg.dim(); ++i) os << "action " << alg.name(i) << " = " << pf.action->image(i).str() << "\n";
    }
    return os.str();
}

}  // namespace fedq
