#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <functional>
#include <sstream>

#include "support.hpp"

using namespace fedq;
using namespace fedq::testing;

namespace {

std::string parse_error(const std::function<void()>& f) {
    try {
        f();
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("polynomial parsing") {
    CHECK(P("(x1 + x2)^2") == P("x1^2 + 2*x1*x2 + x2^2"));
    CHECK(P("x1/2 - -x2") == P("1/2*x1 + x2"));
    CHECK(P("2^3*x1") == P("8*x1"));
    CHECK(P("x4", 4) == X1(4).diff(0) * Poly::variable(4, 3));
    CHECK(parse_error([] { P("x1 +"); }) == "1:5: unexpected end of expression");
    CHECK(parse_error([] { P("x3"); }) == "1:1: index of 'x3' out of range 1..2");
    CHECK(parse_error([] { P("x1/x2"); }) == "1:3: divisor must be a nonzero constant");
    CHECK(parse_error([] { P("x1 $ 2"); }) == "1:4: unexpected character '$'");
    CHECK(parse_error([] { P("h*x1"); }) == "1:1: 'h' is not allowed in a polynomial");
    CHECK(parse_error([] { P(""); }).find("empty expression") != std::string::npos);
}

TEST_CASE("series and forms parsing") {
    auto fc = Chart::standard(1, 8);
    CHECK(parse_error([] { parse_star_function("h^5*x1", Chart::standard(1, 8)); }) ==
          "1:1: h-order overflow: h^5 exceeds h^4 at truncation order 8");
    CHECK(parse_star_function("(x1 + h)^2", fc).str() == "x1^2 + 2*x1*h + h^2");
    CHECK(parse_weyl("y1*h^-1*y2", fc).str() == parse_weyl("h^-1*y1*y2", fc).str());
    CHECK_THROWS_AS(parse_weyl("y1*h^-1", fc), ParseError);
    CHECK_THROWS_AS(parse_weyl("y1^9", fc), ParseError);
    CHECK_THROWS_AS(parse_weyl("x1^2*h^-1", fc), ParseError);
    CHECK(parse_weyl("dx2*dx1", fc) == Rational(-1) * parse_weyl("dx1*dx2", fc));
    CHECK(parse_weyl("dx1*dx1", fc).is_zero());
}

TEST_CASE("cross element parsing") {
    auto fc = Chart::standard(1, 8);
    std::vector<std::string> names{"e1", "e2"};
    CHECK(parse_cross("x1*e1*e2 + h*e2", fc, names).str(names) == "h * e2 + x1 * e1*e2");
    CHECK(parse_error([&] { parse_cross("e1*x1", fc, names); }) == "1:3: coefficients must precede generators");
    CHECK_THROWS_AS(parse_cross("e2*e1", fc, names), ParseError);
    CHECK_THROWS_AS(parse_cross("e3", fc, names), ParseError);
}

TEST_CASE("printers and parsers round trip") {
    auto c = Chart::standard(1, 8);
    Sampler rs(600);
    std::vector<std::string> names{"a", "b"};
    for (int s = 0; s < 20; ++s) {
        Poly p = rs.poly(4, 4, 5);
        CHECK(parse_poly(p.str(), 4) == p);
        StarFunction f = rs.star_function(c, 3, 4);
        CHECK(parse_star_function(f.str(), c) == f);
        WeylForm a = rs.form(c, 8, 6, 2, 2, true);
        CHECK(parse_weyl(a.str(), c) == a);
        CrossElement u(c);
        u.add(Word{0, 1}, rs.star_function(c, 2, 2));
        u.add(Word{1}, rs.star_function(c, 2, 2));
        u.add(Word{}, rs.star_function(c, 2, 2));
        CHECK(parse_cross(u.str(names), c, names) == u);
    }
}

TEST_CASE("problem files: bundled samples parse and round trip") {
    for (const char* name : {"flat", "curved", "cross"}) {
        std::ifstream in(std::string(FEDQ_PROBLEMS_DIR) + "/" + name + ".fedq");
        REQUIRE(in);
        std::stringstream ss;
        ss << in.rdbuf();
        ProblemFile pf = parse_problem(ss.str());
        std::string r = render_problem(pf);
        CHECK(render_problem(parse_problem(r)) == r);
    }
}

TEST_CASE("problem files: overrides and defaults") {
    ProblemFile pf = parse_problem("order 8\nseed 3\n", 10, 9);
    CHECK(pf.order == 10);
    CHECK(pf.seed == 9);
    ProblemFile def = parse_problem("");
    CHECK(def.dim == 2);
    CHECK(def.order == 6);
    CHECK(def.connection.is_flat());
    ProblemFile four = parse_problem("dim 4\nfield X = [x3, 0, -x1, 0]\n");
    CHECK(four.field("X").dim() == 4);
}

TEST_CASE("problem files: positioned errors") {
    auto err = [](const std::string& text) { return parse_error([&] { parse_problem(text); }); };
    CHECK(err("dim 2\ngamma 1 1 2 = x1\ngamma 1 2 1 = x2\n") == "3:7: symmetry conflict at Gamma_112: x1 vs x2");
    CHECK(err("dim 3\n") == "1:5: dim must be even and in 2..8");
    CHECK(err("field x1 = [1, 0]\n") == "1:7: 'x1' is reserved for a coordinate symbol");
    CHECK(err("field X = [x1, 0]\n").rfind("1:11:", 0) == 0);
    CHECK(err("frobnicate 3\n") == "1:1: unknown keyword 'frobnicate'");
    CHECK(err("gamma 1 1 3 = x1\n") == "1:11: index 3 out of range 1..2");
    CHECK(err("field A = [1, 0]\nlie e1 e2\naction e1 = A\n") == "2:8: no action given for 'e2'");
    CHECK(err("field A = [1, 0]\nfield B = [0, 1]\nlie e1 e2\nbracket e1 e2 = e1\naction e1 = A\naction e2 = B\n")
              .rfind("4:", 0) == 0);
    CHECK(err("field A = [1, 0]\nfield A = [0, 1]\n").find("already") != std::string::npos);
    CHECK(err("field A = [1, 0]\naction e1 = A\n") == "2:1: action before 'lie'");
}

TEST_CASE("problem files: symmetrization and symplectic fields") {
    ProblemFile pf = parse_problem("gamma 1 1 2 = x2\nfield X = [x1, -x2]\n");
    const auto& conn = pf.connection;
    CHECK(conn.lower(0, 0, 1) == X2());
    CHECK(conn.lower(0, 1, 0) == X2());
    CHECK(conn.lower(1, 0, 0) == X2());
    CHECK(conn.lower(0, 0, 0).is_zero());
    CHECK(pf.field("X") == hyperbolic(pf.chart));
    CHECK_THROWS_AS(pf.field("Q"), InvalidInput);
}

TEST_CASE("star output re-parses on the curved fixture") {
    ProblemFile pf = parse_problem("order 8\ngamma 1 1 1 = x2\n");
    auto sol = solve_r(pf.connection, pf.order);
    const auto& fc = sol->function_ctx();
    Sampler rs(610);
    for (int s = 0; s < 5; ++s) {
        StarFunction p = star(rs.star_function(fc, 3, 1), rs.star_function(fc, 3, 1), *sol);
        CHECK(parse_star_function(p.str(), fc) == p);
    }
}

TEST_CASE("verify report is deterministic and line oriented") {
    ProblemFile pf = parse_problem("order 4\nseed 17\n");
    VerifyOptions opts;
    opts.suite = "weyl";
    VerifyReport a = verify(pf, opts), b = verify(pf, opts);
    CHECK(a.text() == b.text());
    CHECK(a.ok());
    CHECK(a.text().rfind("seed 17 order 4 suite weyl\n", 0) == 0);
    CHECK(a.text().find("PASS weyl.associativity") != std::string::npos);
    VerifyReport bad = a;
    bad.checks.push_back({"weyl.synthetic", false, "forced"});
    CHECK_FALSE(bad.ok());
    CHECK(bad.text().find("FAIL weyl.synthetic") != std::string::npos);
    CHECK_THROWS_AS(verify(pf, VerifyOptions{"nope", 1}), InvalidInput);
}
